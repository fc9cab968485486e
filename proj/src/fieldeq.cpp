#include "qgrav/fieldeq.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "qgrav/calculus.hpp"
#include "qgrav/error.hpp"
#include "qgrav/geometry.hpp"
#include "qgrav/simplify.hpp"

namespace qgrav {

void PhysicalParams::validate() const {
    if (!(rho > 0 && m > 0 && hbar > 0 && G > 0 && c > 0))
        throw SpecError("physical parameters must be strictly positive");
}

PhysicalParams params_from_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    PhysicalParams p;
    p.units = PhysicalParams::Units::SI;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq;
        double value;
        if (!(ls >> key)) continue;
        if (!(ls >> eq >> value) || eq != "=")
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        if (key == "rho") p.rho = value;
        else if (key == "m") p.m = value;
        else if (key == "hbar") p.hbar = value;
        else if (key == "G") p.G = value;
        else if (key == "c") p.c = value;
        else throw IoError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    p.validate();
    return p;
}

namespace {

Binding wavefunction_binding(const WaveFunction& w) {
    Binding b;
    for (const auto& [name, v] : w.params) b.bind_real(name, v);
    const Expr& c = w.chart.light_speed();
    if (c.kind() == Kind::Symbol && !b.has(c.node().name))
        b.bind_real(c.node().name, w.chart.light_speed_value());
    return b;
}

double effective_rmax(const WaveFunction& w, const InnerProductOptions& opts) {
    auto it = w.params.find("a0");
    const double scale = it == w.params.end() ? 1.0 : it->second;
    return opts.rmax_factor * scale;
}

}  // namespace

InnerProductResult inner_product(const Expr& a, const Expr& b, const WaveFunction& w, double t0,
                                 const InnerProductOptions& opts) {
    Binding params = wavefunction_binding(w);
    std::map<std::string, Expr> table;
    for (const auto& [name, v] : params.values()) table.emplace(name, floating(v.real()));
    table.emplace("t", floating(t0));

    Expr integrand = call(Fn::Conj, a) * b;
    Expr bound = simplify(substitute(integrand, table));

    if (opts.pointwise) {
        Binding pt = opts.point;
        const Complex v = eval(bound, pt);
        InnerProductResult res;
        res.value = v.real();
        res.imag_residue = std::abs(v.imag());
        return res;
    }

    CompiledExpr prog = CompiledExpr::compile(bound, {"r", "theta", "phi"});
    auto fn = [&](double r, double theta, double phi) {
        const double pt[3] = {r, theta, phi};
        return prog.eval(pt) * (r * r * std::sin(theta));
    };
    SphericalDomain dom;
    dom.r_lo = 0.0;
    dom.r_hi = effective_rmax(w, opts);
    ComplexQuadratureResult q = spherical_quadrature(fn, dom, opts.quad);

    InnerProductResult res;
    res.value = q.value.real();
    res.imag_residue = std::abs(q.value.imag());
    res.error = q.error;
    res.levels = q.levels;
    return res;
}

namespace {

// D_mu Psi with the time leg scaled by 1/c (consistent with build_metric)
Expr scaled_derivative(const WaveFunction& w, std::size_t mu, const PhysicalParams& p) {
    Expr d = differentiate(w.psi, w.chart.coord(mu));
    if (w.chart.is_time(mu)) d = d / floating(p.c);
    return simplify(d);
}

}  // namespace

double velocity_product(const WaveFunction& w, std::size_t mu, std::size_t nu,
                        const PhysicalParams& p, double t0, const InnerProductOptions& opts,
                        BracketMode mode) {
    p.validate();
    if (mu >= w.chart.dim() || nu >= w.chart.dim())
        throw SpecError("velocity_product: index out of range");
    Expr dmu = scaled_derivative(w, mu, p);
    Expr dnu = scaled_derivative(w, nu, p);
    const double imu = inner_product(dmu, dmu, w, t0, opts).value;
    const double inu = inner_product(dnu, dnu, w, t0, opts).value;
    const double hm = (p.hbar * p.hbar) / (p.m * p.m);
    const double bracket = mode == BracketMode::SqrtProduct ? std::sqrt(imu * inu) : imu * inu;
    return hm * bracket;
}

RhsResult field_equation_rhs(const WaveFunction& w, const PhysicalParams& p, double t0,
                             const InnerProductOptions& opts, BracketMode mode) {
    p.validate();
    RhsResult out;
    out.rhs.n = 4;

    std::array<double, 4> norms{};
    for (std::size_t mu = 0; mu < 4; ++mu) {
        Expr d = scaled_derivative(w, mu, p);
        out.derivative_norms[mu] = inner_product(d, d, w, t0, opts);
        norms[mu] = out.derivative_norms[mu].value;
    }
    out.psi_norm = inner_product(w.psi, w.psi, w, t0, opts);

    const double prefactor = -8.0 * std::numbers::pi * p.G / std::pow(p.c, 4) * p.rho;
    const double hm = (p.hbar * p.hbar) / (p.m * p.m);
    for (std::size_t mu = 0; mu < 4; ++mu) {
        for (std::size_t nu = 0; nu < 4; ++nu) {
            const double bracket = mode == BracketMode::SqrtProduct
                                       ? std::sqrt(norms[mu] * norms[nu])
                                       : norms[mu] * norms[nu];
            out.rhs(mu, nu) = prefactor * hm * bracket;
        }
    }
    return out;
}

SmallMatrix classical_dust_stress_energy(const PhysicalParams& p, const std::array<double, 4>& u) {
    p.validate();
    SmallMatrix t;
    t.n = 4;
    for (std::size_t mu = 0; mu < 4; ++mu)
        for (std::size_t nu = 0; nu < 4; ++nu) t(mu, nu) = p.rho * p.c * p.c * u[mu] * u[nu];
    return t;
}

FieldEquationReport field_equation_residual(const MetricTensor& g, const WaveFunction& w,
                                            const PhysicalParams& p,
                                            const std::vector<Binding>& points,
                                            const InnerProductOptions& opts, BracketMode mode) {
    p.validate();
    if (points.empty()) throw SpecError("field_equation_residual: at least one point required");

    FieldEquationReport report;
    report.params = p;

    TensorField G(g.chart(), {false, false});
    bool degenerate = false;
    std::string degenerate_msg;
    try {
        G = einstein_tensor(g);
    } catch (const DegenerateMetricError& e) {
        degenerate = true;
        degenerate_msg = e.what();
    }

    // the RHS integrals depend on t0 only; cache per distinct time
    std::map<double, RhsResult> rhs_cache;
    auto rhs_for = [&](double t0) -> const RhsResult& {
        auto it = rhs_cache.find(t0);
        if (it == rhs_cache.end())
            it = rhs_cache.emplace(t0, field_equation_rhs(w, p, t0, opts, mode)).first;
        return it->second;
    };

    bool any_ok = false;
    for (const auto& point : points) {
        FieldEquationPoint fp;
        fp.point = point;
        if (degenerate) {
            fp.failed = true;
            fp.diagnostic = degenerate_msg;
            report.points.push_back(std::move(fp));
            continue;
        }
        try {
            const double t0 = point.has("t") ? point.get("t").real() : 0.0;
            const RhsResult& rhs = rhs_for(t0);
            report.psi_norm = rhs.psi_norm;
            for (const auto& ip : rhs.derivative_norms) {
                report.quadrature_error = std::max(report.quadrature_error, ip.error);
                report.max_imag_residue = std::max(report.max_imag_residue, ip.imag_residue);
            }

            Binding b = point;
            const Expr& c = g.chart().light_speed();
            if (c.kind() == Kind::Symbol && !b.has(c.node().name))
                b.bind_real(c.node().name, p.c);

            fp.lhs.n = 4;
            for (std::size_t mu = 0; mu < 4; ++mu)
                for (std::size_t nu = 0; nu < 4; ++nu)
                    fp.lhs(mu, nu) = eval(G.at({mu, nu}), b).real();
            fp.rhs = rhs.rhs;
            fp.residual_max = fp.lhs.max_abs_diff(fp.rhs);
            any_ok = true;
        } catch (const Error& e) {
            fp.failed = true;
            fp.diagnostic = e.what();
        }
        report.points.push_back(std::move(fp));
    }
    if (!any_ok && !report.points.empty() && !degenerate)
        throw Error("field_equation_residual: every point failed: " +
                    report.points.front().diagnostic);
    return report;
}

}  // namespace qgrav
