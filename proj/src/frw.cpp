#include "qgrav/frw.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "qgrav/calculus.hpp"
#include "qgrav/error.hpp"
#include "qgrav/numeric.hpp"
#include "qgrav/simplify.hpp"

namespace qgrav {

namespace {

void require_polar(const Chart& chart, const char* who) {
    if (chart.dim() != 4 || chart.coord(0) != "r" || chart.coord(1) != "theta" ||
        chart.coord(2) != "phi" || chart.coord(3) != "t")
        throw SpecError(std::string(who) + ": polar chart (r, theta, phi, t) required");
}

}  // namespace

MetricTensor frw_metric(const Expr& scale_factor, const Expr& curvature, const Chart& chart) {
    require_polar(chart, "frw_metric");
    for (const auto& s : free_symbols(scale_factor))
        if (s == "r" || s == "theta" || s == "phi")
            throw SpecError("frw_metric: scale factor must depend on t only");

    Expr r = symbol("r");
    Expr s2 = pow_int(scale_factor, 2);
    Expr sin2 = pow_int(call(Fn::Sin, symbol("theta")), 2);
    Expr g_rr = simplify(s2 / (integer(1) - curvature * pow_int(r, 2)));
    Expr g_thth = simplify(s2 * pow_int(r, 2));
    Expr g_phph = simplify(s2 * pow_int(r, 2) * sin2);
    Expr g_tt = simplify(-pow_int(chart.light_speed(), 2));
    return MetricTensor::diagonal(chart, {g_rr, g_thth, g_phph, g_tt});
}

FrwDecomposition decompose(const MetricTensor& g) {
    require_polar(g.chart(), "decompose");
    const Expr& g_rr = g.at(0, 0);
    if (g_rr.is_zero()) throw NoRadialComponentError();

    Expr r = symbol("r");
    Expr sin2 = pow_int(call(Fn::Sin, symbol("theta")), 2);
    Expr c2 = pow_int(g.chart().light_speed(), 2);

    FrwDecomposition d;
    d.s_sq_from_theta = simplify(g.at(1, 1) / pow_int(r, 2));
    d.s_sq_from_phi = simplify(g.at(2, 2) / (pow_int(r, 2) * sin2));
    d.k_expr = simplify((integer(1) - d.s_sq_from_theta / g_rr) / pow_int(r, 2));
    d.tt_residual = simplify(g.at(3, 3) / (-c2) - integer(1));
    d.isotropy_residual = simplify(d.s_sq_from_theta - d.s_sq_from_phi);
    for (std::size_t mu = 0; mu < 4; ++mu)
        for (std::size_t nu = mu + 1; nu < 4; ++nu)
            d.offdiag.push_back(simplify(g.at(mu, nu)));
    return d;
}

Expr extract_k(const WaveFunction& w, MetricConvention convention) {
    return decompose(build_metric(w, convention)).k_expr;
}

namespace {

// bases of negative-exponent factors anywhere in the tree
void collect_denominators(const Expr& e, std::vector<Expr>& out) {
    switch (e.kind()) {
        case Kind::Product:
            for (const auto& f : e.kids()) {
                Expr ex = factor_exponent(f);
                if (ex.is_number() && ex.node().number.negative()) {
                    const Expr& base = factor_base(f);
                    if (std::find(out.begin(), out.end(), base) == out.end())
                        out.push_back(base);
                    collect_denominators(base, out);
                } else {
                    collect_denominators(f, out);
                }
            }
            return;
        case Kind::Power: {
            Expr ex = e.kids()[1];
            if (ex.is_number() && ex.node().number.negative()) {
                if (std::find(out.begin(), out.end(), e.kids()[0]) == out.end())
                    out.push_back(e.kids()[0]);
            }
            collect_denominators(e.kids()[0], out);
            return;
        }
        default:
            for (const auto& k : e.kids()) collect_denominators(k, out);
            return;
    }
}

struct RootScan {
    std::vector<double> roots;
};

RootScan scan_roots(const CompiledExpr& prog, double lo, double hi) {
    RootScan rs;
    constexpr int kSamples = 4096;
    const double span = hi - lo;
    const double eps = 1e-12 * std::max(1.0, span);
    double prev_x = lo;
    double prev_v = 0.0;
    bool prev_ok = false;
    for (int i = 0; i <= kSamples; ++i) {
        const double x = lo + span * i / kSamples;
        double v;
        try {
            const double pt[1] = {x};
            v = prog.eval(pt).real();
        } catch (const PoleError&) {
            prev_ok = false;
            continue;
        }
        if (std::abs(v) < eps) {
            if (rs.roots.empty() || std::abs(rs.roots.back() - x) > span / kSamples * 1.5)
                rs.roots.push_back(x);
            prev_ok = false;
            continue;
        }
        if (prev_ok && ((prev_v < 0) != (v < 0))) {
            double a = prev_x, b = x, fa = prev_v;
            for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
                const double m = 0.5 * (a + b);
                const double pt[1] = {m};
                const double fm = prog.eval(pt).real();
                if ((fa < 0) != (fm < 0)) b = m;
                else { a = m; fa = fm; }
            }
            rs.roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
        prev_ok = true;
    }
    return rs;
}

}  // namespace

SingularityReport classify_singularities(const Expr& k, const SingularityDomain& domain,
                                         const Binding& params) {
    Expr ks = simplify(k);
    for (const auto& s : free_symbols(ks)) {
        if (s == "r" || s == "theta") continue;
        if (!params.has(s))
            throw SpecError("classify_singularities: parameter '" + s + "' is unbound");
    }

    std::map<std::string, Expr> param_exprs;
    for (const auto& [name, v] : params.values()) param_exprs.emplace(name, floating(v.real()));

    std::vector<Expr> denoms;
    collect_denominators(ks, denoms);

    SingularityReport report;
    auto add_locus = [&](const Expr& constraint, const std::string& coord, double root) {
        for (const auto& l : report.loci)
            if (l.coordinate == coord && std::abs(l.position - root) < 1e-7) return;

        SingularLocus locus;
        locus.constraint = constraint;
        locus.coordinate = coord;
        locus.position = root;
        const double tol = 1e-9;
        const bool chart_degeneracy =
            (coord == "r" && std::abs(root) < tol) ||
            (coord == "theta" &&
             (std::abs(root) < tol || std::abs(root - std::numbers::pi) < tol));
        locus.classification =
            chart_degeneracy ? SingularityClass::Coordinate : SingularityClass::Physical;

        Binding witness = params;
        witness.bind_real(coord, root);
        if (coord != "r") witness.bind_real("r", 1.0);
        if (coord != "theta") witness.bind_real("theta", 1.0);
        locus.witness = witness;

        // |k| approaching the locus along its coordinate
        const double span = coord == "r" ? domain.r_hi - domain.r_lo
                                         : domain.theta_hi - domain.theta_lo;
        Binding probe = params;
        if (coord != "r") probe.bind_real("r", 1.0);
        if (coord != "theta") probe.bind_real("theta", 1.0);
        for (int j = 3; j <= 10; ++j) {
            const double off = std::abs(root) > 1e-6 ? std::abs(root) * std::pow(2.0, -j)
                                                     : span * std::pow(2.0, -j);
            double x = root + off;
            const double hi = coord == "r" ? domain.r_hi : domain.theta_hi;
            if (x > hi) x = root - off;
            try {
                locus.evidence.push_back(std::abs(eval(ks, probe.with(coord, x))));
            } catch (const PoleError&) {
                break;
            }
        }
        report.loci.push_back(std::move(locus));
    };

    for (const auto& base : denoms) {
        auto syms = free_symbols(base);
        bool has_r = syms.count("r") > 0;
        bool has_theta = syms.count("theta") > 0;
        if (has_r == has_theta) continue;  // constants or mixed factors: scan covers them
        const std::string coord = has_r ? "r" : "theta";
        const double lo = has_r ? domain.r_lo : domain.theta_lo;
        const double hi = has_r ? domain.r_hi : domain.theta_hi;
        Expr bound = substitute(base, param_exprs);
        CompiledExpr prog = CompiledExpr::compile(bound, {coord});
        for (double root : scan_roots(prog, lo, hi).roots) add_locus(base, coord, root);
    }

    // numeric confirmation pass over the open interior
    const bool uses_r = contains_symbol(ks, "r");
    const bool uses_theta = contains_symbol(ks, "theta");
    if (uses_r || uses_theta) {
        GridSpec spec;
        const double rd = domain.r_hi - domain.r_lo;
        const double td = domain.theta_hi - domain.theta_lo;
        if (uses_r)
            spec.axes.push_back({"r", domain.r_lo + rd * 1e-3, domain.r_hi, 128, false});
        if (uses_theta)
            spec.axes.push_back(
                {"theta", domain.theta_lo + td * 1e-3, domain.theta_hi, 128, false});
        if (!uses_r) spec.fixed.bind_real("r", 1.0);
        if (!uses_theta) spec.fixed.bind_real("theta", 1.0);
        for (const auto& [name, v] : params.values())
            if (name != "r" && name != "theta") spec.fixed.bind_real(name, v.real());
        for (const auto& cand : scan_singular_candidates(ks, spec, 1e4)) {
            if (cand.at_lower_edge || cand.at_upper_edge) {
                // an edge candidate only confirms a symbolic root on that edge;
                // growth continuing past the domain is not an in-domain locus
                continue;
            }
            add_locus(symbol(cand.axis) - floating(cand.position), cand.axis, cand.position);
        }
    }

    std::sort(report.loci.begin(), report.loci.end(),
              [](const SingularLocus& a, const SingularLocus& b) {
                  if (a.coordinate != b.coordinate) return a.coordinate < b.coordinate;
                  return a.position < b.position;
              });
    return report;
}

}  // namespace qgrav
