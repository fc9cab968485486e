#include "qgrav/metric.hpp"

#include <algorithm>
#include <cmath>

#include "qgrav/calculus.hpp"
#include "qgrav/error.hpp"
#include "qgrav/printer.hpp"
#include "qgrav/simplify.hpp"

namespace qgrav {

double SmallMatrix::max_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(a[i][j]));
    return m;
}

double SmallMatrix::max_abs_diff(const SmallMatrix& o) const {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(a[i][j] - o.a[i][j]));
    return m;
}

namespace {
std::size_t tri_index(std::size_t n, std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i + 1) / 2 + j;
}
}  // namespace

MetricTensor::MetricTensor(Chart chart)
    : chart_(std::move(chart)), comp_(chart_.dim() * (chart_.dim() + 1) / 2, integer(0)) {}

MetricTensor MetricTensor::diagonal(Chart chart, std::vector<Expr> diag) {
    MetricTensor g(std::move(chart));
    if (diag.size() != g.dim()) throw SpecError("diagonal metric: wrong number of components");
    for (std::size_t i = 0; i < diag.size(); ++i) g.set(i, i, std::move(diag[i]));
    return g;
}

const Expr& MetricTensor::at(std::size_t i, std::size_t j) const {
    return comp_[tri_index(dim(), i, j)];
}

void MetricTensor::set(std::size_t i, std::size_t j, Expr value) {
    comp_[tri_index(dim(), i, j)] = std::move(value);
}

MetricTensor build_metric(const WaveFunction& w, MetricConvention convention) {
    const Chart& chart = w.chart;
    if (!chart.time_index())
        throw SpecError("build_metric: chart must have a time coordinate");
    const std::size_t n = chart.dim();

    // D_mu Psi; the raw time derivative is kept and its 1/c scaling cancels
    // against the c^2 dt^2 line-element factor componentwise
    std::vector<Expr> deriv(n);
    for (std::size_t mu = 0; mu < n; ++mu)
        deriv[mu] = simplify(differentiate(w.psi, chart.coord(mu)));

    MetricTensor g(chart);
    for (std::size_t mu = 0; mu < n; ++mu) {
        for (std::size_t nu = mu; nu < n; ++nu) {
            Expr lhs = deriv[mu];
            if (convention == MetricConvention::Conjugated) lhs = call(Fn::Conj, lhs);
            Expr comp = re_part(lhs * deriv[nu]);
            if (chart.is_time(mu) && chart.is_time(nu)) comp = -comp;
            g.set(mu, nu, simplify(comp));
        }
    }
    return g;
}

namespace {

// "g * dx^2" / "g * dx*dy" with a split-off sign for the joined rendering
struct SignedTerm {
    bool negative;
    std::string body;
};

SignedTerm render_term(const Expr& comp, const std::string& differentials) {
    std::string s = to_string(comp);
    bool neg = false;
    if (!s.empty() && s[0] == '-') {
        neg = true;
        s.erase(0, 1);
    }
    if (s == "1") return {neg, differentials};
    if (comp.kind() == Kind::Sum) s = "(" + s + ")";
    return {neg, s + "*" + differentials};
}

void append_terms(std::string& out, const std::vector<SignedTerm>& terms) {
    bool first = true;
    for (const auto& t : terms) {
        if (first) {
            out += (t.negative ? "-" : "") + t.body;
            first = false;
        } else {
            out += (t.negative ? " - " : " + ") + t.body;
        }
    }
    if (first) out += "0";
}

}  // namespace

LineElement line_element(const MetricTensor& g) {
    const Chart& chart = g.chart();
    LineElement le;
    std::vector<SignedTerm> diag_terms, cross_terms_str;
    for (std::size_t mu = 0; mu < g.dim(); ++mu) {
        const Expr& comp = g.at(mu, mu);
        if (comp.is_zero()) continue;
        diag_terms.push_back(render_term(comp, "d" + chart.coord(mu) + "^2"));
    }
    for (std::size_t mu = 0; mu < g.dim(); ++mu) {
        for (std::size_t nu = mu + 1; nu < g.dim(); ++nu) {
            const Expr& comp = g.at(mu, nu);
            if (comp.is_zero()) continue;
            le.cross_terms.emplace_back(mu, nu, comp);
            cross_terms_str.push_back(render_term(
                integer(2) * comp, "d" + chart.coord(mu) + "*d" + chart.coord(nu)));
        }
    }
    le.diagonal_text = "ds^2 = ";
    append_terms(le.diagonal_text, diag_terms);
    le.text = "ds^2 = ";
    std::vector<SignedTerm> all = diag_terms;
    all.insert(all.end(), cross_terms_str.begin(), cross_terms_str.end());
    append_terms(le.text, all);
    return le;
}

SmallMatrix metric_at(const MetricTensor& g, const Binding& point) {
    Binding b = point;
    const Expr& c = g.chart().light_speed();
    if (c.kind() == Kind::Symbol && !b.has(c.node().name))
        b.bind_real(c.node().name, g.chart().light_speed_value());

    SmallMatrix m;
    m.n = g.dim();
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i; j < m.n; ++j) {
            const Complex v = eval(g.at(i, j), b);
            if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real())))
                throw Error("internal: metric component has imaginary residue " +
                            std::to_string(v.imag()));
            m(i, j) = v.real();
            m(j, i) = v.real();
        }
    }
    return m;
}

RankResult matrix_rank(const SmallMatrix& m, double tol) {
    const std::size_t n = m.n;
    const double threshold = tol * std::max(1e-300, m.max_abs());

    // Gauss-Jordan with partial pivoting, tracking pivot columns
    std::array<std::array<double, 8>, 4> a{};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);

    std::vector<int> pivot_col;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < n; ++col) {
        std::size_t best = row;
        for (std::size_t i = row + 1; i < n; ++i)
            if (std::abs(a[i][col]) > std::abs(a[best][col])) best = i;
        if (std::abs(a[best][col]) <= threshold) continue;
        std::swap(a[row], a[best]);
        const double p = a[row][col];
        for (std::size_t j = 0; j < n; ++j) a[row][j] /= p;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == row) continue;
            const double f = a[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[row][j];
        }
        pivot_col.push_back(static_cast<int>(col));
        ++row;
    }

    RankResult res;
    res.rank = static_cast<int>(pivot_col.size());
    for (std::size_t col = 0; col < n; ++col) {
        if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(col)) !=
            pivot_col.end())
            continue;
        std::array<double, 4> v{};
        v[col] = 1.0;
        for (std::size_t pr = 0; pr < pivot_col.size(); ++pr)
            v[static_cast<std::size_t>(pivot_col[pr])] = -a[pr][col];
        res.nullspace.push_back(v);
    }
    return res;
}

RankResult rank_at(const MetricTensor& g, const Binding& point, double tol) {
    return matrix_rank(metric_at(g, point), tol);
}

MetricTensor two_sphere_metric(const Expr& radius) {
    Expr a2 = pow_int(radius, 2);
    return MetricTensor::diagonal(Chart::two_sphere(),
                                  {a2, a2 * pow_int(call(Fn::Sin, symbol("theta")), 2)});
}

MetricTensor flat_spherical3_metric() {
    Expr r = symbol("r");
    return MetricTensor::diagonal(
        Chart::spatial3(),
        {integer(1), pow_int(r, 2), pow_int(r, 2) * pow_int(call(Fn::Sin, symbol("theta")), 2)});
}

MetricTensor minkowski_polar_metric(const Chart& chart) {
    Expr r = symbol("r");
    return MetricTensor::diagonal(
        chart, {integer(1), pow_int(r, 2),
                pow_int(r, 2) * pow_int(call(Fn::Sin, symbol("theta")), 2),
                -pow_int(chart.light_speed(), 2)});
}

}  // namespace qgrav
