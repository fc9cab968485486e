#include "qgrav/geometry.hpp"

#include <cmath>
#include <random>
#include <set>

#include "qgrav/calculus.hpp"
#include "qgrav/error.hpp"
#include "qgrav/simplify.hpp"

namespace qgrav {

TensorField::TensorField(Chart chart, std::vector<bool> variance)
    : chart_(std::move(chart)), variance_(std::move(variance)) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < variance_.size(); ++i) total *= chart_.dim();
    comp_.assign(total, integer(0));
}

std::size_t TensorField::flat(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != variance_.size()) throw SpecError("tensor index arity mismatch");
    std::size_t f = 0;
    for (std::size_t i : idx) {
        if (i >= chart_.dim()) throw SpecError("tensor index out of range");
        f = f * chart_.dim() + i;
    }
    return f;
}

Domain geometry_sample_domain(const Chart& chart) {
    Domain d;
    for (const auto& c : chart.coords()) {
        if (c == "r") d[c] = {{0.3, 2.5}};
        else if (c == "theta") d[c] = {{0.3, 2.8}};
        else if (c == "phi") d[c] = {{0.2, 6.0}};
        else if (c == "t") d[c] = {{0.2, 2.0}};
        else d[c] = {{0.5, 2.0}};
    }
    return d;
}

namespace {

// cofactor expansion; n <= 4 keeps this cheap
Expr determinant(const std::vector<std::vector<Expr>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    Expr det = integer(0);
    for (std::size_t j = 0; j < n; ++j) {
        if (m[0][j].is_zero()) continue;
        std::vector<std::vector<Expr>> minor(n - 1, std::vector<Expr>(n - 1));
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t cc = 0;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == j) continue;
                minor[i - 1][cc++] = m[i][c];
            }
        }
        Expr term = m[0][j] * determinant(minor);
        det = (j % 2 == 0) ? det + term : det - term;
    }
    return det;
}

std::vector<std::vector<Expr>> metric_grid(const MetricTensor& g) {
    const std::size_t n = g.dim();
    std::vector<std::vector<Expr>> m(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = g.at(i, j);
    return m;
}

int sample_rank(const MetricTensor& g) {
    // rank of the metric at a generic sampled point, reported with the error
    Binding b;
    std::mt19937_64 rng(kDefaultSeed);
    Domain dom = geometry_sample_domain(g.chart());
    std::set<std::string> syms;
    for (std::size_t i = 0; i < g.dim(); ++i)
        for (std::size_t j = i; j < g.dim(); ++j)
            for (const auto& s : free_symbols(g.at(i, j))) syms.insert(s);
    for (const auto& s : syms) {
        auto it = dom.find(s);
        const Interval iv = it == dom.end() ? Interval{0.5, 2.0} : it->second[0];
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        b.bind_real(s, iv.lo + (iv.hi - iv.lo) * u);
    }
    try {
        return rank_at(g, b).rank;
    } catch (const Error&) {
        return 0;
    }
}

}  // namespace

namespace {
Expr stage(const Expr& e, StageSimplify mode) {
    return mode == StageSimplify::On ? simplify(e) : e;
}
}  // namespace

TensorField inverse_metric(const MetricTensor& g, StageSimplify mode) {
    const std::size_t n = g.dim();
    auto m = metric_grid(g);
    Expr det = simplify(determinant(m));

    bool zero_det = det.is_zero();
    if (!zero_det) {
        try {
            zero_det = vanishes(det, geometry_sample_domain(g.chart()), 40, 1e-9);
        } catch (const InconclusiveError&) {
            zero_det = false;  // poles everywhere is not degeneracy evidence
        }
    }
    if (zero_det)
        throw DegenerateMetricError("metric determinant vanishes identically", sample_rank(g));

    TensorField inv(g.chart(), {true, true});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // adjugate entry: cofactor of (j, i)
            std::vector<std::vector<Expr>> minor(n - 1, std::vector<Expr>(n - 1));
            std::size_t rr = 0;
            for (std::size_t a = 0; a < n; ++a) {
                if (a == j) continue;
                std::size_t cc = 0;
                for (std::size_t b = 0; b < n; ++b) {
                    if (b == i) continue;
                    minor[rr][cc++] = m[a][b];
                }
                ++rr;
            }
            Expr cof = n == 1 ? integer(1) : determinant(minor);
            if ((i + j) % 2 == 1) cof = -cof;
            inv.set({i, j}, stage(cof / det, mode));
        }
    }
    return inv;
}

TensorField christoffel(const MetricTensor& g, StageSimplify mode) {
    const std::size_t n = g.dim();
    TensorField ginv = inverse_metric(g, mode);
    const auto& coords = g.chart().coords();

    // precompute metric derivatives d_k g_{ij}
    std::vector<std::vector<std::vector<Expr>>> dg(
        n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                dg[k][i][j] = differentiate(g.at(i, j), coords[k]);

    TensorField gamma(g.chart(), {true, false, false});
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t mu = 0; mu < n; ++mu) {
            for (std::size_t nu = mu; nu < n; ++nu) {
                Expr acc = integer(0);
                for (std::size_t s = 0; s < n; ++s) {
                    if (ginv.at({l, s}).is_zero()) continue;
                    Expr inner = dg[mu][s][nu] + dg[nu][s][mu] - dg[s][mu][nu];
                    acc = acc + ginv.at({l, s}) * inner;
                }
                Expr value = stage(rational(1, 2) * acc, mode);
                gamma.set({l, mu, nu}, value);
                gamma.set({l, nu, mu}, value);
            }
        }
    }
    return gamma;
}

TensorField riemann(const MetricTensor& g, StageSimplify mode) {
    const std::size_t n = g.dim();
    TensorField gamma = christoffel(g, mode);
    const auto& coords = g.chart().coords();

    TensorField R(g.chart(), {true, false, false, false});
    for (std::size_t rho = 0; rho < n; ++rho) {
        for (std::size_t sg = 0; sg < n; ++sg) {
            for (std::size_t mu = 0; mu < n; ++mu) {
                for (std::size_t nu = mu + 1; nu < n; ++nu) {
                    Expr acc = differentiate(gamma.at({rho, nu, sg}), coords[mu]) -
                               differentiate(gamma.at({rho, mu, sg}), coords[nu]);
                    for (std::size_t l = 0; l < n; ++l) {
                        acc = acc + gamma.at({rho, mu, l}) * gamma.at({l, nu, sg});
                        acc = acc - gamma.at({rho, nu, l}) * gamma.at({l, mu, sg});
                    }
                    Expr value = stage(acc, mode);
                    R.set({rho, sg, mu, nu}, value);
                    R.set({rho, sg, nu, mu}, stage(-value, mode));
                }
            }
        }
    }
    return R;
}

TensorField ricci(const MetricTensor& g, StageSimplify mode) {
    const std::size_t n = g.dim();
    TensorField R = riemann(g, mode);
    TensorField ric(g.chart(), {false, false});
    for (std::size_t mu = 0; mu < n; ++mu) {
        for (std::size_t nu = mu; nu < n; ++nu) {
            Expr acc = integer(0);
            for (std::size_t l = 0; l < n; ++l) acc = acc + R.at({l, mu, l, nu});
            Expr value = stage(acc, mode);
            ric.set({mu, nu}, value);
            ric.set({nu, mu}, value);
        }
    }
    return ric;
}

Expr scalar_curvature(const MetricTensor& g, StageSimplify mode) {
    const std::size_t n = g.dim();
    TensorField ginv = inverse_metric(g, mode);
    TensorField ric = ricci(g, mode);
    Expr acc = integer(0);
    for (std::size_t mu = 0; mu < n; ++mu)
        for (std::size_t nu = 0; nu < n; ++nu)
            acc = acc + ginv.at({mu, nu}) * ric.at({mu, nu});
    return stage(acc, mode);
}

TensorField einstein_tensor(const MetricTensor& g, StageSimplify mode) {
    const std::size_t n = g.dim();
    TensorField ric = ricci(g, mode);
    Expr R = scalar_curvature(g, mode);
    TensorField G(g.chart(), {false, false});
    for (std::size_t mu = 0; mu < n; ++mu) {
        for (std::size_t nu = mu; nu < n; ++nu) {
            Expr value = stage(ric.at({mu, nu}) - rational(1, 2) * R * g.at(mu, nu), mode);
            G.set({mu, nu}, value);
            G.set({nu, mu}, value);
        }
    }
    return G;
}

TensorField riemann_all_lower(const MetricTensor& g) {
    const std::size_t n = g.dim();
    TensorField R = riemann(g);
    TensorField low(g.chart(), {false, false, false, false});
    for (std::size_t rho = 0; rho < n; ++rho) {
        for (std::size_t sg = 0; sg < n; ++sg) {
            for (std::size_t mu = 0; mu < n; ++mu) {
                for (std::size_t nu = 0; nu < n; ++nu) {
                    Expr acc = integer(0);
                    for (std::size_t l = 0; l < n; ++l)
                        acc = acc + g.at(rho, l) * R.at({l, sg, mu, nu});
                    low.set({rho, sg, mu, nu}, simplify(acc));
                }
            }
        }
    }
    return low;
}

std::vector<DivergencePoint> covariant_divergence_einstein(const MetricTensor& g,
                                                           const std::vector<Binding>& points) {
    const std::size_t n = g.dim();
    const auto& coords = g.chart().coords();
    TensorField gamma = christoffel(g);
    TensorField ginv = inverse_metric(g);
    TensorField G = einstein_tensor(g);

    // G^{mn} = g^{ma} g^{nb} G_{ab}
    TensorField Gup(g.chart(), {true, true});
    for (std::size_t mu = 0; mu < n; ++mu) {
        for (std::size_t nu = 0; nu < n; ++nu) {
            Expr acc = integer(0);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    acc = acc + ginv.at({mu, a}) * ginv.at({nu, b}) * G.at({a, b});
            Gup.set({mu, nu}, simplify(acc));
        }
    }

    // div^nu = d_m G^{mn} + Gamma^m_{ml} G^{ln} + Gamma^n_{ml} G^{ml}
    std::vector<Expr> div(n, integer(0));
    for (std::size_t nu = 0; nu < n; ++nu) {
        Expr acc = integer(0);
        for (std::size_t mu = 0; mu < n; ++mu) {
            acc = acc + differentiate(Gup.at({mu, nu}), coords[mu]);
            for (std::size_t l = 0; l < n; ++l) {
                acc = acc + gamma.at({mu, mu, l}) * Gup.at({l, nu});
                acc = acc + gamma.at({nu, mu, l}) * Gup.at({mu, l});
            }
        }
        div[nu] = simplify(acc);
    }

    std::vector<DivergencePoint> out;
    for (const auto& point : points) {
        DivergencePoint dp;
        dp.point = point;
        Binding b = point;
        const Expr& c = g.chart().light_speed();
        if (c.kind() == Kind::Symbol && !b.has(c.node().name))
            b.bind_real(c.node().name, g.chart().light_speed_value());
        try {
            double norm = 0.0;
            for (std::size_t nu = 0; nu < n; ++nu)
                norm = std::max(norm, std::abs(eval(div[nu], b)));
            dp.max_norm = norm;
        } catch (const Error& err) {
            dp.failed = true;
            dp.diagnostic = err.what();
        }
        out.push_back(std::move(dp));
    }
    return out;
}

}  // namespace qgrav
