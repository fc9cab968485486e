#include "qgrav/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <map>
#include <numbers>
#include <ostream>

#include "qgrav/calculus.hpp"
#include "qgrav/error.hpp"

namespace qgrav {

Complex finite_diff(const Expr& e, const std::string& sym, const Binding& point, double h) {
    const Complex x = point.get(sym);
    const Complex fp = eval(e, point.with(sym, x + h));
    const Complex fm = eval(e, point.with(sym, x - h));
    return (fp - fm) / (2.0 * h);
}

Complex finite_diff_richardson(const Expr& e, const std::string& sym, const Binding& point,
                               double h) {
    const Complex d1 = finite_diff(e, sym, point, h);
    const Complex d2 = finite_diff(e, sym, point, h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

// ---- grids -----------------------------------------------------------------

void GridSpec::validate() const {
    if (axes.empty()) throw SpecError("grid: at least one axis required");
    for (const auto& a : axes) {
        if (!(a.min < a.max))
            throw SpecError("grid axis '" + a.name + "': min must be < max");
        if (a.count < 2)
            throw SpecError("grid axis '" + a.name + "': sample count must be >= 2");
        if (a.log_spacing && a.min <= 0.0)
            throw SpecError("grid axis '" + a.name + "': log spacing requires min > 0");
    }
}

std::vector<double> GridSpec::axis_values(std::size_t i) const {
    const GridAxis& a = axes[i];
    std::vector<double> vals(static_cast<std::size_t>(a.count));
    if (a.log_spacing) {
        const double llo = std::log(a.min), lhi = std::log(a.max);
        for (int k = 0; k < a.count; ++k)
            vals[static_cast<std::size_t>(k)] =
                std::exp(llo + (lhi - llo) * k / (a.count - 1));
    } else {
        for (int k = 0; k < a.count; ++k)
            vals[static_cast<std::size_t>(k)] = a.min + (a.max - a.min) * k / (a.count - 1);
    }
    return vals;
}

GridTable grid_eval(const Expr& e, const GridSpec& spec) {
    spec.validate();
    // fold held coordinates into the tree, then compile over the axes
    std::map<std::string, Expr> fixed;
    for (const auto& [name, v] : spec.fixed.values()) {
        Expr val = v.imag() == 0.0 ? floating(v.real())
                                   : floating(v.real()) + imag_unit() * floating(v.imag());
        fixed.emplace(name, val);
    }
    const Expr body = substitute(e, fixed);
    std::vector<std::string> slots;
    for (const auto& a : spec.axes) slots.push_back(a.name);
    CompiledExpr prog = CompiledExpr::compile(body, slots);

    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < spec.axes.size(); ++i) values.push_back(spec.axis_values(i));

    GridTable table;
    table.header = slots;
    table.header.push_back("value");

    std::size_t total = 1;
    for (const auto& v : values) total *= v.size();
    table.rows.reserve(total);

    std::vector<std::size_t> idx(spec.axes.size(), 0);
    std::vector<double> point(spec.axes.size(), 0.0);
    for (std::size_t row = 0; row < total; ++row) {
        for (std::size_t d = 0; d < idx.size(); ++d) point[d] = values[d][idx[d]];
        std::vector<std::optional<double>> cells;
        cells.reserve(point.size() + 1);
        for (double c : point) cells.emplace_back(c);
        try {
            const Complex v = prog.eval(point);
            if (std::isfinite(v.real()))
                cells.emplace_back(v.real());
            else
                cells.emplace_back(std::nullopt);
        } catch (const PoleError&) {
            cells.emplace_back(std::nullopt);
        }
        table.rows.push_back(std::move(cells));
        // row-major: last axis fastest
        for (std::size_t d = idx.size(); d-- > 0;) {
            if (++idx[d] < values[d].size()) break;
            idx[d] = 0;
        }
    }
    return table;
}

void write_csv(const GridTable& table, std::ostream& os) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
        os << (i ? "," : "") << table.header[i];
    os << "\n";
    char buf[64];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            if (row[i]) {
                std::snprintf(buf, sizeof(buf), "%.17g", *row[i]);
                os << buf;
            }
        }
        os << "\n";
    }
}

// ---- quadrature --------------------------------------------------------------

namespace {

struct GaussRule {
    std::vector<double> x;  // nodes on (-1, 1)
    std::vector<double> w;
};

const GaussRule& gauss_rule(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;  // node-stable, so references survive
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule rule;
    rule.x.resize(static_cast<std::size_t>(n));
    rule.w.resize(static_cast<std::size_t>(n));
    // Newton on Legendre P_n, symmetric nodes
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[static_cast<std::size_t>(i)] = -x;
        rule.x[static_cast<std::size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.w[static_cast<std::size_t>(i)] = w;
        rule.w[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

using Fn1D = std::function<Complex(double)>;

Complex gauss_panel(const Fn1D& f, double a, double b, const GaussRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc += rule.w[i] * f(mid + half * rule.x[i]);
    return half * acc;
}

struct AdaptState {
    double err = 0.0;
    int levels = 0;
    bool converged = true;
};

Complex adaptive_1d(const Fn1D& f, double a, double b, double tol, const GaussRule& rule,
                    int depth, int max_depth, AdaptState& st) {
    const Complex whole = gauss_panel(f, a, b, rule);
    const double mid = 0.5 * (a + b);
    const Complex left = gauss_panel(f, a, mid, rule);
    const Complex right = gauss_panel(f, mid, b, rule);
    const Complex refined = left + right;
    const double diff = std::abs(refined - whole);
    st.levels = std::max(st.levels, depth);
    if (diff <= tol || depth >= max_depth) {
        st.err += diff;
        if (diff > tol) st.converged = false;
        return refined;
    }
    return adaptive_1d(f, a, mid, tol / 2.0, rule, depth + 1, max_depth, st) +
           adaptive_1d(f, mid, b, tol / 2.0, rule, depth + 1, max_depth, st);
}

}  // namespace

ComplexQuadratureResult spherical_quadrature(
    const std::function<Complex(double, double, double)>& f, const SphericalDomain& dom_in,
    const QuadratureOptions& opts) {
    SphericalDomain dom = dom_in;
    if (dom.theta_lo == dom.theta_hi) { dom.theta_lo = 0.0; dom.theta_hi = std::numbers::pi; }
    if (dom.phi_lo == dom.phi_hi) { dom.phi_lo = 0.0; dom.phi_hi = 2.0 * std::numbers::pi; }
    const GaussRule& rule = gauss_rule(opts.order);

    const double r_range = dom.r_hi - dom.r_lo;
    const double th_range = dom.theta_hi - dom.theta_lo;
    const double tol_theta = opts.tol / (8.0 * std::max(1.0, r_range));
    const double tol_phi = tol_theta / (8.0 * std::max(1.0, th_range));

    AdaptState outer;
    double worst_theta_err = 0.0;
    double worst_phi_err = 0.0;
    bool inner_converged = true;
    int inner_levels = 0;

    Fn1D over_r = [&](double r) {
        AdaptState th_state;
        Fn1D over_theta = [&](double theta) {
            AdaptState ph_state;
            Fn1D over_phi = [&](double phi) { return f(r, theta, phi); };
            Complex v = adaptive_1d(over_phi, dom.phi_lo, dom.phi_hi, tol_phi, rule, 0,
                                    opts.max_depth, ph_state);
            worst_phi_err = std::max(worst_phi_err, ph_state.err);
            inner_converged = inner_converged && ph_state.converged;
            inner_levels = std::max(inner_levels, ph_state.levels);
            return v;
        };
        Complex v = adaptive_1d(over_theta, dom.theta_lo, dom.theta_hi, tol_theta, rule, 0,
                                opts.max_depth, th_state);
        worst_theta_err = std::max(worst_theta_err, th_state.err);
        inner_converged = inner_converged && th_state.converged;
        inner_levels = std::max(inner_levels, th_state.levels);
        return v;
    };

    const Complex value =
        adaptive_1d(over_r, dom.r_lo, dom.r_hi, opts.tol, rule, 0, opts.max_depth, outer);

    double err = outer.err + r_range * worst_theta_err + r_range * th_range * worst_phi_err;
    // accumulation rounding floor so the estimate stays conservative even for
    // integrands the rule captures exactly
    err += 64.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
    const int levels = std::max(outer.levels, inner_levels);
    if (!outer.converged || !inner_converged)
        throw NonConvergentError("quadrature did not converge at max refinement", value.real(),
                                 err);
    return {value, err, levels};
}

QuadratureResult quadrature(const Expr& f, const SphericalDomain& dom, const Binding& params,
                            const QuadratureOptions& opts) {
    std::map<std::string, Expr> fixed;
    for (const auto& [name, v] : params.values()) {
        Expr val = v.imag() == 0.0 ? floating(v.real())
                                   : floating(v.real()) + imag_unit() * floating(v.imag());
        fixed.emplace(name, val);
    }
    const Expr body = substitute(f, fixed);
    CompiledExpr prog = CompiledExpr::compile(body, {"r", "theta", "phi"});
    auto fn = [&](double r, double theta, double phi) {
        const double pt[3] = {r, theta, phi};
        return prog.eval(pt);
    };
    ComplexQuadratureResult res = spherical_quadrature(fn, dom, opts);
    return {res.value.real(), res.error, res.levels};
}

// ---- singular-locus scanning -------------------------------------------------

namespace {

double abs_or_inf(const CompiledExpr& prog, std::vector<double>& pt) {
    try {
        const Complex v = prog.eval(pt);
        const double m = std::abs(v);
        return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
    } catch (const PoleError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

std::vector<SingularCandidate> scan_singular_candidates(const Expr& e, const GridSpec& spec,
                                                        double threshold, double growth_factor) {
    spec.validate();
    if (spec.axes.size() < 1 || spec.axes.size() > 2)
        throw SpecError("scan supports 1- or 2-axis grids");

    std::map<std::string, Expr> fixed;
    for (const auto& [name, v] : spec.fixed.values()) fixed.emplace(name, floating(v.real()));
    const Expr body = substitute(e, fixed);
    std::vector<std::string> slots;
    for (const auto& a : spec.axes) slots.push_back(a.name);
    CompiledExpr prog = CompiledExpr::compile(body, slots);

    const bool two_d = spec.axes.size() == 2;
    const auto xs = spec.axis_values(0);
    const auto ys = two_d ? spec.axis_values(1) : std::vector<double>{0.0};
    const std::size_t nx = xs.size(), ny = ys.size();

    auto value_at = [&](double x, double y) {
        std::vector<double> pt;
        pt.push_back(x);
        if (two_d) pt.push_back(y);
        return abs_or_inf(prog, pt);
    };

    // flag grid points whose |e| exceeds the threshold and still grows when
    // probed at half-step resolution (rejects merely-large smooth values)
    const double hx = (spec.axes[0].max - spec.axes[0].min) / (spec.axes[0].count - 1);
    const double hy = two_d ? (spec.axes[1].max - spec.axes[1].min) / (spec.axes[1].count - 1) : 0;
    std::vector<char> flagged(nx * ny, 0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double v0 = value_at(xs[i], ys[j]);
            if (!(v0 > threshold)) continue;
            double probe = 0.0;
            for (int sx = -1; sx <= 1; ++sx) {
                for (int sy = -1; sy <= 1; ++sy) {
                    if (sx == 0 && sy == 0) continue;
                    if (!two_d && sy != 0) continue;
                    const double x = std::clamp(xs[i] + sx * hx / 2.0, spec.axes[0].min,
                                                spec.axes[0].max);
                    const double y = two_d ? std::clamp(ys[j] + sy * hy / 2.0, spec.axes[1].min,
                                                        spec.axes[1].max)
                                           : 0.0;
                    probe = std::max(probe, value_at(x, y));
                }
            }
            if (std::isinf(v0) || probe >= growth_factor / 2.0 * v0)
                flagged[i * ny + j] = 1;
        }
    }

    std::vector<SingularCandidate> out;

    // refine a bracketed spike maximum of |e| along one axis
    auto refine = [&](std::size_t axis, double lo, double hi, double other) {
        const GridAxis& ax = spec.axes[axis];
        auto probe1d = [&](double v) {
            return axis == 0 ? value_at(v, other) : value_at(other, v);
        };
        for (int iter = 0; iter < 96 && (hi - lo) > (ax.max - ax.min) * 0x1.0p-22; ++iter) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (probe1d(m1) < probe1d(m2)) lo = m1;
            else hi = m2;
        }
        return std::pair<double, double>{0.5 * (lo + hi), (hi - lo) / 2.0};
    };

    auto emit = [&](std::size_t axis, double position, double pos_err, double peak) {
        const GridAxis& ax = spec.axes[axis];
        SingularCandidate cand;
        cand.axis = ax.name;
        cand.position = position;
        cand.position_error = pos_err;
        cand.peak = peak;
        const double span = ax.max - ax.min;
        if (cand.position - ax.min < span * 2e-3) {
            cand.at_lower_edge = true;
            cand.position = ax.min;
        }
        if (ax.max - cand.position < span * 2e-3) {
            cand.at_upper_edge = true;
            cand.position = ax.max;
        }
        for (const auto& existing : out)
            if (existing.axis == cand.axis &&
                std::abs(existing.position - cand.position) < span * 1e-3)
                return;
        out.push_back(cand);
    };

    // pass 1: axis-aligned lines, detected as perpendicular slices that are
    // mostly flagged; consecutive slices group into one locus
    std::vector<char> consumed(nx * ny, 0);
    for (std::size_t axis = 0; axis < (two_d ? 2u : 1u); ++axis) {
        const std::size_t na = axis == 0 ? nx : ny;
        const std::size_t nb = axis == 0 ? ny : nx;
        std::vector<char> is_line(na, 0);
        for (std::size_t a = 0; a < na; ++a) {
            std::size_t hits = 0;
            for (std::size_t b2 = 0; b2 < nb; ++b2) {
                const std::size_t i = axis == 0 ? a : b2;
                const std::size_t j = axis == 0 ? b2 : a;
                if (flagged[i * ny + j]) ++hits;
            }
            if (!two_d)
                is_line[a] = flagged[a * ny] != 0;
            else
                is_line[a] = hits * 10 >= nb * 6;
        }
        for (std::size_t a = 0; a < na;) {
            if (!is_line[a]) { ++a; continue; }
            std::size_t a0 = a;
            while (a < na && is_line[a]) ++a;
            const std::size_t a1 = a - 1;
            // perpendicular coordinate at the strongest flagged cell
            double best = -1.0, other = 0.0, peak = 0.0;
            for (std::size_t g = a0; g <= a1; ++g) {
                for (std::size_t b2 = 0; b2 < nb; ++b2) {
                    const std::size_t i = axis == 0 ? g : b2;
                    const std::size_t j = axis == 0 ? b2 : g;
                    if (!flagged[i * ny + j]) continue;
                    consumed[i * ny + j] = 1;
                    const double v = value_at(xs[i], two_d ? ys[j] : 0.0);
                    peak = std::max(peak, v);
                    if (std::isfinite(v) && v > best) {
                        best = v;
                        other = axis == 0 ? (two_d ? ys[j] : 0.0) : xs[i];
                    }
                }
            }
            const auto& av = axis == 0 ? xs : ys;
            const double h = axis == 0 ? hx : hy;
            const GridAxis& ax = spec.axes[axis];
            auto [pos, err] = refine(axis, std::max(ax.min, av[a0] - h),
                                     std::min(ax.max, av[a1] + h), other);
            emit(axis, pos, err, peak);
        }
    }

    // pass 2: leftover clusters; those touching the domain boundary report an
    // edge locus per touched side
    std::vector<int> cluster(nx * ny, -1);
    int nclusters = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            if (!flagged[i * ny + j] || consumed[i * ny + j] || cluster[i * ny + j] >= 0)
                continue;
            const int id = nclusters++;
            std::size_t ilo = nx, ihi = 0, jlo = ny, jhi = 0;
            double peak = 0.0;
            stack.push_back({i, j});
            while (!stack.empty()) {
                auto [a, bj] = stack.back();
                stack.pop_back();
                if (cluster[a * ny + bj] >= 0) continue;
                cluster[a * ny + bj] = id;
                ilo = std::min(ilo, a);
                ihi = std::max(ihi, a);
                jlo = std::min(jlo, bj);
                jhi = std::max(jhi, bj);
                peak = std::max(peak, value_at(xs[a], two_d ? ys[bj] : 0.0));
                for (int da = -1; da <= 1; ++da) {
                    for (int db = -1; db <= 1; ++db) {
                        const std::int64_t na = static_cast<std::int64_t>(a) + da;
                        const std::int64_t nb = static_cast<std::int64_t>(bj) + db;
                        if (na < 0 || nb < 0 || na >= static_cast<std::int64_t>(nx) ||
                            nb >= static_cast<std::int64_t>(ny))
                            continue;
                        const std::size_t ui = static_cast<std::size_t>(na) * ny +
                                               static_cast<std::size_t>(nb);
                        if (flagged[ui] && !consumed[ui] && cluster[ui] < 0)
                            stack.push_back({static_cast<std::size_t>(na),
                                             static_cast<std::size_t>(nb)});
                    }
                }
            }
            bool touched = false;
            if (ilo == 0) { emit(0, spec.axes[0].min, hx / 2, peak); touched = true; }
            if (ihi == nx - 1) { emit(0, spec.axes[0].max, hx / 2, peak); touched = true; }
            if (two_d && jlo == 0) { emit(1, spec.axes[1].min, hy / 2, peak); touched = true; }
            if (two_d && jhi == ny - 1) { emit(1, spec.axes[1].max, hy / 2, peak); touched = true; }
            if (!touched) {
                // interior blob: refine along the first axis through its center
                const double other = two_d ? ys[(jlo + jhi) / 2] : 0.0;
                auto [pos, err] = refine(0, std::max(spec.axes[0].min, xs[ilo] - hx),
                                         std::min(spec.axes[0].max, xs[ihi] + hx), other);
                emit(0, pos, err, peak);
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const SingularCandidate& a, const SingularCandidate& b) {
        if (a.axis != b.axis) return a.axis < b.axis;
        return a.position < b.position;
    });
    return out;
}

}  // namespace qgrav
