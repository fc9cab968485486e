#pragma once

#include <array>
#include <string>
#include <tuple>
#include <vector>

#include "qgrav/chart.hpp"
#include "qgrav/eval.hpp"
#include "qgrav/expr.hpp"
#include "qgrav/wavefunction.hpp"

namespace qgrav {

// Dense little real matrix, up to 4x4.
struct SmallMatrix {
    std::size_t n = 0;
    std::array<std::array<double, 4>, 4> a{};

    double& operator()(std::size_t i, std::size_t j) { return a[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i][j]; }
    double max_abs() const;
    double max_abs_diff(const SmallMatrix& o) const;
};

// Symmetric tensor of expressions over a chart; only the upper triangle is
// stored, so g(i,j) and g(j,i) return the identical Expr.
class MetricTensor {
public:
    explicit MetricTensor(Chart chart);
    static MetricTensor diagonal(Chart chart, std::vector<Expr> diag);

    const Chart& chart() const { return chart_; }
    std::size_t dim() const { return chart_.dim(); }
    const Expr& at(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, Expr value);

private:
    Chart chart_;
    std::vector<Expr> comp_;  // upper triangle, row-major
};

enum class MetricConvention { Unconjugated, Conjugated };

// The metric of quantum states: g_mn = Re[(D_m Psi)(D_n Psi)] with
// D_t = (1/c) d/dt and the chart signature applied on the diagonal, so the
// line element's time term reads -Re[(dPsi/c dt)^2] c^2 dt^2. The conjugated
// option uses Re[conj(D_m Psi) (D_n Psi)] instead.
MetricTensor build_metric(const WaveFunction& w,
                          MetricConvention convention = MetricConvention::Unconjugated);

struct LineElement {
    std::string text;           // ds^2 = ... including cross terms
    std::string diagonal_text;  // diagonal-only view
    std::vector<std::tuple<std::size_t, std::size_t, Expr>> cross_terms;
};

LineElement line_element(const MetricTensor& g);

// Numeric evaluation at a fully bound point. The chart's light speed is bound
// automatically when it is symbolic and absent from the point. Imaginary
// residue beyond 1e-12 is an internal error.
SmallMatrix metric_at(const MetricTensor& g, const Binding& point);

struct RankResult {
    int rank = 0;
    std::vector<std::array<double, 4>> nullspace;  // basis of the kernel
};

// Numeric rank via pivoted elimination with threshold tol * max |entry|.
RankResult rank_at(const MetricTensor& g, const Binding& point, double tol = 1e-10);
RankResult matrix_rank(const SmallMatrix& m, double tol = 1e-10);

// ---- template metrics -------------------------------------------------------

MetricTensor two_sphere_metric(const Expr& radius);  // diag(a^2, a^2 sin^2 theta)
MetricTensor flat_spherical3_metric();               // diag(1, r^2, r^2 sin^2 theta)
MetricTensor minkowski_polar_metric(const Chart& chart);  // diag(1, r^2, r^2 sin^2, -c^2)

}  // namespace qgrav
