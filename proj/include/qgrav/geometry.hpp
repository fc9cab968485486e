#pragma once

#include <vector>

#include "qgrav/equivalence.hpp"
#include "qgrav/metric.hpp"

namespace qgrav {

// Dense tensor of expressions with explicit index variance (true = upper).
class TensorField {
public:
    TensorField(Chart chart, std::vector<bool> variance);

    const Chart& chart() const { return chart_; }
    std::size_t rank() const { return variance_.size(); }
    const std::vector<bool>& variance() const { return variance_; }

    const Expr& at(std::initializer_list<std::size_t> idx) const { return comp_[flat(idx)]; }
    void set(std::initializer_list<std::size_t> idx, Expr value) { comp_[flat(idx)] = std::move(value); }

private:
    std::size_t flat(std::initializer_list<std::size_t> idx) const;

    Chart chart_;
    std::vector<bool> variance_;
    std::vector<Expr> comp_;
};

// Default sampling domain used by the degeneracy check and the numeric
// self-tests: coordinates get chart-appropriate safe ranges, every other
// symbol gets (0.5, 2).
Domain geometry_sample_domain(const Chart& chart);

// Simplification normally runs after each tensor stage to bound expression
// swell; Off preserves the raw forms for debugging.
enum class StageSimplify { On, Off };

// g^{mu nu} by adjugate over determinant. Throws DegenerateMetricError
// (carrying the rank at a sample point) when the determinant vanishes
// identically under sampling.
TensorField inverse_metric(const MetricTensor& g, StageSimplify mode = StageSimplify::On);

// Levi-Civita connection Gamma^l_{mn} = 1/2 g^{ls}(d_m g_{sn} + d_n g_{sm} - d_s g_{mn}).
TensorField christoffel(const MetricTensor& g, StageSimplify mode = StageSimplify::On);

// R^r_{s m n} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns}
//             - Gamma^r_{nl} Gamma^l_{ms}   (mixed variance, the stored form)
TensorField riemann(const MetricTensor& g, StageSimplify mode = StageSimplify::On);

TensorField ricci(const MetricTensor& g, StageSimplify mode = StageSimplify::On);
Expr scalar_curvature(const MetricTensor& g, StageSimplify mode = StageSimplify::On);
TensorField einstein_tensor(const MetricTensor& g, StageSimplify mode = StageSimplify::On);

// All-lower Riemann R_{rsmn} via index lowering (used by the antisymmetry
// checks).
TensorField riemann_all_lower(const MetricTensor& g);

struct DivergencePoint {
    Binding point;
    double max_norm = 0.0;
    bool failed = false;     // pole or degenerate evaluation at this point
    std::string diagnostic;  // set when failed
};

// Contracted-Bianchi self-test: assembles div_m G^{mn} symbolically and
// evaluates its max-norm per point. Points that hit poles are flagged and the
// rest are still reported.
std::vector<DivergencePoint> covariant_divergence_einstein(const MetricTensor& g,
                                                           const std::vector<Binding>& points);

}  // namespace qgrav
