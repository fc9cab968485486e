#pragma once

#include <string>
#include <vector>

#include "qgrav/metric.hpp"
#include "qgrav/wavefunction.hpp"

namespace qgrav {

// Robertson-Walker template over the polar chart:
//   diag(S^2/(1 - k r^2), S^2 r^2, S^2 r^2 sin^2 theta, -c^2)
// S may depend only on t; k is an expression or constant.
MetricTensor frw_metric(const Expr& scale_factor, const Expr& curvature, const Chart& chart);

// Result of matching a metric against the Robertson-Walker form. The two S^2
// routes come from the theta-theta and phi-phi components; k follows the
// theta route. tt_residual is g_tt/(-c^2) - 1 and isotropy_residual the
// theta/phi disagreement; cross terms are listed untouched.
struct FrwDecomposition {
    Expr s_sq_from_theta;
    Expr s_sq_from_phi;
    Expr k_expr;
    Expr tt_residual;
    Expr isotropy_residual;
    std::vector<Expr> offdiag;  // the six cross components, simplified
};

FrwDecomposition decompose(const MetricTensor& g);

// k field of a wave function: build_metric -> decompose -> k_expr.
Expr extract_k(const WaveFunction& w,
               MetricConvention convention = MetricConvention::Unconjugated);

enum class SingularityClass { Coordinate, Physical };

struct SingularLocus {
    Expr constraint;              // vanishing factor defining the locus
    std::string coordinate;       // coordinate the locus is constant in
    double position = 0.0;
    SingularityClass classification = SingularityClass::Coordinate;
    Binding witness;              // point satisfying |constraint| < 1e-9
    std::vector<double> evidence; // |k| approaching the locus, strictly increasing
};

struct SingularityReport {
    std::vector<SingularLocus> loci;
};

struct SingularityDomain {
    // closed hulls searched for denominator roots; defaults follow the polar
    // chart away from theta = pi
    double r_lo = 0.0;
    double r_hi = 5.0;
    double theta_lo = 0.0;
    double theta_hi = 2.9;
};

// Loci from symbolic denominator factoring confirmed by a numeric divergence
// scan. Classification is by locus geometry: the chart-degeneracy sets r=0,
// theta=0, theta=pi are coordinate singularities, everything else physical.
SingularityReport classify_singularities(const Expr& k, const SingularityDomain& domain,
                                         const Binding& params);

}  // namespace qgrav
