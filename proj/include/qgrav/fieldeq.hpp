#pragma once

#include <array>
#include <string>
#include <vector>

#include "qgrav/metric.hpp"
#include "qgrav/numeric.hpp"
#include "qgrav/wavefunction.hpp"

namespace qgrav {

// Physical inputs of the reformulated field equation. rho and m are free
// inputs (not derived from the state). Dimensionless mode keeps everything 1;
// SI mode loads constants from a config file.
struct PhysicalParams {
    double rho = 1.0;
    double m = 1.0;
    double hbar = 1.0;
    double G = 1.0;
    double c = 1.0;
    enum class Units { Dimensionless, SI } units = Units::Dimensionless;

    void validate() const;  // all strictly positive
    const char* units_name() const {
        return units == Units::Dimensionless ? "dimensionless" : "si";
    }
};

// reads "key = value" lines (hbar, m, G, c, rho); '#' comments
PhysicalParams params_from_config(const std::string& path);

struct InnerProductOptions {
    double rmax_factor = 40.0;  // R_max = factor * a0 (falls back to factor when a0 unbound)
    QuadratureOptions quad;
    bool pointwise = false;  // local density instead of the volume integral
    Binding point;           // spatial point for pointwise mode
};

struct InnerProductResult {
    double value = 0.0;
    double imag_residue = 0.0;  // flagged when > 1e-8
    double error = 0.0;
    int levels = 0;
};

// <a|b> = integral of conj(a) * b * r^2 sin(theta) dr dtheta dphi at fixed
// t = t0, parameters bound from the wave function.
InnerProductResult inner_product(const Expr& a, const Expr& b, const WaveFunction& w, double t0,
                                 const InnerProductOptions& opts = {});

// Whether the bracket product carries the printed 1/2 exponent or not.
enum class BracketMode { SqrtProduct, PlainProduct };

// v_mu v_nu = (hbar^2/m^2) [<d_mu Psi|d_mu Psi><d_nu Psi|d_nu Psi>]^(1/2),
// with D_t = (1/c) d/dt.
double velocity_product(const WaveFunction& w, std::size_t mu, std::size_t nu,
                        const PhysicalParams& p, double t0,
                        const InnerProductOptions& opts = {},
                        BracketMode mode = BracketMode::SqrtProduct);

struct RhsResult {
    SmallMatrix rhs;
    std::array<InnerProductResult, 4> derivative_norms;  // <D_mu Psi | D_mu Psi>
    InnerProductResult psi_norm;                         // <Psi|Psi>, reported alongside
};

// RHS_{mu nu} = -(8 pi G / c^4) rho v_mu v_nu
RhsResult field_equation_rhs(const WaveFunction& w, const PhysicalParams& p, double t0,
                             const InnerProductOptions& opts = {},
                             BracketMode mode = BracketMode::SqrtProduct);

// Classical dust limit T_{mu nu} = rho c^2 u_mu u_nu with u = dx/ds over the
// coordinates (r, theta, phi, ct); a static worldline gives T_tt = rho c^2.
SmallMatrix classical_dust_stress_energy(const PhysicalParams& p,
                                         const std::array<double, 4>& u);

struct FieldEquationPoint {
    Binding point;
    SmallMatrix lhs;       // G_{mu nu}
    SmallMatrix rhs;
    double residual_max = 0.0;
    bool failed = false;
    std::string diagnostic;
};

struct FieldEquationReport {
    std::vector<FieldEquationPoint> points;
    PhysicalParams params;
    InnerProductResult psi_norm;
    double quadrature_error = 0.0;   // worst error estimate across integrals
    double max_imag_residue = 0.0;   // flagged when > 1e-8
};

// Per-point G_{mu nu} - RHS_{mu nu}. Degenerate metrics flag every point;
// individual pole evaluations flag only their point. Fails globally only when
// every point fails.
FieldEquationReport field_equation_residual(const MetricTensor& g, const WaveFunction& w,
                                            const PhysicalParams& p,
                                            const std::vector<Binding>& points,
                                            const InnerProductOptions& opts = {},
                                            BracketMode mode = BracketMode::SqrtProduct);

}  // namespace qgrav
