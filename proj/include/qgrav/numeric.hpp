#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qgrav/eval.hpp"
#include "qgrav/expr.hpp"

namespace qgrav {

// Central difference (e(s+h) - e(s-h)) / 2h; the independent oracle for
// differentiate().
Complex finite_diff(const Expr& e, const std::string& sym, const Binding& point, double h = 1e-5);

// Richardson-extrapolated variant (two step sizes h, h/2).
Complex finite_diff_richardson(const Expr& e, const std::string& sym, const Binding& point,
                               double h = 1e-5);

// ---- grids -----------------------------------------------------------------

struct GridAxis {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    int count = 2;
    bool log_spacing = false;
};

struct GridSpec {
    std::vector<GridAxis> axes;
    Binding fixed;  // held coordinates / parameters

    void validate() const;  // throws SpecError on min>=max, count<2, log with min<=0
    std::vector<double> axis_values(std::size_t i) const;
};

struct GridTable {
    std::vector<std::string> header;                         // axis names + "value"
    std::vector<std::vector<std::optional<double>>> rows;    // null = pole
};

// Row-major evaluation table; poles become null cells.
GridTable grid_eval(const Expr& e, const GridSpec& spec);

// CSV per the fixed format: header line, 17 significant digits, empty fields
// for nulls, LF line endings.
void write_csv(const GridTable& table, std::ostream& os);

// ---- quadrature --------------------------------------------------------------

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // conservative absolute estimate
    int levels = 0;      // deepest refinement level used
};

struct ComplexQuadratureResult {
    Complex value{0.0, 0.0};
    double error = 0.0;
    int levels = 0;
};

struct SphericalDomain {
    double r_lo = 0.0, r_hi = 1.0;
    double theta_lo = 0.0, theta_hi = 0.0;  // defaulted to (0, pi) when equal
    double phi_lo = 0.0, phi_hi = 0.0;      // defaulted to (0, 2*pi) when equal
};

struct QuadratureOptions {
    double tol = 1e-8;
    int order = 32;      // Gauss-Legendre points per panel
    int max_depth = 14;  // adaptive bisection depth per dimension
};

// Nested adaptive Gauss-Legendre integration of f(r, theta, phi) over the
// box; deterministic reduction order. Throws NonConvergentError when the
// estimate cannot be brought under tol at max refinement.
ComplexQuadratureResult spherical_quadrature(
    const std::function<Complex(double, double, double)>& f, const SphericalDomain& dom,
    const QuadratureOptions& opts = {});

// Expression front end for a real-valued integrand over (r, theta, phi);
// params bind the remaining symbols.
QuadratureResult quadrature(const Expr& f, const SphericalDomain& dom, const Binding& params,
                            const QuadratureOptions& opts = {});

// ---- singular-locus scanning -------------------------------------------------

struct SingularCandidate {
    std::string axis;       // coordinate the locus is constant in
    double position = 0.0;  // refined coordinate value
    double position_error = 0.0;
    bool at_lower_edge = false;
    bool at_upper_edge = false;
    double peak = 0.0;  // largest |e| seen in the cluster
};

// Grid cells where |e| exceeds threshold and keeps growing under 2x local
// refinement, clustered and bisection-refined. Supports 1- and 2-axis specs.
std::vector<SingularCandidate> scan_singular_candidates(const Expr& e, const GridSpec& spec,
                                                        double threshold,
                                                        double growth_factor = 4.0);

}  // namespace qgrav
