#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divlab/field.hpp"
#include "divlab/quadrature.hpp"

namespace divlab {

/// Convex gauge phi with phi(0) = 0 and phi > 0 on (0, inf).
struct PhiFunction {
    std::function<double(double)> evaluator;
    std::string label;
    int convexity_samples = 64;

    double operator()(double t) const { return evaluator(t); }

    /// phi(t) = c t.
    static PhiFunction linear(double c);
    /// phi(t) = t^2 / 2.
    static PhiFunction quadratic();

    /// Samples [0, t_max] and returns a description of the first violated property, if any.
    std::optional<std::string> audit(double t_max = 4.0) const;
};

/// Scalar V(rho, z) on the half-plane rho >= 0 with its gradient (dV/drho, dV/dz).
struct CylindricalPotential {
    int dim = 4;
    double gamma = 0.0;
    std::string id;
    std::function<double(double, double)> V;
    std::function<std::pair<double, double>(double, double)> dV;
};

/// w(s) = exp(-1 / (1 - (2s - 1)^2)) on (0, 1), zero elsewhere.
double bump_profile(double s);
/// b(s) = exp(-1 / (1 - s^2)) for |s| < 1, zero elsewhere.
double standard_bump(double s);

/// (1/C, 2^{(4-3n)/(n-1)}) with C = (pi + 3^{3/4}) / 2.
std::pair<double, double> gamma_bounds(int n);
/// Smaller of the two bounds above.
double auto_gamma(int n);

/// Rigidity counterexample in R^n, n >= 4. An empty gamma selects auto_gamma(n);
/// a gamma above it is rejected.
VectorField make_counterexample_field(int n, std::optional<double> gamma = std::nullopt);
/// The closed-form potential gamma [(1 + rho^{n-1})^{1/(n-1)} - 1] arctan(z^2) for z > 0, zero otherwise.
/// Any gamma > 0 is accepted here so that violating parameters can be certified as such.
CylindricalPotential counterexample_potential(int n, double gamma);

/// Planar field of disjoint rotating bumps accumulating on {y = 0}.
/// Level i has centres (j / 2^i, 1 / 2^i), j = 1 .. 2^i - 1, and radius 1 / 2^{i+2}.
VectorField make_twisting_field(int max_level = 8, const std::function<double(double)>& bump = bump_profile);
/// Scale c with c * max bump = 1, so that every ball attains |xi| = 1.
double twisting_calibration(const std::function<double(double)>& bump = bump_profile);
/// Exact pairwise disjointness of the closed balls up to the given level.
bool twisting_balls_disjoint(int max_level);

/// Tu(x) = x / R on the open disk of radius R.
VectorField make_capillary_field(double R);

/// eta = (-d2 psi, d1 psi). The Hessian is optional and yields the Jacobian.
VectorField make_stream_field(const std::function<Vec(const Vec&)>& grad_psi,
                              const std::function<Mat(const Vec&)>& hessian_psi, double sup_bound,
                              const std::string& id, std::optional<std::vector<Disk>> support_cover = std::nullopt);
/// Stream field of psi(x) = b(|x - center| / radius).
VectorField make_stream_bump(const Vec& center = Vec{0.0, 2.0}, double radius = 1.0);
/// Sup of |grad psi| for the stream bump of the given radius.
double stream_bump_sup(double radius);

/// eta = rho^{1-n} (-(dV/dz) r, rho dV/drho), with the radial limit on the axis.
VectorField potential_to_field(const CylindricalPotential& P);
/// V = -rho^{n-2} int_0^z eta_radial(rho, s) ds by adaptive quadrature; dV/drho by finite differences of V.
/// Rejects fields that are not cylindrically symmetric.
CylindricalPotential field_to_potential(const VectorField& eta, const quad::Tolerance& tol = {1e-14, 1e-13, 4000});

/// Builds a field from a registry identifier such as "counterexample:n=4:gamma=auto",
/// "twisting:levels=8", "capillary:R=1" or "stream:bump". Throws UsageError for unknown names.
VectorField make_field(const std::string& id);
/// Catalog of registry identifiers with one-line descriptions.
std::vector<std::pair<std::string, std::string>> field_registry();

}  // namespace divlab
