#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "divlab/field.hpp"
#include "divlab/fields.hpp"
#include "divlab/geometry.hpp"
#include "divlab/quadrature.hpp"
#include "divlab/report.hpp"

namespace divlab {

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    int resolution = 2;
    bool logarithmic = false;
};

/// Tensor grid over an axis-aligned box, uniform or logarithmic per axis.
struct GridSpec {
    std::vector<GridAxis> axes;

    void validate() const;
    std::size_t size() const;
    double coordinate(int axis, int k) const;
    /// Point with flattened index; the last axis varies fastest.
    Vec point(std::size_t index) const;
    json to_json() const;
};

/// Radial kernel rho_eps(y) = N * profile(|y| / eps) supported in the closed eps-ball.
struct MollifierKernel {
    double epsilon = 0.1;
    std::function<double(double)> profile;
    std::string label;

    /// profile(s) = exp(-1 / (1 - s^2)).
    static MollifierKernel standard(double epsilon);

    /// 1 / int_{B_eps} profile(|y| / eps) dy in R^dim.
    double normalization(int dim) const;
    /// Normalized kernel value at y.
    double operator()(const Vec& y, int dim) const;
};

/// Positive cubature on the eps-ball (weights summing to exactly 1) used for convolutions.
struct KernelRule {
    std::vector<Vec> offsets;
    std::vector<double> weights;
};
KernelRule kernel_rule(const MollifierKernel& kernel, int dim, int radial_nodes, int angular_nodes);

/// eta^eps = rho_eps * eta. The cubature order is chosen once, at construction, by doubling until
/// probe values settle, so the result is an exact convex combination of translates of eta.
/// With `shift` the output is translated by +eps along the last axis.
VectorField mollify(const VectorField& field, const MollifierKernel& kernel, bool shift);

/// phi(|eta^eps|) <= eta^eps_n + tol at every grid point, after auditing eta_n >= phi(|eta|) on samples.
VerificationReport jensen_check(const VectorField& field, const PhiFunction& phi, const MollifierKernel& kernel,
                                const GridSpec& grid, double tol = 1e-6);

/// Fourth-order centered-difference divergence (stencil reach 2h). Rejects points within 2h of an exclusion set.
double numeric_divergence(const VectorField& field, const Vec& x, double h = 1e-4);
/// Fourth-order centered-difference Jacobian, J(i, j) = d field_i / d x_j.
Mat numeric_jacobian(const VectorField& field, const Vec& x, double h = 1e-4);

/// C^1 test function on the plane with an optional compact support disk.
struct TestFunction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    double c1_norm = 0.0;
    std::optional<Disk> support;
    std::string label;

    /// amplitude * b(|x - center| / radius), b the standard bump.
    static TestFunction bump(const Vec& center, double radius, double amplitude = 1.0);
    /// exp(-|x - center|^2 / (2 sigma^2)).
    static TestFunction gaussian(const Vec& center, double sigma);
    static TestFunction constant(double c);
    /// a f + b g.
    static TestFunction combination(double a, const TestFunction& f, double b, const TestFunction& g);
};

/// Integral of `integrand` over region, restricted to the field's domain and support cover when known.
/// The integrand must vanish outside the field's support for the restriction to be valid.
quad::Result integrate_on_support(const VectorField& field, const ConvexRegion& region, const ScalarFunction& integrand,
                                  const quad::Tolerance& tol = {});

struct GaussGreenTerms {
    double volume_divergence = 0.0;  // int_Omega psi div(field)
    double volume_gradient = 0.0;    // int_Omega field . grad psi
    double boundary_flux = 0.0;      // int_{dOmega} psi field . nu
    double residual = 0.0;
    bool converged = true;
};

/// Offset used to evaluate boundary fluxes as one-sided inner traces.
inline constexpr double kInnerTraceOffset = 1e-10;

/// All three Gauss-Green terms on a bounded planar region.
GaussGreenTerms gauss_green_terms(const VectorField& field, const ConvexRegion& omega, const TestFunction& psi,
                                  const quad::Tolerance& tol = {});
/// volume_divergence + volume_gradient - boundary_flux.
double gauss_green_residual(const VectorField& field, const ConvexRegion& omega, const TestFunction& psi,
                            const quad::Tolerance& tol = {});

}  // namespace divlab
