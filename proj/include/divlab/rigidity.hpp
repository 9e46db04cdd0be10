#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divlab/calculus.hpp"
#include "divlab/field.hpp"
#include "divlab/fields.hpp"
#include "divlab/report.hpp"

namespace divlab {

struct FlowOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    /// Steps shorter than this fraction of the height span count as a stiff failure.
    double min_step = 1e-14;
    int max_steps = 200000;
    /// Record every accepted step in FlowState::steps.
    bool record = false;
};

struct FlowSample {
    double height = 0.0;
    double time = 0.0;
    Vec position;
    double delta = 1.0;
};

/// Integral curve of X from p, stopped on the level set {x_n = h}.
struct FlowState {
    Vec p;
    /// Flow time T(p, h).
    double t = 0.0;
    Vec position;
    /// Jacobian determinant of the horizontal map q -> Psi(q, h), equal to 1 on the seed plane.
    double delta = 1.0;
    double min_delta = 1.0;
    double min_xn = 0.0;
    /// Largest |x_i|, i < n, met along the path.
    double max_horizontal = 0.0;
    int accepted_steps = 0;
    int rejected_steps = 0;
    std::vector<FlowSample> steps;
};

/// Integrates dPhi/dt = X(Phi) until Phi_n = h, using the height x_n as the independent variable:
/// dx'/dx_n = X'/X_n, dt/dx_n = 1/X_n and d delta/dx_n = tr(D_{x'}(X'/X_n)) delta.
/// Throws FlowError MONOTONICITY_VIOLATION if X_n <= 0 on the path, STIFF_FAILURE on step underflow.
FlowState integrate_flow(const VectorField& X, const Vec& p, double h, const FlowOptions& opt = {});

/// Axis-aligned box in R^{n-1}.
struct Plate {
    Vec lo;
    Vec hi;
    double measure() const;
};

struct FlowTubeOptions {
    /// Gauss-Legendre seeds per axis of the plate.
    int seeds_per_axis = 64;
    FlowOptions flow;
    quad::Tolerance top_tol{1e-13, 1e-12, 20000};
    /// Linear gauge constant c; enables the displacement bound check.
    std::optional<double> linear_gauge;
    /// Trajectories kept for plotting (spread evenly over the seeds).
    int recorded_trajectories = 16;
};

struct FlowTube {
    Plate A;
    double h0 = 0.0;
    double epsilon = 0.0;
    int seeds_per_axis = 0;
    /// int_A (eta_n(q, h0) + eps) dq.
    double top_integral = 0.0;
    /// Measure of the bottom section, int_A delta(q, 0) dq.
    double bottom_measure = 0.0;
    double residual = 0.0;
    double R_bound = 0.0;
    double min_delta = 1.0;
    double max_displacement = 0.0;
    std::optional<double> displacement_bound;
    std::vector<FlowState> trajectories;

    json to_json() const;
    /// q_1..q_{n-1}, h, Phi_1..Phi_n, delta for the recorded trajectories.
    std::string csv() const;
    VerificationReport report(double residual_tol = 1e-6) const;
};

/// Flows a Gauss-Legendre grid on A x {h0} down to x_n = 0 along X = eta + eps e_n and compares
/// the flux through the plate with eps times the measure of the bottom section.
FlowTube build_flow_tube(const VectorField& eta, double epsilon, const Plate& A, double h0,
                         const FlowTubeOptions& opt = {});

/// int_{-r}^{r} eta_2(x, t) dx against int_0^t (eta_1(-r, y) - eta_1(r, y)) dy, and the L1 bound
/// int_{-r}^{r} |eta_2(x, t)| dx <= 2 t sup|eta|. With a gauge, also phi(|eta_1|) <= eta_2 at (+-r, t).
VerificationReport strip_identity_2d(const VectorField& eta, double r, double t,
                                     const std::optional<PhiFunction>& phi = std::nullopt, double residual_tol = 1e-8,
                                     const quad::Tolerance& tol = {1e-14, 1e-13, 20000});

struct ConditionMargin {
    std::string name;
    double min_margin = 0.0;
    double rho = 0.0;
    double z = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct RigidityCertificate {
    std::string id;
    GridSpec grid;
    std::vector<ConditionMargin> conditions;
    json constants = json::object();
    /// CERTIFIED_SAMPLED or VIOLATED.
    std::string verdict;
    std::optional<ConditionMargin> witness;

    bool certified() const { return verdict == "CERTIFIED_SAMPLED"; }
    json to_json() const;
    VerificationReport report() const;
};

/// Samples V = 0 for z <= 0, |grad V| <= rho^{n-2} and rho dV/drho >= c rho^{3-n} (dV/dz)^2 on a (rho, z) grid.
/// Certified when every margin is >= -margin_tol.
RigidityCertificate certify_potential(const CylindricalPotential& P, const GridSpec& grid, double c,
                                      double margin_tol = 1e-12);

/// The (rho, z) grid used for certification: rho log-spaced on [1e-3, 1e3], z uniform on [-1, 10].
GridSpec certification_grid(int rho_points = 200, int z_points = 200);

/// rho psi' = gamma psi^2 from (rho0, psi0) until blow-up, against rho0 exp(1 / (gamma psi0)).
VerificationReport separable_demo(double gamma, double rho0, double psi0, double rel_tol = 1e-2);

}  // namespace divlab
