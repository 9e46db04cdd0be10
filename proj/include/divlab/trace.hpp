#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "divlab/calculus.hpp"
#include "divlab/field.hpp"
#include "divlab/interface.hpp"
#include "divlab/report.hpp"

namespace divlab {

enum class TraceMethod { ball_average, curvilinear, pairing, sphere_flux };
std::string to_string(TraceMethod m);

/// Least-squares fit value ~ a + b r over the trailing `window` points.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    /// max - min of the fit residuals over the window.
    double residual_spread = 0.0;
    /// Coefficients c_i with intercept = sum c_i value_i (for error propagation).
    std::vector<double> weights;
    std::size_t first = 0;
};
LinearFit fit_linear(const std::vector<double>& r, const std::vector<double>& values, std::size_t window = 4);

struct TraceProbe {
    Vec x0;
    std::vector<double> radii;
    TraceMethod method = TraceMethod::ball_average;
    std::vector<double> estimates;
    std::vector<double> errors;
    double extrapolated = 0.0;
    double slope = 0.0;
    /// Spread of the last estimates around the linear model.
    double oscillation = 0.0;
    bool oscillating = false;
    double rho = 0.0;

    json to_json() const;
    std::string csv() const;
};

struct TraceOptions {
    quad::Tolerance tol{1e-11, 1e-9, 4000};
    /// Residual spreads above max(5 tol.abs, floor) are reported as oscillation.
    double oscillation_floor = 1e-3;
};

/// (1 / |B_r(x0) cap domain|) int_{B_r(x0)} xi . nu_S(x0) for each radius.
TraceProbe weak_trace_ball_average(const VectorField& field, const OrientedInterface& S, const Vec& x0,
                                   const std::vector<double>& radii, const TraceOptions& opt = {});

/// (1 / (2 rho r)) int_{Q_{r,rho}} xi(z) . nu_S(y) dz over the one-sided curvilinear rectangle
/// z = y - t nu_S(x0), y in S within arc length rho of x0, 0 < t < r.
TraceProbe weak_trace_curvilinear(const VectorField& field, const OrientedInterface& S, const Vec& x0, double rho,
                                  const std::vector<double>& r_seq, const TraceOptions& opt = {});

struct PairingValue {
    std::string label;
    /// int psi d(div xi) + int xi . grad psi over omega.
    double pairing = 0.0;
    /// Classical int_{d omega} psi xi . nu.
    double boundary_flux = 0.0;
    double c1_norm = 0.0;
};

/// Distributional normal trace tested against each psi.
std::vector<PairingValue> weak_trace_pairing(const VectorField& field, const ConvexRegion& omega,
                                             const std::vector<TestFunction>& psi_family,
                                             const quad::Tolerance& tol = {1e-12, 1e-10, 4000});

/// Pairing against bumps psi_r centred at x0, normalized by int_{d omega} psi_r.
TraceProbe weak_trace_pairing_probe(const VectorField& field, const ConvexRegion& omega, const Vec& x0,
                                    const std::vector<double>& radii, const TraceOptions& opt = {});

/// -(1 / (2 r)) int over the arc of dB_r(x0) on the -nu side of xi . (y - x0) / r.
/// Reproduces c . nu for constant fields c.
TraceProbe weak_trace_sphere_flux(const VectorField& field, const OrientedInterface& S, const Vec& x0,
                                  const std::vector<double>& radii, const TraceOptions& opt = {});

struct DensityOptions {
    std::size_t samples = 100000;
    int shifts = 10;
    std::uint64_t seed = 20240601;
};

struct DensityProbe {
    Vec center;
    std::vector<double> radii;
    std::vector<double> ratios;
    std::vector<double> stderrs;
    double theta = 0.0;
    double theta_stderr = 0.0;

    json to_json() const;
    std::string csv() const;
};

/// |E cap B_r(x)| / |B_r| per radius by randomly shifted quasi-Monte Carlo; theta by linear extrapolation.
DensityProbe density(const std::function<bool(const Vec&)>& indicator, const Vec& x, const std::vector<double>& radii,
                     const DensityOptions& opt = {});

/// Density of E_alpha = {y in B^{-nu}(x0) cap domain : |xi(y) - w| >= alpha} for each alpha.
/// Outcome AP_LIM_CONFIRMED, AP_LIM_REJECTED or INCONCLUSIVE.
VerificationReport one_sided_ap_lim(const VectorField& field, const OrientedInterface& S, const Vec& x0, const Vec& w,
                                    const std::vector<double>& alphas, const std::vector<double>& radii,
                                    double eps_density = 1e-2, const DensityOptions& opt = {});

}  // namespace divlab
