#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divlab/calculus.hpp"
#include "divlab/field.hpp"
#include "divlab/interface.hpp"
#include "divlab/report.hpp"
#include "divlab/trace.hpp"

namespace divlab {

/// z_r(y) = z(x0 + r y).
VectorField rescale(const VectorField& z, const Vec& x0, double r);

/// Rescalings z_k = rescale(z, x0, r_k) along decreasing radii.
struct BlowupSequence {
    VectorField base;
    Vec x0;
    std::vector<double> radii;
    std::vector<VectorField> fields;

    static BlowupSequence make(const VectorField& z, const Vec& x0, const std::vector<double>& radii);
    /// r_k = 2^{-k} for k in [k_lo, k_hi].
    static BlowupSequence dyadic(const VectorField& z, const Vec& x0, int k_lo, int k_hi);
};

/// Nonnegative planar density with compact support in a disk, scaled to unit mass.
struct TestDensity {
    std::function<double(const Vec&)> value;
    Disk support;
    std::string label;

    /// Standard bump on the disk, normalized.
    static TestDensity bump(const Vec& center, double radius);
    /// Gaussian of width sigma truncated smoothly to the disk of radius `radius`, normalized.
    static TestDensity gaussian(const Vec& center, double sigma, double radius);
    /// int f over the support.
    double mass(const quad::Tolerance& tol = {1e-14, 1e-12, 4000}) const;
};

struct WeakStarProbe {
    std::vector<std::string> labels;
    std::vector<double> radii;
    /// averages[f][k] = int f z_k.
    std::vector<std::vector<Vec>> averages;
    /// squares[f][k] = int f |z_k|^2.
    std::vector<std::vector<double>> squares;
    /// squares - |averages|^2, nonnegative by Jensen.
    std::vector<std::vector<double>> jensen_margins;
    /// Per density, componentwise linear extrapolation of the averages to r = 0.
    std::vector<Vec> limits;

    json to_json() const;
    /// Report with Jensen margins and, when `expected` is given, distances of the limits to it.
    VerificationReport report(const std::optional<Vec>& expected = std::nullopt, double limit_tol = 1e-2,
                              double jensen_tol = 1e-9) const;
};

/// Averages of the blow-up fields against each density. Densities whose mass differs from 1 by more
/// than 1e-8 are rejected.
WeakStarProbe weak_star_average(const BlowupSequence& seq, const std::vector<TestDensity>& f_family,
                                const quad::Tolerance& tol = {1e-13, 1e-11, 4000});

struct NalphaProbe {
    double alpha = 0.0;
    /// Rotation taking nu_S(x0) to -e_2.
    Mat rotation;
    DensityProbe density;
    /// DENSITY_ZERO, DENSITY_POSITIVE or INCONCLUSIVE against eps_density.
    std::string verdict;

    json to_json() const;
};

/// Density of N_alpha = {y in B^+ : |xi~(y) + e_2| >= alpha} in the frame where nu_S(x0) = -e_2,
/// B^+ the half-ball on the -nu side. Requires sup|xi| = 1 within 1e-6.
NalphaProbe nalpha_density(const VectorField& xi, const OrientedInterface& S, const Vec& x0, double alpha,
                           const std::vector<double>& radii, double eps_density = 1e-2, const DensityOptions& opt = {});

/// z_2 - |z|^2 / 2 for z = xi + e_2. Equals (1 - |xi|^2) / 2.
double quadratic_margin(const Vec& xi);

/// Margins of the quadratic inequality over sampled values of xi, with the closed form as a cross-check.
VerificationReport quadratic_inequality_values(const std::vector<Vec>& values, double identity_tol = 1e-12);
/// The same over the nodes of a planar grid.
VerificationReport quadratic_inequality_check(const VectorField& xi, const GridSpec& grid, double identity_tol = 1e-12);

struct ConsistencyOptions {
    quad::Tolerance tol{1e-12, 1e-10, 4000};
    double defect_tol = 1e-2;
};

/// Per k: (a) |int z_k . grad psi| for psi supported off S_k; (b) |int_H z_k . grad psi - w int_{dH} psi|
/// for psi meeting dH, where H is the half-plane on the -nu side of T_{x0} S and w = trace_value.
/// Planar lines and circles only.
VerificationReport blowup_trace_consistency(const BlowupSequence& seq, const OrientedInterface& S, double trace_value,
                                            const std::vector<TestFunction>& psi_family,
                                            const ConsistencyOptions& opt = {});

/// Five bumps centred on dH and three inside H off the interface, in blow-up coordinates.
std::vector<TestFunction> default_blowup_tests(const Vec& nu);

/// k, r_k, defect, exponent series of a consistency report.
std::string consistency_csv(const VerificationReport& report);

/// Diagnostics for the Lebesgue-point conditions at x0: r kappa of the interface, spread of the
/// pairing trace estimates across scales, and Gauss-Green residuals on small balls divided by r.
VerificationReport lebesgue_diagnostics(const VectorField& field, const OrientedInterface& S, const Vec& x0,
                                        const ConvexRegion& omega, const std::vector<double>& radii);

}  // namespace divlab
