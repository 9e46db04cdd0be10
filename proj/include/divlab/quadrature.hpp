#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "divlab/linalg.hpp"

namespace divlab::quad {

struct Tolerance {
    double abs = 1e-12;
    double rel = 1e-10;
    int max_intervals = 4000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
///
/// Interior breakpoints (kinks, jumps, tangencies of the integration domain) seed the
/// initial partition. The interval with the largest |K15 - G7| estimate is bisected
/// until the summed estimate falls below max(tol.abs, tol.rel * |value|).
/// Constant integrands are integrated exactly.
Result integrate(const Integrand& f, double a, double b, const Tolerance& tol = {},
                 std::span<const double> breakpoints = {});

/// Convenience wrapper returning only the value.
inline double integral(const Integrand& f, double a, double b, const Tolerance& tol = {},
                       std::span<const double> breakpoints = {})
{
    return integrate(f, a, b, tol, breakpoints).value;
}

/// Iterated adaptive quadrature over the axis-aligned box [lo, hi] (any dimension >= 1).
Result integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi,
                     const Tolerance& tol = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
std::vector<std::pair<double, double>> gauss_legendre(int n);

struct Extremum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal function on [a, b].
Extremum golden_section_max(const Integrand& f, double a, double b, double x_tol = 1e-10);

}  // namespace divlab::quad
