#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "divlab/calculus.hpp"
#include "divlab/errors.hpp"
#include "divlab/fields.hpp"
#include "divlab/quadrature.hpp"

using namespace divlab;

namespace {

Vec cyl_point(int n, double rho, double z)
{
    Vec x(n);
    x[0] = rho;
    x[n - 1] = z;
    return x;
}

// eta from the closed-form potential, written out independently of the library.
Vec display_field(int n, double gamma, const Vec& x)
{
    const double z = x[n - 1];
    Vec out(n);
    if (z <= 0.0) return out;
    double rho2 = 0.0;
    for (int i = 0; i < n - 1; ++i) rho2 += x[i] * x[i];
    const double rho = std::sqrt(rho2);
    const double m = n - 1.0;
    const double g = std::pow(1.0 + std::pow(rho, m), 1.0 / m) - 1.0;
    const double vz = gamma * g * 2.0 * z / (1.0 + z * z * z * z);
    const double dg_over_rho_m2 = std::pow(1.0 + std::pow(rho, m), 1.0 / m - 1.0);  // g' / rho^{n-2}
    for (int i = 0; i < n - 1; ++i) out[i] = -std::pow(rho, 1.0 - n) * vz * x[i];
    out[n - 1] = gamma * dg_over_rho_m2 * std::atan(z * z);
    return out;
}

}  // namespace

TEST_CASE("gamma bounds match the two closed forms")
{
    const double C = (std::numbers::pi + std::pow(3.0, 0.75)) / 2.0;
    const auto [b1, b2] = gamma_bounds(4);
    CHECK(b1 == doctest::Approx(1.0 / C).epsilon(1e-13));
    CHECK(b2 == doctest::Approx(std::pow(2.0, -8.0 / 3.0)).epsilon(1e-13));
    CHECK(b1 == doctest::Approx(0.3689288348837).epsilon(1e-12));
    CHECK(b2 == doctest::Approx(0.1574901312369).epsilon(1e-12));
    CHECK(gamma_bounds(5).second == doctest::Approx(std::pow(2.0, -11.0 / 4.0)).epsilon(1e-13));
    for (int n = 4; n <= 8; ++n) CHECK(gamma_bounds(n).first == b1);
    CHECK(auto_gamma(4) == b2);
}

TEST_CASE("counterexample field rejects bad parameters")
{
    CHECK_THROWS_AS(make_counterexample_field(3), Error);
    CHECK_THROWS_AS(make_counterexample_field(4, 0.2), Error);
    CHECK_NOTHROW(make_counterexample_field(4, auto_gamma(4)));
}

TEST_CASE("counterexample field values")
{
    const int n = 4;
    const double gamma = auto_gamma(n);
    const VectorField eta = make_counterexample_field(n);

    SUBCASE("vanishes for z <= 0")
    {
        for (double z : {0.0, -1e-9, -0.5, -3.0}) {
            for (double rho : {0.0, 0.3, 2.0}) CHECK(norm(eta(cyl_point(n, rho, z))) == 0.0);
        }
    }
    SUBCASE("axis value")
    {
        const Vec v = eta(cyl_point(n, 0.0, 1.0));
        CHECK(v[0] == 0.0);
        CHECK(v[1] == 0.0);
        CHECK(v[2] == 0.0);
        CHECK(std::abs(v[3] - gamma * std::numbers::pi / 4.0) <= 1e-12);
    }
    SUBCASE("bounded by one on the certification range")
    {
        double worst = 0.0;
        for (int i = 0; i < 120; ++i) {
            const double rho = std::pow(10.0, -3.0 + 6.0 * i / 119.0);
            for (int j = 0; j <= 100; ++j) worst = std::max(worst, norm(eta(cyl_point(n, rho, 0.1 * j))));
        }
        CHECK(worst <= 1.0);
    }
    SUBCASE("matches the display formula off the axis")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int k = 0; k < 200; ++k) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x[i] = u(rng);
            CHECK(norm(eta(x) - display_field(n, gamma, x)) <= 1e-13);
        }
    }
    SUBCASE("continuous across z = 0")
    {
        // The radial part is first order in z, the vertical part second order.
        for (double rho : {0.1, 1.0, 5.0}) {
            double prev = INFINITY;
            for (double d : {1e-2, 1e-4, 1e-6}) {
                const double ratio = norm(eta(cyl_point(n, rho, d))) / d;
                CHECK(ratio <= prev * (1.0 + 1e-6));
                prev = ratio;
            }
            CHECK(norm(eta(cyl_point(n, rho, 1e-6))) <= 1e-5);
        }
    }
}

TEST_CASE("twisting field")
{
    const VectorField xi = make_twisting_field(8);
    CHECK(twisting_balls_disjoint(8));

    for (int i = 1; i <= 4; ++i) {
        const double h = std::ldexp(1.0, -i);
        for (int j = 1; j < (1 << i); ++j) CHECK(norm(xi(Vec{j * h, h})) == 0.0);
    }
    CHECK(norm(xi(Vec{0.5, 0.75})) == 0.0);
    CHECK(norm(xi(Vec{0.3, -0.2})) == 0.0);
    CHECK(norm(xi(Vec{2.0, 0.5})) == 0.0);

    // Largest |xi| along a ray of the level-1 ball.
    const Vec c{0.5, 0.5};
    const auto best = quad::golden_section_max([&](double s) { return norm(xi(c + Vec{s, 0.0})); }, 0.0, 0.125, 1e-12);
    CHECK(best.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(xi.sup_bound() >= best.value - 1e-12);
}

TEST_CASE("capillary field")
{
    const VectorField t = make_capillary_field(1.0);
    const Vec v = t(Vec{0.5, 0.0});
    CHECK(v[0] == doctest::Approx(0.5));
    CHECK(v[1] == 0.0);
    CHECK(t.divergence(Vec{0.1, -0.7}) == doctest::Approx(2.0));
    CHECK(norm(t(Vec{1.0 - 1e-9, 0.0})) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(t(Vec{1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(t(Vec{0.8, 0.8}), DomainError);
    CHECK(make_capillary_field(2.0).divergence(Vec{0.5, 0.5}) == doctest::Approx(1.0));
}

TEST_CASE("stream fields")
{
    const VectorField zero = make_field("stream:zero");
    CHECK(norm(zero(Vec{0.3, 0.1})) == 0.0);

    const VectorField bump = make_stream_bump();
    for (double x : {-3.0, 0.0, 0.5, 2.0}) {
        for (double z : {-1.0, 0.0, 0.99}) CHECK(norm(bump(Vec{x, z})) == 0.0);
    }
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-1.5, 1.5), uz(0.5, 3.5);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Vec x{ux(rng), uz(rng)};
        worst = std::max(worst, std::abs(numeric_divergence(bump, x, 1e-4)));
        CHECK(bump.divergence(x) == 0.0);
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("potential_to_field")
{
    const int n = 4;
    SUBCASE("zero potential")
    {
        CylindricalPotential P;
        P.dim = n;
        P.V = [](double, double) { return 0.0; };
        P.dV = [](double, double) { return std::pair{0.0, 0.0}; };
        const VectorField f = potential_to_field(P);
        CHECK(norm(f(Vec{0.2, -0.4, 1.0, 0.7})) == 0.0);
    }
    SUBCASE("z-independent potential has no radial part")
    {
        CylindricalPotential P;
        P.dim = n;
        P.V = [](double rho, double) { return rho * rho; };
        P.dV = [](double rho, double) { return std::pair{2.0 * rho, 0.0}; };
        const VectorField f = potential_to_field(P);
        const Vec v = f(Vec{0.3, 0.4, 0.0, 1.0});
        CHECK(v[0] == 0.0);
        CHECK(v[1] == 0.0);
        CHECK(v[2] == 0.0);
    }
    SUBCASE("closed-form counterexample potential")
    {
        const double gamma = auto_gamma(n);
        const VectorField f = potential_to_field(counterexample_potential(n, gamma));
        const VectorField eta = make_counterexample_field(n, gamma);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double rho = std::pow(10.0, -3.0 + 6.0 * i / 49.0);
            for (int j = 0; j < 50; ++j) {
                const Vec x = cyl_point(n, rho, -1.0 + 11.0 * j / 49.0);
                worst = std::max(worst, norm(f(x) - eta(x)));
            }
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("field_to_potential")
{
    const int n = 4;
    const double gamma = auto_gamma(n);

    SUBCASE("zero field")
    {
        const CylindricalPotential P = field_to_potential(make_field("zero:n=4"));
        CHECK(P.V(0.7, 2.0) == 0.0);
    }
    SUBCASE("recovers the closed form")
    {
        const CylindricalPotential P = field_to_potential(make_counterexample_field(n, gamma));
        const CylindricalPotential Q = counterexample_potential(n, gamma);
        double worst = 0.0;
        for (double rho : {0.01, 0.3, 1.0, 2.5, 5.0}) {
            for (double z : {-1.0, 0.2, 1.0, 3.0, 5.0}) worst = std::max(worst, std::abs(P.V(rho, z) - Q.V(rho, z)));
        }
        CHECK(worst <= 1e-8);
        // Closed form spelled out.
        const double rho = 1.7;
        const double z = 0.9;
        CHECK(Q.V(rho, z) ==
              doctest::Approx(gamma * (std::cbrt(1.0 + rho * rho * rho) - 1.0) * std::atan(z * z)).epsilon(1e-14));
    }
    SUBCASE("round trip through the potential")
    {
        const VectorField eta = make_counterexample_field(n, gamma);
        const VectorField back = potential_to_field(field_to_potential(eta));
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ur(0.05, 4.0), uz(0.05, 4.0);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Vec x = cyl_point(n, ur(rng), uz(rng));
            worst = std::max(worst, norm(back(x) - eta(x)));
        }
        CHECK(worst <= 1e-6);
    }
    SUBCASE("rejects fields without cylindrical symmetry")
    {
        CHECK_THROWS_AS(field_to_potential(constant_field(Vec{1.0, 0.0, 0.0, 1.0})), Error);
    }
    SUBCASE("potential is continuous at the axis")
    {
        const CylindricalPotential Q = counterexample_potential(n, gamma);
        double prev = INFINITY;
        for (double rho : {1e-1, 1e-2, 1e-3, 1e-4}) {
            const double gap = std::abs(Q.V(rho, 1.0) - Q.V(0.0, 1.0));
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev <= 1e-10);
    }
}

TEST_CASE("registry")
{
    for (const auto& [id, description] : field_registry()) {
        CHECK_NOTHROW(make_field(id));
        CHECK(!description.empty());
    }
    CHECK_THROWS_AS(make_field("nope"), UsageError);
    CHECK_THROWS_AS(make_field("capillary:R=1:q=2"), UsageError);
    CHECK_THROWS_AS(make_field("twisting:levels=x"), UsageError);
    CHECK(make_field("counterexample:n=5:gamma=auto").dim() == 5);
}
