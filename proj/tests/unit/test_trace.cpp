#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "divlab/errors.hpp"
#include "divlab/fields.hpp"
#include "divlab/trace.hpp"

using namespace divlab;

namespace {

std::vector<double> dyadic(int lo, int hi)
{
    std::vector<double> r;
    for (int k = lo; k <= hi; ++k) r.push_back(std::ldexp(1.0, -k));
    return r;
}

const OrientedInterface kAxis = OrientedInterface::line(Vec{0.0, 0.0}, Vec{0.0, -1.0});
const OrientedInterface kCircle = OrientedInterface::circle(Vec{0.0, 0.0}, 1.0);

}  // namespace

TEST_CASE("linear fit")
{
    const std::vector<double> r{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> v;
    for (double x : r) v.push_back(2.0 - 3.0 * x);
    const LinearFit f = fit_linear(r, v);
    CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.slope == doctest::Approx(-3.0).epsilon(1e-14));
    CHECK(f.residual_spread <= 1e-14);
    double s = 0.0;
    for (double w : f.weights) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("interfaces")
{
    CHECK(kCircle.normal_at(Vec{0.0, 2.0})[1] == doctest::Approx(1.0));
    CHECK(kAxis.distance(Vec{0.3, 0.7}) == doctest::Approx(0.7));
    const auto inner = OrientedInterface::circle(Vec{1.0, 1.0}, 2.0, -1);
    CHECK(inner.normal_at(Vec{3.0, 1.0})[0] == doctest::Approx(-1.0));
    const auto scaled = kCircle.rescaled(Vec{1.0, 0.0}, 0.25);
    CHECK(scaled.distance(Vec{0.0, 0.0}) <= 1e-14);
    CHECK(scaled.curvature_bound() == doctest::Approx(0.25));
}

TEST_CASE("ball average")
{
    SUBCASE("constant field reproduces c . nu")
    {
        const auto p = weak_trace_ball_average(constant_field(Vec{0.0, -1.0}), kAxis, Vec{0.3, 0.0}, dyadic(1, 5));
        for (double e : p.estimates) CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("capillary field against a midpoint-rule oracle")
    {
        const VectorField t = make_capillary_field(1.0);
        const auto p = weak_trace_ball_average(t, kCircle, Vec{1.0, 0.0}, dyadic(3, 10));
        CHECK(std::abs(p.extrapolated - 1.0) <= 1e-2);

        // Average of x_1 over B_r((1,0)) intersected with the unit disk.
        const double r = 0.125;
        const int m = 1500;
        double num = 0.0;
        double area = 0.0;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                const double x = 1.0 - r + 2.0 * r * (i + 0.5) / m;
                const double y = -r + 2.0 * r * (j + 0.5) / m;
                if ((x - 1.0) * (x - 1.0) + y * y >= r * r || x * x + y * y >= 1.0) continue;
                num += x;
                area += 1.0;
            }
        }
        CHECK(p.estimates[0] == doctest::Approx(num / area).epsilon(1e-4));
    }
    SUBCASE("base point must lie on the interface")
    {
        CHECK_THROWS_AS(weak_trace_ball_average(constant_field(Vec{0.0, 1.0}), kAxis, Vec{0.0, 0.1}, dyadic(1, 4)),
                        PreconditionError);
    }
    SUBCASE("twisting field at the symmetric point averages to zero")
    {
        const auto p = weak_trace_ball_average(make_twisting_field(8), kAxis, Vec{0.5, 0.0}, dyadic(2, 6));
        for (double e : p.estimates) CHECK(std::abs(e) <= 1e-6);
    }
}

TEST_CASE("curvilinear rectangles")
{
    const auto p = weak_trace_curvilinear(constant_field(Vec{0.4, -0.7}), kAxis, Vec{0.2, 0.0}, 0.1, dyadic(2, 6));
    for (double e : p.estimates) CHECK(e == doctest::Approx(0.7).epsilon(1e-12));

    const auto q = weak_trace_curvilinear(make_capillary_field(1.0), kCircle, Vec{1.0, 0.0}, 0.1, dyadic(3, 8));
    CHECK(std::abs(q.extrapolated - 1.0) <= 1e-2);

    // A rectangle deeper than the radius of curvature overlaps itself.
    CHECK_THROWS_AS(weak_trace_curvilinear(make_capillary_field(1.0), kCircle, Vec{1.0, 0.0}, 0.1, {1.5}),
                    PreconditionError);
}

TEST_CASE("sphere flux")
{
    const auto p = weak_trace_sphere_flux(constant_field(Vec{0.25, -2.0}), kAxis, Vec{0.0, 0.0}, dyadic(0, 3));
    for (double e : p.estimates) CHECK(e == doctest::Approx(2.0).epsilon(1e-12));
    const auto q = weak_trace_sphere_flux(make_capillary_field(1.0), kCircle, Vec{1.0, 0.0}, dyadic(3, 8));
    CHECK(std::abs(q.extrapolated - 1.0) <= 1e-2);
}

TEST_CASE("pairing")
{
    const ConvexRegion square = ConvexRegion::rectangle(Vec{0.0, 0.0}, Vec{1.0, 1.0});
    std::vector<TestFunction> family;
    for (int j = 0; j < 10; ++j) family.push_back(TestFunction::bump(Vec{0.055 + 0.09 * j, 0.0}, 0.04 + 0.004 * j));

    SUBCASE("twisting field has zero trace on the axis")
    {
        const auto values = weak_trace_pairing(make_twisting_field(8), square, family);
        REQUIRE(values.size() == 10);
        for (const auto& v : values) {
            CHECK(std::abs(v.pairing) <= 1e-6 * v.c1_norm);
            CHECK(v.boundary_flux == 0.0);
        }
    }
    SUBCASE("zero field")
    {
        for (const auto& v : weak_trace_pairing(make_field("zero:n=2"), square, family)) CHECK(v.pairing == 0.0);
    }
    SUBCASE("capillary trace is one")
    {
        const ConvexRegion disk = ConvexRegion::disk(Vec{0.0, 0.0}, 1.0);
        const auto v = weak_trace_pairing(make_capillary_field(1.0), disk, {TestFunction::constant(1.0)});
        CHECK(v[0].pairing == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-9));
        const auto p = weak_trace_pairing_probe(make_capillary_field(1.0), disk, Vec{1.0, 0.0}, dyadic(3, 7));
        for (double e : p.estimates) CHECK(e == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("density")
{
    const std::vector<double> radii{0.5, 0.25, 0.125, 0.0625};
    const DensityOptions opt{20000, 10, 99};

    const auto half = density([](const Vec& y) { return y[1] > 0.0; }, Vec{0.0, 0.0}, radii, opt);
    CHECK(std::abs(half.theta - 0.5) <= 3.0 * half.theta_stderr + 1e-12);

    const auto quadrant = density([](const Vec& y) { return y[0] > 0.0 && y[1] > 0.0; }, Vec{0.0, 0.0}, radii, opt);
    CHECK(std::abs(quadrant.theta - 0.25) <= 3.0 * quadrant.theta_stderr + 1e-12);

    const auto ball = density([](const Vec& y) { return dot(y, y) < 1.0; }, Vec{0.0, 0.0}, radii, opt);
    CHECK(ball.theta == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : ball.ratios) CHECK(v == 1.0);

    SUBCASE("seeded runs are reproducible")
    {
        const auto again = density([](const Vec& y) { return y[0] > 0.0 && y[1] > 0.0; }, Vec{0.0, 0.0}, radii, opt);
        CHECK(again.ratios == quadrant.ratios);
        const DensityOptions other{20000, 10, 100};
        const auto moved = density([](const Vec& y) { return y[0] > 0.0 && y[1] > 0.0; }, Vec{0.0, 0.0}, radii, other);
        CHECK(moved.ratios != quadrant.ratios);
    }
    SUBCASE("ratios lie in [0, 1]")
    {
        const auto wedge = density([](const Vec& y) { return y[1] > std::abs(y[0]) * 3.0; }, Vec{0.2, 0.1}, radii, opt);
        for (double v : wedge.ratios) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(half.csv().rfind("radius,ratio,stderr\n", 0) == 0);
}

TEST_CASE("one-sided approximate limits")
{
    const DensityOptions opt{20000, 10, 7};
    SUBCASE("constant field")
    {
        const auto r = one_sided_ap_lim(constant_field(Vec{0.3, 0.4}), kAxis, Vec{0.5, 0.0}, Vec{0.3, 0.4}, {0.1},
                                        dyadic(2, 6), 1e-2, opt);
        CHECK(r.outcome == "AP_LIM_CONFIRMED");
        for (const auto& c : r.checks) CHECK(c.verdict == "PASS");
    }
    SUBCASE("capillary field")
    {
        const auto r = one_sided_ap_lim(make_capillary_field(1.0), kCircle, Vec{1.0, 0.0}, Vec{1.0, 0.0},
                                        {0.2, 0.1, 0.05}, dyadic(3, 8), 1e-2, opt);
        CHECK(r.outcome == "AP_LIM_CONFIRMED");
    }
    SUBCASE("twisting field")
    {
        std::vector<double> radii;
        for (int i = 2; i <= 5; ++i) radii.push_back(0.75 * std::ldexp(1.0, -i));
        const auto r = one_sided_ap_lim(make_twisting_field(8), kAxis, Vec{0.5, 0.0}, Vec{0.0, 0.0}, {0.5}, radii,
                                        1e-2, opt);
        CHECK(r.outcome == "AP_LIM_REJECTED");
    }
}
