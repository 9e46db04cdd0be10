#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "divlab/blowup.hpp"
#include "divlab/errors.hpp"
#include "divlab/fields.hpp"

using namespace divlab;

namespace {

const OrientedInterface kCircle = OrientedInterface::circle(Vec{0.0, 0.0}, 1.0);
const OrientedInterface kAxis = OrientedInterface::line(Vec{0.0, 0.0}, Vec{0.0, -1.0});

double series_value(const VerificationReport& r, std::size_t k, const char* key)
{
    const auto& v = r.details["series"][k][key];
    return v.is_number() ? v.get<double>() : NAN;
}

}  // namespace

TEST_CASE("rescaling")
{
    const VectorField c = rescale(constant_field(Vec{0.2, -0.9}), Vec{3.0, 1.0}, 0.01);
    CHECK(norm(c(Vec{-0.4, 7.0}) - Vec{0.2, -0.9}) == 0.0);

    const double r = std::ldexp(1.0, -6);
    const VectorField z = rescale(make_capillary_field(1.0), Vec{1.0, 0.0}, r);
    const Vec v = z(Vec{-1.0, 0.0});
    CHECK(v[0] == doctest::Approx(1.0 - r).epsilon(1e-15));
    CHECK(v[1] == 0.0);
    CHECK(z.divergence(Vec{-1.0, 0.0}) == doctest::Approx(2.0 * r));
    CHECK_FALSE(z.in_domain(Vec{0.5, 0.0}));
}

TEST_CASE("test densities")
{
    const auto g = TestDensity::gaussian(Vec{-1.0, 0.0}, 0.25, 0.5);
    const auto b = TestDensity::bump(Vec{0.3, 0.2}, 0.4);
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(b.mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.value(Vec{0.0, 0.0}) == 0.0);

    TestDensity heavy = b;
    heavy.value = [b](const Vec& y) { return 2.0 * b.value(y); };
    const auto seq = BlowupSequence::dyadic(constant_field(Vec{1.0, 0.0}), Vec{0.0, 0.0}, 1, 3);
    CHECK_THROWS_AS(weak_star_average(seq, {heavy}), PreconditionError);
}

TEST_CASE("weak-star averages")
{
    SUBCASE("constant field")
    {
        const auto seq = BlowupSequence::dyadic(constant_field(Vec{0.6, -0.8}), Vec{0.2, 0.0}, 2, 5);
        const auto p = weak_star_average(seq, {TestDensity::bump(Vec{0.0, 1.0}, 0.5)});
        for (const Vec& a : p.averages[0]) CHECK(norm(a - Vec{0.6, -0.8}) <= 1e-10);
        CHECK(p.report(Vec{0.6, -0.8}).passed());
    }
    SUBCASE("capillary field converges to nu at rate r")
    {
        const auto seq = BlowupSequence::dyadic(make_capillary_field(1.0), Vec{1.0, 0.0}, 2, 8);
        const auto p = weak_star_average(seq, {TestDensity::gaussian(Vec{-1.0, 0.0}, 0.25, 0.5)});
        double worst_rate = 0.0;
        for (std::size_t k = 0; k < seq.radii.size(); ++k) {
            worst_rate = std::max(worst_rate, distance(p.averages[0][k], Vec{1.0, 0.0}) / seq.radii[k]);
        }
        // Tu(1 + r y) = (1 + r y1, r y2), so the defect is r |int f y| <= r * 1.5 on the support.
        CHECK(worst_rate <= 1.5);
        CHECK(distance(p.limits[0], Vec{1.0, 0.0}) <= 1e-2);
        for (const auto& row : p.jensen_margins) {
            for (double m : row) CHECK(m >= -1e-12);
        }
    }
}

TEST_CASE("N_alpha density")
{
    SUBCASE("maximal constant trace")
    {
        const auto p = nalpha_density(constant_field(Vec{0.0, -1.0}), kAxis, Vec{0.3, 0.0}, 0.1, {0.25, 0.125, 0.0625});
        for (double v : p.density.ratios) CHECK(v == 0.0);
        CHECK(p.verdict == "DENSITY_ZERO");
    }
    SUBCASE("capillary field")
    {
        std::vector<double> radii;
        for (int k = 3; k <= 8; ++k) radii.push_back(std::ldexp(1.0, -k));
        const auto p = nalpha_density(make_capillary_field(1.0), kCircle, Vec{1.0, 0.0}, 0.1, radii);
        CHECK(p.density.ratios.back() <= 1e-2);
        CHECK(p.verdict == "DENSITY_ZERO");
        // The rotation sends nu = e_1 to -e_2.
        const Vec e1{1.0, 0.0};
        const Vec image{p.rotation(0, 0) * e1[0] + p.rotation(0, 1) * e1[1], p.rotation(1, 0) * e1[0] + p.rotation(1, 1) * e1[1]};
        CHECK(norm(image - Vec{0.0, -1.0}) <= 1e-14);
    }
    SUBCASE("fields not normalized to one are rejected")
    {
        CHECK_THROWS_AS(nalpha_density(constant_field(Vec{0.0, -0.5}), kAxis, Vec{0.0, 0.0}, 0.1, {0.1}),
                        PreconditionError);
    }
}

TEST_CASE("quadratic inequality")
{
    CHECK(quadratic_margin(Vec{0.0, -1.0}) == 0.0);
    CHECK(quadratic_margin(Vec{1.0, 0.0}) == 0.0);
    CHECK(quadratic_margin(Vec{0.0, 0.0}) == 0.5);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> values;
    for (int i = 0; i < 10000; ++i) {
        const double r = std::sqrt(u(rng));
        const double a = 6.283185307179586 * u(rng);
        values.push_back(Vec{r * std::cos(a), r * std::sin(a)});
    }
    for (const Vec& v : values) CHECK(std::abs(quadratic_margin(v) - 0.5 * (1.0 - dot(v, v))) <= 1e-12);
    const auto rep = quadratic_inequality_values(values);
    CHECK(rep.passed());
    CHECK(rep.details["min_margin"].get<double>() >= -1e-12);

    GridSpec grid;
    grid.axes = {{0.6, 1.4, 9, false}, {-0.4, 0.4, 9, false}};
    CHECK(quadratic_inequality_check(make_capillary_field(1.5), grid).passed());
    CHECK_THROWS_AS(quadratic_inequality_values({Vec{1.5, 0.0}}), PreconditionError);
}

TEST_CASE("blow-up trace consistency")
{
    SUBCASE("constant field on a line")
    {
        const Vec c{0.3, -0.6};
        const auto seq = BlowupSequence::dyadic(constant_field(c), Vec{0.4, 0.0}, 1, 4);
        const Vec nu{0.0, -1.0};
        const auto r = blowup_trace_consistency(seq, kAxis, dot(c, nu), default_blowup_tests(nu));
        CHECK(r.passed());
        for (std::size_t k = 0; k < seq.radii.size(); ++k) {
            CHECK(series_value(r, k, "defect_a") <= 1e-12);
            CHECK(series_value(r, k, "defect_b") <= 1e-12);
        }
    }
    SUBCASE("capillary field")
    {
        const auto seq = BlowupSequence::dyadic(make_capillary_field(1.0), Vec{1.0, 0.0}, 2, 8);
        const auto r = blowup_trace_consistency(seq, kCircle, 1.0, default_blowup_tests(Vec{1.0, 0.0}));
        CHECK(r.passed());
        const std::size_t last = seq.radii.size() - 1;
        CHECK(series_value(r, last, "defect_b") <= 1e-2);
        for (std::size_t k = 1; k <= last; ++k) {
            CHECK(series_value(r, k, "defect_b") < series_value(r, k - 1, "defect_b"));
        }
        CHECK(series_value(r, last, "exponent_b") == doctest::Approx(1.0).epsilon(0.1));
        CHECK(consistency_csv(r).rfind("k,r_k,defect,exponent\n", 0) == 0);
    }
    SUBCASE("twisting field with zero trace")
    {
        const auto seq = BlowupSequence::dyadic(make_twisting_field(8), Vec{0.5, 0.0}, 2, 5);
        const auto r = blowup_trace_consistency(seq, kAxis, 0.0, default_blowup_tests(Vec{0.0, -1.0}));
        CHECK(r.passed());
        for (std::size_t k = 0; k < seq.radii.size(); ++k) CHECK(series_value(r, k, "defect_b") <= 1e-2);
    }
}
