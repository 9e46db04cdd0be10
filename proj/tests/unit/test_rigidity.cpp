#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "divlab/errors.hpp"
#include "divlab/fields.hpp"
#include "divlab/rigidity.hpp"

using namespace divlab;

namespace {

// Classical RK4 in time with a fixed step; the last step is shortened to land on x_n = h.
Vec rk4_to_height(const VectorField& X, Vec x, double h, double dt, double* time)
{
    const int n = x.size();
    auto step = [&](const Vec& y, double s) {
        const Vec k1 = X(y);
        const Vec k2 = X(y + 0.5 * s * k1);
        const Vec k3 = X(y + 0.5 * s * k2);
        const Vec k4 = X(y + s * k3);
        return y + (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    double t = 0.0;
    while (true) {
        const Vec next = step(x, dt);
        if (next[n - 1] >= h) break;
        x = next;
        t += dt;
    }
    double s = (h - x[n - 1]) / X(x)[n - 1];
    for (int it = 0; it < 30; ++it) {
        const Vec y = step(x, s);
        s -= (y[n - 1] - h) / X(y)[n - 1];
    }
    *time = t + s;
    return step(x, s);
}

// Composite Simpson rule with an even number of panels.
double simpson(const std::function<double(double)>& f, double a, double b, int m = 4000)
{
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("flow integration")
{
    SUBCASE("vertical constant field")
    {
        const double eps = 0.25;
        const auto s = integrate_flow(constant_field(Vec{0.0, 0.0, eps}), Vec{0.3, -0.2, 0.0}, 1.0);
        CHECK(s.t == doctest::Approx(1.0 / eps).epsilon(1e-12));
        CHECK(s.position[0] == doctest::Approx(0.3));
        CHECK(s.position[1] == doctest::Approx(-0.2));
        CHECK(s.position[2] == doctest::Approx(1.0));
        CHECK(s.delta == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("diagonal constant field")
    {
        const auto s = integrate_flow(constant_field(Vec{1.0, 1.0}), Vec{0.0, 0.0}, 1.0);
        CHECK(s.t == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.position[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("downward field")
    {
        try {
            integrate_flow(constant_field(Vec{1.0, -1.0}), Vec{0.0, 0.0}, 1.0);
            FAIL("expected a flow error");
        } catch (const FlowError& e) {
            CHECK(e.kind() == "MONOTONICITY_VIOLATION");
        }
    }
    SUBCASE("stream bump against a fixed-step reference")
    {
        const VectorField eta = make_stream_bump();
        const double eps = 2.0 * eta.sup_bound();
        const VectorField X = add_constant(eta, Vec{0.0, eps});
        for (double q : {-0.6, 0.0, 0.35, 0.8}) {
            const auto s = integrate_flow(X, Vec{q, 0.5}, 3.5);
            double t_ref = 0.0;
            const Vec ref = rk4_to_height(X, Vec{q, 0.5}, 3.5, 2e-4, &t_ref);
            CHECK(std::abs(s.position[0] - ref[0]) <= 1e-8);
            CHECK(std::abs(s.t - t_ref) <= 1e-8);
            CHECK(s.min_delta > 0.0);
        }
    }
    SUBCASE("semigroup property")
    {
        const VectorField eta = make_field("stream:bump3d");
        const VectorField X = add_constant(eta, Vec{0.0, 0.0, 2.0 * eta.sup_bound()});
        const Vec p{0.4, 0.1, 0.0};
        const auto whole = integrate_flow(X, p, 2.5);
        const auto first = integrate_flow(X, p, 1.2);
        const auto second = integrate_flow(X, first.position, 2.5);
        CHECK(norm(second.position - whole.position) <= 1e-9);
        CHECK(first.t + second.t == doctest::Approx(whole.t).epsilon(1e-9));
    }
}

TEST_CASE("flow tube")
{
    SUBCASE("zero field")
    {
        const FlowTube t = build_flow_tube(make_field("zero:n=3"), 0.5, Plate{Vec{0, 0}, Vec{1, 1}}, 1.0,
                                           FlowTubeOptions{8});
        CHECK(t.top_integral == 0.5);
        CHECK(t.bottom_measure == 1.0);
        CHECK(t.residual == 0.0);
        CHECK(t.report().passed());
    }
    SUBCASE("planar bump supported in 1 < z < 2")
    {
        const VectorField eta = make_field("stream:bump:cx=0:cy=1.5:radius=0.5");
        const FlowTube t = build_flow_tube(eta, 2.0 * eta.sup_bound(), Plate{Vec{-3.0}, Vec{3.0}}, 3.0,
                                           FlowTubeOptions{64});
        CHECK(t.residual <= 1e-6);
        CHECK(t.min_delta > 0.0);
    }
    SUBCASE("residual falls at least fourfold under refinement")
    {
        const VectorField eta = make_field("stream:bump3d");
        const Plate A{Vec{0.3, -0.7}, Vec{1.2, 0.4}};
        const double eps = 2.0 * eta.sup_bound();
        const FlowTube coarse = build_flow_tube(eta, eps, A, 2.5, FlowTubeOptions{16});
        const FlowTube fine = build_flow_tube(eta, eps, A, 2.5, FlowTubeOptions{32});
        CHECK(coarse.residual >= 4.0 * fine.residual);
    }
    SUBCASE("epsilon must dominate the negative part")
    {
        const VectorField eta = make_stream_bump();
        CHECK_THROWS_AS(build_flow_tube(eta, 0.1 * eta.sup_bound(), Plate{Vec{-1.0}, Vec{1.0}}, 3.5), PreconditionError);
    }
    SUBCASE("csv header")
    {
        const FlowTube t = build_flow_tube(make_field("zero:n=3"), 0.5, Plate{Vec{0, 0}, Vec{1, 1}}, 1.0,
                                           FlowTubeOptions{4});
        CHECK(t.csv().rfind("q1,q2,h,phi1,phi2,phi3,delta\n", 0) == 0);
    }
}

TEST_CASE("strip identity")
{
    const VectorField bump = make_stream_bump();
    SUBCASE("zero field")
    {
        const auto r = strip_identity_2d(make_field("stream:zero"), 2.0, 1.0);
        CHECK(r.passed());
    }
    for (auto [rr, tt] : {std::pair{5.0, 3.0}, std::pair{2.0, 1.0}}) {
        const auto r = strip_identity_2d(bump, rr, tt);
        CHECK(r.passed());
    }
    SUBCASE("straddling bump against Simpson")
    {
        const VectorField moved = make_field("stream:bump:cx=2:cy=1.5:radius=1");
        const double r = 2.0;
        const double t = 2.2;
        const double lhs = simpson([&](double x) { return moved(Vec{x, t})[1]; }, -r, r);
        const double rhs = simpson([&](double y) { return moved(Vec{-r, y})[0] - moved(Vec{r, y})[0]; }, 0.0, t);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        const auto rep = strip_identity_2d(moved, r, t);
        CHECK(rep.passed());
        CHECK(rep.details["top_integral"].get<double>() == doctest::Approx(lhs).epsilon(1e-9));
        CHECK(std::abs(lhs) > 0.1);
    }
}

TEST_CASE("certificates")
{
    SUBCASE("zero potential")
    {
        CylindricalPotential P;
        P.dim = 4;
        P.id = "zero";
        P.V = [](double, double) { return 0.0; };
        P.dV = [](double, double) { return std::pair{0.0, 0.0}; };
        const auto c = certify_potential(P, certification_grid(40, 40), 1.0);
        CHECK(c.verdict == "CERTIFIED_SAMPLED");
        for (const auto& m : c.conditions) CHECK(m.min_margin >= 0.0);
    }
    SUBCASE("counterexample at the automatic gamma")
    {
        const auto c = certify_potential(counterexample_potential(4, auto_gamma(4)), certification_grid(), 1.0);
        CHECK(c.certified());
        CHECK_FALSE(c.witness.has_value());
        for (const auto& m : c.conditions) CHECK(m.min_margin >= -1e-12);
    }
    SUBCASE("gamma = 1 violates the gradient bound")
    {
        const auto c = certify_potential(counterexample_potential(4, 1.0), certification_grid(), 1.0);
        CHECK(c.verdict == "VIOLATED");
        REQUIRE(c.witness.has_value());
        CHECK(c.witness->name.rfind("V1", 0) == 0);
        CHECK(c.witness->lhs > c.witness->rhs);
        // Re-evaluate the witness directly.
        const auto P = counterexample_potential(4, 1.0);
        const auto [vr, vz] = P.dV(c.witness->rho, c.witness->z);
        CHECK(std::hypot(vr, vz) > c.witness->rho * c.witness->rho);
        CHECK_FALSE(c.report().passed());
    }
    SUBCASE("certification is monotone in gamma")
    {
        for (double g : {0.05, 0.1, auto_gamma(4)}) {
            CHECK(certify_potential(counterexample_potential(4, g), certification_grid(60, 60), 1.0).certified());
        }
    }
}

TEST_CASE("separable obstruction")
{
    struct Case {
        double gamma, rho0, psi0;
    };
    for (const Case c : {Case{1.0, 1.0, 1.0}, Case{2.0, 1.0, 1.0}, Case{0.5, 2.0, 1.0}}) {
        const auto r = separable_demo(c.gamma, c.rho0, c.psi0);
        CHECK(r.passed());
        const double predicted = c.rho0 * std::exp(1.0 / (c.gamma * c.psi0));
        CHECK(r.details["blowup_radius"].get<double>() == doctest::Approx(predicted).epsilon(1e-2));
    }
    CHECK(separable_demo(1.0, 1.0, 1.0).details["blowup_radius"].get<double>() ==
          doctest::Approx(std::numbers::e).epsilon(1e-6));
    CHECK_THROWS_AS(separable_demo(-1.0, 1.0, 1.0), PreconditionError);
}
