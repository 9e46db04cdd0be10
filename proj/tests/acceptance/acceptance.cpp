// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "divlab/blowup.hpp"
#include "divlab/calculus.hpp"
#include "divlab/errors.hpp"
#include "divlab/fields.hpp"
#include "divlab/geometry.hpp"
#include "divlab/qmc.hpp"
#include "divlab/rigidity.hpp"
#include "divlab/trace.hpp"

using namespace divlab;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            note << " [failed: " << what << "]";
        }
    }
};

std::vector<double> dyadic(int lo, int hi)
{
    std::vector<double> r;
    for (int k = lo; k <= hi; ++k) r.push_back(std::ldexp(1.0, -k));
    return r;
}

double min_margin(const RigidityCertificate& c)
{
    double m = INFINITY;
    for (const auto& cond : c.conditions) m = std::min(m, cond.min_margin);
    return m;
}

void counterexample_certificate(Outcome& o)
{
    const double gamma = std::pow(2.0, -8.0 / 3.0);
    const auto cert = certify_potential(counterexample_potential(4, gamma), certification_grid(200, 200), 1.0);
    o.require(cert.certified(), "certificate");
    o.require(min_margin(cert) >= -1e-12, "min margin >= -1e-12");

    const VectorField eta = make_counterexample_field(4, gamma);
    const double axis = norm(eta(Vec{0.0, 0.0, 0.0, 1.0}));
    o.require(std::abs(axis - gamma * std::numbers::pi / 4.0) <= 1e-12, "|eta(0,1)| = gamma pi / 4");

    const double h = 1e-4;
    double worst = 0.0;
    int used = 0;
    for (std::uint64_t i = 1; used < 1000; ++i) {
        Vec x = qmc::halton(4, i, Vec(4));
        for (int k = 0; k < 3; ++k) x[k] = -3.0 + 6.0 * x[k];
        x[3] = -1.0 + 6.0 * x[3];
        if (eta.exclusion_distance(x) <= 20.0 * h) continue;
        worst = std::max(worst, std::abs(numeric_divergence(eta, x, h)));
        ++used;
    }
    o.require(worst <= 1e-6, "FD divergence <= 1e-6");
    o.note << "min margin " << min_margin(cert) << ", |eta(0,1)| " << axis << ", FD div " << worst << " at " << used
           << " points";
}

void gamma_arithmetic(Outcome& o)
{
    const auto [b1, b2] = gamma_bounds(4);
    const double e1 = 2.0 / (std::numbers::pi + std::pow(3.0, 0.75));
    const double e2 = std::pow(2.0, -8.0 / 3.0);
    o.require(std::abs(b1 - e1) <= 1e-12 * e1 && std::abs(b2 - e2) <= 1e-12 * e2, "bounds to 12 digits");

    const auto P = counterexample_potential(4, 1.0);
    const auto cert = certify_potential(P, certification_grid(200, 200), 1.0);
    o.require(cert.verdict == "VIOLATED", "gamma = 1 violated");
    o.require(cert.witness.has_value(), "witness");
    if (cert.witness) {
        const auto& w = *cert.witness;
        const auto [vr, vz] = P.dV(w.rho, w.z);
        o.require(std::hypot(vr, vz) > w.rho * w.rho, "witness breaks |grad V| <= rho^2");
        o.note << "bounds (" << b1 << ", " << b2 << "), witness " << w.name.substr(0, 2) << " at (rho, z) = (" << w.rho
               << ", " << w.z << "), margin " << w.min_margin;
    }
}

void flow_tube_identity(Outcome& o)
{
    FlowTubeOptions opt;
    opt.seeds_per_axis = 8;
    const FlowTube zero = build_flow_tube(make_field("zero:n=3"), 0.5, Plate{Vec{0, 0}, Vec{1, 1}}, 1.0, opt);
    o.require(zero.residual == 0.0, "zero field residual exactly 0");

    const VectorField eta = make_field("stream:bump3d");
    const Plate A{Vec{0.3, -0.7}, Vec{1.2, 0.4}};
    const double eps = 2.0 * eta.sup_bound();
    opt.seeds_per_axis = 64;
    const FlowTube fine = build_flow_tube(eta, eps, A, 2.5, opt);
    opt.seeds_per_axis = 32;
    const FlowTube coarse = build_flow_tube(eta, eps, A, 2.5, opt);
    o.require(fine.residual <= 1e-6, "64^2 residual <= 1e-6");
    const double ratio = coarse.residual / fine.residual;
    o.require(ratio >= 4.0, "refinement ratio >= 4");
    o.note << "zero residual " << zero.residual << ", bump residual " << fine.residual << " (64^2), "
           << coarse.residual << " (32^2), ratio " << ratio;
}

void strip_identity(Outcome& o)
{
    const VectorField eta = make_stream_bump();
    for (auto [r, t] : {std::pair{5.0, 3.0}, std::pair{2.0, 1.0}}) {
        const auto rep = strip_identity_2d(eta, r, t);
        const double residual = std::abs(rep.details["top_integral"].get<double>() -
                                          rep.details["side_integral"].get<double>());
        const double l1 = rep.details["l1_top"].get<double>();
        const double bound = 2.0 * t * eta.sup_bound();
        o.require(residual <= 1e-8, "residual <= 1e-8");
        o.require(bound - l1 > 0.0, "positive L1 margin");
        o.note << "(r,t)=(" << r << "," << t << "): residual " << residual << ", L1 margin " << bound - l1 << "; ";
    }
    // Both pairs above leave the bump outside the strip edges; an off-centre bump cut by a strip edge is not trivial.
    const auto cut = strip_identity_2d(make_stream_bump(Vec{0.4, 2.0}, 1.0), 0.6, 2.2);
    const double top = cut.details["top_integral"].get<double>();
    const double residual = std::abs(top - cut.details["side_integral"].get<double>());
    o.require(residual <= 1e-8 && std::abs(top) > 1e-3, "cutting strip");
    o.note << "cutting strip (0.6,2.2): top " << top << ", residual " << residual;
}

void twisting_trace(Outcome& o)
{
    const OrientedInterface axis = OrientedInterface::line(Vec{0.0, 0.0}, Vec{0.0, -1.0});
    const ConvexRegion square = ConvexRegion::rectangle(Vec{0.0, 0.0}, Vec{1.0, 1.0});

    std::vector<TestFunction> family;
    for (int j = 0; j < 10; ++j) family.push_back(TestFunction::bump(Vec{0.055 + 0.09 * j, 0.0}, 0.04 + 0.004 * j));
    double worst = 0.0;
    for (const auto& v : weak_trace_pairing(make_twisting_field(8), square, family)) {
        worst = std::max(worst, std::abs(v.pairing) / v.c1_norm);
    }
    o.require(worst <= 1e-6, "pairings <= 1e-6 ||psi||_C1");

    // Two radius subsequences c 4^{-i} through the self-similar point x0 = 1/3.
    const VectorField deep = make_twisting_field(10);
    const double c1 = std::pow(4.0, 5.0 / 32.0);
    std::vector<double> r1, r2;
    for (int i = 1; i <= 4; ++i) {
        r1.push_back(c1 * std::pow(4.0, -i));
        r2.push_back(2.0 * c1 * std::pow(4.0, -i));
    }
    const Vec x0{1.0 / 3.0, 0.0};
    const auto p1 = weak_trace_ball_average(deep, axis, x0, r1);
    const auto p2 = weak_trace_ball_average(deep, axis, x0, r2);
    const double l1 = 0.5 * (p1.estimates[2] + p1.estimates[3]);
    const double l2 = 0.5 * (p2.estimates[2] + p2.estimates[3]);
    o.require(std::abs(l1 - l2) >= 0.01, "subsequence gap >= 0.01");

    std::vector<double> radii;
    for (int i = 2; i <= 5; ++i) radii.push_back(0.75 * std::ldexp(1.0, -i));
    const auto ap = one_sided_ap_lim(make_twisting_field(8), axis, Vec{0.5, 0.0}, Vec{0.0, 0.0}, {0.5}, radii);
    o.require(ap.outcome == "AP_LIM_REJECTED", "ap-lim rejected");
    o.note << "worst pairing/C1 " << worst << ", subsequence limits " << l1 << " and " << l2 << " (gap "
           << std::abs(l1 - l2) << "), ap-lim " << ap.outcome;
}

void capillary_verticality(Outcome& o)
{
    const VectorField t = make_capillary_field(1.0);
    const OrientedInterface circle = OrientedInterface::circle(Vec{0.0, 0.0}, 1.0);
    const ConvexRegion disk = ConvexRegion::disk(Vec{0.0, 0.0}, 1.0);
    const Vec x0{1.0, 0.0};

    const double ball = weak_trace_ball_average(t, circle, x0, dyadic(3, 8)).extrapolated;
    const double curv = weak_trace_curvilinear(t, circle, x0, 0.1, dyadic(3, 8)).extrapolated;
    const double pair = weak_trace_pairing_probe(t, disk, x0, dyadic(3, 8)).extrapolated;
    for (double v : {ball, curv, pair}) o.require(std::abs(v - 1.0) <= 1e-2, "trace estimate within 1e-2 of 1");

    const auto ap = one_sided_ap_lim(t, circle, x0, Vec{1.0, 0.0}, {0.2, 0.1, 0.05}, dyadic(3, 8));
    o.require(ap.outcome == "AP_LIM_CONFIRMED", "ap-lim confirmed");

    const auto na = nalpha_density(t, circle, x0, 0.1, dyadic(3, 8));
    o.require(na.density.ratios.back() <= 1e-2, "N_alpha ratio <= 1e-2");

    const double H = integrate_region(disk, [&](const Vec& y) { return t.in_domain(y) ? t.divergence(y) : 0.0; },
                                      {1e-14, 1e-13, 4000})
                         .value;
    const double P = disk.perimeter();
    o.require(std::abs(H - P) <= 1e-6 && std::abs(P - 2.0 * std::numbers::pi) <= 1e-6, "int H = P = 2 pi");
    o.note << "ball " << ball << ", curvilinear " << curv << ", pairing " << pair << ", " << ap.outcome
           << ", N_alpha " << na.density.ratios.back() << ", int H " << H << ", P " << P;
}

void jensen_mollification(Outcome& o)
{
    const MollifierKernel k = MollifierKernel::standard(0.1);
    GridSpec grid;
    grid.axes = {{-1.0, 1.0, 5, false}, {-1.0, 1.0, 5, false}, {0.0, 2.0, 5, false}};
    const auto rep = jensen_check(constant_field(Vec{0.0, 0.0, 1.0}), PhiFunction::quadratic(), k, grid);
    double worst_margin = INFINITY;
    for (const auto& c : rep.checks) worst_margin = std::min(worst_margin, c.value);
    o.require(rep.passed() && worst_margin >= -1e-6, "Jensen margin >= -1e-6");

    const VectorField smooth = mollify(make_stream_bump(), k, false);
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
        Vec x = qmc::halton(2, static_cast<std::uint64_t>(i), Vec(2));
        x[0] = -1.5 + 3.0 * x[0];
        x[1] = 0.3 + 3.4 * x[1];
        worst = std::max(worst, std::abs(numeric_divergence(smooth, x, 1e-4)));
    }
    o.require(worst <= 1e-6, "mollified divergence <= 1e-6");
    o.note << "min Jensen margin " << worst_margin << ", mollified FD divergence " << worst;
}

void separable_obstruction(Outcome& o)
{
    struct Case {
        double gamma, rho0, psi0;
    };
    for (const Case c : {Case{1, 1, 1}, Case{2, 1, 1}, Case{0.5, 2, 1}}) {
        const auto rep = separable_demo(c.gamma, c.rho0, c.psi0);
        const double numeric = rep.details["blowup_radius"].get<double>();
        const double closed = c.rho0 * std::exp(1.0 / (c.gamma * c.psi0));
        const double rel = std::abs(numeric - closed) / closed;
        o.require(rel <= 1e-2, "blow-up radius within 1%");
        o.note << "(" << c.gamma << "," << c.rho0 << "," << c.psi0 << "): " << numeric << " vs " << closed << "; ";
    }
}

void quadratic_inequality(Outcome& o)
{
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = INFINITY;
    double identity = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double r = std::sqrt(u(rng));
        const double a = 2.0 * std::numbers::pi * u(rng);
        const Vec xi{r * std::cos(a), r * std::sin(a)};
        const double m = quadratic_margin(xi);
        worst = std::min(worst, m);
        identity = std::max(identity, std::abs(m - 0.5 * (1.0 - dot(xi, xi))));
    }
    o.require(worst >= -1e-12, "min margin >= -1e-12");
    o.require(identity <= 1e-12, "closed form to 1e-12");
    o.note << "min margin " << worst << ", identity defect " << identity;
}

void potential_roundtrip(Outcome& o)
{
    const int n = 4;
    const double gamma = auto_gamma(n);
    const VectorField eta = make_counterexample_field(n, gamma);
    const CylindricalPotential closed = counterexample_potential(n, gamma);
    const CylindricalPotential numeric = field_to_potential(eta);
    const VectorField rebuilt = potential_to_field(closed);

    double v_defect = 0.0;
    double f_defect = 0.0;
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
            const double rho = 0.01 + 5.0 * i / 49.0;
            const double z = -1.0 + 6.0 * j / 49.0;
            v_defect = std::max(v_defect, std::abs(numeric.V(rho, z) - closed.V(rho, z)));

            const double rl = std::pow(10.0, -3.0 + 6.0 * i / 49.0);
            const double zl = -1.0 + 11.0 * j / 49.0;
            const Vec x{rl, 0.0, 0.0, zl};
            f_defect = std::max(f_defect, norm(rebuilt(x) - eta(x)));
        }
    }
    o.require(v_defect <= 1e-8, "V to 1e-8");
    o.require(f_defect <= 1e-12, "field to 1e-12");
    o.note << "V defect " << v_defect << ", field defect " << f_defect;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<void(Outcome&)> body;
};

}  // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "counterexample certification", 30.0, counterexample_certificate},
        {2, "gamma-bound arithmetic", 5.0, gamma_arithmetic},
        {3, "flow-tube identity", 60.0, flow_tube_identity},
        {4, "strip identity", 10.0, strip_identity},
        {5, "twisting-field trace", 60.0, twisting_trace},
        {6, "capillary verticality", 60.0, capillary_verticality},
        {7, "Jensen and mollification", 30.0, jensen_mollification},
        {8, "separable obstruction", 5.0, separable_obstruction},
        {9, "quadratic inequality", 30.0, quadratic_inequality},
        {10, "potential round trip", 30.0, potential_roundtrip},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.note << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.limit_s) {
            o.pass = false;
            o.note << " [over time limit]";
        }
        if (!o.pass) ++failures;
        std::printf("criterion %2d %-30s %s  %.2fs/%.0fs  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                    c.limit_s, o.note.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
