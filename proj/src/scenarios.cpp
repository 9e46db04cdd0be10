#include "divlab/scenarios.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "divlab/blowup.hpp"
#include "divlab/calculus.hpp"
#include "divlab/errors.hpp"
#include "divlab/fields.hpp"
#include "divlab/parallel.hpp"
#include "divlab/qmc.hpp"
#include "divlab/rigidity.hpp"
#include "divlab/trace.hpp"

namespace divlab {
namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& text, const std::string& what)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw UsageError("cannot parse " + what + " from '" + text + "'");
    }
    return v;
}

Vec parse_vec(const std::string& text, const std::string& what)
{
    const auto parts = split(text, ',');
    if (parts.size() > static_cast<std::size_t>(kMaxDim)) throw UsageError(what + " has too many components");
    Vec v(static_cast<int>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<int>(i)] = parse_number(parts[i], what);
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(part, what));
    return out;
}

/// dyadic:a:b -> 2^-k, k = a..b; geometric:r0:q:a:b -> r0 q^-k; otherwise a comma list.
std::vector<double> parse_radii(const std::string& text)
{
    const auto tok = split(text, ':');
    auto index = [&](const std::string& s) {
        const double v = parse_number(s, "radius index");
        if (v != std::floor(v)) throw UsageError("radius index must be an integer: " + s);
        return static_cast<int>(v);
    };
    std::vector<double> out;
    if (tok[0] == "dyadic") {
        if (tok.size() != 3) throw UsageError("radii must look like dyadic:3:8");
        for (int k = index(tok[1]); k <= index(tok[2]); ++k) out.push_back(std::ldexp(1.0, -k));
    } else if (tok[0] == "geometric") {
        if (tok.size() != 5) throw UsageError("radii must look like geometric:r0:q:k_lo:k_hi");
        const double r0 = parse_number(tok[1], "r0");
        const double q = parse_number(tok[2], "ratio");
        for (int k = index(tok[3]); k <= index(tok[4]); ++k) out.push_back(r0 * std::pow(q, -k));
    } else {
        out = parse_list(text, "radii");
    }
    if (out.empty()) throw UsageError("empty radius sequence '" + text + "'");
    for (double r : out) {
        if (!(r > 0.0)) throw UsageError("radii must be positive");
    }
    return out;
}

ConvexRegion parse_omega(const std::string& text)
{
    if (text == "unit-square") return ConvexRegion::rectangle(Vec{0.0, 0.0}, Vec{1.0, 1.0});
    if (text == "unit-disk") return ConvexRegion::disk(Vec{0.0, 0.0}, 1.0);
    const auto tok = split(text, ':');
    if (tok[0] == "rect" && tok.size() == 3) {
        return ConvexRegion::rectangle(parse_vec(tok[1], "rect corner"), parse_vec(tok[2], "rect corner"));
    }
    if (tok[0] == "disk" && tok.size() == 3) {
        return ConvexRegion::disk(parse_vec(tok[1], "disk centre"), parse_number(tok[2], "disk radius"));
    }
    throw UsageError("unknown domain '" + text + "' (unit-square, unit-disk, rect:x,y:x,y, disk:x,y:r)");
}

/// Circle matching a disk domain, otherwise the x-axis with normal -e_2.
OrientedInterface auto_interface(const VectorField& field)
{
    const auto& dom = field.domain();
    if (dom && dom->disks().size() == 1 && dom->half_planes().empty()) {
        return OrientedInterface::circle(dom->disks()[0].center, dom->disks()[0].radius);
    }
    return OrientedInterface::line(Vec{0.0, 0.0}, Vec{0.0, -1.0});
}

OrientedInterface parse_interface(const std::string& text, const VectorField& field)
{
    if (text == "auto") return auto_interface(field);
    const auto tok = split(text, ':');
    if (tok[0] == "line" && tok.size() == 3) {
        return OrientedInterface::line(parse_vec(tok[1], "line point"), parse_vec(tok[2], "line normal"));
    }
    if (tok[0] == "circle" && tok.size() == 3) {
        return OrientedInterface::circle(parse_vec(tok[1], "circle centre"), parse_number(tok[2], "circle radius"));
    }
    throw UsageError("unknown interface '" + text + "' (auto, line:px,py:nx,ny, circle:cx,cy:R)");
}

PhiFunction parse_phi(const std::string& text)
{
    if (text == "quadratic") return PhiFunction::quadratic();
    const auto tok = split(text, ':');
    if (tok[0] == "linear" && tok.size() == 2) return PhiFunction::linear(parse_number(tok[1], "gauge constant"));
    throw UsageError("unknown gauge '" + text + "' (quadratic, linear:c)");
}

std::function<bool(const Vec&)> parse_set(const std::string& text)
{
    if (text == "halfplane") return [](const Vec& y) { return y[1] > 0.0; };
    if (text == "quadrant") return [](const Vec& y) { return y[0] > 0.0 && y[1] > 0.0; };
    if (text == "disk") return [](const Vec& y) { return dot(y, y) < 1.0; };
    throw UsageError("unknown set '" + text + "' (halfplane, quadrant, disk)");
}

json vec_json(const Vec& v)
{
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

/// Typed access to scenario parameters with defaults.
class Args {
public:
    explicit Args(const Params& p) : p_(p) {}

    bool has(const std::string& k) const
    {
        const auto it = p_.find(k);
        return it != p_.end() && !it->second.empty();
    }
    std::string str(const std::string& k, const std::string& def) const { return has(k) ? p_.at(k) : def; }
    double num(const std::string& k, double def) const { return has(k) ? parse_number(p_.at(k), "--" + k) : def; }
    int integer(const std::string& k, int def) const
    {
        const double v = num(k, def);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError("--" + k + " must be an integer");
        return static_cast<int>(v);
    }
    bool flag(const std::string& k) const { return has(k) && p_.at(k) != "false" && p_.at(k) != "0"; }
    Vec vec(const std::string& k, const std::string& def) const { return parse_vec(str(k, def), "--" + k); }
    std::optional<double> opt_num(const std::string& k) const
    {
        if (!has(k)) return std::nullopt;
        return num(k, 0.0);
    }
    std::uint64_t seed() const
    {
        const double v = num("seed", static_cast<double>(kDefaultSeed));
        if (v < 0.0 || v != std::floor(v)) throw UsageError("--seed must be a nonnegative integer");
        return static_cast<std::uint64_t>(v);
    }
    DensityOptions density() const
    {
        DensityOptions d;
        d.samples = static_cast<std::size_t>(integer("samples", static_cast<int>(d.samples)));
        d.shifts = integer("shifts", d.shifts);
        d.seed = seed();
        if (d.shifts < 2 || d.samples < static_cast<std::size_t>(d.shifts)) {
            throw UsageError("need at least 2 shifts and one sample per shift");
        }
        return d;
    }

private:
    const Params& p_;
};

void merge_checks(VerificationReport& into, const VerificationReport& from, const std::string& prefix)
{
    for (Check c : from.checks) {
        c.name = prefix + c.name;
        into.checks.push_back(std::move(c));
    }
}

Vec default_x0(const OrientedInterface& S)
{
    if (S.kind() == OrientedInterface::Kind::line) return S.point(0.0) + 0.5 * perp(S.normal(0.0));
    return S.point(0.0);
}

// certify ------------------------------------------------------------------

struct CounterexampleId {
    int n = 4;
    double gamma = 0.0;
    bool automatic = true;
};

std::optional<CounterexampleId> parse_counterexample(const std::string& id)
{
    const auto tok = split(id, ':');
    if (tok[0] != "counterexample") return std::nullopt;
    CounterexampleId c;
    std::optional<std::string> gamma;
    for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto kv = split(tok[i], '=');
        if (kv.size() != 2) throw UsageError("malformed parameter '" + tok[i] + "' in " + id);
        if (kv[0] == "n") {
            c.n = static_cast<int>(parse_number(kv[1], "n"));
        } else if (kv[0] == "gamma") {
            gamma = kv[1];
        } else {
            throw UsageError("unknown parameter '" + kv[0] + "' in " + id);
        }
    }
    if (c.n < 4 || c.n > kMaxDim) throw UsageError("counterexample needs 4 <= n <= " + std::to_string(kMaxDim));
    if (gamma && *gamma != "auto") {
        c.gamma = parse_number(*gamma, "gamma");
        c.automatic = false;
    } else {
        c.gamma = auto_gamma(c.n);
    }
    return c;
}

ScenarioOutput op_certify(const Args& a)
{
    const std::string id = a.str("field", "counterexample:n=4:gamma=auto");
    const double c = a.num("c", 1.0);
    const GridSpec grid = certification_grid(a.integer("rho-points", 200), a.integer("z-points", 200));
    const auto ce = parse_counterexample(id);

    CylindricalPotential P = ce ? counterexample_potential(ce->n, ce->gamma) : field_to_potential(make_field(id));
    const RigidityCertificate cert = certify_potential(P, grid, c, a.num("margin-tol", 1e-12));

    ScenarioOutput out;
    VerificationReport& r = out.report;
    r.title = "rigidity certificate for " + id;
    r.outcome = cert.verdict;
    r.details = cert.to_json();
    if (a.has("expect")) {
        const std::string expect = a.str("expect", "");
        if (expect != "CERTIFIED_SAMPLED" && expect != "VIOLATED") {
            throw UsageError("--expect must be CERTIFIED_SAMPLED or VIOLATED");
        }
        r.add_flag("verdict is " + expect, cert.verdict == expect);
        if (expect == "VIOLATED") r.add_flag("violation witness recorded", cert.witness.has_value());
    } else {
        merge_checks(r, cert.report(), "");
    }

    // The counterexample itself: nonzero on the axis and divergence-free off its singular sets.
    if (ce && ce->gamma <= auto_gamma(ce->n)) {
        const VectorField eta = make_counterexample_field(ce->n, ce->gamma);
        Vec axis(ce->n);
        axis[ce->n - 1] = 1.0;
        const double on_axis = norm(eta(axis));
        r.add_close("|eta| at the unit point of the axis", on_axis, ce->gamma * std::numbers::pi / 4.0, 1e-12);

        const int wanted = a.integer("div-points", 1000);
        const double h = 1e-4;
        const Vec shift(ce->n);
        double worst = 0.0;
        int used = 0;
        for (std::uint64_t i = 1; used < wanted; ++i) {
            Vec x = qmc::halton(ce->n, i, shift);
            for (int k = 0; k < ce->n - 1; ++k) x[k] = -3.0 + 6.0 * x[k];
            x[ce->n - 1] = -1.0 + 6.0 * x[ce->n - 1];
            if (eta.exclusion_distance(x) <= 20.0 * h) continue;
            worst = std::max(worst, std::abs(numeric_divergence(eta, x, h)));
            ++used;
        }
        r.details["divergence_samples"] = used;
        r.add_at_most("finite-difference divergence", worst, 1e-6);
    }
    return out;
}

// flow-tube ------------------------------------------------------------------

Plate parse_plate(const std::string& text)
{
    const auto tok = split(text, ':');
    if (tok.size() != 2) throw UsageError("plate must look like lo:hi with comma-separated corners");
    Plate A{parse_vec(tok[0], "plate corner"), parse_vec(tok[1], "plate corner")};
    if (A.lo.size() != A.hi.size()) throw UsageError("plate corners differ in dimension");
    return A;
}

ScenarioOutput op_flow_tube(const Args& a)
{
    const VectorField eta = make_field(a.str("field", "stream:bump3d"));
    const Plate A = parse_plate(a.str("plate", eta.dim() == 2 ? "-3:3" : "0.3,-0.7:1.2,0.4"));
    if (A.lo.size() != eta.dim() - 1) throw UsageError("plate dimension must be one less than the field's");
    const double h0 = a.num("h0", 2.5);
    double epsilon = 0.0;
    if (a.str("epsilon", "auto") == "auto") {
        epsilon = eta.sup_bound() > 0.0 ? 2.0 * eta.sup_bound() : 1.0;
    } else {
        epsilon = a.num("epsilon", 0.0);
    }
    FlowTubeOptions opt;
    opt.seeds_per_axis = a.integer("seeds", 64);
    opt.linear_gauge = a.opt_num("gauge");
    const double tol = a.num("residual-tol", 1e-6);

    const FlowTube tube = build_flow_tube(eta, epsilon, A, h0, opt);
    ScenarioOutput out;
    out.report = tube.report(tol);
    out.report.title = "flow tube for " + eta.id();
    out.report.details = tube.to_json();
    out.csv.emplace_back("trajectories.csv", tube.csv());

    if (a.flag("refine")) {
        FlowTubeOptions coarse_opt = opt;
        coarse_opt.seeds_per_axis = opt.seeds_per_axis / 2;
        if (coarse_opt.seeds_per_axis < 1) throw UsageError("--refine needs at least 2 seeds per axis");
        const FlowTube coarse = build_flow_tube(eta, epsilon, A, h0, coarse_opt);
        out.report.details["coarse"] = {{"seeds_per_axis", coarse.seeds_per_axis},
                                        {"residual", json_number(coarse.residual)}};
        if (coarse.residual == 0.0 && tube.residual == 0.0) {
            out.report.add_flag("residual vanishes on both seed grids", true);
        } else {
            const double ratio = tube.residual > 0.0 ? coarse.residual / tube.residual : INFINITY;
            out.report.add_at_least("residual reduction under seed refinement", ratio, 4.0);
        }
    }
    return out;
}

// strip-identity -------------------------------------------------------------

ScenarioOutput op_strip(const Args& a)
{
    const VectorField eta = make_field(a.str("field", "stream:bump"));
    std::optional<PhiFunction> phi;
    if (a.has("gauge")) phi = parse_phi(a.str("gauge", ""));
    ScenarioOutput out;
    out.report = strip_identity_2d(eta, a.num("r", 5.0), a.num("t", 3.0), phi, a.num("residual-tol", 1e-8));
    return out;
}

// trace ----------------------------------------------------------------------

TraceProbe run_probe(const std::string& method, const VectorField& field, const OrientedInterface& S,
                     const ConvexRegion& omega, const Vec& x0, const std::vector<double>& radii, double rho)
{
    if (method == "ball") return weak_trace_ball_average(field, S, x0, radii);
    if (method == "curvilinear") return weak_trace_curvilinear(field, S, x0, rho, radii);
    if (method == "pairing") return weak_trace_pairing_probe(field, omega, x0, radii);
    if (method == "sphere") return weak_trace_sphere_flux(field, S, x0, radii);
    throw UsageError("unknown trace method '" + method + "' (ball, curvilinear, pairing, sphere, all)");
}

double tail_mean(const std::vector<double>& v, std::size_t count)
{
    count = std::min(count, v.size());
    double s = 0.0;
    for (std::size_t i = v.size() - count; i < v.size(); ++i) s += v[i];
    return s / static_cast<double>(count);
}

ScenarioOutput op_trace(const Args& a)
{
    const VectorField field = make_field(a.str("field", "capillary:R=1"));
    if (field.dim() != 2) throw UsageError("trace probes need a planar field");
    const OrientedInterface S = parse_interface(a.str("interface", "auto"), field);
    const Vec x0 = a.has("x0") ? a.vec("x0", "") : default_x0(S);
    const auto& dom = field.domain();
    const ConvexRegion omega = a.has("omega") ? parse_omega(a.str("omega", "")) : dom ? *dom
                                              : ConvexRegion::rectangle(Vec{0.0, 0.0}, Vec{1.0, 1.0});
    const std::vector<double> radii = parse_radii(a.str("radii", "dyadic:3:8"));
    const std::string method = a.str("method", "ball");
    const std::optional<double> expect = a.opt_num("expect");
    const double tol = a.num("tol", 1e-2);
    const double pairing_tol = a.num("pairing-tol", 1e-6);

    ScenarioOutput out;
    VerificationReport& r = out.report;
    r.title = "weak normal trace of " + field.id() + " (" + method + ")";
    r.details["field"] = field.id();
    r.details["interface"] = S.describe();
    r.details["x0"] = vec_json(x0);
    r.details["omega"] = omega.describe();
    r.details["probes"] = json::object();
    r.outcome = "TRACE_ESTIMATED";

    std::vector<std::string> methods;
    if (method == "all") {
        methods = {"ball", "curvilinear", "pairing"};
    } else {
        methods = {method};
    }

    for (const auto& m : methods) {
        if (m == "pairing") {
            // Gauss-Green consistency of the distributional trace against bumps along the interface.
            const double s0 = S.parameter_of(x0);
            const int n_tests = a.integer("tests", 10);
            std::vector<TestFunction> family;
            for (int j = 0; j < n_tests; ++j) {
                const double offset = -0.445 + 0.9 * j / n_tests;
                family.push_back(TestFunction::bump(S.point(s0 + offset), 0.04 + 0.004 * j));
            }
            const auto values = weak_trace_pairing(field, omega, family);
            json rows = json::array();
            double worst_gg = 0.0;
            double worst_expect = 0.0;
            for (std::size_t j = 0; j < values.size(); ++j) {
                const auto& v = values[j];
                worst_gg = std::max(worst_gg, std::abs(v.pairing - v.boundary_flux) / v.c1_norm);
                json row = {{"label", v.label},
                            {"pairing", json_number(v.pairing)},
                            {"boundary_flux", json_number(v.boundary_flux)},
                            {"c1_norm", json_number(v.c1_norm)}};
                if (expect) {
                    const auto& psi = family[j];
                    const double mass =
                        integrate_boundary(omega, [&](const Vec& y, const Vec&) { return psi.value(y); }, {},
                                           psi.support)
                            .value;
                    worst_expect = std::max(worst_expect, std::abs(v.pairing - *expect * mass) / v.c1_norm);
                    row["boundary_mass"] = json_number(mass);
                }
                rows.push_back(std::move(row));
            }
            r.details["pairings"] = rows;
            r.add_at_most("pairing against classical flux / C1 norm", worst_gg, pairing_tol);
            if (expect) r.add_at_most("pairing against expected trace / C1 norm", worst_expect, pairing_tol);
        }

        const TraceProbe p = run_probe(m, field, S, omega, x0, radii, a.num("rho", 0.1));
        r.details["probes"][m] = p.to_json();
        out.csv.emplace_back("trace_" + m + ".csv", p.csv());
        if (expect) r.add_close("extrapolated trace (" + m + ")", p.extrapolated, *expect, tol);
        bool finite = true;
        for (double e : p.estimates) finite = finite && std::isfinite(e);
        r.add_flag("finite estimates (" + m + ")", finite);

        if (a.has("compare-scale")) {
            const double k = a.num("compare-scale", 2.0);
            std::vector<double> scaled;
            for (double rad : radii) scaled.push_back(k * rad);
            const TraceProbe q = run_probe(m, field, S, omega, x0, scaled, a.num("rho", 0.1));
            r.details["probes"][m + "_scaled"] = q.to_json();
            out.csv.emplace_back("trace_" + m + "_scaled.csv", q.csv());
            const double l1 = tail_mean(p.estimates, 2);
            const double l2 = tail_mean(q.estimates, 2);
            r.details["subsequence_limits"] = {json_number(l1), json_number(l2)};
            const double gap = std::abs(l1 - l2);
            if (a.has("min-gap")) {
                r.add_at_least("gap between subsequences", gap, a.num("min-gap", 0.01));
                if (gap >= a.num("min-gap", 0.01)) r.outcome = "OSCILLATION_DETECTED";
            }
        }
    }

    if (a.flag("extremality")) {
        if (!field.has_divergence()) throw UsageError("--extremality needs a field with a closed-form divergence");
        const double integral =
            integrate_region(
                omega, [&](const Vec& y) { return field.in_domain(y) ? field.divergence(y) : 0.0; },
                {1e-14, 1e-13, 4000})
                .value;
        const double perimeter = omega.perimeter();
        r.details["divergence_integral"] = json_number(integral);
        r.details["perimeter"] = json_number(perimeter);
        r.add_close("integral of the divergence against the perimeter", integral, perimeter, 1e-6);
    }
    return out;
}

// density, aplim, nalpha --------------------------------------------------------

ScenarioOutput op_density(const Args& a)
{
    const std::string set = a.str("set", "halfplane");
    const auto indicator = parse_set(set);
    const Vec x = a.vec("x0", "0,0");
    if (x.size() != 2) throw UsageError("density sets are planar");
    const auto radii = parse_radii(a.str("radii", "0.5,0.25,0.125,0.0625"));
    const DensityOptions opt = a.density();
    const DensityProbe p = density(indicator, x, radii, opt);

    ScenarioOutput out;
    VerificationReport& r = out.report;
    r.title = "density of " + set;
    r.outcome = "DENSITY_ESTIMATED";
    r.details["probe"] = p.to_json();
    r.details["seed"] = opt.seed;
    out.csv.emplace_back("density.csv", p.csv());
    bool in_range = true;
    for (double v : p.ratios) in_range = in_range && v >= 0.0 && v <= 1.0;
    r.add_flag("ratios within [0,1]", in_range);
    if (a.has("expect")) {
        const double e = a.num("expect", 0.0);
        r.add_close("density against expected value", p.theta, e, 3.0 * p.theta_stderr + 1e-12);
    }
    if (a.flag("complement")) {
        const DensityProbe q = density([&](const Vec& y) { return !indicator(y); }, x, radii, opt);
        r.details["complement"] = q.to_json();
        const double spread = 3.0 * std::hypot(p.theta_stderr, q.theta_stderr) + 1e-12;
        r.add_close("density of set plus complement", p.theta + q.theta, 1.0, spread);
    }
    return out;
}

ScenarioOutput op_aplim(const Args& a)
{
    const VectorField field = make_field(a.str("field", "capillary:R=1"));
    const OrientedInterface S = parse_interface(a.str("interface", "auto"), field);
    const Vec x0 = a.has("x0") ? a.vec("x0", "") : default_x0(S);
    const Vec w = a.has("w") ? a.vec("w", "") : S.normal_at(x0);
    const auto alphas = parse_list(a.str("alphas", "0.2,0.1,0.05"), "--alphas");
    const auto radii = parse_radii(a.str("radii", "dyadic:3:8"));

    ScenarioOutput out;
    out.report = one_sided_ap_lim(field, S, x0, w, alphas, radii, a.num("eps", 1e-2), a.density());
    out.report.title = "one-sided approximate limit of " + field.id();
    if (a.has("expect")) {
        const std::string e = a.str("expect", "");
        const std::string tag = e.rfind("AP_LIM_", 0) == 0 || e == "INCONCLUSIVE" ? e : "AP_LIM_" + e;
        out.report.add_flag("outcome is " + tag, out.report.outcome == tag);
    }
    return out;
}

ScenarioOutput op_nalpha(const Args& a)
{
    const VectorField field = make_field(a.str("field", "capillary:R=1"));
    const OrientedInterface S = parse_interface(a.str("interface", "auto"), field);
    const Vec x0 = a.has("x0") ? a.vec("x0", "") : default_x0(S);
    const NalphaProbe p = nalpha_density(field, S, x0, a.num("alpha", 0.1), parse_radii(a.str("radii", "dyadic:3:8")),
                                         a.num("eps", 1e-2), a.density());

    ScenarioOutput out;
    VerificationReport& r = out.report;
    r.title = "N_alpha density of " + field.id();
    r.outcome = p.verdict;
    r.details = p.to_json();
    out.csv.emplace_back("nalpha.csv", p.density.csv());
    r.add_flag("density probe produced ratios", !p.density.ratios.empty());
    if (a.has("expect")) {
        const std::string e = a.str("expect", "");
        if (e == "zero") {
            r.add_at_most("density ratio at the smallest radius", p.density.ratios.back(), a.num("eps", 1e-2));
        } else if (e == "positive") {
            r.add_at_least("density ratio at the smallest radius", p.density.ratios.back(), a.num("eps", 1e-2));
        } else {
            throw UsageError("--expect must be zero or positive");
        }
    }
    return out;
}

// blowup -----------------------------------------------------------------------

ScenarioOutput op_blowup(const Args& a)
{
    const VectorField field = make_field(a.str("field", "capillary:R=1"));
    if (field.dim() != 2) throw UsageError("blow-up probes need a planar field");
    const OrientedInterface S = parse_interface(a.str("interface", "auto"), field);
    const Vec x0 = a.has("x0") ? a.vec("x0", "") : default_x0(S);
    const int k_lo = a.integer("kmin", 2);
    const int k_hi = a.integer("kmax", 8);
    if (k_hi - k_lo < 2) throw UsageError("need at least three blow-up scales");
    const BlowupSequence seq = BlowupSequence::dyadic(field, x0, k_lo, k_hi);
    const Vec nu = S.normal_at(x0);

    double w = 0.0;
    if (a.str("trace-value", "auto") == "auto") {
        w = weak_trace_ball_average(field, S, x0, seq.radii).extrapolated;
    } else {
        w = a.num("trace-value", 0.0);
    }

    const Vec tangent = perp(nu);
    const std::vector<TestDensity> densities{TestDensity::gaussian(-1.0 * nu, 0.25, 0.5),
                                             TestDensity::bump(-1.0 * nu + 0.5 * tangent, 0.4)};
    const WeakStarProbe ws = weak_star_average(seq, densities);
    std::optional<Vec> expected;
    if (a.has("expect-limit")) expected = a.vec("expect-limit", "");

    ConsistencyOptions copt;
    copt.defect_tol = a.num("defect-tol", 1e-2);
    const VerificationReport cons = blowup_trace_consistency(seq, S, w, default_blowup_tests(nu), copt);

    ScenarioOutput out;
    VerificationReport& r = out.report;
    r.title = "blow-up of " + field.id();
    r.outcome = cons.outcome;
    r.details["trace_value"] = json_number(w);
    r.details["weak_star"] = ws.to_json();
    r.details["consistency"] = cons.details;
    merge_checks(r, ws.report(expected, a.num("limit-tol", 1e-2)), "weak-star: ");
    merge_checks(r, cons, "consistency: ");
    out.csv.emplace_back("consistency.csv", consistency_csv(cons));
    return out;
}

// demos -------------------------------------------------------------------------

ScenarioOutput op_separable(const Args& a)
{
    ScenarioOutput out;
    out.report = separable_demo(a.num("gamma", 1.0), a.num("rho0", 1.0), a.num("psi0", 1.0), a.num("tol", 1e-2));
    return out;
}

ScenarioOutput op_jensen(const Args& a)
{
    const VectorField field = make_field(a.str("field", "constant:0,0,1"));
    const int n = field.dim();
    const MollifierKernel kernel = MollifierKernel::standard(a.num("epsilon", 0.1));
    GridSpec grid;
    const int pts = a.integer("grid-points", 5);
    for (int i = 0; i < n - 1; ++i) grid.axes.push_back({-1.0, 1.0, pts, false});
    grid.axes.push_back({0.0, 2.0, pts, false});

    ScenarioOutput out;
    VerificationReport& r = out.report;
    const VerificationReport jc = jensen_check(field, parse_phi(a.str("gauge", "quadratic")), kernel, grid,
                                               a.num("tol", 1e-6));
    r.title = "Jensen inequality under mollification";
    r.outcome = jc.outcome;
    r.details["jensen"] = jc.details;
    merge_checks(r, jc, "");

    // Mollification keeps a divergence-free field divergence-free.
    const VectorField stream = make_field(a.str("div-field", "stream:bump"));
    const VectorField smooth = mollify(stream, kernel, false);
    const int samples = a.integer("div-points", 100);
    const double h = a.num("fd-step", 1e-4);
    const Vec shift(stream.dim());
    double worst = 0.0;
    for (int i = 1; i <= samples; ++i) {
        Vec x = qmc::halton(stream.dim(), static_cast<std::uint64_t>(i), shift);
        x[0] = -1.5 + 3.0 * x[0];
        x[1] = 0.3 + 3.4 * x[1];
        worst = std::max(worst, std::abs(numeric_divergence(smooth, x, h)));
    }
    r.details["mollified_field"] = smooth.id();
    r.details["divergence_samples"] = samples;
    r.add_at_most("divergence of the mollified field", worst, a.num("div-tol", 1e-6));
    return out;
}

ScenarioOutput op_quadratic(const Args& a)
{
    const int samples = a.integer("samples", 10000);
    std::mt19937_64 rng(a.seed());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> values;
    values.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double rad = std::sqrt(u(rng));
        const double ang = 2.0 * std::numbers::pi * u(rng);
        values.push_back(Vec{rad * std::cos(ang), rad * std::sin(ang)});
    }
    ScenarioOutput out;
    out.report = quadratic_inequality_values(values, a.num("tol", 1e-12));
    out.report.details["seed"] = a.seed();
    return out;
}

ScenarioOutput op_roundtrip(const Args& a)
{
    const int n = a.integer("n", 4);
    const double gamma = a.str("gamma", "auto") == "auto" ? auto_gamma(n) : a.num("gamma", 0.0);
    const int pts = a.integer("points", 50);
    const VectorField eta = make_counterexample_field(n, gamma);
    const CylindricalPotential closed = counterexample_potential(n, gamma);
    const CylindricalPotential numeric = field_to_potential(eta);
    const VectorField rebuilt = potential_to_field(closed);

    GridSpec vgrid;
    vgrid.axes = {{0.01, 5.01, pts, false}, {-1.0, 5.0, pts, false}};
    double v_defect = 0.0;
    for (std::size_t i = 0; i < vgrid.size(); ++i) {
        const Vec p = vgrid.point(i);
        v_defect = std::max(v_defect, std::abs(numeric.V(p[0], p[1]) - closed.V(p[0], p[1])));
    }

    const GridSpec fgrid = certification_grid(pts, pts);
    double f_defect = 0.0;
    for (std::size_t i = 0; i < fgrid.size(); ++i) {
        const Vec p = fgrid.point(i);
        Vec x(n);
        x[0] = p[0];
        x[n - 1] = p[1];
        f_defect = std::max(f_defect, norm(rebuilt(x) - eta(x)));
    }

    ScenarioOutput out;
    VerificationReport& r = out.report;
    r.title = "cylindrical potential round trip";
    r.outcome = "ROUNDTRIP";
    r.details = {{"n", n}, {"gamma", json_number(gamma)}, {"potential_grid", vgrid.to_json()},
                 {"field_grid", fgrid.to_json()}};
    r.add_at_most("potential recovered from the field", v_defect, a.num("potential-tol", 1e-8));
    r.add_at_most("field rebuilt from the potential", f_defect, a.num("field-tol", 1e-12));
    return out;
}

// command line ---------------------------------------------------------------------

struct OptDef {
    std::string name;
    std::string help;
    bool flag = false;
};

struct Command {
    std::string op;
    std::string help;
    std::vector<OptDef> options;
    std::function<ScenarioOutput(const Args&)> run;
};

const std::vector<OptDef> kCommon{
    {"seed", "random seed (default 20240601)"},
    {"out", "directory for the JSON report and CSV files"},
    {"config", "JSON file with option defaults"},
    {"name", "report name (file stem under --out)"},
    {"quiet", "print only the verdict line", true},
};

const std::vector<Command>& commands()
{
    static const std::vector<Command> table{
        {"certify",
         "certify a cylindrical potential on a (rho, z) grid",
         {{"field", "field id"},
          {"c", "gauge constant"},
          {"rho-points", "grid points in rho"},
          {"z-points", "grid points in z"},
          {"margin-tol", "allowed negative margin"},
          {"div-points", "finite-difference divergence samples"},
          {"expect", "CERTIFIED_SAMPLED or VIOLATED"}},
         op_certify},
        {"flow-tube",
         "flow-tube flux identity for eta + eps e_n",
         {{"field", "field id"},
          {"epsilon", "eps or auto (2 sup|eta|)"},
          {"plate", "plate lo:hi, corners comma-separated"},
          {"h0", "plate height"},
          {"seeds", "seeds per axis"},
          {"gauge", "linear gauge constant"},
          {"residual-tol", "residual tolerance"},
          {"refine", "compare with half the seeds per axis", true}},
         op_flow_tube},
        {"strip-identity",
         "planar strip flux identity and L1 bound",
         {{"field", "field id"},
          {"r", "half-width"},
          {"t", "height"},
          {"gauge", "quadratic or linear:c"},
          {"residual-tol", "residual tolerance"}},
         op_strip},
        {"trace",
         "weak normal trace probes",
         {{"field", "field id"},
          {"method", "ball, curvilinear, pairing, sphere or all"},
          {"interface", "auto, line:px,py:nx,ny or circle:cx,cy:R"},
          {"x0", "base point"},
          {"omega", "unit-square, unit-disk, rect:x,y:x,y or disk:x,y:r"},
          {"radii", "dyadic:a:b, geometric:r0:q:a:b or a list"},
          {"rho", "half-length of the curvilinear rectangle"},
          {"expect", "expected trace value"},
          {"tol", "tolerance on the extrapolated trace"},
          {"pairing-tol", "tolerance on pairings relative to the C1 norm"},
          {"tests", "number of pairing test bumps"},
          {"compare-scale", "second radius sequence scaled by this factor"},
          {"min-gap", "required gap between the two subsequence limits"},
          {"extremality", "compare the divergence integral with the perimeter", true}},
         op_trace},
        {"density",
         "quasi-Monte Carlo density of a planar set",
         {{"set", "halfplane, quadrant or disk"},
          {"x0", "centre"},
          {"radii", "radius sequence"},
          {"samples", "samples per radius"},
          {"shifts", "random shifts"},
          {"expect", "expected density"},
          {"complement", "also probe the complement", true}},
         op_density},
        {"aplim",
         "one-sided approximate limit",
         {{"field", "field id"},
          {"interface", "interface"},
          {"x0", "base point"},
          {"w", "candidate limit (default nu)"},
          {"alphas", "comma list of thresholds"},
          {"radii", "radius sequence"},
          {"eps", "density threshold"},
          {"samples", "samples per radius"},
          {"shifts", "random shifts"},
          {"expect", "CONFIRMED, REJECTED or INCONCLUSIVE"}},
         op_aplim},
        {"blowup",
         "blow-up sequence: weak-star averages and trace consistency",
         {{"field", "field id"},
          {"interface", "interface"},
          {"x0", "base point"},
          {"kmin", "first dyadic exponent"},
          {"kmax", "last dyadic exponent"},
          {"trace-value", "trace value or auto"},
          {"expect-limit", "expected weak-star limit"},
          {"limit-tol", "tolerance on the limit"},
          {"defect-tol", "tolerance on consistency defects"}},
         op_blowup},
        {"nalpha",
         "density of the N_alpha set",
         {{"field", "field id"},
          {"interface", "interface"},
          {"x0", "base point"},
          {"alpha", "threshold"},
          {"radii", "radius sequence"},
          {"eps", "density threshold"},
          {"samples", "samples per radius"},
          {"shifts", "random shifts"},
          {"expect", "zero or positive"}},
         op_nalpha},
        {"demo separable",
         "blow-up radius of rho psi' = gamma psi^2",
         {{"gamma", "gamma"}, {"rho0", "initial radius"}, {"psi0", "initial value"}, {"tol", "relative tolerance"}},
         op_separable},
        {"demo jensen",
         "Jensen inequality and divergence under mollification",
         {{"field", "field id"},
          {"gauge", "quadratic or linear:c"},
          {"epsilon", "mollifier radius"},
          {"grid-points", "grid points per axis"},
          {"tol", "Jensen tolerance"},
          {"div-field", "divergence-free planar field"},
          {"div-points", "divergence samples"},
          {"fd-step", "finite-difference step"},
          {"div-tol", "divergence tolerance"}},
         op_jensen},
        {"demo quadratic",
         "quadratic inequality over random unit-ball samples",
         {{"samples", "sample count"}, {"tol", "tolerance"}},
         op_quadratic},
        {"demo roundtrip",
         "field and cylindrical potential round trip",
         {{"n", "dimension"},
          {"gamma", "gamma or auto"},
          {"points", "grid points per axis"},
          {"potential-tol", "tolerance on V"},
          {"field-tol", "tolerance on the field"}},
         op_roundtrip},
    };
    return table;
}

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string config_value(const json& v, const std::string& key)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += ",";
            s += config_value(e, key);
        }
        return s;
    }
    throw UsageError("unsupported value for config key '" + key + "'");
}

json read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    try {
        json cfg = json::parse(in);
        if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
        return cfg;
    } catch (const json::parse_error& e) {
        throw UsageError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write " + path.string());
    f << text;
}

int execute(const Command& cmd, const Params& params, std::ostream& out, std::ostream& err)
{
    const Args args(params);
    json scenario_params = json::object();
    for (const auto& [k, v] : params) {
        if (k != "out" && k != "config" && k != "quiet" && k != "name") scenario_params[k] = v;
    }
    std::string name = args.str("name", cmd.op);
    for (char& ch : name) {
        if (ch == ' ') ch = '-';
    }
    const std::uint64_t seed = args.seed();

    ScenarioOutput result;
    try {
        result = cmd.run(args);
    } catch (const UsageError&) {
        throw;
    } catch (const FlowError& e) {
        result.report.title = cmd.op;
        result.report.outcome = e.kind();
        result.report.details["error"] = e.what();
        result.report.add_flag("operation completed", false);
    } catch (const Error& e) {
        result.report.title = cmd.op;
        result.report.outcome = "ERROR";
        result.report.details["error"] = e.what();
        result.report.add_flag("operation completed", false);
    }

    json doc;
    doc["scenario"] = {{"name", name}, {"operation", cmd.op}, {"parameters", scenario_params}};
    doc["timestamp"] = timestamp();
    doc["environment"] = {{"precision", "binary64"}, {"seed", seed}, {"workers", worker_count()}};
    const json body = result.report.to_json();
    for (const auto& [k, v] : body.items()) doc[k] = v;
    json files = json::array();
    for (const auto& [fname, text] : result.csv) files.push_back(name + "_" + fname);
    doc["csv_files"] = files;

    if (args.has("out")) {
        const std::filesystem::path dir = args.str("out", ".");
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw UsageError("cannot create output directory " + dir.string());
        write_file(dir / (name + ".json"), doc.dump(2) + "\n");
        for (const auto& [fname, text] : result.csv) write_file(dir / (name + "_" + fname), text);
    }
    if (args.flag("quiet")) {
        out << name << ": " << result.report.verdict() << " (" << result.report.outcome << ")\n";
    } else {
        out << doc.dump(2) << "\n";
    }
    if (!result.report.passed()) {
        for (const auto& c : result.report.checks) {
            if (c.verdict != "PASS") err << name << ": failed check '" << c.name << "'\n";
        }
    }
    return result.report.passed() ? 0 : 1;
}

int run_recipe_by_name(const std::string& recipe_name, const std::vector<std::string>& extra, std::ostream& out,
                       std::ostream& err)
{
    for (const auto& rec : recipes()) {
        if (rec.name != recipe_name) continue;
        std::vector<std::string> args = rec.args;
        args.insert(args.end(), {"--name", rec.name});
        args.insert(args.end(), extra.begin(), extra.end());
        return run_cli(args, out, err);
    }
    throw UsageError("unknown recipe '" + recipe_name + "'; see 'list'");
}

}  // namespace

ScenarioOutput run_operation(const std::string& op, const Params& params)
{
    for (const auto& cmd : commands()) {
        if (cmd.op == op) return cmd.run(Args(params));
    }
    throw UsageError("unknown operation '" + op + "'");
}

const std::vector<Recipe>& recipes()
{
    static const std::vector<Recipe> list{
        {"counterexample-certify", "1", "certificate for the counterexample with gamma = 2^(-8/3), c = 1",
         {"certify", "--field", "counterexample:n=4:gamma=auto", "--c", "1"}},
        {"gamma-violation", "2", "gamma = 1 violates the gradient bound; the certificate names a witness",
         {"certify", "--field", "counterexample:n=4:gamma=1", "--c", "1", "--expect", "VIOLATED"}},
        {"flow-tube-zero", "3", "flow tube of the zero field has residual exactly zero",
         {"flow-tube", "--field", "zero:n=3", "--epsilon", "0.5", "--plate", "0,0:1,1", "--h0", "1", "--seeds", "8",
          "--residual-tol", "0"}},
        {"flow-tube-bump", "3", "flow tube of the lifted stream bump, 64^2 seeds, with refinement",
         {"flow-tube", "--field", "stream:bump3d", "--plate", "0.3,-0.7:1.2,0.4", "--h0", "2.5", "--seeds", "64",
          "--refine"}},
        {"strip-wide", "4", "strip identity for the stream bump at r = 5, t = 3",
         {"strip-identity", "--field", "stream:bump", "--r", "5", "--t", "3"}},
        {"strip-narrow", "4", "strip identity for the stream bump at r = 2, t = 1",
         {"strip-identity", "--field", "stream:bump", "--r", "2", "--t", "1"}},
        {"twisting-pairing", "5", "distributional trace of the twisting field against ten bumps",
         {"trace", "--field", "twisting:levels=8", "--method", "pairing", "--omega", "unit-square", "--expect", "0",
          "--radii", "dyadic:3:6"}},
        {"twisting-oscillation", "5", "ball averages at x0 = (1/3, 0) along two radius subsequences",
         {"trace", "--field", "twisting:levels=10", "--method", "ball", "--x0", "0.3333333333333333,0", "--radii",
          "geometric:1.2418578120734840:4:1:4", "--compare-scale", "2", "--min-gap", "0.01"}},
        {"twisting-aplim", "5", "the twisting field has no one-sided approximate limit 0",
         {"aplim", "--field", "twisting:levels=8", "--x0", "0.5,0", "--w", "0,0", "--alphas", "0.5", "--radii",
          "geometric:0.75:2:2:5", "--expect", "REJECTED"}},
        {"capillary-trace", "6", "ball, curvilinear and pairing traces of x/R at (1,0), plus extremality",
         {"trace", "--field", "capillary:R=1", "--method", "all", "--x0", "1,0", "--radii", "dyadic:3:8", "--rho",
          "0.1", "--expect", "1", "--tol", "0.01", "--omega", "unit-disk", "--extremality"}},
        {"capillary-aplim", "6", "approximate limit nu(x0) of x/R at (1,0)",
         {"aplim", "--field", "capillary:R=1", "--x0", "1,0", "--w", "1,0", "--alphas", "0.2,0.1,0.05", "--radii",
          "dyadic:3:8", "--expect", "CONFIRMED"}},
        {"capillary-nalpha", "6", "N_alpha density of x/R at (1,0) vanishes",
         {"nalpha", "--field", "capillary:R=1", "--x0", "1,0", "--alpha", "0.1", "--radii", "dyadic:3:8", "--expect",
          "zero"}},
        {"capillary-blowup", "6", "blow-ups of x/R at (1,0) converge to the constant field nu",
         {"blowup", "--field", "capillary:R=1", "--x0", "1,0", "--kmin", "2", "--kmax", "8", "--trace-value", "1",
          "--expect-limit", "1,0"}},
        {"jensen-mollify", "7", "Jensen inequality for e_n with phi = t^2/2 and divergence of a mollified field",
         {"demo", "jensen"}},
        {"separable-e", "8", "blow-up radius for gamma = 1, rho0 = 1, psi0 = 1",
         {"demo", "separable", "--gamma", "1", "--rho0", "1", "--psi0", "1"}},
        {"separable-gamma2", "8", "blow-up radius for gamma = 2, rho0 = 1, psi0 = 1",
         {"demo", "separable", "--gamma", "2", "--rho0", "1", "--psi0", "1"}},
        {"separable-rho2", "8", "blow-up radius for gamma = 0.5, rho0 = 2, psi0 = 1",
         {"demo", "separable", "--gamma", "0.5", "--rho0", "2", "--psi0", "1"}},
        {"quadratic-inequality", "9", "quadratic inequality over 10^4 random points of the unit disk",
         {"demo", "quadratic", "--samples", "10000"}},
        {"potential-roundtrip", "10", "potential and field round trip on 50 x 50 grids",
         {"demo", "roundtrip", "--points", "50"}},
        {"halfplane-density", "-", "density of a half-plane at a boundary point and of its complement",
         {"density", "--set", "halfplane", "--x0", "0,0", "--expect", "0.5", "--complement"}},
    };
    return list;
}

json recipes_json()
{
    json a = json::array();
    for (const auto& r : recipes()) {
        a.push_back({{"name", r.name}, {"criterion", r.criterion}, {"description", r.description}, {"args", r.args}});
    }
    return a;
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"divlab: numerical verification of divergence-free field rigidity and weak normal traces"};
    app.name("divlab");
    app.require_subcommand(1);

    // Option storage lives in maps keyed by subcommand; std::map keeps references stable.
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, bool>> flags;
    std::map<std::string, CLI::App*> apps;

    CLI::App* demo = app.add_subcommand("demo", "worked examples");
    demo->require_subcommand(1);

    for (const auto& cmd : commands()) {
        CLI::App* sc = nullptr;
        if (cmd.op.rfind("demo ", 0) == 0) {
            sc = demo->add_subcommand(cmd.op.substr(5), cmd.help);
        } else {
            sc = app.add_subcommand(cmd.op, cmd.help);
        }
        apps[cmd.op] = sc;
        std::vector<OptDef> opts = cmd.options;
        opts.insert(opts.end(), kCommon.begin(), kCommon.end());
        for (const auto& o : opts) {
            if (o.flag) {
                sc->add_flag("--" + o.name, flags[cmd.op][o.name], o.help);
            } else {
                sc->add_option("--" + o.name, values[cmd.op][o.name], o.help);
            }
        }
    }

    bool list_json = false;
    CLI::App* list = app.add_subcommand("list", "print the recipe catalog");
    list->add_flag("--json", list_json, "machine-readable catalog");

    std::string recipe_name;
    std::map<std::string, std::string> run_opts;
    bool run_quiet = false;
    CLI::App* run = app.add_subcommand("run", "run a catalog recipe");
    run->add_option("recipe", recipe_name, "recipe name")->required();
    for (const auto& o : kCommon) {
        if (o.name == "name" || o.name == "config") continue;
        if (o.flag) {
            run->add_flag("--" + o.name, run_quiet, o.help);
        } else {
            run->add_option("--" + o.name, run_opts[o.name], o.help);
        }
    }

    try {
        std::vector<std::string> reversed(argv.rbegin(), argv.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "divlab: " << e.what() << "\n";
        return 2;
    }

    try {
        if (list->parsed()) {
            if (list_json) {
                out << recipes_json().dump(2) << "\n";
            } else {
                for (const auto& r : recipes()) {
                    out << r.name << "  [criterion " << r.criterion << "]  " << r.description << "\n    divlab";
                    for (const auto& s : r.args) out << " " << s;
                    out << "\n";
                }
            }
            return 0;
        }
        if (run->parsed()) {
            std::vector<std::string> extra;
            for (const auto& [k, v] : run_opts) {
                if (run->count("--" + k) > 0) extra.insert(extra.end(), {"--" + k, v});
            }
            if (run_quiet) extra.push_back("--quiet");
            return run_recipe_by_name(recipe_name, extra, out, err);
        }
        for (const auto& cmd : commands()) {
            CLI::App* sc = apps.at(cmd.op);
            if (!sc->parsed()) continue;
            Params params;
            for (const auto& [k, v] : values[cmd.op]) {
                if (sc->count("--" + k) > 0) params[k] = v;
            }
            for (const auto& [k, v] : flags[cmd.op]) {
                if (sc->count("--" + k) > 0) params[k] = v ? "true" : "false";
            }
            if (params.count("config")) {
                const json cfg = read_config(params.at("config"));
                for (const auto& [k, v] : cfg.items()) {
                    if (sc->get_option_no_throw("--" + k) == nullptr || k == "config") {
                        throw UsageError("config key '" + k + "' is not an option of " + cmd.op);
                    }
                    if (!params.count(k)) params[k] = config_value(v, k);
                }
            }
            return execute(cmd, params, out, err);
        }
    } catch (const UsageError& e) {
        err << "divlab: " << e.what() << "\n";
        return 2;
    }
    err << "divlab: no command given\n";
    return 2;
}

}  // namespace divlab
