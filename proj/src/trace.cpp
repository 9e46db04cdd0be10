#include "divlab/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "divlab/errors.hpp"
#include "divlab/parallel.hpp"
#include "divlab/qmc.hpp"

namespace divlab {

namespace {

json vec_json(const Vec& v)
{
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

json array_json(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

void require_decreasing(const std::vector<double>& radii)
{
    if (radii.empty()) throw PreconditionError("empty radius sequence");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw PreconditionError("radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw PreconditionError("radii must be strictly decreasing");
    }
}

void require_on_interface(const OrientedInterface& S, const Vec& x0)
{
    const double d = S.distance(x0);
    if (d > 1e-10) {
        std::ostringstream os;
        os << "x0 is at distance " << d << " from " << S.describe();
        throw PreconditionError(os.str());
    }
}

void finish(TraceProbe& probe, const TraceOptions& opt)
{
    const LinearFit fit = fit_linear(probe.radii, probe.estimates);
    probe.extrapolated = fit.intercept;
    probe.slope = fit.slope;
    probe.oscillation = fit.residual_spread;
    probe.oscillating = fit.residual_spread > std::max(5.0 * opt.tol.abs, opt.oscillation_floor);
}

}  // namespace

std::string to_string(TraceMethod m)
{
    switch (m) {
    case TraceMethod::ball_average:
        return "ball_average";
    case TraceMethod::curvilinear:
        return "curvilinear";
    case TraceMethod::pairing:
        return "pairing";
    case TraceMethod::sphere_flux:
        return "sphere_flux";
    }
    return "unknown";
}

LinearFit fit_linear(const std::vector<double>& r, const std::vector<double>& values, std::size_t window)
{
    if (r.size() != values.size() || r.empty()) throw PreconditionError("fit_linear: mismatched or empty data");
    LinearFit fit;
    const std::size_t m = std::min(window, r.size());
    fit.first = r.size() - m;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = fit.first; i < r.size(); ++i) {
        mx += r[i];
        my += values[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = fit.first; i < r.size(); ++i) {
        sxx += (r[i] - mx) * (r[i] - mx);
        sxy += (r[i] - mx) * (values[i] - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = fit.first; i < r.size(); ++i) {
        const double res = values[i] - fit.intercept - fit.slope * r[i];
        lo = std::min(lo, res);
        hi = std::max(hi, res);
        fit.weights.push_back(1.0 / m - (sxx > 0.0 ? mx * (r[i] - mx) / sxx : 0.0));
    }
    fit.residual_spread = hi - lo;
    return fit;
}

json TraceProbe::to_json() const
{
    json out;
    out["method"] = to_string(method);
    out["x0"] = vec_json(x0);
    if (method == TraceMethod::curvilinear) out["rho"] = rho;
    out["radii"] = array_json(radii);
    out["estimates"] = array_json(estimates);
    out["errors"] = array_json(errors);
    out["extrapolated"] = json_number(extrapolated);
    out["slope"] = json_number(slope);
    out["oscillation"] = json_number(oscillation);
    out["oscillating"] = oscillating;
    return out;
}

std::string TraceProbe::csv() const
{
    std::ostringstream os;
    os.precision(17);
    os << "radius,estimate,stderr\n";
    for (std::size_t i = 0; i < radii.size(); ++i) os << radii[i] << "," << estimates[i] << "," << errors[i] << "\n";
    return os.str();
}

TraceProbe weak_trace_ball_average(const VectorField& field, const OrientedInterface& S, const Vec& x0,
                                   const std::vector<double>& radii, const TraceOptions& opt)
{
    if (field.dim() != 2) throw PreconditionError("trace probes are planar");
    require_on_interface(S, x0);
    require_decreasing(radii);
    const Vec nu = S.normal_at(x0);

    TraceProbe probe;
    probe.x0 = x0;
    probe.radii = radii;
    probe.method = TraceMethod::ball_average;
    probe.estimates.resize(radii.size());
    probe.errors.resize(radii.size());
    parallel_for(radii.size(), [&](std::size_t k) {
        const double r = radii[k];
        const ConvexRegion ball = ConvexRegion::disk(x0, r);
        quad::Tolerance tol = opt.tol;
        tol.abs = opt.tol.abs * r * r;
        const auto integral =
            integrate_on_support(field, ball, [&](const Vec& y) { return dot(field.eval_or_zero(y), nu); }, tol);
        double area = kPi * r * r;
        if (field.domain()) {
            area = integrate_region(ball.intersect(*field.domain()), [](const Vec&) { return 1.0; }, tol).value;
        }
        probe.estimates[k] = integral.value / area;
        probe.errors[k] = integral.error / area;
    });
    finish(probe, opt);
    return probe;
}

TraceProbe weak_trace_curvilinear(const VectorField& field, const OrientedInterface& S, const Vec& x0, double rho,
                                  const std::vector<double>& r_seq, const TraceOptions& opt)
{
    if (field.dim() != 2) throw PreconditionError("trace probes are planar");
    if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
    require_on_interface(S, x0);
    require_decreasing(r_seq);
    const double s0 = S.parameter_of(x0);
    const Vec nu0 = S.normal(s0);
    const Vec tau0 = S.tangent(s0);

    // Q embeds when the translated leaves stay transversal and the curve does not turn back within r.
    for (int k = 0; k <= 256; ++k) {
        const double s = s0 - rho + 2.0 * rho * k / 256.0;
        if (!(dot(S.tangent(s), tau0) > 0.0)) {
            throw PreconditionError("curvilinear rectangle does not embed: tangent turns by more than a right angle");
        }
    }
    if (S.curvature_bound() * (rho + r_seq.front()) >= 1.0) {
        throw PreconditionError("curvilinear rectangle does not embed: curvature too large for rho and r");
    }

    TraceProbe probe;
    probe.x0 = x0;
    probe.radii = r_seq;
    probe.rho = rho;
    probe.method = TraceMethod::curvilinear;
    probe.estimates.resize(r_seq.size());
    probe.errors.resize(r_seq.size());
    parallel_for(r_seq.size(), [&](std::size_t k) {
        const double r = r_seq[k];
        quad::Tolerance tol = opt.tol;
        tol.abs = opt.tol.abs * 2.0 * rho * r;
        const auto integral = quad::integrate_box(
            [&](const Vec& st) {
                const double s = st[0];
                const Vec y = S.point(s);
                const Vec z = y - nu0 * st[1];
                return dot(field.eval_or_zero(z), S.normal(s)) * std::abs(dot(S.tangent(s), tau0));
            },
            Vec{s0 - rho, 0.0}, Vec{s0 + rho, r}, tol);
        probe.estimates[k] = integral.value / (2.0 * rho * r);
        probe.errors[k] = integral.error / (2.0 * rho * r);
    });
    finish(probe, opt);
    return probe;
}

std::vector<PairingValue> weak_trace_pairing(const VectorField& field, const ConvexRegion& omega,
                                             const std::vector<TestFunction>& psi_family, const quad::Tolerance& tol)
{
    std::vector<PairingValue> out(psi_family.size());
    parallel_for(psi_family.size(), [&](std::size_t i) {
        const auto terms = gauss_green_terms(field, omega, psi_family[i], tol);
        out[i] = {psi_family[i].label, terms.volume_divergence + terms.volume_gradient, terms.boundary_flux,
                  psi_family[i].c1_norm};
    });
    return out;
}

TraceProbe weak_trace_pairing_probe(const VectorField& field, const ConvexRegion& omega, const Vec& x0,
                                    const std::vector<double>& radii, const TraceOptions& opt)
{
    require_decreasing(radii);
    TraceProbe probe;
    probe.x0 = x0;
    probe.radii = radii;
    probe.method = TraceMethod::pairing;
    probe.estimates.resize(radii.size());
    probe.errors.resize(radii.size());
    parallel_for(radii.size(), [&](std::size_t k) {
        const double r = radii[k];
        const TestFunction psi = TestFunction::bump(x0, r);
        quad::Tolerance tol = opt.tol;
        tol.abs = opt.tol.abs * r;
        const auto terms = gauss_green_terms(field, omega, psi, tol);
        const auto mass = integrate_boundary(omega, [&](const Vec& p, const Vec&) { return psi.value(p); }, tol,
                                             psi.support);
        if (!(mass.value > 0.0)) throw PreconditionError("test bump does not meet the boundary of omega");
        probe.estimates[k] = (terms.volume_divergence + terms.volume_gradient) / mass.value;
        probe.errors[k] = tol.abs / mass.value;
    });
    finish(probe, opt);
    return probe;
}

TraceProbe weak_trace_sphere_flux(const VectorField& field, const OrientedInterface& S, const Vec& x0,
                                  const std::vector<double>& radii, const TraceOptions& opt)
{
    if (field.dim() != 2) throw PreconditionError("trace probes are planar");
    require_on_interface(S, x0);
    require_decreasing(radii);
    const Vec nu = S.normal_at(x0);
    const double base = std::atan2(nu[1], nu[0]);

    TraceProbe probe;
    probe.x0 = x0;
    probe.radii = radii;
    probe.method = TraceMethod::sphere_flux;
    probe.estimates.resize(radii.size());
    probe.errors.resize(radii.size());
    parallel_for(radii.size(), [&](std::size_t k) {
        const double r = radii[k];
        const auto integral = quad::integrate(
            [&](double theta) {
                const Vec u{std::cos(theta), std::sin(theta)};
                return dot(field.eval_or_zero(x0 + u * r), u);
            },
            base + 0.5 * kPi, base + 1.5 * kPi, opt.tol);
        probe.estimates[k] = -0.5 * integral.value;
        probe.errors[k] = 0.5 * integral.error;
    });
    finish(probe, opt);
    return probe;
}

json DensityProbe::to_json() const
{
    return {{"center", vec_json(center)},       {"radii", array_json(radii)},
            {"ratios", array_json(ratios)},     {"stderr", array_json(stderrs)},
            {"theta", json_number(theta)},      {"theta_stderr", json_number(theta_stderr)}};
}

std::string DensityProbe::csv() const
{
    std::ostringstream os;
    os.precision(17);
    os << "radius,ratio,stderr\n";
    for (std::size_t i = 0; i < radii.size(); ++i) os << radii[i] << "," << ratios[i] << "," << stderrs[i] << "\n";
    return os.str();
}

DensityProbe density(const std::function<bool(const Vec&)>& indicator, const Vec& x, const std::vector<double>& radii,
                     const DensityOptions& opt)
{
    require_decreasing(radii);
    if (opt.shifts < 2) throw PreconditionError("density needs at least two random shifts for an error estimate");
    const int n = x.size();
    const auto shifts = qmc::random_shifts(n, opt.shifts, opt.seed);
    const std::size_t per_shift = std::max<std::size_t>(1, opt.samples / static_cast<std::size_t>(opt.shifts));

    DensityProbe probe;
    probe.center = x;
    probe.radii = radii;
    probe.ratios.resize(radii.size());
    probe.stderrs.resize(radii.size());

    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double r = radii[k];
        std::vector<double> per(shifts.size());
        parallel_for(shifts.size(), [&](std::size_t s) {
            std::size_t hits = 0;
            std::size_t used = 0;
            for (std::uint64_t i = 0; used < per_shift; ++i) {
                const Vec u = qmc::halton(n, i, shifts[s]);
                Vec y(n);
                if (n == 2) {
                    // Area-preserving map of the unit square onto the disk.
                    const double rad = r * std::sqrt(u[0]);
                    const double ang = 2.0 * kPi * u[1];
                    y = x + Vec{rad * std::cos(ang), rad * std::sin(ang)};
                } else {
                    Vec c(n);
                    for (int j = 0; j < n; ++j) c[j] = 2.0 * u[j] - 1.0;
                    if (dot(c, c) >= 1.0) continue;
                    y = x + c * r;
                }
                ++used;
                if (indicator(y)) ++hits;
            }
            per[s] = static_cast<double>(hits) / static_cast<double>(used);
        });
        const double mean = std::accumulate(per.begin(), per.end(), 0.0) / per.size();
        double var = 0.0;
        for (double p : per) var += (p - mean) * (p - mean);
        var /= (per.size() - 1);
        probe.ratios[k] = mean;
        probe.stderrs[k] = std::sqrt(var / per.size());
    }

    const LinearFit fit = fit_linear(radii, probe.ratios);
    probe.theta = fit.intercept;
    double v = 0.0;
    for (std::size_t i = 0; i < fit.weights.size(); ++i) {
        const double s = probe.stderrs[fit.first + i];
        v += fit.weights[i] * fit.weights[i] * s * s;
    }
    probe.theta_stderr = std::sqrt(v);
    return probe;
}

VerificationReport one_sided_ap_lim(const VectorField& field, const OrientedInterface& S, const Vec& x0, const Vec& w,
                                    const std::vector<double>& alphas, const std::vector<double>& radii,
                                    double eps_density, const DensityOptions& opt)
{
    if (field.dim() != 2) throw PreconditionError("approximate limits are probed for planar fields");
    require_on_interface(S, x0);
    if (alphas.empty()) throw PreconditionError("no alpha values");
    const Vec nu = S.normal_at(x0);

    VerificationReport report;
    report.title = "one_sided_ap_lim";
    report.details["field"] = field.id();
    report.details["interface"] = S.describe();
    report.details["x0"] = vec_json(x0);
    report.details["w"] = vec_json(w);
    report.details["eps_density"] = eps_density;
    report.details["samples_per_radius"] = opt.samples;
    report.details["seed"] = opt.seed;

    bool all_small = true;
    bool some_bounded_away = false;
    json per_alpha = json::array();
    for (double alpha : alphas) {
        auto indicator = [&](const Vec& y) {
            if (!(dot(y - x0, nu) < 0.0)) return false;
            if (!field.in_domain(y)) return false;
            return norm(field(y) - w) >= alpha;
        };
        const DensityProbe probe = density(indicator, x0, radii, opt);
        const double min_ratio = *std::min_element(probe.ratios.begin(), probe.ratios.end());
        const bool small = probe.theta <= eps_density && probe.ratios.back() <= eps_density;
        all_small = all_small && small;
        if (min_ratio >= eps_density) some_bounded_away = true;
        json entry = probe.to_json();
        entry["alpha"] = alpha;
        entry["min_ratio"] = min_ratio;
        per_alpha.push_back(entry);
        for (double ratio : probe.ratios) {
            if (ratio < 0.0 || ratio > 1.0) report.add_flag("ratio within [0,1]", false);
        }
    }
    report.details["alphas"] = per_alpha;
    report.add_flag("ratios within [0,1]", true);
    if (all_small) {
        report.outcome = "AP_LIM_CONFIRMED";
    } else if (some_bounded_away) {
        report.outcome = "AP_LIM_REJECTED";
    } else {
        report.outcome = "INCONCLUSIVE";
    }
    return report;
}

}  // namespace divlab
