#include "divlab/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "divlab/errors.hpp"
#include "divlab/fields.hpp"
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

json mat_json(const Mat& m)
{
    json a = json::array();
    for (int i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.size(); ++j) row.push_back(json_number(m(i, j)));
        a.push_back(row);
    }
    return a;
}

std::string label_of(const Vec& c, double r)
{
    std::ostringstream os;
    os << "(" << c[0] << "," << c[1] << ";" << r << ")";
    return os.str();
}

/// Slope of log(defect) against log(r) over the last three entries up to `upto`; NaN when undefined
/// or when a defect sits at the rounding floor.
double decay_exponent(const std::vector<double>& r, const std::vector<double>& d, std::size_t upto)
{
    if (upto < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = upto - 2; i <= upto; ++i) {
        if (!(d[i] > 1e-14)) return std::numeric_limits<double>::quiet_NaN();
        x.push_back(std::log(r[i]));
        y.push_back(std::log(d[i]));
    }
    return fit_linear(x, y, 3).slope;
}

}  // namespace

VectorField rescale(const VectorField& z, const Vec& x0, double r)
{
    if (!(r > 0.0)) throw PreconditionError("rescaling radius must be positive");
    std::ostringstream os;
    os.precision(17);
    os << z.id() << "@rescale(r=" << r << ")";
    return pullback(z, x0, r, Mat::identity(z.dim()), os.str());
}

BlowupSequence BlowupSequence::make(const VectorField& z, const Vec& x0, const std::vector<double>& radii)
{
    if (radii.empty()) throw PreconditionError("empty radius sequence");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw PreconditionError("radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw PreconditionError("radii must decrease");
    }
    BlowupSequence seq{z, x0, radii, {}};
    for (double r : radii) seq.fields.push_back(rescale(z, x0, r));
    return seq;
}

BlowupSequence BlowupSequence::dyadic(const VectorField& z, const Vec& x0, int k_lo, int k_hi)
{
    std::vector<double> radii;
    for (int k = k_lo; k <= k_hi; ++k) radii.push_back(std::ldexp(1.0, -k));
    return make(z, x0, radii);
}

double TestDensity::mass(const quad::Tolerance& tol) const
{
    return integrate_region(ConvexRegion::disk(support.center, support.radius), value, tol).value;
}

TestDensity TestDensity::bump(const Vec& center, double radius)
{
    if (!(radius > 0.0)) throw PreconditionError("density radius must be positive");
    TestDensity f;
    f.support = Disk{center, radius};
    auto raw = [=](const Vec& y) { return standard_bump(distance(y, center) / radius); };
    f.value = raw;
    const double m = f.mass();
    f.value = [=](const Vec& y) { return raw(y) / m; };
    f.label = "bump" + label_of(center, radius);
    return f;
}

TestDensity TestDensity::gaussian(const Vec& center, double sigma, double radius)
{
    if (!(sigma > 0.0) || !(radius > 0.0)) throw PreconditionError("density parameters must be positive");
    TestDensity f;
    f.support = Disk{center, radius};
    auto raw = [=](const Vec& y) {
        const double d = distance(y, center);
        return std::exp(-d * d / (2.0 * sigma * sigma)) * std::exp(1.0) * standard_bump(d / radius);
    };
    f.value = raw;
    const double m = f.mass();
    f.value = [=](const Vec& y) { return raw(y) / m; };
    f.label = "gaussian" + label_of(center, radius);
    return f;
}

WeakStarProbe weak_star_average(const BlowupSequence& seq, const std::vector<TestDensity>& f_family,
                                const quad::Tolerance& tol)
{
    if (seq.base.dim() != 2) throw PreconditionError("blow-up probes are planar");
    for (const auto& f : f_family) {
        const double m = f.mass();
        if (std::abs(m - 1.0) > 1e-8) {
            throw PreconditionError("test density " + f.label + " has mass " + std::to_string(m));
        }
    }
    const std::size_t nf = f_family.size();
    const std::size_t nk = seq.radii.size();

    WeakStarProbe probe;
    probe.radii = seq.radii;
    probe.averages.assign(nf, std::vector<Vec>(nk, Vec(2)));
    probe.squares.assign(nf, std::vector<double>(nk, 0.0));
    probe.jensen_margins.assign(nf, std::vector<double>(nk, 0.0));
    for (const auto& f : f_family) probe.labels.push_back(f.label);

    parallel_for(nf * nk, [&](std::size_t job) {
        const std::size_t i = job / nk;
        const std::size_t k = job % nk;
        const TestDensity& f = f_family[i];
        const VectorField& z = seq.fields[k];
        const ConvexRegion region = ConvexRegion::disk(f.support.center, f.support.radius);
        Vec avg(2);
        for (int c = 0; c < 2; ++c) {
            avg[c] = integrate_on_support(z, region, [&](const Vec& y) { return f.value(y) * z.eval_or_zero(y)[c]; }, tol)
                         .value;
        }
        const double sq = integrate_on_support(
                              z, region,
                              [&](const Vec& y) {
                                  const Vec v = z.eval_or_zero(y);
                                  return f.value(y) * dot(v, v);
                              },
                              tol)
                              .value;
        probe.averages[i][k] = avg;
        probe.squares[i][k] = sq;
        probe.jensen_margins[i][k] = sq - dot(avg, avg);
    });

    for (std::size_t i = 0; i < nf; ++i) {
        Vec lim(2);
        for (int c = 0; c < 2; ++c) {
            std::vector<double> comp;
            for (std::size_t k = 0; k < nk; ++k) comp.push_back(probe.averages[i][k][c]);
            lim[c] = fit_linear(probe.radii, comp, 3).intercept;
        }
        probe.limits.push_back(lim);
    }
    return probe;
}

json WeakStarProbe::to_json() const
{
    json out;
    out["radii"] = json::array();
    for (double r : radii) out["radii"].push_back(json_number(r));
    json per = json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        json e;
        e["density"] = labels[i];
        e["averages"] = json::array();
        for (const Vec& v : averages[i]) e["averages"].push_back(vec_json(v));
        e["squares"] = json::array();
        for (double s : squares[i]) e["squares"].push_back(json_number(s));
        e["jensen_margins"] = json::array();
        for (double s : jensen_margins[i]) e["jensen_margins"].push_back(json_number(s));
        e["limit"] = vec_json(limits[i]);
        per.push_back(e);
    }
    out["densities"] = per;
    return out;
}

VerificationReport WeakStarProbe::report(const std::optional<Vec>& expected, double limit_tol, double jensen_tol) const
{
    VerificationReport r;
    r.title = "weak_star_average";
    r.outcome = "AVERAGES_COMPUTED";
    r.details = to_json();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : jensen_margins) {
        for (double m : row) worst = std::min(worst, m);
    }
    if (std::isfinite(worst)) r.add("min Jensen margin int f|z_k|^2 - |int f z_k|^2", worst, jensen_tol, worst + jensen_tol);
    if (expected) {
        r.details["expected"] = vec_json(*expected);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            r.add_at_most("|limit - w| for " + labels[i], distance(limits[i], *expected), limit_tol);
            json defects = json::array();
            for (const Vec& v : averages[i]) defects.push_back(json_number(distance(v, *expected)));
            r.details["densities"][i]["defects"] = defects;
        }
    }
    return r;
}

json NalphaProbe::to_json() const
{
    json out = density.to_json();
    out["alpha"] = alpha;
    out["rotation"] = mat_json(rotation);
    out["verdict"] = verdict;
    return out;
}

NalphaProbe nalpha_density(const VectorField& xi, const OrientedInterface& S, const Vec& x0, double alpha,
                           const std::vector<double>& radii, double eps_density, const DensityOptions& opt)
{
    if (xi.dim() != 2) throw PreconditionError("N_alpha probes are planar");
    if (!(alpha > 0.0)) throw PreconditionError("alpha must be positive");
    if (std::abs(xi.sup_bound() - 1.0) > 1e-6) {
        throw PreconditionError("field is not normalized: sup bound " + std::to_string(xi.sup_bound()));
    }
    if (S.distance(x0) > 1e-10) throw PreconditionError("x0 is not on " + S.describe());
    const Vec nu = S.normal_at(x0);
    const Mat q = rotation_between(nu, Vec{0.0, -1.0});
    const VectorField frame = pullback(xi, x0, 1.0, q);
    const Vec e2{0.0, 1.0};

    NalphaProbe probe;
    probe.alpha = alpha;
    probe.rotation = q;
    probe.density = density(
        [&](const Vec& y) {
            if (!(y[1] > 0.0) || !frame.in_domain(y)) return false;
            return norm(frame(y) + e2) >= alpha;
        },
        Vec{0.0, 0.0}, radii, opt);
    const auto& ratios = probe.density.ratios;
    const double min_ratio = *std::min_element(ratios.begin(), ratios.end());
    if (probe.density.theta <= eps_density && ratios.back() <= eps_density) {
        probe.verdict = "DENSITY_ZERO";
    } else if (min_ratio >= eps_density) {
        probe.verdict = "DENSITY_POSITIVE";
    } else {
        probe.verdict = "INCONCLUSIVE";
    }
    return probe;
}

double quadratic_margin(const Vec& xi)
{
    const Vec z{xi[0], xi[1] + 1.0};
    return z[1] - 0.5 * dot(z, z);
}

VerificationReport quadratic_inequality_values(const std::vector<Vec>& values, double identity_tol)
{
    VerificationReport r;
    r.title = "quadratic_inequality";
    r.outcome = "MARGINS_COMPUTED";
    if (values.empty()) throw PreconditionError("no samples");
    double worst = std::numeric_limits<double>::infinity();
    double identity = 0.0;
    double sup = 0.0;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Vec& v = values[i];
        sup = std::max(sup, norm(v));
        const double m = quadratic_margin(v);
        if (m < worst) {
            worst = m;
            argmin = i;
        }
        identity = std::max(identity, std::abs(m - 0.5 * (1.0 - dot(v, v))));
    }
    if (sup > 1.0 + 1e-12) throw PreconditionError("sampled |xi| exceeds 1: " + std::to_string(sup));
    r.details = {{"samples", values.size()},
                 {"min_margin", json_number(worst)},
                 {"argmin_value", vec_json(values[argmin])},
                 {"max_identity_defect", json_number(identity)},
                 {"sampled_sup", json_number(sup)}};
    r.add("min margin z_2 - |z|^2/2", worst, 1e-12, worst + 1e-12);
    r.add_at_most("identity margin = (1 - |xi|^2)/2", identity, identity_tol);
    return r;
}

VerificationReport quadratic_inequality_check(const VectorField& xi, const GridSpec& grid, double identity_tol)
{
    grid.validate();
    if (xi.dim() != 2 || grid.axes.size() != 2) throw PreconditionError("quadratic inequality checks are planar");
    std::vector<Vec> values(grid.size());
    parallel_for(values.size(), [&](std::size_t i) { values[i] = xi.eval_or_zero(grid.point(i)); });
    VerificationReport r = quadratic_inequality_values(values, identity_tol);
    r.details["field"] = xi.id();
    r.details["grid"] = grid.to_json();
    return r;
}

std::vector<TestFunction> default_blowup_tests(const Vec& nu)
{
    const Vec tau = perp(nu);
    std::vector<TestFunction> out;
    for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) out.push_back(TestFunction::bump(tau * t, 0.75));
    for (double t : {-1.0, 0.0, 1.0}) out.push_back(TestFunction::bump(tau * t - nu * 1.5, 0.5));
    return out;
}

VerificationReport blowup_trace_consistency(const BlowupSequence& seq, const OrientedInterface& S, double trace_value,
                                            const std::vector<TestFunction>& psi_family, const ConsistencyOptions& opt)
{
    if (seq.base.dim() != 2) throw PreconditionError("blow-up probes are planar");
    if (S.kind() == OrientedInterface::Kind::curve) throw PreconditionError("consistency probes use lines or circles");
    if (S.distance(seq.x0) > 1e-10) throw PreconditionError("x0 is not on " + S.describe());
    for (const auto& psi : psi_family) {
        if (!psi.support) throw PreconditionError("test functions must have compact support");
    }
    const Vec nu = S.normal_at(seq.x0);
    const Vec tau = perp(nu);
    const Vec origin(2);
    const ConvexRegion H = ConvexRegion::half_plane(origin, nu);
    const std::size_t nk = seq.radii.size();
    const std::size_t np = psi_family.size();

    // Role of each psi: (b) if its support meets dH, else (a).
    std::vector<bool> meets(np);
    for (std::size_t j = 0; j < np; ++j) {
        const Disk& d = *psi_family[j].support;
        meets[j] = std::abs(dot(d.center, nu)) < d.radius;
    }
    std::vector<double> line_mass(np, 0.0);
    for (std::size_t j = 0; j < np; ++j) {
        if (!meets[j]) continue;
        const Disk& d = *psi_family[j].support;
        const double c = dot(d.center, tau);
        const double off = dot(d.center, nu);
        const double half = std::sqrt(d.radius * d.radius - off * off);
        line_mass[j] = quad::integrate([&](double t) { return psi_family[j].value(tau * t); }, c - half, c + half, opt.tol)
                           .value;
    }

    std::vector<std::vector<double>> defect(nk, std::vector<double>(np, 0.0));
    std::vector<std::vector<bool>> skipped(nk, std::vector<bool>(np, false));
    parallel_for(nk * np, [&](std::size_t job) {
        const std::size_t k = job / np;
        const std::size_t j = job % np;
        const VectorField& z = seq.fields[k];
        const TestFunction& psi = psi_family[j];
        const Disk& d = *psi.support;
        const ConvexRegion supp = ConvexRegion::disk(d.center, d.radius);
        auto integrand = [&](const Vec& y) { return dot(z.eval_or_zero(y), psi.gradient(y)); };
        if (meets[j]) {
            const double v = integrate_on_support(z, H.intersect(supp), integrand, opt.tol).value;
            defect[k][j] = std::abs(v - trace_value * line_mass[j]);
        } else {
            const OrientedInterface Sk = S.rescaled(seq.x0, seq.radii[k]);
            if (Sk.distance(d.center) <= d.radius) {
                skipped[k][j] = true;
                return;
            }
            defect[k][j] = std::abs(integrate_on_support(z, supp, integrand, opt.tol).value);
        }
    });

    std::vector<double> da(nk, 0.0);
    std::vector<double> db(nk, 0.0);
    bool any_a = false;
    bool any_b = false;
    for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t j = 0; j < np; ++j) {
            if (skipped[k][j]) continue;
            if (meets[j]) {
                db[k] = std::max(db[k], defect[k][j]);
                any_b = true;
            } else {
                da[k] = std::max(da[k], defect[k][j]);
                any_a = true;
            }
        }
    }

    VerificationReport r;
    r.title = "blowup_trace_consistency";
    r.outcome = "DEFECTS_COMPUTED";
    json series = json::array();
    for (std::size_t k = 0; k < nk; ++k) {
        series.push_back({{"r_k", json_number(seq.radii[k])},
                          {"defect_a", json_number(da[k])},
                          {"defect_b", json_number(db[k])},
                          {"exponent_a", json_number(decay_exponent(seq.radii, da, k))},
                          {"exponent_b", json_number(decay_exponent(seq.radii, db, k))}});
    }
    r.details = {{"field", seq.base.id()},
                 {"x0", vec_json(seq.x0)},
                 {"interface", S.describe()},
                 {"trace_value", trace_value},
                 {"tests", np},
                 {"series", series}};
    if (any_a) r.add_at_most("final defect (a): pairings off S_k", da.back(), opt.defect_tol);
    if (any_b) r.add_at_most("final defect (b): half-plane identity", db.back(), opt.defect_tol);
    return r;
}

std::string consistency_csv(const VerificationReport& report)
{
    std::ostringstream os;
    os.precision(17);
    os << "k,r_k,defect,exponent\n";
    const auto& series = report.details.at("series");
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& row = series[k];
        const double a = row.at("defect_a").is_number() ? row.at("defect_a").get<double>() : 0.0;
        const double b = row.at("defect_b").is_number() ? row.at("defect_b").get<double>() : 0.0;
        const auto& ea = row.at("exponent_a");
        const auto& eb = row.at("exponent_b");
        const auto& e = b >= a ? eb : ea;
        os << k << "," << row.at("r_k").get<double>() << "," << std::max(a, b) << ",";
        if (e.is_number()) {
            os << e.get<double>();
        } else {
            os << "nan";
        }
        os << "\n";
    }
    return os.str();
}

VerificationReport lebesgue_diagnostics(const VectorField& field, const OrientedInterface& S, const Vec& x0,
                                        const ConvexRegion& omega, const std::vector<double>& radii)
{
    VerificationReport r;
    r.title = "lebesgue_diagnostics";
    r.outcome = "DIAGNOSTICS";
    json rows = json::array();
    std::vector<double> gg(radii.size(), 0.0);
    parallel_for(radii.size(), [&](std::size_t i) {
        const ConvexRegion ball = ConvexRegion::disk(x0, radii[i]).intersect(omega);
        gg[i] = gauss_green_residual(field, ball, TestFunction::constant(1.0), {1e-12, 1e-10, 4000});
    });
    TraceOptions topt;
    const TraceProbe pairing = weak_trace_pairing_probe(field, omega, x0, radii, topt);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        lo = std::min(lo, pairing.estimates[i]);
        hi = std::max(hi, pairing.estimates[i]);
        rows.push_back({{"r", json_number(radii[i])},
                        {"r_kappa", json_number(radii[i] * S.curvature_bound())},
                        {"pairing_trace", json_number(pairing.estimates[i])},
                        {"gauss_green_residual_over_r", json_number(gg[i] / radii[i])}});
    }
    r.details = {{"field", field.id()},
                 {"x0", vec_json(x0)},
                 {"interface", S.describe()},
                 {"rows", rows},
                 {"pairing_spread", json_number(hi - lo)}};
    return r;
}

}  // namespace divlab
