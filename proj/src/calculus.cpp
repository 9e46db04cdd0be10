#include "divlab/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "divlab/errors.hpp"
#include "divlab/parallel.hpp"
#include "divlab/qmc.hpp"

namespace divlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sphere_area(int dim) { return 2.0 * std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0); }

json vec_json(const Vec& v)
{
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

// Unit directions and weights of a product rule on S^{dim-1}; weights sum to the sphere area.
void sphere_rule(int dim, int angular_nodes, std::vector<Vec>& dirs, std::vector<double>& weights)
{
    const int n_phi = angular_nodes;
    if (dim == 1) {
        dirs = {Vec{1.0}, Vec{-1.0}};
        weights = {1.0, 1.0};
        return;
    }
    const auto gl = quad::gauss_legendre(std::max(2, angular_nodes / 2));
    // Recursive construction: start from the circle, add polar angles.
    std::vector<Vec> cur;
    std::vector<double> cw;
    for (int j = 0; j < n_phi; ++j) {
        const double phi = 2.0 * kPi * (j + 0.5) / n_phi;
        cur.push_back(Vec{std::cos(phi), std::sin(phi)});
        cw.push_back(2.0 * kPi / n_phi);
    }
    for (int d = 3; d <= dim; ++d) {
        std::vector<Vec> next;
        std::vector<double> nw;
        for (const auto& [x, w] : gl) {
            const double theta = 0.5 * kPi * (x + 1.0);
            const double s = std::sin(theta);
            const double jac = 0.5 * kPi * w * std::pow(s, d - 2);
            for (std::size_t k = 0; k < cur.size(); ++k) {
                Vec v(d);
                v[0] = std::cos(theta);
                for (int i = 0; i < d - 1; ++i) v[i + 1] = s * cur[k][i];
                next.push_back(v);
                nw.push_back(jac * cw[k]);
            }
        }
        cur = std::move(next);
        cw = std::move(nw);
    }
    dirs = std::move(cur);
    weights = std::move(cw);
}

bool region_meets_exclusion(const ConvexRegion& region, const Exclusion& e)
{
    if (e.normals.size() == 1) {
        return region.chord(e.origin, perp(e.normals.front()), -kInf, kInf).has_value();
    }
    return region.contains(e.origin, 1e-12);
}

}  // namespace

void GridSpec::validate() const
{
    if (axes.empty()) throw PreconditionError("grid without axes");
    for (const auto& a : axes) {
        if (a.resolution < 2) throw PreconditionError("grid resolution must be at least 2 per axis");
        if (!(a.hi > a.lo)) throw PreconditionError("grid axis with empty range");
        if (a.logarithmic && !(a.lo > 0.0)) throw PreconditionError("logarithmic grid axis needs positive bounds");
    }
}

std::size_t GridSpec::size() const
{
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.resolution);
    return n;
}

double GridSpec::coordinate(int axis, int k) const
{
    const auto& a = axes[static_cast<std::size_t>(axis)];
    const double t = static_cast<double>(k) / (a.resolution - 1);
    if (a.logarithmic) return std::exp(std::log(a.lo) + t * (std::log(a.hi) - std::log(a.lo)));
    return a.lo + t * (a.hi - a.lo);
}

Vec GridSpec::point(std::size_t index) const
{
    const int d = static_cast<int>(axes.size());
    Vec p(d);
    for (int i = d - 1; i >= 0; --i) {
        const auto res = static_cast<std::size_t>(axes[static_cast<std::size_t>(i)].resolution);
        p[i] = coordinate(i, static_cast<int>(index % res));
        index /= res;
    }
    return p;
}

json GridSpec::to_json() const
{
    json a = json::array();
    for (const auto& ax : axes) {
        a.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"resolution", ax.resolution},
                     {"spacing", ax.logarithmic ? "logarithmic" : "uniform"}});
    }
    return a;
}

MollifierKernel MollifierKernel::standard(double epsilon)
{
    if (!(epsilon > 0.0)) throw PreconditionError("mollifier radius must be positive");
    return {epsilon, standard_bump, "standard"};
}

double MollifierKernel::normalization(int dim) const
{
    const double eps = epsilon;
    const auto prof = profile;
    const double radial = quad::integral([&](double r) { return prof(r / eps) * std::pow(r, dim - 1); }, 0.0, eps,
                                         {1e-16, 1e-13, 4000});
    return 1.0 / (sphere_area(dim) * radial);
}

double MollifierKernel::operator()(const Vec& y, int dim) const
{
    const double s = norm(y) / epsilon;
    if (s >= 1.0) return 0.0;
    return normalization(dim) * profile(s);
}

KernelRule kernel_rule(const MollifierKernel& kernel, int dim, int radial_nodes, int angular_nodes)
{
    std::vector<Vec> dirs;
    std::vector<double> dir_w;
    sphere_rule(dim, angular_nodes, dirs, dir_w);
    const auto gl = quad::gauss_legendre(radial_nodes);
    KernelRule rule;
    double total = 0.0;
    for (const auto& [x, w] : gl) {
        const double r = 0.5 * kernel.epsilon * (x + 1.0);
        const double radial_w = 0.5 * kernel.epsilon * w * std::pow(r, dim - 1) * kernel.profile(r / kernel.epsilon);
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            rule.offsets.push_back(dirs[k] * r);
            rule.weights.push_back(radial_w * dir_w[k]);
            total += rule.weights.back();
        }
    }
    for (double& w : rule.weights) w /= total;
    return rule;
}

VectorField mollify(const VectorField& field, const MollifierKernel& kernel, bool shift)
{
    const int n = field.dim();
    auto convolve = [&field](const KernelRule& rule, const Vec& x) {
        Vec acc(field.dim());
        for (std::size_t k = 0; k < rule.offsets.size(); ++k) acc += field.eval_or_zero(x - rule.offsets[k]) * rule.weights[k];
        return acc;
    };

    std::vector<Vec> probes;
    if (field.support_cover() && !field.support_cover()->empty()) {
        const auto& cover = *field.support_cover();
        for (std::size_t i = 0; i < std::min<std::size_t>(cover.size(), 3); ++i) {
            probes.push_back(cover[i].center + Vec{0.4, 0.3} * cover[i].radius);
            probes.push_back(cover[i].center + Vec{-0.7, 0.1} * cover[i].radius);
        }
    } else {
        probes.push_back(Vec(n, 0.3));
        Vec p = Vec::unit(n, n - 1) * 1.1;
        p[0] = 0.45;
        probes.push_back(p);
    }

    const bool planar = n == 2;
    int radial = planar ? 8 : 4;
    int angular = planar ? 16 : 8;
    const int radial_cap = planar ? 64 : 12;
    KernelRule rule = kernel_rule(kernel, n, radial, angular);
    const double scale = std::max(1.0, std::isfinite(field.sup_bound()) ? field.sup_bound() : 1.0);
    while (radial < radial_cap) {
        KernelRule finer = kernel_rule(kernel, n, radial * 2, angular * 2);
        double change = 0.0;
        for (const auto& p : probes) change = std::max(change, norm(convolve(finer, p) - convolve(rule, p)));
        rule = std::move(finer);
        radial *= 2;
        angular *= 2;
        if (change < 1e-10 * scale) break;
    }

    auto shared_rule = std::make_shared<const KernelRule>(std::move(rule));
    const Vec offset = shift ? Vec::unit(n, n - 1) * kernel.epsilon : Vec(n);

    VectorField::Spec spec;
    spec.dim = n;
    spec.id = field.id() + "|mollified(eps=" + std::to_string(kernel.epsilon) + (shift ? ",shift" : "") + ")";
    spec.eval = [field, shared_rule, offset](const Vec& x) {
        const Vec base = x - offset;
        Vec acc(field.dim());
        for (std::size_t k = 0; k < shared_rule->offsets.size(); ++k) {
            acc += field.eval_or_zero(base - shared_rule->offsets[k]) * shared_rule->weights[k];
        }
        return acc;
    };
    if (field.has_divergence()) {
        spec.div = [field, shared_rule, offset](const Vec& x) {
            const Vec base = x - offset;
            double acc = 0.0;
            for (std::size_t k = 0; k < shared_rule->offsets.size(); ++k) {
                const Vec y = base - shared_rule->offsets[k];
                if (field.in_domain(y)) acc += field.divergence(y) * shared_rule->weights[k];
            }
            return acc;
        };
    }
    spec.sup_bound = field.sup_bound();
    return VectorField(std::move(spec));
}

namespace {

// Fourth-order centered difference from samples at x - 2h, x - h, x + h, x + 2h.
double centered(double m2, double m1, double p1, double p2, double h)
{
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
}

}  // namespace

double numeric_divergence(const VectorField& field, const Vec& x, double h)
{
    std::string which;
    const double dist = field.exclusion_distance(x, &which);
    if (dist <= 2.0 * h) {
        throw PreconditionError("finite differences at distance " + std::to_string(dist) + " <= 2h from " + which);
    }
    double div = 0.0;
    for (int i = 0; i < field.dim(); ++i) {
        const Vec e = Vec::unit(field.dim(), i) * h;
        div += centered(field(x - 2.0 * e)[i], field(x - e)[i], field(x + e)[i], field(x + 2.0 * e)[i], h);
    }
    return div;
}

Mat numeric_jacobian(const VectorField& field, const Vec& x, double h)
{
    const int n = field.dim();
    Mat j(n);
    for (int c = 0; c < n; ++c) {
        const Vec e = Vec::unit(n, c) * h;
        const Vec m2 = field(x - 2.0 * e), m1 = field(x - e), p1 = field(x + e), p2 = field(x + 2.0 * e);
        for (int r = 0; r < n; ++r) j(r, c) = centered(m2[r], m1[r], p1[r], p2[r], h);
    }
    return j;
}

VerificationReport jensen_check(const VectorField& field, const PhiFunction& phi, const MollifierKernel& kernel,
                                const GridSpec& grid, double tol)
{
    grid.validate();
    const int n = field.dim();
    if (static_cast<int>(grid.axes.size()) != n) throw PreconditionError("grid dimension does not match the field");

    VerificationReport report;
    report.title = "jensen_check";
    report.details["field"] = field.id();
    report.details["phi"] = phi.label;
    report.details["epsilon"] = kernel.epsilon;
    report.details["grid"] = grid.to_json();

    if (const auto problem = phi.audit()) {
        report.outcome = "PRECONDITION_FAILED";
        report.details["phi_audit"] = *problem;
        report.add_flag("phi is a convex gauge", false);
        return report;
    }

    // Precondition samples: the grid itself plus quasi-random points in the eps-enlarged box.
    std::vector<Vec> samples;
    for (std::size_t i = 0; i < grid.size(); ++i) samples.push_back(grid.point(i));
    const int extra = 2000;
    for (int k = 0; k < extra; ++k) {
        const Vec u = qmc::halton(n, static_cast<std::uint64_t>(k), Vec());
        Vec p(n);
        for (int i = 0; i < n; ++i) {
            const auto& a = grid.axes[static_cast<std::size_t>(i)];
            p[i] = a.lo - kernel.epsilon + u[i] * (a.hi - a.lo + 2.0 * kernel.epsilon);
        }
        samples.push_back(p);
    }
    std::vector<double> pre(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const Vec v = field.eval_or_zero(samples[i]);
        pre[i] = v[n - 1] - phi(norm(v));
    });
    json violations = json::array();
    double worst_pre = kInf;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        worst_pre = std::min(worst_pre, pre[i]);
        if (pre[i] < -1e-12 && violations.size() < 10) {
            violations.push_back({{"point", vec_json(samples[i])}, {"margin", pre[i]}});
        }
    }
    report.details["precondition_samples"] = samples.size();
    report.add_at_least("precondition eta_n - phi(|eta|)", worst_pre, -1e-12);
    if (!violations.empty()) {
        report.outcome = "PRECONDITION_FAILED";
        report.details["violations"] = violations;
        return report;
    }

    const VectorField smooth = mollify(field, kernel, false);
    std::vector<double> margins(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const Vec v = smooth(grid.point(i));
        margins[i] = v[n - 1] - phi(norm(v));
    });
    const auto it = std::min_element(margins.begin(), margins.end());
    const auto argmin = static_cast<std::size_t>(it - margins.begin());
    report.details["min_margin_point"] = vec_json(grid.point(argmin));
    report.add_at_least("min eta^eps_n - phi(|eta^eps|)", *it, -tol);
    report.outcome = report.passed() ? "JENSEN_HOLDS" : "JENSEN_VIOLATED";
    return report;
}

TestFunction TestFunction::bump(const Vec& center, double radius, double amplitude)
{
    if (!(radius > 0.0)) throw PreconditionError("bump radius must be positive");
    const double r2 = radius * radius;
    TestFunction f;
    f.value = [=](const Vec& x) { return amplitude * standard_bump(distance(x, center) / radius); };
    f.gradient = [=](const Vec& x) {
        const Vec d = x - center;
        const double u = dot(d, d) / r2;
        if (!(u < 1.0)) return Vec(2);
        const double q = 1.0 - u;
        return d * (-2.0 * amplitude * std::exp(-1.0 / q) / (r2 * q * q));
    };
    f.c1_norm = std::abs(amplitude) * (std::exp(-1.0) + stream_bump_sup(radius));
    f.support = Disk{center, radius};
    f.label = "bump(" + std::to_string(center[0]) + "," + std::to_string(center[1]) + ";" + std::to_string(radius) + ")";
    return f;
}

TestFunction TestFunction::gaussian(const Vec& center, double sigma)
{
    if (!(sigma > 0.0)) throw PreconditionError("gaussian width must be positive");
    TestFunction f;
    f.value = [=](const Vec& x) {
        const Vec d = x - center;
        return std::exp(-dot(d, d) / (2.0 * sigma * sigma));
    };
    f.gradient = [=](const Vec& x) {
        const Vec d = x - center;
        return d * (-std::exp(-dot(d, d) / (2.0 * sigma * sigma)) / (sigma * sigma));
    };
    f.c1_norm = 1.0 + 1.0 / (sigma * std::sqrt(std::exp(1.0)));
    f.label = "gaussian(" + std::to_string(center[0]) + "," + std::to_string(center[1]) + ";" + std::to_string(sigma) + ")";
    return f;
}

TestFunction TestFunction::constant(double c)
{
    TestFunction f;
    f.value = [c](const Vec&) { return c; };
    f.gradient = [](const Vec&) { return Vec(2); };
    f.c1_norm = std::abs(c);
    f.label = "constant(" + std::to_string(c) + ")";
    return f;
}

TestFunction TestFunction::combination(double a, const TestFunction& f, double b, const TestFunction& g)
{
    TestFunction h;
    h.value = [=](const Vec& x) { return a * f.value(x) + b * g.value(x); };
    h.gradient = [=](const Vec& x) { return f.gradient(x) * a + g.gradient(x) * b; };
    h.c1_norm = std::abs(a) * f.c1_norm + std::abs(b) * g.c1_norm;
    if (f.support && g.support) {
        const Vec c = (f.support->center + g.support->center) * 0.5;
        const double r = std::max(distance(c, f.support->center) + f.support->radius,
                                  distance(c, g.support->center) + g.support->radius);
        h.support = Disk{c, r};
    }
    h.label = std::to_string(a) + "*" + f.label + "+" + std::to_string(b) + "*" + g.label;
    return h;
}

quad::Result integrate_on_support(const VectorField& field, const ConvexRegion& region, const ScalarFunction& integrand,
                                  const quad::Tolerance& tol)
{
    ConvexRegion base = region;
    if (field.domain()) base = base.intersect(*field.domain());
    if (!field.support_cover()) return integrate_region(base, integrand, tol);

    quad::Result total;
    for (const auto& d : *field.support_cover()) {
        const ConvexRegion piece = base.intersect(ConvexRegion::disk(d.center, d.radius));
        if (!piece.bounding_box()) continue;
        const quad::Result r = integrate_region(piece, integrand, tol);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.converged = total.converged && r.converged;
    }
    return total;
}

GaussGreenTerms gauss_green_terms(const VectorField& field, const ConvexRegion& omega, const TestFunction& psi,
                                  const quad::Tolerance& tol)
{
    if (field.dim() != 2) throw PreconditionError("Gauss-Green pairings are implemented for planar fields");
    if (!omega.bounded()) throw PreconditionError("Gauss-Green region must be bounded");
    const auto pieces = omega.boundary();
    const auto box = omega.bounding_box();
    const double scale = box ? std::max(1.0, norm(box->hi - box->lo)) : 1.0;

    if (field.domain()) {
        for (const auto& piece : pieces) {
            for (int k = 0; k <= 64; ++k) {
                const Vec p = piece.point(piece.length() * k / 64.0);
                if (!field.domain()->contains(p, 1e-12 * scale)) {
                    throw PreconditionError("region " + omega.describe() + " leaves the domain of " + field.id());
                }
            }
        }
    }

    ConvexRegion volume = omega;
    if (psi.support) volume = volume.intersect(ConvexRegion::disk(psi.support->center, psi.support->radius));
    const bool empty_volume = !volume.bounding_box().has_value();

    GaussGreenTerms t;
    if (!empty_volume) {
        if (field.has_divergence()) {
            const auto r = integrate_on_support(
                field, volume,
                [&](const Vec& x) { return field.in_domain(x) ? psi.value(x) * field.divergence(x) : 0.0; }, tol);
            t.volume_divergence = r.value;
            t.converged = t.converged && r.converged;
        } else {
            for (const auto& e : field.exclusions()) {
                if (region_meets_exclusion(volume, e)) {
                    throw PreconditionError("region meets exclusion set " + e.name + " of " + field.id() +
                                            " and the field has no closed-form divergence");
                }
            }
            const auto r = integrate_on_support(
                field, volume, [&](const Vec& x) { return psi.value(x) * numeric_divergence(field, x); }, tol);
            t.volume_divergence = r.value;
            t.converged = t.converged && r.converged;
        }
        const auto g = integrate_on_support(
            field, volume, [&](const Vec& x) { return dot(field.eval_or_zero(x), psi.gradient(x)); }, tol);
        t.volume_gradient = g.value;
        t.converged = t.converged && g.converged;
    }

    const double delta = kInnerTraceOffset * scale;
    const auto b = integrate_boundary(
        omega,
        [&](const Vec& p, const Vec& nu) {
            const double w = psi.value(p);
            if (w == 0.0) return 0.0;
            return w * dot(field.eval_or_zero(p - nu * delta), nu);
        },
        tol, psi.support);
    t.boundary_flux = b.value;
    t.converged = t.converged && b.converged;
    t.residual = t.volume_divergence + t.volume_gradient - t.boundary_flux;
    return t;
}

double gauss_green_residual(const VectorField& field, const ConvexRegion& omega, const TestFunction& psi,
                            const quad::Tolerance& tol)
{
    return gauss_green_terms(field, omega, psi, tol).residual;
}

}  // namespace divlab
