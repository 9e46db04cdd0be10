#include "divlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>

#include "divlab/errors.hpp"

namespace divlab {

namespace {

constexpr double kAxisCutoff = 1e-8;

std::string format_number(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// g(rho) = (1 + rho^{n-1})^{1/(n-1)} - 1 without cancellation for small rho.
double radial_profile(double rho, int n)
{
    const double m = n - 1.0;
    return std::expm1(std::log1p(std::pow(rho, m)) / m);
}

double radial_slope(double rho, int n)
{
    // d/drho of radial_profile, divided by rho^{n-2}.
    const double m = n - 1.0;
    return std::pow(1.0 + std::pow(rho, m), (2.0 - n) / m);
}

}  // namespace

PhiFunction PhiFunction::linear(double c)
{
    if (!(c > 0.0)) throw PreconditionError("linear gauge needs c > 0");
    return {[c](double t) { return c * t; }, "linear(c=" + format_number(c) + ")", 64};
}

PhiFunction PhiFunction::quadratic()
{
    return {[](double t) { return 0.5 * t * t; }, "quadratic(t^2/2)", 64};
}

std::optional<std::string> PhiFunction::audit(double t_max) const
{
    if (convexity_samples < 2) return "convexity_samples must be at least 2";
    if (std::abs(evaluator(0.0)) > 0.0) return label + ": phi(0) = " + format_number(evaluator(0.0)) + " != 0";
    std::vector<double> ts;
    std::vector<double> values;
    for (int k = 0; k <= convexity_samples; ++k) {
        const double t = t_max * k / convexity_samples;
        ts.push_back(t);
        values.push_back(evaluator(t));
        if (k > 0 && !(values.back() > 0.0)) return label + ": phi(" + format_number(t) + ") is not positive";
    }
    for (std::size_t a = 0; a < ts.size(); ++a) {
        for (std::size_t b = a + 1; b < ts.size(); ++b) {
            const double mid = evaluator(0.5 * (ts[a] + ts[b]));
            if (mid > 0.5 * (values[a] + values[b]) + 1e-12) {
                return label + ": midpoint convexity fails on [" + format_number(ts[a]) + ", " + format_number(ts[b]) +
                       "]";
            }
        }
    }
    return std::nullopt;
}

double bump_profile(double s)
{
    if (!(s > 0.0 && s < 1.0)) return 0.0;
    const double u = 2.0 * s - 1.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

double standard_bump(double s)
{
    if (!(std::abs(s) < 1.0)) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

std::pair<double, double> gamma_bounds(int n)
{
    if (n < 4) throw PreconditionError("gamma bounds are defined for n >= 4, got n = " + std::to_string(n));
    const double C = (kPi + std::pow(3.0, 0.75)) / 2.0;
    return {1.0 / C, std::pow(2.0, (4.0 - 3.0 * n) / (n - 1.0))};
}

double auto_gamma(int n)
{
    const auto [a, b] = gamma_bounds(n);
    return std::min(a, b);
}

VectorField make_counterexample_field(int n, std::optional<double> gamma_opt)
{
    if (n < 4) {
        throw PreconditionError("counterexample needs n >= 4 (no separable construction exists for n = 3), got n = " +
                                std::to_string(n));
    }
    if (n > kMaxDim) throw PreconditionError("dimension above kMaxDim");
    const auto [inv_c, power] = gamma_bounds(n);
    double gamma = std::min(inv_c, power);
    if (gamma_opt) {
        gamma = *gamma_opt;
        if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
        const double slack = 1.0 + 1e-12;
        if (gamma > inv_c * slack) {
            throw PreconditionError("gamma = " + format_number(gamma) + " violates gamma <= 1/C = " +
                                    format_number(inv_c));
        }
        if (gamma > power * slack) {
            throw PreconditionError("gamma = " + format_number(gamma) + " violates gamma <= 2^{(4-3n)/(n-1)} = " +
                                    format_number(power));
        }
    }

    VectorField::Spec spec;
    spec.dim = n;
    spec.id = "counterexample:n=" + std::to_string(n) + ":gamma=" + (gamma_opt ? format_number(gamma) : "auto");
    spec.eval = [n, gamma](const Vec& x) {
        Vec out(n);
        const double z = x[n - 1];
        if (!(z > 0.0)) return out;
        double rho2 = 0.0;
        for (int i = 0; i < n - 1; ++i) rho2 += x[i] * x[i];
        const double rho = std::sqrt(rho2);
        const double arc = std::atan(z * z);
        if (rho < kAxisCutoff) {
            out[n - 1] = gamma * arc;
            return out;
        }
        const double radial = -gamma * std::pow(rho, 1.0 - n) * 2.0 * radial_profile(rho, n) * z / (1.0 + z * z * z * z);
        for (int i = 0; i < n - 1; ++i) out[i] = radial * x[i];
        out[n - 1] = gamma * arc * radial_slope(rho, n);
        return out;
    };
    spec.div = [](const Vec&) { return 0.0; };
    spec.sup_bound = 1.0;
    Exclusion axis{"axis {r=0}", Vec(n), {}};
    for (int i = 0; i < n - 1; ++i) axis.normals.push_back(Vec::unit(n, i));
    Exclusion floor{"hyperplane {z=0}", Vec(n), {Vec::unit(n, n - 1)}};
    spec.exclusions = {axis, floor};
    return VectorField(std::move(spec));
}

CylindricalPotential counterexample_potential(int n, double gamma)
{
    if (n < 4) throw PreconditionError("counterexample potential needs n >= 4");
    if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
    CylindricalPotential p;
    p.dim = n;
    p.gamma = gamma;
    p.id = "counterexample-potential:n=" + std::to_string(n) + ":gamma=" + format_number(gamma);
    p.V = [n, gamma](double rho, double z) {
        if (!(z > 0.0)) return 0.0;
        return gamma * radial_profile(rho, n) * std::atan(z * z);
    };
    p.dV = [n, gamma](double rho, double z) -> std::pair<double, double> {
        if (!(z > 0.0)) return {0.0, 0.0};
        const double d_rho = gamma * std::atan(z * z) * radial_slope(rho, n) * std::pow(rho, n - 2.0);
        const double d_z = gamma * radial_profile(rho, n) * 2.0 * z / (1.0 + z * z * z * z);
        return {d_rho, d_z};
    };
    return p;
}

double twisting_calibration(const std::function<double(double)>& bump)
{
    const auto peak = quad::golden_section_max(bump, 0.0, 1.0, 1e-12);
    if (!(peak.value > 0.0)) throw PreconditionError("bump profile vanishes identically");
    return 1.0 / peak.value;
}

bool twisting_balls_disjoint(int max_level)
{
    // Integer coordinates after scaling by 2^{L+2}.
    struct Ball {
        std::int64_t x, y, r;
    };
    std::vector<Ball> balls;
    const int L = max_level;
    for (int i = 1; i <= L; ++i) {
        const std::int64_t step = std::int64_t{1} << (L + 2 - i);
        const std::int64_t r = std::int64_t{1} << (L - i);
        for (std::int64_t j = 1; j < (std::int64_t{1} << i); ++j) balls.push_back({j * step, step, r});
    }
    std::sort(balls.begin(), balls.end(), [](const Ball& a, const Ball& b) { return a.x - a.r < b.x - b.r; });
    for (std::size_t a = 0; a < balls.size(); ++a) {
        for (std::size_t b = a + 1; b < balls.size(); ++b) {
            if (balls[b].x - balls[b].r > balls[a].x + balls[a].r) break;
            const std::int64_t dx = balls[a].x - balls[b].x;
            const std::int64_t dy = balls[a].y - balls[b].y;
            const std::int64_t rr = balls[a].r + balls[b].r;
            if (dx * dx + dy * dy <= rr * rr) return false;
        }
    }
    return true;
}

VectorField make_twisting_field(int max_level, const std::function<double(double)>& bump)
{
    if (max_level < 1) throw PreconditionError("twisting field needs max_level >= 1");
    if (max_level > 20) throw PreconditionError("twisting field max_level above 20 is not supported");
    if (!twisting_balls_disjoint(max_level)) throw PreconditionError("twisting balls overlap");
    const double c = twisting_calibration(bump);

    VectorField::Spec spec;
    spec.dim = 2;
    spec.id = "twisting:levels=" + std::to_string(max_level);
    spec.eval = [max_level, c, bump](const Vec& p) {
        Vec out(2);
        const double y = p[1];
        if (!(y > 0.0)) return out;
        const long guess = std::lround(-std::log2(y));
        for (long i = std::max(1L, guess - 1); i <= std::min<long>(max_level, guess + 1); ++i) {
            const double yi = std::ldexp(1.0, static_cast<int>(-i));
            const double ri = 0.25 * yi;
            if (std::abs(y - yi) >= ri) continue;
            const long j = std::lround(std::ldexp(p[0], static_cast<int>(i)));
            if (j < 1 || j >= (1L << i)) continue;
            const Vec d{p[0] - j * yi, y - yi};
            const double s = norm(d);
            if (s >= ri || s == 0.0) continue;
            return perp(d) * (c * bump(s / ri) / s);
        }
        return out;
    };
    spec.div = [](const Vec&) { return 0.0; };
    spec.sup_bound = 1.0;
    std::vector<Disk> cover;
    for (int i = 1; i <= max_level; ++i) {
        const double yi = std::ldexp(1.0, -i);
        for (long j = 1; j < (1L << i); ++j) cover.push_back({Vec{j * yi, yi}, 0.25 * yi});
    }
    spec.support_cover = std::move(cover);
    return VectorField(std::move(spec));
}

VectorField make_capillary_field(double R)
{
    if (!(R > 0.0)) throw PreconditionError("capillary radius must be positive");
    VectorField::Spec spec;
    spec.dim = 2;
    spec.id = "capillary:R=" + format_number(R);
    spec.eval = [R](const Vec& x) { return x / R; };
    spec.div = [R](const Vec&) { return 2.0 / R; };
    spec.jacobian = [R](const Vec&) { return Mat::identity(2) * (1.0 / R); };
    spec.sup_bound = 1.0;
    spec.domain = ConvexRegion::disk(Vec{0.0, 0.0}, R);
    return VectorField(std::move(spec));
}

VectorField make_stream_field(const std::function<Vec(const Vec&)>& grad_psi,
                              const std::function<Mat(const Vec&)>& hessian_psi, double sup_bound,
                              const std::string& id, std::optional<std::vector<Disk>> support_cover)
{
    VectorField::Spec spec;
    spec.dim = 2;
    spec.id = id;
    spec.eval = [grad_psi](const Vec& x) {
        const Vec g = grad_psi(x);
        return Vec{-g[1], g[0]};
    };
    spec.div = [](const Vec&) { return 0.0; };
    if (hessian_psi) {
        spec.jacobian = [hessian_psi](const Vec& x) {
            const Mat h = hessian_psi(x);
            Mat j(2);
            j(0, 0) = -h(1, 0);
            j(0, 1) = -h(1, 1);
            j(1, 0) = h(0, 0);
            j(1, 1) = h(0, 1);
            return j;
        };
    }
    spec.sup_bound = sup_bound;
    spec.support_cover = std::move(support_cover);
    return VectorField(std::move(spec));
}

double stream_bump_sup(double radius)
{
    auto speed = [](double s) {
        if (!(s > 0.0 && s < 1.0)) return 0.0;
        const double q = 1.0 - s * s;
        return 2.0 * standard_bump(s) * s / (q * q);
    };
    const auto peak = quad::golden_section_max(speed, 0.0, 1.0, 1e-12);
    // Golden-section lands within ~1e-12 of the argmax; the relative slack covers the quadratic defect.
    return peak.value * (1.0 + 1e-12) / radius;
}

VectorField make_stream_bump(const Vec& center, double radius)
{
    if (!(radius > 0.0)) throw PreconditionError("stream bump radius must be positive");
    const double r2 = radius * radius;
    auto grad = [center, r2](const Vec& x) {
        const Vec d = x - center;
        const double u = dot(d, d) / r2;
        if (!(u < 1.0)) return Vec(2);
        const double q = 1.0 - u;
        const double g = -2.0 * std::exp(-1.0 / q) / (r2 * q * q);
        return d * g;
    };
    auto hess = [center, r2](const Vec& x) {
        Mat h(2);
        const Vec d = x - center;
        const double u = dot(d, d) / r2;
        if (!(u < 1.0)) return h;
        const double q = 1.0 - u;
        const double b = std::exp(-1.0 / q);
        const double g = -2.0 * b / (r2 * q * q);
        const double dg = -2.0 * b * (1.0 - 2.0 * u) / (r2 * q * q * q * q);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) h(i, j) = (i == j ? g : 0.0) + dg * 2.0 / r2 * d[i] * d[j];
        return h;
    };
    std::ostringstream id;
    id << "stream:bump:cx=" << format_number(center[0]) << ":cy=" << format_number(center[1])
       << ":radius=" << format_number(radius);
    return make_stream_field(grad, hess, stream_bump_sup(radius), id.str(), std::vector<Disk>{{center, radius}});
}

VectorField potential_to_field(const CylindricalPotential& P)
{
    if (P.dim < 3) throw PreconditionError("potential_to_field needs dim >= 3");
    if (!P.dV) throw PreconditionError("potential " + P.id + " has no gradient");
    const int n = P.dim;
    VectorField::Spec spec;
    spec.dim = n;
    spec.id = "from-potential(" + P.id + ")";
    auto dV = P.dV;
    spec.eval = [n, dV](const Vec& x) {
        Vec out(n);
        const double z = x[n - 1];
        double rho2 = 0.0;
        for (int i = 0; i < n - 1; ++i) rho2 += x[i] * x[i];
        const double rho = std::sqrt(rho2);
        if (rho < kAxisCutoff) {
            const auto g = dV(kAxisCutoff, z);
            out[n - 1] = std::pow(kAxisCutoff, 2.0 - n) * g.first;
            return out;
        }
        const auto [d_rho, d_z] = dV(rho, z);
        const double radial = -std::pow(rho, 1.0 - n) * d_z;
        for (int i = 0; i < n - 1; ++i) out[i] = radial * x[i];
        out[n - 1] = std::pow(rho, 2.0 - n) * d_rho;
        return out;
    };
    spec.sup_bound = std::numeric_limits<double>::infinity();
    return VectorField(std::move(spec));
}

namespace {

Vec cylinder_point(int n, const Vec& dir, double rho, double z)
{
    Vec x(n);
    for (int i = 0; i < n - 1; ++i) x[i] = rho * dir[i];
    x[n - 1] = z;
    return x;
}

void audit_cylindrical(const VectorField& eta)
{
    const int n = eta.dim();
    const Vec e1 = Vec::unit(n - 1, 0);
    std::vector<Vec> dirs{e1};
    Vec diag(n - 1, 1.0);
    dirs.push_back(diag / norm(diag));
    Vec skew(n - 1);
    for (int i = 0; i < n - 1; ++i) skew[i] = (i % 2 == 0 ? -1.0 : 2.0) * (i + 1);
    dirs.push_back(skew / norm(skew));

    const double tol = 1e-9 * std::max(1.0, std::isfinite(eta.sup_bound()) ? eta.sup_bound() : 1.0);
    for (double rho : {0.05, 0.4, 1.0, 3.0, 20.0}) {
        for (double z : {-0.5, 0.3, 1.0, 2.5, 7.0}) {
            const Vec ref = eta(cylinder_point(n, e1, rho, z));
            const double ref_radial = ref[0];
            for (int i = 1; i < n - 1; ++i) {
                if (std::abs(ref[i]) > tol) {
                    throw PreconditionError("field " + eta.id() + " has a swirl component; not cylindrical");
                }
            }
            for (const auto& dir : dirs) {
                const Vec v = eta(cylinder_point(n, dir, rho, z));
                double radial = 0.0;
                for (int i = 0; i < n - 1; ++i) radial += v[i] * dir[i];
                double tangential = 0.0;
                for (int i = 0; i < n - 1; ++i) tangential = std::max(tangential, std::abs(v[i] - radial * dir[i]));
                const double defect = std::max({std::abs(radial - ref_radial), std::abs(v[n - 1] - ref[n - 1]), tangential});
                if (defect > tol) {
                    throw PreconditionError("field " + eta.id() + " is not cylindrically symmetric (defect " +
                                            format_number(defect) + " at rho=" + format_number(rho) +
                                            ", z=" + format_number(z) + ")");
                }
            }
        }
    }
}

}  // namespace

CylindricalPotential field_to_potential(const VectorField& eta, const quad::Tolerance& tol)
{
    const int n = eta.dim();
    if (n < 3) throw PreconditionError("field_to_potential needs dim >= 3");
    audit_cylindrical(eta);
    const Vec e1 = Vec::unit(n - 1, 0);

    auto radial = [eta, n, e1](double rho, double s) { return eta.eval_or_zero(cylinder_point(n, e1, rho, s))[0]; };
    auto V = [radial, n, tol](double rho, double z) {
        if (rho <= 0.0 || z == 0.0) return 0.0;
        const double integral = quad::integral([&](double s) { return radial(rho, s); }, 0.0, z, tol);
        return -std::pow(rho, n - 2.0) * integral;
    };

    CylindricalPotential p;
    p.dim = n;
    p.id = "potential-of(" + eta.id() + ")";
    p.V = V;
    p.dV = [V, radial, n](double rho, double z) -> std::pair<double, double> {
        if (rho <= 0.0) return {0.0, 0.0};
        const double d_z = -std::pow(rho, n - 2.0) * radial(rho, z);
        const double h = 1e-3 * rho;
        auto central = [&](double step) { return (V(rho + step, z) - V(rho - step, z)) / (2.0 * step); };
        const double d_rho = (4.0 * central(0.5 * h) - central(h)) / 3.0;
        return {d_rho, d_z};
    };
    return p;
}

namespace {

std::map<std::string, std::string> parse_params(const std::vector<std::string>& tokens, std::size_t first,
                                                const std::string& id)
{
    std::map<std::string, std::string> params;
    for (std::size_t i = first; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos) throw UsageError("malformed parameter '" + tokens[i] + "' in field id " + id);
        params[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
    }
    return params;
}

double number_param(const std::map<std::string, std::string>& params, const std::string& key, double fallback,
                    const std::string& id)
{
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw UsageError("parameter " + key + "=" + it->second + " in field id " + id + " is not a number");
    }
}

void reject_unknown(const std::map<std::string, std::string>& params, std::initializer_list<const char*> known,
                    const std::string& id)
{
    for (const auto& [key, value] : params) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw UsageError("unknown parameter '" + key + "' in field id " + id);
        }
    }
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

VectorField make_field(const std::string& id)
{
    const auto tokens = split(id, ':');
    const std::string& kind = tokens.front();
    if (kind == "counterexample") {
        const auto params = parse_params(tokens, 1, id);
        reject_unknown(params, {"n", "gamma"}, id);
        const int n = static_cast<int>(number_param(params, "n", 4, id));
        std::optional<double> gamma;
        const auto it = params.find("gamma");
        if (it != params.end() && it->second != "auto") gamma = number_param(params, "gamma", 0.0, id);
        return make_counterexample_field(n, gamma);
    }
    if (kind == "twisting") {
        const auto params = parse_params(tokens, 1, id);
        reject_unknown(params, {"levels"}, id);
        return make_twisting_field(static_cast<int>(number_param(params, "levels", 8, id)));
    }
    if (kind == "capillary") {
        const auto params = parse_params(tokens, 1, id);
        reject_unknown(params, {"R"}, id);
        return make_capillary_field(number_param(params, "R", 1.0, id));
    }
    if (kind == "stream") {
        if (tokens.size() < 2) throw UsageError("stream field id needs a kind: " + id);
        const auto params = parse_params(tokens, 2, id);
        if (tokens[1] == "zero") {
            reject_unknown(params, {}, id);
            return make_stream_field([](const Vec&) { return Vec(2); }, [](const Vec&) { return Mat(2); }, 0.0,
                                     "stream:zero", std::vector<Disk>{});
        }
        reject_unknown(params, {"cx", "cy", "radius"}, id);
        const Vec center{number_param(params, "cx", 0.0, id), number_param(params, "cy", 2.0, id)};
        const double radius = number_param(params, "radius", 1.0, id);
        const VectorField bump = make_stream_bump(center, radius);
        if (tokens[1] == "bump") return bump;
        if (tokens[1] == "bump3d") {
            return lift_planar(
                bump, [](double t) { return std::exp(-t * t); }, [](double t) { return -2.0 * t * std::exp(-t * t); },
                1.0, id);
        }
        throw UsageError("unknown stream field kind '" + tokens[1] + "'");
    }
    if (kind == "constant") {
        if (tokens.size() != 2) throw UsageError("constant field id must look like constant:0,-1");
        const auto parts = split(tokens[1], ',');
        if (parts.size() < 2 || parts.size() > static_cast<std::size_t>(kMaxDim)) {
            throw UsageError("constant field needs 2.." + std::to_string(kMaxDim) + " components");
        }
        Vec c(static_cast<int>(parts.size()));
        std::map<std::string, std::string> wrapped;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            wrapped["c"] = parts[i];
            c[static_cast<int>(i)] = number_param(wrapped, "c", 0.0, id);
        }
        return constant_field(c);
    }
    if (kind == "zero" || kind == "identity") {
        const auto params = parse_params(tokens, 1, id);
        reject_unknown(params, {"n"}, id);
        const int n = static_cast<int>(number_param(params, "n", 2, id));
        if (n < 2 || n > kMaxDim) throw UsageError("dimension out of range in " + id);
        if (kind == "zero") return constant_field(Vec(n));
        VectorField::Spec spec;
        spec.dim = n;
        spec.id = id;
        spec.eval = [](const Vec& x) { return x; };
        spec.div = [n](const Vec&) { return static_cast<double>(n); };
        spec.jacobian = [n](const Vec&) { return Mat::identity(n); };
        spec.sup_bound = std::numeric_limits<double>::infinity();
        return VectorField(std::move(spec));
    }
    throw UsageError("unknown field id '" + id + "'");
}

std::vector<std::pair<std::string, std::string>> field_registry()
{
    return {
        {"counterexample:n=4:gamma=auto", "rigidity counterexample in R^n (n >= 4), gamma auto or numeric"},
        {"twisting:levels=8", "planar twisting field of disjoint rotating bumps"},
        {"capillary:R=1", "Tu = x/R on the open disk of radius R"},
        {"stream:bump", "stream field of a radial bump (cx, cy, radius; default centre (0,2), radius 1)"},
        {"stream:bump3d", "stream bump lifted to R^3 by exp(-x2^2)"},
        {"stream:zero", "stream field of psi = 0"},
        {"constant:0,-1", "constant field with the listed components"},
        {"zero:n=2", "zero field in R^n"},
        {"identity:n=2", "x -> x in R^n"},
    };
}

}  // namespace divlab
