#include "divlab/rigidity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "divlab/errors.hpp"
#include "divlab/parallel.hpp"
#include "divlab/qmc.hpp"

namespace divlab {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

namespace {

json vec_json(const Vec& v)
{
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

std::string format_point(const Vec& x)
{
    std::ostringstream os;
    os.precision(10);
    os << "(";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

/// Breakpoints where a line meets the boundaries of the support cover, clipped to (lo, hi).
/// The line is {base + s dir}, dir a coordinate axis.
std::vector<double> cover_breaks(const VectorField& f, const Vec& base, int axis, double lo, double hi)
{
    std::vector<double> out;
    if (!f.support_cover()) return out;
    const int other = 1 - axis;
    for (const Disk& d : *f.support_cover()) {
        const double off = base[other] - d.center[other];
        const double disc = d.radius * d.radius - off * off;
        if (disc <= 0.0) continue;
        for (double s : {d.center[axis] - std::sqrt(disc), d.center[axis] + std::sqrt(disc)}) {
            if (s > lo && s < hi) out.push_back(s);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

FlowState integrate_flow(const VectorField& X, const Vec& p, double h, const FlowOptions& opt)
{
    const int n = X.dim();
    if (p.size() != n) throw PreconditionError("seed dimension does not match the field");
    const int m = n - 1;

    FlowState out;
    out.p = p;
    out.position = p;
    out.min_xn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) out.max_horizontal = std::max(out.max_horizontal, std::abs(p[i]));

    const double s0 = p[m];
    const double span = std::abs(h - s0);
    if (span == 0.0) {
        out.min_xn = X(p)[m];
        return out;
    }
    const double dir = h > s0 ? 1.0 : -1.0;

    auto rhs = [&](const State& y, State& dy, double s) {
        Vec x(n);
        for (int i = 0; i < m; ++i) x[i] = y[i];
        x[m] = s;
        const Vec v = X(x);
        const double xn = v[m];
        if (!(xn > 0.0)) {
            std::ostringstream os;
            os << "X_n = " << xn << " at " << format_point(x);
            throw FlowError("MONOTONICITY_VIOLATION", os.str());
        }
        out.min_xn = std::min(out.min_xn, xn);
        const Mat J = X.has_jacobian() ? X.jacobian(x) : numeric_jacobian(X, x, 1e-6);
        double tr = 0.0;
        for (int i = 0; i < m; ++i) tr += J(i, i) / xn - v[i] * J(m, i) / (xn * xn);
        for (int i = 0; i < m; ++i) dy[i] = v[i] / xn;
        dy[m] = 1.0 / xn;
        dy[m + 1] = tr * y[m + 1];
    };

    State y(static_cast<std::size_t>(n + 1), 0.0);
    for (int i = 0; i < m; ++i) y[i] = p[i];
    y[m + 1] = 1.0;

    auto record = [&](double s) {
        Vec x(n);
        for (int i = 0; i < m; ++i) {
            x[i] = y[i];
            out.max_horizontal = std::max(out.max_horizontal, std::abs(y[i]));
        }
        x[m] = s;
        out.min_delta = std::min(out.min_delta, y[m + 1]);
        if (opt.record) out.steps.push_back({s, y[m], x, y[m + 1]});
    };
    record(s0);

    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opt.atol, opt.rtol);
    double s = s0;
    double ds = dir * span / 16.0;
    while (dir * (h - s) > 0.0) {
        bool last = false;
        if (dir * (s + ds - h) >= 0.0) {
            ds = h - s;
            last = true;
        }
        if (stepper.try_step(rhs, y, s, ds) == odeint::success) {
            ++out.accepted_steps;
            if (last || std::abs(h - s) <= 1e-15 * span) s = h;
            record(s);
        } else {
            ++out.rejected_steps;
        }
        if (std::abs(ds) < opt.min_step * span) {
            std::ostringstream os;
            os << "step " << std::abs(ds) << " at height " << s;
            throw FlowError("STIFF_FAILURE", os.str());
        }
        if (out.accepted_steps + out.rejected_steps > opt.max_steps) {
            throw FlowError("STIFF_FAILURE", "step budget exhausted at height " + std::to_string(s));
        }
    }

    for (int i = 0; i < m; ++i) out.position[i] = y[i];
    out.position[m] = h;
    out.t = y[m];
    out.delta = y[m + 1];
    if (!(out.min_delta > 0.0)) {
        throw FlowError("MONOTONICITY_VIOLATION", "flow Jacobian lost positivity from " + format_point(p));
    }
    return out;
}

double Plate::measure() const
{
    double v = 1.0;
    for (int i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

FlowTube build_flow_tube(const VectorField& eta, double epsilon, const Plate& A, double h0, const FlowTubeOptions& opt)
{
    const int n = eta.dim();
    const int m = n - 1;
    if (A.lo.size() != m || A.hi.size() != m) throw PreconditionError("plate must live in R^{n-1}");
    for (int i = 0; i < m; ++i) {
        if (!(A.hi[i] > A.lo[i])) throw PreconditionError("plate is empty");
    }
    if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
    if (!(h0 > 0.0)) throw PreconditionError("h0 must be positive");
    if (!eta.has_divergence()) throw PreconditionError("flow tubes need a closed-form divergence");
    if (opt.seeds_per_axis < 1) throw PreconditionError("need at least one seed per axis");

    // Audit: eta vanishes below the plane, is divergence free, and eps dominates eta_n^- over the slab.
    const double width = [&] {
        double w = 0.0;
        for (int i = 0; i < m; ++i) w = std::max(w, A.hi[i] - A.lo[i]);
        return w;
    }();
    const Vec shift(n, 0.5);
    for (std::uint64_t k = 0; k < 2048; ++k) {
        const Vec u = qmc::halton(n, k, shift);
        Vec x(n);
        for (int i = 0; i < m; ++i) x[i] = A.lo[i] - width + u[i] * (A.hi[i] - A.lo[i] + 2.0 * width);
        x[m] = u[m] * h0;
        if (std::abs(eta.divergence(x)) > 1e-12) {
            throw PreconditionError("field is not divergence free at " + format_point(x));
        }
        if (eta(x)[m] <= -epsilon) {
            throw PreconditionError("epsilon does not dominate eta_n at " + format_point(x));
        }
        x[m] = -u[m] * h0 - 1e-12;
        if (norm(eta(x)) != 0.0) throw PreconditionError("field does not vanish below the plane at " + format_point(x));
    }

    const VectorField X = add_constant(eta, Vec::unit(n, m) * epsilon);
    const auto gl = quad::gauss_legendre(opt.seeds_per_axis);
    const int k = opt.seeds_per_axis;
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(k);

    auto seed = [&](std::size_t index, double& weight) {
        Vec q(n);
        weight = 1.0;
        std::size_t rest = index;
        for (int i = m - 1; i >= 0; --i) {
            const auto& [node, w] = gl[rest % k];
            rest /= k;
            const double half = 0.5 * (A.hi[i] - A.lo[i]);
            q[i] = A.lo[i] + half * (node + 1.0);
            weight *= w;
        }
        q[m] = h0;
        return q;
    };

    std::vector<FlowState> finals(total);
    std::vector<double> weights(total);
    parallel_for(total, [&](std::size_t i) { finals[i] = integrate_flow(X, seed(i, weights[i]), 0.0, opt.flow); });

    FlowTube tube;
    tube.A = A;
    tube.h0 = h0;
    tube.epsilon = epsilon;
    tube.seeds_per_axis = k;
    tube.min_delta = std::numeric_limits<double>::infinity();

    double wsum = 0.0;
    double dsum = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        wsum += weights[i];
        dsum += weights[i] * finals[i].delta;
        tube.min_delta = std::min(tube.min_delta, finals[i].min_delta);
        tube.R_bound = std::max(tube.R_bound, finals[i].max_horizontal);
        tube.max_displacement = std::max(tube.max_displacement, distance(finals[i].p, finals[i].position));
    }
    const double area = A.measure();
    tube.bottom_measure = area * (dsum / wsum);

    Vec top_lo(m);
    Vec top_hi(m);
    for (int i = 0; i < m; ++i) {
        top_lo[i] = A.lo[i];
        top_hi[i] = A.hi[i];
    }
    const double flux = quad::integrate_box(
                            [&](const Vec& q) {
                                Vec x(n);
                                for (int i = 0; i < m; ++i) x[i] = q[i];
                                x[m] = h0;
                                return eta(x)[m];
                            },
                            top_lo, top_hi, opt.top_tol)
                            .value;
    tube.top_integral = flux + epsilon * area;
    tube.residual = std::abs(tube.top_integral - epsilon * tube.bottom_measure);
    if (opt.linear_gauge) tube.displacement_bound = std::max(h0, h0 / *opt.linear_gauge);

    const int keep = std::min<int>(opt.recorded_trajectories, static_cast<int>(total));
    FlowOptions rec = opt.flow;
    rec.record = true;
    for (int j = 0; j < keep; ++j) {
        const std::size_t index = keep > 1 ? static_cast<std::size_t>(j) * (total - 1) / (keep - 1) : 0;
        double w = 0.0;
        tube.trajectories.push_back(integrate_flow(X, seed(index, w), 0.0, rec));
    }
    return tube;
}

json FlowTube::to_json() const
{
    json out;
    out["A"] = {{"lo", vec_json(A.lo)}, {"hi", vec_json(A.hi)}};
    out["h0"] = h0;
    out["epsilon"] = json_number(epsilon);
    out["seeds_per_axis"] = seeds_per_axis;
    out["top_integral"] = json_number(top_integral);
    out["bottom_measure"] = json_number(bottom_measure);
    out["residual"] = json_number(residual);
    out["R_bound"] = json_number(R_bound);
    out["min_delta"] = json_number(min_delta);
    out["max_displacement"] = json_number(max_displacement);
    out["displacement_bound"] = displacement_bound ? json_number(*displacement_bound) : json(nullptr);
    return out;
}

std::string FlowTube::csv() const
{
    std::ostringstream os;
    os.precision(17);
    const int m = A.lo.size();
    for (int i = 0; i < m; ++i) os << "q" << i + 1 << ",";
    os << "h";
    for (int i = 0; i <= m; ++i) os << ",phi" << i + 1;
    os << ",delta\n";
    for (const FlowState& s : trajectories) {
        for (const FlowSample& step : s.steps) {
            for (int i = 0; i < m; ++i) os << s.p[i] << ",";
            os << step.height;
            for (double v : step.position) os << "," << v;
            os << "," << step.delta << "\n";
        }
    }
    return os.str();
}

VerificationReport FlowTube::report(double residual_tol) const
{
    VerificationReport r;
    r.title = "flow_tube";
    r.outcome = "IDENTITY_CHECKED";
    r.details = to_json();
    r.add_at_most("identity residual |top - eps bottom|", residual, residual_tol);
    r.add("flow Jacobian positive", min_delta, 0.0, min_delta);
    const int m = A.lo.size();
    r.add_at_most("bottom measure <= (2R)^{n-1}", bottom_measure, std::pow(2.0 * R_bound, m));
    if (displacement_bound) r.add_at_most("displacement <= max(h0, h0/c)", max_displacement, *displacement_bound);
    return r;
}

VerificationReport strip_identity_2d(const VectorField& eta, double r, double t, const std::optional<PhiFunction>& phi,
                                     double residual_tol, const quad::Tolerance& tol)
{
    if (eta.dim() != 2) throw PreconditionError("the strip identity is planar");
    if (!eta.has_divergence()) throw PreconditionError("divergence information missing for " + eta.id());
    if (!(r > 0.0) || !(t > 0.0)) throw PreconditionError("r and t must be positive");

    const auto top_breaks = cover_breaks(eta, Vec{0.0, t}, 0, -r, r);
    const auto left_breaks = cover_breaks(eta, Vec{-r, 0.0}, 1, 0.0, t);
    const auto right_breaks = cover_breaks(eta, Vec{r, 0.0}, 1, 0.0, t);

    const auto lhs = quad::integrate([&](double x) { return eta(Vec{x, t})[1]; }, -r, r, tol, top_breaks);
    const auto left = quad::integrate([&](double y) { return eta(Vec{-r, y})[0]; }, 0.0, t, tol, left_breaks);
    const auto right = quad::integrate([&](double y) { return eta(Vec{r, y})[0]; }, 0.0, t, tol, right_breaks);
    const auto l1 = quad::integrate([&](double x) { return std::abs(eta(Vec{x, t})[1]); }, -r, r, tol, top_breaks);
    const double rhs = left.value - right.value;

    VerificationReport report;
    report.title = "strip_identity_2d";
    report.outcome = "IDENTITY_CHECKED";
    report.details = {{"field", eta.id()},
                      {"r", r},
                      {"t", t},
                      {"top_integral", json_number(lhs.value)},
                      {"side_integral", json_number(rhs)},
                      {"l1_top", json_number(l1.value)},
                      {"sup_bound", json_number(eta.sup_bound())}};
    report.add_at_most("strip residual", std::abs(lhs.value - rhs), residual_tol);
    report.add_at_most("L1 bound int|eta_2(., t)| <= 2 t sup|eta|", l1.value, 2.0 * t * eta.sup_bound());
    if (phi) {
        for (double x : {-r, r}) {
            const Vec v = eta(Vec{x, t});
            const double margin = v[1] - (*phi)(std::abs(v[0]));
            report.add(std::string("decay audit phi(|eta_1|) <= eta_2 at x = ") + (x < 0 ? "-r" : "+r"), margin, 0.0,
                       margin);
        }
        report.details["phi"] = phi->label;
    }
    return report;
}

GridSpec certification_grid(int rho_points, int z_points)
{
    GridSpec g;
    g.axes = {GridAxis{1e-3, 1e3, rho_points, true}, GridAxis{-1.0, 10.0, z_points, false}};
    return g;
}

RigidityCertificate certify_potential(const CylindricalPotential& P, const GridSpec& grid, double c, double margin_tol)
{
    grid.validate();
    if (grid.axes.size() != 2) throw PreconditionError("certification grids are (rho, z) grids");
    if (!P.V || !P.dV) throw PreconditionError("potential needs V and its gradient");
    const int n = P.dim;
    const int nr = grid.axes[0].resolution;
    const int nz = grid.axes[1].resolution;
    const char* names[3] = {"V0: V = 0 for z <= 0", "V1: |grad V| <= rho^{n-2}",
                            "V2: rho dV/drho >= c rho^{3-n} (dV/dz)^2"};

    std::vector<std::array<ConditionMargin, 3>> rows(static_cast<std::size_t>(nr));
    parallel_for(static_cast<std::size_t>(nr), [&](std::size_t i) {
        auto& best = rows[i];
        for (int k = 0; k < 3; ++k) {
            best[k].name = names[k];
            best[k].min_margin = std::numeric_limits<double>::infinity();
        }
        const double rho = grid.coordinate(0, static_cast<int>(i));
        for (int j = 0; j < nz; ++j) {
            const double z = grid.coordinate(1, j);
            const double v = P.V(rho, z);
            const auto [vr, vz] = P.dV(rho, z);
            ConditionMargin cand[3];
            if (z <= 0.0) cand[0] = {names[0], 0.0 - std::abs(v), rho, z, std::abs(v), 0.0};
            const double g = std::hypot(vr, vz);
            const double cap = std::pow(rho, n - 2);
            cand[1] = {names[1], cap - g, rho, z, g, cap};
            const double l2 = rho * vr;
            const double r2 = c * std::pow(rho, 3 - n) * vz * vz;
            cand[2] = {names[2], l2 - r2, rho, z, l2, r2};
            for (int k = 0; k < 3; ++k) {
                if (k == 0 && z > 0.0) continue;
                if (cand[k].min_margin < best[k].min_margin) best[k] = cand[k];
            }
        }
    });

    RigidityCertificate cert;
    cert.id = P.id;
    cert.grid = grid;
    for (int k = 0; k < 3; ++k) {
        ConditionMargin m{names[k], std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0, 0.0};
        for (const auto& row : rows) {
            if (row[k].min_margin < m.min_margin) m = row[k];
        }
        if (!std::isfinite(m.min_margin)) m.min_margin = 0.0;  // no node with z <= 0
        cert.conditions.push_back(m);
    }
    const auto [inv_c, power_bound] = n >= 4 ? gamma_bounds(n) : std::pair<double, double>{1.0 / ((kPi + std::pow(3.0, 0.75)) / 2.0), 0.0};
    cert.constants = {{"n", n},
                      {"gamma", json_number(P.gamma)},
                      {"C", json_number((kPi + std::pow(3.0, 0.75)) / 2.0)},
                      {"c", json_number(c)},
                      {"gamma_bound_inverse_C", json_number(inv_c)},
                      {"gamma_bound_power", n >= 4 ? json_number(power_bound) : json(nullptr)},
                      {"margin_tolerance", margin_tol}};

    // The witness is the first violated condition, in the order V0, V1, V2.
    const ConditionMargin* worst = nullptr;
    for (const auto& m : cert.conditions) {
        if (m.min_margin < -margin_tol) {
            worst = &m;
            break;
        }
    }
    if (worst) {
        cert.verdict = "VIOLATED";
        cert.witness = *worst;
    } else {
        cert.verdict = "CERTIFIED_SAMPLED";
    }
    return cert;
}

json RigidityCertificate::to_json() const
{
    json out;
    out["id"] = id;
    json conds = json::array();
    for (const auto& m : conditions) {
        conds.push_back({{"name", m.name},
                         {"min_margin", json_number(m.min_margin)},
                         {"argmin_point", {json_number(m.rho), json_number(m.z)}},
                         {"lhs", json_number(m.lhs)},
                         {"rhs", json_number(m.rhs)}});
    }
    out["conditions"] = conds;
    out["verdict"] = verdict;
    if (witness) {
        out["witness"] = {{"condition", witness->name},
                          {"point", {json_number(witness->rho), json_number(witness->z)}},
                          {"lhs", json_number(witness->lhs)},
                          {"rhs", json_number(witness->rhs)},
                          {"margin", json_number(witness->min_margin)}};
    }
    out["constants"] = constants;
    out["grid"] = grid.to_json();
    return out;
}

VerificationReport RigidityCertificate::report() const
{
    VerificationReport r;
    r.title = "certify_potential";
    r.outcome = verdict;
    r.details = to_json();
    const double tol = constants.value("margin_tolerance", 1e-12);
    for (const auto& m : conditions) r.add(m.name, m.min_margin, tol, m.min_margin + tol);
    return r;
}

VerificationReport separable_demo(double gamma, double rho0, double psi0, double rel_tol)
{
    if (!(gamma > 0.0) || !(rho0 > 0.0) || !(psi0 > 0.0)) throw PreconditionError("gamma, rho0 and psi0 must be positive");
    const double predicted = rho0 * std::exp(1.0 / (gamma * psi0));

    auto rhs = [gamma](const State& y, State& dy, double rho) { dy[0] = gamma * y[0] * y[0] / rho; };
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-12, 1e-10);

    State y{psi0};
    double rho = rho0;
    double h = 1e-3 * rho0;
    std::vector<std::pair<double, double>> path{{rho, psi0}};
    std::string reason;
    int steps = 0;
    while (true) {
        if (stepper.try_step(rhs, y, rho, h) == odeint::success) {
            ++steps;
            path.emplace_back(rho, y[0]);
            if (!std::isfinite(y[0]) || y[0] > 1e12) {
                reason = "psi exceeded 1e12";
                break;
            }
        }
        if (std::abs(h) < 1e-14) {
            reason = "step fell below 1e-14";
            break;
        }
        if (steps > 1000000) {
            reason = "step budget exhausted";
            break;
        }
    }

    // First radius where |psi'| = gamma psi^2 / rho exceeds rho.
    double crossing = std::numeric_limits<double>::quiet_NaN();
    auto excess = [gamma](double r, double p) { return gamma * p * p - r * r; };
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double g1 = excess(path[i].first, path[i].second);
        if (g1 > 0.0) {
            if (i == 0) {
                crossing = path[0].first;
            } else {
                const double g0 = excess(path[i - 1].first, path[i - 1].second);
                crossing = path[i - 1].first + (path[i].first - path[i - 1].first) * (-g0) / (g1 - g0);
            }
            break;
        }
    }

    // 1/psi is affine in log(rho) along the exact solution, and well conditioned up to blow-up.
    double closed_form_defect = 0.0;
    for (const auto& [r, p] : path) {
        const double exact = 1.0 / psi0 - gamma * std::log(r / rho0);
        closed_form_defect = std::max(closed_form_defect, std::abs(1.0 / p - exact) * psi0);
    }

    VerificationReport report;
    report.title = "separable_demo";
    report.outcome = "BLOWUP_DETECTED";
    report.details = {{"gamma", gamma},
                      {"rho0", rho0},
                      {"psi0", psi0},
                      {"blowup_radius", json_number(rho)},
                      {"predicted_radius", json_number(predicted)},
                      {"stop_reason", reason},
                      {"final_psi", json_number(y[0])},
                      {"accepted_steps", steps},
                      {"first_radius_psi_prime_exceeds_rho", json_number(crossing)}};
    if (reason == "step budget exhausted") report.outcome = "NO_BLOWUP_DETECTED";
    report.add_at_most("relative blow-up radius error", std::abs(rho - predicted) / predicted, rel_tol);
    report.add_at_most("closed-form defect of psi0/psi", closed_form_defect, 1e-8);
    report.add_flag("|psi'| exceeds rho before blow-up", std::isfinite(crossing) && crossing < rho);
    return report;
}

}  // namespace divlab
