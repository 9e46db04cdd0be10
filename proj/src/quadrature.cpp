#include "divlab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace divlab::quad {

namespace {

// Kronrod abscissae on [0, 1]; odd indices are the embedded 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
};

struct ByError {
    bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

// Sums are taken relative to the centre value so that constants integrate exactly.
Panel gk15(const Integrand& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double dev_k = 0.0;
    double dev_g = 0.0;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        const double f1 = f(center - dx) - fc;
        const double f2 = f(center + dx) - fc;
        dev_k += kWgk[static_cast<std::size_t>(j)] * (f1 + f2);
        if (j % 2 == 1) dev_g += kWg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
    }
    const double base = fc * (b - a);
    Panel p{a, b, base + half * dev_k, 0.0};
    p.error = std::abs(half * (dev_k - dev_g));
    return p;
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, const Tolerance& tol,
                 std::span<const double> breakpoints)
{
    Result out;
    if (a == b) return out;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }

    std::vector<double> cuts{a};
    for (double c : breakpoints) {
        if (c > a && c < b) cuts.push_back(c);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Panel, std::vector<Panel>, ByError> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p = gk15(f, cuts[i], cuts[i + 1]);
        out.evaluations += 15;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    int intervals = static_cast<int>(heap.size());
    while (total_err > std::max(tol.abs, tol.rel * std::abs(total))) {
        if (intervals >= tol.max_intervals) {
            out.converged = false;
            break;
        }
        Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split further in double precision.
            out.converged = false;
            break;
        }
        heap.pop();
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }

    // Re-sum to remove drift from the running updates.
    double value = 0.0;
    double error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = sign * value;
    out.error = error;
    return out;
}

namespace {

Result integrate_box_axis(const std::function<double(const Vec&)>& f, Vec& point, const Vec& lo,
                          const Vec& hi, int axis, const Tolerance& tol)
{
    const int n = lo.size();
    if (axis == n - 1) {
        return integrate(
            [&](double x) {
                point[axis] = x;
                return f(point);
            },
            lo[axis], hi[axis], tol);
    }
    // Inner integrals are resolved more tightly than the outer one.
    Tolerance inner = tol;
    const double width = std::max(1.0, hi[axis] - lo[axis]);
    inner.abs = tol.abs * 0.1 / width;
    inner.rel = tol.rel * 0.1;
    std::size_t evaluations = 0;
    bool converged = true;
    Result r = integrate(
        [&](double x) {
            point[axis] = x;
            Vec saved = point;
            Result s = integrate_box_axis(f, point, lo, hi, axis + 1, inner);
            point = saved;
            evaluations += s.evaluations;
            converged = converged && s.converged;
            return s.value;
        },
        lo[axis], hi[axis], tol);
    r.evaluations = evaluations;
    r.converged = r.converged && converged;
    return r;
}

}  // namespace

Result integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi,
                     const Tolerance& tol)
{
    if (lo.size() != hi.size() || lo.size() == 0) {
        throw std::invalid_argument("integrate_box: bounds dimension mismatch");
    }
    Vec point = lo;
    return integrate_box_axis(f, point, lo, hi, 0, tol);
}

std::vector<std::pair<double, double>> gauss_legendre(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    std::vector<std::pair<double, double>> rule(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[static_cast<std::size_t>(i)] = {-x, w};
        rule[static_cast<std::size_t>(n - 1 - i)] = {x, w};
    }
    if (n % 2 == 1) rule[static_cast<std::size_t>(n / 2)].first = 0.0;
    return rule;
}

Extremum golden_section_max(const Integrand& f, double a, double b, double x_tol)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > x_tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

}  // namespace divlab::quad
