#include "divlab/interface.hpp"

#include <cmath>
#include <sstream>

#include "divlab/errors.hpp"

namespace divlab {

OrientedInterface OrientedInterface::line(const Vec& point, const Vec& normal)
{
    if (point.size() != 2 || normal.size() != 2) throw PreconditionError("interfaces are planar");
    const double len = norm(normal);
    if (!(len > 0.0)) throw PreconditionError("line normal must be nonzero");
    OrientedInterface s;
    s.kind_ = Kind::line;
    s.origin_ = point;
    s.fixed_normal_ = normal / len;
    s.direction_ = perp(s.fixed_normal_);
    return s;
}

OrientedInterface OrientedInterface::circle(const Vec& center, double radius, int orientation)
{
    if (!(radius > 0.0)) throw PreconditionError("circle radius must be positive");
    if (orientation != 1 && orientation != -1) throw PreconditionError("orientation must be +1 or -1");
    OrientedInterface s;
    s.kind_ = Kind::circle;
    s.origin_ = center;
    s.radius_ = radius;
    s.orientation_ = orientation;
    s.curvature_ = 1.0 / radius;
    return s;
}

OrientedInterface OrientedInterface::curve(std::function<Vec(double)> gamma, std::function<Vec(double)> dgamma,
                                           double s_lo, double s_hi, double curvature_bound, int orientation)
{
    if (!(s_hi > s_lo)) throw PreconditionError("curve parameter range is empty");
    if (orientation != 1 && orientation != -1) throw PreconditionError("orientation must be +1 or -1");
    OrientedInterface s;
    s.kind_ = Kind::curve;
    s.gamma_ = std::move(gamma);
    s.dgamma_ = std::move(dgamma);
    s.s_lo_ = s_lo;
    s.s_hi_ = s_hi;
    s.curvature_ = curvature_bound;
    s.orientation_ = orientation;
    return s;
}

Vec OrientedInterface::point(double s) const
{
    switch (kind_) {
    case Kind::line:
        return origin_ + direction_ * s;
    case Kind::circle: {
        const double a = s / radius_;
        return origin_ + Vec{std::cos(a), std::sin(a)} * radius_;
    }
    case Kind::curve:
        return gamma_(s);
    }
    return {};
}

Vec OrientedInterface::tangent(double s) const
{
    switch (kind_) {
    case Kind::line:
        return direction_;
    case Kind::circle: {
        const double a = s / radius_;
        return Vec{-std::sin(a), std::cos(a)};
    }
    case Kind::curve: {
        const Vec t = dgamma_(s);
        return t / norm(t);
    }
    }
    return {};
}

Vec OrientedInterface::normal(double s) const
{
    if (kind_ == Kind::line) return fixed_normal_;
    const Vec t = tangent(s);
    return Vec{t[1], -t[0]} * static_cast<double>(orientation_);
}

double OrientedInterface::parameter_of(const Vec& x) const
{
    switch (kind_) {
    case Kind::line:
        return dot(x - origin_, direction_);
    case Kind::circle: {
        const Vec d = x - origin_;
        return radius_ * std::atan2(d[1], d[0]);
    }
    case Kind::curve: {
        // Coarse scan followed by golden-section refinement of the squared distance.
        const int n = 512;
        double best = s_lo_;
        double best_d = divlab::distance(x, gamma_(s_lo_));
        for (int k = 1; k <= n; ++k) {
            const double s = s_lo_ + (s_hi_ - s_lo_) * k / n;
            const double d = divlab::distance(x, gamma_(s));
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        const double h = (s_hi_ - s_lo_) / n;
        double a = std::max(s_lo_, best - h);
        double b = std::min(s_hi_, best + h);
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
            const double c = b - g * (b - a);
            const double d = a + g * (b - a);
            if (divlab::distance(x, gamma_(c)) < divlab::distance(x, gamma_(d))) {
                b = d;
            } else {
                a = c;
            }
        }
        return 0.5 * (a + b);
    }
    }
    return 0.0;
}

OrientedInterface OrientedInterface::rescaled(const Vec& x0, double r) const
{
    if (!(r > 0.0)) throw PreconditionError("rescaling factor must be positive");
    switch (kind_) {
    case Kind::line:
        return line((origin_ - x0) / r, fixed_normal_);
    case Kind::circle:
        return circle((origin_ - x0) / r, radius_ / r, orientation_);
    case Kind::curve: {
        auto g = gamma_;
        auto dg = dgamma_;
        return curve([g, x0, r](double s) { return (g(r * s) - x0) / r; }, [dg, r](double s) { return dg(r * s); },
                     s_lo_ / r, s_hi_ / r, curvature_ * r, orientation_);
    }
    }
    return *this;
}

std::string OrientedInterface::describe() const
{
    std::ostringstream os;
    switch (kind_) {
    case Kind::line:
        os << "line(point=(" << origin_[0] << "," << origin_[1] << "), normal=(" << fixed_normal_[0] << ","
           << fixed_normal_[1] << "))";
        break;
    case Kind::circle:
        os << "circle(center=(" << origin_[0] << "," << origin_[1] << "), radius=" << radius_
           << ", orientation=" << orientation_ << ")";
        break;
    case Kind::curve:
        os << "curve(s in [" << s_lo_ << "," << s_hi_ << "], orientation=" << orientation_ << ")";
        break;
    }
    return os.str();
}

}  // namespace divlab
