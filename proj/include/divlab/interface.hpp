#pragma once

#include <functional>
#include <string>

#include "divlab/linalg.hpp"

namespace divlab {

/// Planar C^1 curve parametrized by arc length, with a unit normal.
///
/// Lines carry the given normal; circles use the outward normal times `orientation`;
/// general curves use the right-hand normal (tangent rotated clockwise) times `orientation`.
class OrientedInterface {
public:
    enum class Kind { line, circle, curve };

    static OrientedInterface line(const Vec& point, const Vec& normal);
    static OrientedInterface circle(const Vec& center, double radius, int orientation = 1);
    static OrientedInterface curve(std::function<Vec(double)> gamma, std::function<Vec(double)> dgamma, double s_lo,
                                   double s_hi, double curvature_bound, int orientation = 1);

    Kind kind() const { return kind_; }
    int orientation() const { return orientation_; }

    Vec point(double s) const;
    Vec tangent(double s) const;
    Vec normal(double s) const;

    /// Arc-length parameter of the closest point on the curve.
    double parameter_of(const Vec& x) const;
    double distance(const Vec& x) const { return divlab::distance(x, point(parameter_of(x))); }
    Vec normal_at(const Vec& x) const { return normal(parameter_of(x)); }

    /// The interface r^{-1} (S - x0), with arc length rescaled accordingly.
    OrientedInterface rescaled(const Vec& x0, double r) const;

    /// Upper bound on |curvature|.
    double curvature_bound() const { return curvature_; }
    std::string describe() const;

private:
    Kind kind_ = Kind::line;
    Vec origin_;
    Vec direction_;
    Vec fixed_normal_;
    double radius_ = 0.0;
    int orientation_ = 1;
    double s_lo_ = 0.0;
    double s_hi_ = 0.0;
    double curvature_ = 0.0;
    std::function<Vec(double)> gamma_;
    std::function<Vec(double)> dgamma_;
};

}  // namespace divlab
