#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "divlab/linalg.hpp"
#include "divlab/quadrature.hpp"

namespace divlab {

/// Closed half-plane {x : normal . x <= offset} with unit outward normal.
struct HalfPlane {
    Vec normal;
    double offset = 0.0;
};

struct Disk {
    Vec center;
    double radius = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

struct Box2 {
    Vec lo;
    Vec hi;
};

/// One smooth piece of a region boundary, parametrized by arc length s in [0, length()].
struct BoundaryPiece {
    enum class Kind { segment, arc };
    Kind kind = Kind::segment;
    // segment: start + s * direction; arc: center + radius * (cos, sin)(angle0 + s / radius)
    Vec start;
    Vec direction;
    double seg_length = 0.0;
    Vec center;
    double radius = 0.0;
    double angle0 = 0.0;
    double angle1 = 0.0;
    Vec seg_normal;

    double length() const;
    Vec point(double s) const;
    Vec outward_normal(double s) const;
};

/// Planar convex region given as an intersection of disks and half-planes.
///
/// Covers the shapes used by the verification recipes: disks, rectangles, half-disks,
/// half-planes and their intersections (e.g. a test-function support clipped by a domain).
class ConvexRegion {
public:
    /// The whole plane.
    ConvexRegion() = default;

    static ConvexRegion disk(const Vec& center, double radius);
    static ConvexRegion rectangle(const Vec& lo, const Vec& hi);
    static ConvexRegion half_plane(const Vec& point, const Vec& outward_normal);
    /// Disk intersected with the half-plane through the centre whose outward normal is given.
    static ConvexRegion half_disk(const Vec& center, double radius, const Vec& flat_outward_normal);

    ConvexRegion intersect(const ConvexRegion& other) const;

    bool contains(const Vec& x, double slack = 0.0) const;
    /// Membership in the interior (all constraints strict).
    bool contains_strictly(const Vec& x) const;
    bool is_whole_plane() const { return disks_.empty() && planes_.empty(); }
    bool bounded() const;

    /// {t in [t_lo, t_hi] : origin + t * dir in region}; empty when the chord misses the region.
    std::optional<Interval> chord(const Vec& origin, const Vec& dir, double t_lo, double t_hi) const;

    std::optional<Box2> bounding_box() const;

    /// Pairwise intersection points of the constraint boundaries that lie on the region.
    std::vector<Vec> vertices() const;

    /// Boundary pieces with outward normals. Requires a bounded region.
    std::vector<BoundaryPiece> boundary() const;
    double perimeter() const;

    /// Image of the region under y = rot * (x - origin) / scale.
    ConvexRegion transformed(const Vec& origin, double scale, const Mat& rot) const;

    const std::vector<Disk>& disks() const { return disks_; }
    const std::vector<HalfPlane>& half_planes() const { return planes_; }

    std::string describe() const;

private:
    std::vector<Disk> disks_;
    std::vector<HalfPlane> planes_;
};

using ScalarFunction = std::function<double(const Vec&)>;

/// Area integral of f over a bounded convex region.
///
/// Uses polar coordinates about a disk centre lying in the closed region when one exists,
/// otherwise iterated Cartesian quadrature. Corner, tangency and edge-direction angles
/// (or abscissae) seed the outer partition.
quad::Result integrate_region(const ConvexRegion& region, const ScalarFunction& f,
                              const quad::Tolerance& tol = {});

/// Area integral in polar coordinates about an arbitrary pole.
quad::Result integrate_region_polar(const ConvexRegion& region, const Vec& pole, const ScalarFunction& f,
                                    const quad::Tolerance& tol = {});

/// Integral of f along the region boundary with respect to arc length.
/// f receives the boundary point and the outward unit normal. With `focus`, only the part of the
/// boundary inside that disk is integrated (f must vanish elsewhere).
quad::Result integrate_boundary(const ConvexRegion& region,
                                const std::function<double(const Vec&, const Vec&)>& f,
                                const quad::Tolerance& tol = {}, const std::optional<Disk>& focus = std::nullopt);

}  // namespace divlab
