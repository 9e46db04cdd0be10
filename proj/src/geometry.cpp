#include "divlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "divlab/errors.hpp"

namespace divlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double a)
{
    while (a <= -kPi) a += 2.0 * kPi;
    while (a > kPi) a -= 2.0 * kPi;
    return a;
}

double angle_of(const Vec& v) { return std::atan2(v[1], v[0]); }

Vec on_circle(const Disk& d, double angle)
{
    return Vec{d.center[0] + d.radius * std::cos(angle), d.center[1] + d.radius * std::sin(angle)};
}

bool in_plane(const HalfPlane& h, const Vec& x, double slack) { return dot(h.normal, x) <= h.offset + slack; }

bool in_disk(const Disk& d, const Vec& x, double slack)
{
    return distance(x, d.center) <= d.radius + slack;
}

std::vector<Vec> intersect_lines(const HalfPlane& a, const HalfPlane& b)
{
    const double det = cross2(a.normal, b.normal);
    if (std::abs(det) < 1e-14) return {};
    const double x = (a.offset * b.normal[1] - b.offset * a.normal[1]) / det;
    const double y = (a.normal[0] * b.offset - b.normal[0] * a.offset) / det;
    return {Vec{x, y}};
}

std::vector<Vec> intersect_line_circle(const HalfPlane& h, const Disk& d)
{
    const Vec p0 = h.normal * h.offset;
    const Vec dir = perp(h.normal);
    const Vec w = p0 - d.center;
    const double b = dot(w, dir);
    const double c = dot(w, w) - d.radius * d.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return {};
    const double s = std::sqrt(disc);
    if (s == 0.0) return {p0 + dir * (-b)};
    return {p0 + dir * (-b - s), p0 + dir * (-b + s)};
}

std::vector<Vec> intersect_circles(const Disk& a, const Disk& b)
{
    const Vec delta = b.center - a.center;
    const double dist = norm(delta);
    if (dist < 1e-15 || dist > a.radius + b.radius || dist < std::abs(a.radius - b.radius)) return {};
    const double along = (a.radius * a.radius - b.radius * b.radius + dist * dist) / (2.0 * dist);
    const double h2 = a.radius * a.radius - along * along;
    const Vec e = delta / dist;
    const Vec base = a.center + e * along;
    if (h2 <= 0.0) return {base};
    const double h = std::sqrt(h2);
    return {base + perp(e) * h, base - perp(e) * h};
}

double region_scale(const ConvexRegion& r)
{
    double s = 1.0;
    for (const auto& d : r.disks()) s = std::max(s, std::abs(d.center[0]) + std::abs(d.center[1]) + d.radius);
    for (const auto& h : r.half_planes()) s = std::max(s, std::abs(h.offset));
    return s;
}

}  // namespace

double BoundaryPiece::length() const
{
    return kind == Kind::segment ? seg_length : radius * (angle1 - angle0);
}

Vec BoundaryPiece::point(double s) const
{
    if (kind == Kind::segment) return start + direction * s;
    const double a = angle0 + s / radius;
    return Vec{center[0] + radius * std::cos(a), center[1] + radius * std::sin(a)};
}

Vec BoundaryPiece::outward_normal(double s) const
{
    if (kind == Kind::segment) return seg_normal;
    const double a = angle0 + s / radius;
    return Vec{std::cos(a), std::sin(a)};
}

ConvexRegion ConvexRegion::disk(const Vec& center, double radius)
{
    if (!(radius > 0.0)) throw PreconditionError("disk radius must be positive");
    ConvexRegion r;
    r.disks_.push_back({center, radius});
    return r;
}

ConvexRegion ConvexRegion::rectangle(const Vec& lo, const Vec& hi)
{
    if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw PreconditionError("rectangle must have positive extent");
    ConvexRegion r;
    r.planes_.push_back({Vec{-1.0, 0.0}, -lo[0]});
    r.planes_.push_back({Vec{1.0, 0.0}, hi[0]});
    r.planes_.push_back({Vec{0.0, -1.0}, -lo[1]});
    r.planes_.push_back({Vec{0.0, 1.0}, hi[1]});
    return r;
}

ConvexRegion ConvexRegion::half_plane(const Vec& point, const Vec& outward_normal)
{
    const Vec n = outward_normal / norm(outward_normal);
    ConvexRegion r;
    r.planes_.push_back({n, dot(n, point)});
    return r;
}

ConvexRegion ConvexRegion::half_disk(const Vec& center, double radius, const Vec& flat_outward_normal)
{
    return disk(center, radius).intersect(half_plane(center, flat_outward_normal));
}

ConvexRegion ConvexRegion::intersect(const ConvexRegion& other) const
{
    ConvexRegion r = *this;
    r.disks_.insert(r.disks_.end(), other.disks_.begin(), other.disks_.end());
    r.planes_.insert(r.planes_.end(), other.planes_.begin(), other.planes_.end());
    return r;
}

bool ConvexRegion::contains(const Vec& x, double slack) const
{
    for (const auto& d : disks_)
        if (!in_disk(d, x, slack)) return false;
    for (const auto& h : planes_)
        if (!in_plane(h, x, slack)) return false;
    return true;
}

bool ConvexRegion::contains_strictly(const Vec& x) const
{
    for (const auto& d : disks_)
        if (!(distance(x, d.center) < d.radius)) return false;
    for (const auto& h : planes_)
        if (!(dot(h.normal, x) < h.offset)) return false;
    return true;
}

bool ConvexRegion::bounded() const
{
    if (!disks_.empty()) return true;
    if (planes_.size() < 3) return false;
    std::vector<double> angles;
    for (const auto& h : planes_) angles.push_back(angle_of(h.normal));
    std::sort(angles.begin(), angles.end());
    double max_gap = angles.front() + 2.0 * kPi - angles.back();
    for (std::size_t i = 1; i < angles.size(); ++i) max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
    return max_gap < kPi;
}

std::optional<Interval> ConvexRegion::chord(const Vec& origin, const Vec& dir, double t_lo, double t_hi) const
{
    double lo = t_lo;
    double hi = t_hi;
    for (const auto& h : planes_) {
        const double nd = dot(h.normal, dir);
        const double slack = h.offset - dot(h.normal, origin);
        if (nd > 0.0) {
            hi = std::min(hi, slack / nd);
        } else if (nd < 0.0) {
            lo = std::max(lo, slack / nd);
        } else if (slack < 0.0) {
            return std::nullopt;
        }
    }
    for (const auto& d : disks_) {
        const Vec w = origin - d.center;
        const double a = dot(dir, dir);
        const double b = dot(w, dir);
        const double c = dot(w, w) - d.radius * d.radius;
        const double disc = b * b - a * c;
        if (disc <= 0.0) return std::nullopt;
        const double s = std::sqrt(disc);
        // Stable roots of a t^2 + 2 b t + c = 0.
        const double q = -(b + std::copysign(s, b));
        double t1 = q / a;
        double t2 = (q != 0.0) ? c / q : -t1;
        if (t1 > t2) std::swap(t1, t2);
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
    }
    if (!(hi > lo)) return std::nullopt;
    return Interval{lo, hi};
}

std::vector<Vec> ConvexRegion::vertices() const
{
    std::vector<Vec> candidates;
    for (std::size_t i = 0; i < planes_.size(); ++i)
        for (std::size_t j = i + 1; j < planes_.size(); ++j)
            for (const auto& p : intersect_lines(planes_[i], planes_[j])) candidates.push_back(p);
    for (const auto& h : planes_)
        for (const auto& d : disks_)
            for (const auto& p : intersect_line_circle(h, d)) candidates.push_back(p);
    for (std::size_t i = 0; i < disks_.size(); ++i)
        for (std::size_t j = i + 1; j < disks_.size(); ++j)
            for (const auto& p : intersect_circles(disks_[i], disks_[j])) candidates.push_back(p);

    const double slack = 1e-10 * region_scale(*this);
    std::vector<Vec> out;
    for (const auto& p : candidates)
        if (contains(p, slack)) out.push_back(p);
    return out;
}

std::optional<Box2> ConvexRegion::bounding_box() const
{
    if (!bounded()) return std::nullopt;
    const double slack = 1e-10 * region_scale(*this);
    std::vector<Vec> pts = vertices();
    for (const auto& d : disks_) {
        for (int k = 0; k < 4; ++k) {
            const Vec p = on_circle(d, k * kPi / 2.0);
            if (contains(p, slack)) pts.push_back(p);
        }
    }
    if (pts.empty()) return std::nullopt;
    Box2 box{pts.front(), pts.front()};
    for (const auto& p : pts) {
        for (int a = 0; a < 2; ++a) {
            box.lo[a] = std::min(box.lo[a], p[a]);
            box.hi[a] = std::max(box.hi[a], p[a]);
        }
    }
    return box;
}

std::vector<BoundaryPiece> ConvexRegion::boundary() const
{
    if (!bounded()) throw PreconditionError("boundary of an unbounded region: " + describe());
    const double slack = 1e-10 * region_scale(*this);
    std::vector<BoundaryPiece> pieces;

    for (std::size_t i = 0; i < disks_.size(); ++i) {
        const Disk& d = disks_[i];
        ConvexRegion others;
        for (std::size_t j = 0; j < disks_.size(); ++j)
            if (j != i) others.disks_.push_back(disks_[j]);
        others.planes_ = planes_;

        std::vector<double> angles;
        for (const auto& h : planes_)
            for (const auto& p : intersect_line_circle(h, d)) angles.push_back(angle_of(p - d.center));
        for (const auto& e : others.disks_)
            for (const auto& p : intersect_circles(d, e)) angles.push_back(angle_of(p - d.center));
        std::sort(angles.begin(), angles.end());
        angles.erase(std::unique(angles.begin(), angles.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                     angles.end());

        auto add_arc = [&](double a0, double a1) {
            if (a1 - a0 < 1e-14) return;
            BoundaryPiece piece;
            piece.kind = BoundaryPiece::Kind::arc;
            piece.center = d.center;
            piece.radius = d.radius;
            piece.angle0 = a0;
            piece.angle1 = a1;
            pieces.push_back(piece);
        };
        if (angles.empty()) {
            if (others.contains(on_circle(d, 0.0), slack)) add_arc(0.0, 2.0 * kPi);
            continue;
        }
        for (std::size_t k = 0; k < angles.size(); ++k) {
            const double a0 = angles[k];
            const double a1 = (k + 1 < angles.size()) ? angles[k + 1] : angles.front() + 2.0 * kPi;
            if (others.contains(on_circle(d, 0.5 * (a0 + a1)), slack)) add_arc(a0, a1);
        }
    }

    for (std::size_t i = 0; i < planes_.size(); ++i) {
        const HalfPlane& h = planes_[i];
        ConvexRegion others;
        others.disks_ = disks_;
        for (std::size_t j = 0; j < planes_.size(); ++j)
            if (j != i) others.planes_.push_back(planes_[j]);
        const Vec p0 = h.normal * h.offset;
        const Vec dir = perp(h.normal);
        const auto seg = others.chord(p0, dir, -kInf, kInf);
        if (!seg || seg->length() < 1e-14) continue;
        if (!std::isfinite(seg->lo) || !std::isfinite(seg->hi)) {
            throw PreconditionError("unbounded boundary edge in region " + describe());
        }
        BoundaryPiece piece;
        piece.kind = BoundaryPiece::Kind::segment;
        piece.start = p0 + dir * seg->lo;
        piece.direction = dir;
        piece.seg_length = seg->length();
        piece.seg_normal = h.normal;
        pieces.push_back(piece);
    }
    return pieces;
}

double ConvexRegion::perimeter() const
{
    double total = 0.0;
    for (const auto& p : boundary()) total += p.length();
    return total;
}

ConvexRegion ConvexRegion::transformed(const Vec& origin, double scale, const Mat& rot) const
{
    ConvexRegion r;
    for (const auto& d : disks_) r.disks_.push_back({rot * (d.center - origin) / scale, d.radius / scale});
    for (const auto& h : planes_) r.planes_.push_back({rot * h.normal, (h.offset - dot(h.normal, origin)) / scale});
    return r;
}

std::string ConvexRegion::describe() const
{
    std::ostringstream os;
    os << "region{";
    for (const auto& d : disks_) os << " disk(" << d.center[0] << "," << d.center[1] << ";" << d.radius << ")";
    for (const auto& h : planes_) os << " plane(" << h.normal[0] << "," << h.normal[1] << ";" << h.offset << ")";
    os << " }";
    return os.str();
}

quad::Result integrate_region_polar(const ConvexRegion& region, const Vec& pole, const ScalarFunction& f,
                                    const quad::Tolerance& tol)
{
    if (!region.bounded()) throw PreconditionError("integration over unbounded region " + region.describe());

    std::vector<double> cuts;
    for (const auto& v : region.vertices()) {
        if (distance(v, pole) > 1e-14) cuts.push_back(angle_of(v - pole));
    }
    for (const auto& h : region.half_planes()) {
        const Vec d = perp(h.normal);
        cuts.push_back(angle_of(d));
        cuts.push_back(angle_of(-d));
    }
    for (const auto& d : region.disks()) {
        const Vec w = d.center - pole;
        const double dist = norm(w);
        if (dist >= d.radius && dist > 0.0) {
            const double half = std::asin(std::min(1.0, d.radius / dist));
            cuts.push_back(wrap_angle(angle_of(w) + half));
            cuts.push_back(wrap_angle(angle_of(w) - half));
        }
    }

    quad::Tolerance inner = tol;
    inner.abs = tol.abs * 0.1 / (2.0 * kPi);
    inner.rel = tol.rel * 0.1;
    std::size_t evaluations = 0;
    bool converged = true;
    quad::Result r = quad::integrate(
        [&](double theta) {
            const Vec u{std::cos(theta), std::sin(theta)};
            const auto seg = region.chord(pole, u, 0.0, kInf);
            if (!seg) return 0.0;
            quad::Result s = quad::integrate([&](double rad) { return f(pole + u * rad) * rad; }, seg->lo, seg->hi, inner);
            evaluations += s.evaluations;
            converged = converged && s.converged;
            return s.value;
        },
        -kPi, kPi, tol, cuts);
    r.evaluations = evaluations;
    r.converged = r.converged && converged;
    return r;
}

quad::Result integrate_region(const ConvexRegion& region, const ScalarFunction& f, const quad::Tolerance& tol)
{
    const auto box = region.bounding_box();
    if (!box) throw PreconditionError("integration over unbounded or empty region " + region.describe());
    const double slack = 1e-12 * (1.0 + norm(box->hi - box->lo));
    for (const auto& d : region.disks()) {
        if (region.contains(d.center, slack)) return integrate_region_polar(region, d.center, f, tol);
    }

    std::vector<double> cuts;
    for (const auto& v : region.vertices()) cuts.push_back(v[0]);
    for (const auto& d : region.disks()) {
        cuts.push_back(d.center[0] - d.radius);
        cuts.push_back(d.center[0] + d.radius);
    }
    const double width = box->hi[0] - box->lo[0];
    quad::Tolerance inner = tol;
    inner.abs = tol.abs * 0.1 / std::max(1.0, width);
    inner.rel = tol.rel * 0.1;
    std::size_t evaluations = 0;
    bool converged = true;
    const Vec up{0.0, 1.0};
    quad::Result r = quad::integrate(
        [&](double x) {
            const auto seg = region.chord(Vec{x, 0.0}, up, -kInf, kInf);
            if (!seg) return 0.0;
            quad::Result s = quad::integrate([&](double y) { return f(Vec{x, y}); }, seg->lo, seg->hi, inner);
            evaluations += s.evaluations;
            converged = converged && s.converged;
            return s.value;
        },
        box->lo[0], box->hi[0], tol, cuts);
    r.evaluations = evaluations;
    r.converged = r.converged && converged;
    return r;
}

namespace {

// Sub-intervals of [0, piece.length()] lying inside the disk.
std::vector<Interval> piece_inside(const BoundaryPiece& piece, const Disk& disk)
{
    const double len = piece.length();
    std::vector<double> cuts{0.0, len};
    if (piece.kind == BoundaryPiece::Kind::segment) {
        const auto c = ConvexRegion::disk(disk.center, disk.radius).chord(piece.start, piece.direction, 0.0, len);
        if (!c) return {};
        return {*c};
    }
    const Disk own{piece.center, piece.radius};
    for (const auto& p : intersect_circles(own, disk)) {
        double a = angle_of(p - piece.center);
        while (a < piece.angle0) a += 2.0 * kPi;
        while (a > piece.angle0 + 2.0 * kPi) a -= 2.0 * kPi;
        const double s = piece.radius * (a - piece.angle0);
        if (s > 0.0 && s < len) cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Interval> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] <= 0.0) continue;
        if (in_disk(disk, piece.point(0.5 * (cuts[k] + cuts[k + 1])), 0.0)) out.push_back({cuts[k], cuts[k + 1]});
    }
    return out;
}

}  // namespace

quad::Result integrate_boundary(const ConvexRegion& region, const std::function<double(const Vec&, const Vec&)>& f,
                                const quad::Tolerance& tol, const std::optional<Disk>& focus)
{
    quad::Result total;
    for (const auto& piece : region.boundary()) {
        std::vector<Interval> parts;
        if (focus) {
            parts = piece_inside(piece, *focus);
        } else {
            parts.push_back({0.0, piece.length()});
        }
        for (const auto& part : parts) {
            quad::Result r = quad::integrate([&](double s) { return f(piece.point(s), piece.outward_normal(s)); },
                                             part.lo, part.hi, tol);
            total.value += r.value;
            total.error += r.error;
            total.evaluations += r.evaluations;
            total.converged = total.converged && r.converged;
        }
    }
    return total;
}

}  // namespace divlab
