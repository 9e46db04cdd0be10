#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "divlab/geometry.hpp"
#include "divlab/linalg.hpp"

namespace divlab {

/// Affine subspace {x : normals[k] . (x - origin) = 0 for all k} along which a field is not smooth.
/// Normals are orthonormal, so the Euclidean distance is the norm of the projected offset.
struct Exclusion {
    std::string name;
    Vec origin;
    std::vector<Vec> normals;

    double distance(const Vec& x) const;
};

/// Immutable, cheaply copyable vector field on R^n.
///
/// Evaluation is pure and may be called concurrently. A field may carry a closed-form
/// divergence and Jacobian, a certified bound on its sup norm, the sets where finite
/// differences are invalid, a planar domain of definition, and a cover of its support by disks.
class VectorField {
public:
    using Eval = std::function<Vec(const Vec&)>;
    using Div = std::function<double(const Vec&)>;
    using Jacobian = std::function<Mat(const Vec&)>;

    struct Spec {
        int dim = 2;
        std::string id;
        Eval eval;
        Div div;
        Jacobian jacobian;
        double sup_bound = 0.0;
        std::vector<Exclusion> exclusions;
        std::optional<ConvexRegion> domain;
        std::optional<std::vector<Disk>> support_cover;
    };

    VectorField() = default;
    explicit VectorField(Spec spec);

    int dim() const { return impl_->dim; }
    const std::string& id() const { return impl_->id; }

    /// Throws DomainError outside the domain of definition.
    Vec operator()(const Vec& x) const;
    /// Field value, or zero outside the domain of definition.
    Vec eval_or_zero(const Vec& x) const;
    bool in_domain(const Vec& x) const;

    bool has_divergence() const { return static_cast<bool>(impl_->div); }
    double divergence(const Vec& x) const;
    bool has_jacobian() const { return static_cast<bool>(impl_->jacobian); }
    Mat jacobian(const Vec& x) const;

    double sup_bound() const { return impl_->sup_bound; }
    const std::vector<Exclusion>& exclusions() const { return impl_->exclusions; }
    /// Distance to the nearest exclusion set (infinity if there are none); `which` receives its name.
    double exclusion_distance(const Vec& x, std::string* which = nullptr) const;

    const std::optional<ConvexRegion>& domain() const { return impl_->domain; }
    /// Pairwise disjoint disks whose union contains the support, when known (2D only).
    const std::optional<std::vector<Disk>>& support_cover() const { return impl_->support_cover; }

    const Spec& spec() const { return *impl_; }

private:
    std::shared_ptr<const Spec> impl_;
};

/// y -> Q z(x0 + s Q^T y). With Q = I this is the blow-up rescaling z(x0 + s y).
/// Divergence scales by s; domain, support cover and exclusions follow the affine map.
VectorField pullback(const VectorField& z, const Vec& x0, double s, const Mat& q, const std::string& id = {});

/// x -> z(x - shift).
VectorField translated(const VectorField& z, const Vec& shift);

/// a z + b w (same dimension). The result has no domain restriction beyond the intersection.
VectorField linear_combination(double a, const VectorField& z, double b, const VectorField& w);

/// z + c for a constant vector c.
VectorField add_constant(const VectorField& z, const Vec& c);

/// Constant field.
VectorField constant_field(const Vec& c);

/// Divergence-free 3D extension (x1, x2, x3) -> chi(x2) (z1(x1, x3), 0, z2(x1, x3)) of a
/// divergence-free planar field z. With chi' and a planar Jacobian the lift carries a Jacobian.
VectorField lift_planar(const VectorField& z, const std::function<double(double)>& chi,
                        const std::function<double(double)>& dchi, double chi_sup, const std::string& id);

}  // namespace divlab
