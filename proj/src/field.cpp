#include "divlab/field.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "divlab/errors.hpp"

namespace divlab {

double Exclusion::distance(const Vec& x) const
{
    const Vec d = x - origin;
    double s = 0.0;
    for (const auto& n : normals) {
        const double c = dot(n, d);
        s += c * c;
    }
    return std::sqrt(s);
}

VectorField::VectorField(Spec spec)
{
    if (spec.dim < 1 || spec.dim > kMaxDim) throw PreconditionError("field dimension out of range");
    if (!spec.eval) throw PreconditionError("field without evaluator");
    if (spec.domain && spec.dim != 2) throw PreconditionError("domains are supported for planar fields only");
    impl_ = std::make_shared<const Spec>(std::move(spec));
}

bool VectorField::in_domain(const Vec& x) const { return !impl_->domain || impl_->domain->contains_strictly(x); }

Vec VectorField::operator()(const Vec& x) const
{
    if (x.size() != impl_->dim) throw PreconditionError("point dimension does not match field " + impl_->id);
    if (!in_domain(x)) {
        std::ostringstream os;
        os << "field " << impl_->id << " evaluated outside its domain at (";
        for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
        os << ")";
        throw DomainError(os.str());
    }
    return impl_->eval(x);
}

Vec VectorField::eval_or_zero(const Vec& x) const
{
    if (!in_domain(x)) return Vec(impl_->dim);
    return impl_->eval(x);
}

double VectorField::divergence(const Vec& x) const
{
    if (!impl_->div) throw PreconditionError("field " + impl_->id + " has no closed-form divergence");
    if (!in_domain(x)) throw DomainError("divergence of " + impl_->id + " outside its domain");
    return impl_->div(x);
}

Mat VectorField::jacobian(const Vec& x) const
{
    if (!impl_->jacobian) throw PreconditionError("field " + impl_->id + " has no closed-form Jacobian");
    if (!in_domain(x)) throw DomainError("Jacobian of " + impl_->id + " outside its domain");
    return impl_->jacobian(x);
}

double VectorField::exclusion_distance(const Vec& x, std::string* which) const
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : impl_->exclusions) {
        const double d = e.distance(x);
        if (d < best) {
            best = d;
            if (which) *which = e.name;
        }
    }
    return best;
}

VectorField pullback(const VectorField& z, const Vec& x0, double s, const Mat& q, const std::string& id)
{
    if (!(s > 0.0)) throw PreconditionError("rescaling factor must be positive");
    const int n = z.dim();
    if (x0.size() != n || q.size() != n) throw PreconditionError("pullback dimension mismatch");
    const Mat qt = q.transpose();
    auto to_x = [=](const Vec& y) { return x0 + (qt * y) * s; };

    VectorField::Spec spec;
    spec.dim = n;
    if (id.empty()) {
        std::ostringstream os;
        os << z.id() << "|pullback(s=" << s << ")";
        spec.id = os.str();
    } else {
        spec.id = id;
    }
    spec.eval = [z, q, to_x](const Vec& y) { return q * z.eval_or_zero(to_x(y)); };
    if (z.has_divergence()) {
        spec.div = [z, s, to_x](const Vec& y) {
            const Vec x = to_x(y);
            return z.in_domain(x) ? s * z.divergence(x) : 0.0;
        };
    }
    if (z.has_jacobian()) {
        spec.jacobian = [z, s, q, qt, to_x](const Vec& y) { return (q * z.jacobian(to_x(y)) * qt) * s; };
    }
    spec.sup_bound = z.sup_bound();
    for (const auto& e : z.exclusions()) {
        Exclusion t;
        t.name = e.name;
        t.origin = q * (e.origin - x0) / s;
        for (const auto& nrm : e.normals) t.normals.push_back(q * nrm);
        spec.exclusions.push_back(t);
    }
    if (z.domain()) spec.domain = z.domain()->transformed(x0, s, q);
    if (z.support_cover()) {
        std::vector<Disk> cover;
        for (const auto& d : *z.support_cover()) cover.push_back({q * (d.center - x0) / s, d.radius / s});
        spec.support_cover = cover;
    }
    return VectorField(std::move(spec));
}

VectorField translated(const VectorField& z, const Vec& shift)
{
    std::ostringstream os;
    os << z.id() << "|shift(";
    for (int i = 0; i < shift.size(); ++i) os << (i ? "," : "") << shift[i];
    os << ")";
    return pullback(z, -shift, 1.0, Mat::identity(z.dim()), os.str());
}

VectorField linear_combination(double a, const VectorField& z, double b, const VectorField& w)
{
    if (z.dim() != w.dim()) throw PreconditionError("linear combination of fields of different dimension");
    VectorField::Spec spec;
    spec.dim = z.dim();
    std::ostringstream os;
    os << a << "*" << z.id() << "+" << b << "*" << w.id();
    spec.id = os.str();
    spec.eval = [=](const Vec& x) { return z.eval_or_zero(x) * a + w.eval_or_zero(x) * b; };
    if (z.has_divergence() && w.has_divergence()) {
        spec.div = [=](const Vec& x) { return a * z.divergence(x) + b * w.divergence(x); };
    }
    if (z.has_jacobian() && w.has_jacobian()) {
        spec.jacobian = [=](const Vec& x) {
            Mat m = z.jacobian(x) * a;
            const Mat v = w.jacobian(x);
            for (int i = 0; i < m.size(); ++i)
                for (int j = 0; j < m.size(); ++j) m(i, j) += b * v(i, j);
            return m;
        };
    }
    spec.sup_bound = std::abs(a) * z.sup_bound() + std::abs(b) * w.sup_bound();
    spec.exclusions = z.exclusions();
    spec.exclusions.insert(spec.exclusions.end(), w.exclusions().begin(), w.exclusions().end());
    if (z.domain() && w.domain()) {
        spec.domain = z.domain()->intersect(*w.domain());
    } else if (z.domain()) {
        spec.domain = z.domain();
    } else if (w.domain()) {
        spec.domain = w.domain();
    }
    // Covers are not merged: the union of two disjoint covers need not be disjoint.
    return VectorField(std::move(spec));
}

VectorField constant_field(const Vec& c)
{
    VectorField::Spec spec;
    spec.dim = c.size();
    std::ostringstream os;
    os << "constant:";
    for (int i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    spec.id = os.str();
    spec.eval = [c](const Vec&) { return c; };
    spec.div = [](const Vec&) { return 0.0; };
    const int n = c.size();
    spec.jacobian = [n](const Vec&) { return Mat(n); };
    spec.sup_bound = norm(c);
    return VectorField(std::move(spec));
}

VectorField add_constant(const VectorField& z, const Vec& c)
{
    return linear_combination(1.0, z, 1.0, constant_field(c));
}

VectorField lift_planar(const VectorField& z, const std::function<double(double)>& chi,
                        const std::function<double(double)>& dchi, double chi_sup, const std::string& id)
{
    if (z.dim() != 2) throw PreconditionError("lift_planar expects a planar field");
    if (!z.has_divergence()) throw PreconditionError("lift_planar needs a closed-form divergence");
    VectorField::Spec spec;
    spec.dim = 3;
    spec.id = id;
    spec.eval = [z, chi](const Vec& x) {
        const Vec v = z.eval_or_zero(Vec{x[0], x[2]});
        const double c = chi(x[1]);
        return Vec{c * v[0], 0.0, c * v[1]};
    };
    spec.div = [z, chi](const Vec& x) { return chi(x[1]) * z.divergence(Vec{x[0], x[2]}); };
    if (z.has_jacobian() && dchi) {
        spec.jacobian = [z, chi, dchi](const Vec& x) {
            const Vec p{x[0], x[2]};
            const Vec v = z.eval_or_zero(p);
            const Mat j = z.jacobian(p);
            const double c = chi(x[1]);
            const double dc = dchi(x[1]);
            Mat out(3);
            out(0, 0) = c * j(0, 0);
            out(0, 1) = dc * v[0];
            out(0, 2) = c * j(0, 1);
            out(2, 0) = c * j(1, 0);
            out(2, 1) = dc * v[1];
            out(2, 2) = c * j(1, 1);
            return out;
        };
    }
    spec.sup_bound = chi_sup * z.sup_bound();
    return VectorField(std::move(spec));
}

}  // namespace divlab
