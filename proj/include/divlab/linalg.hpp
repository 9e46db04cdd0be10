#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace divlab {

/// Largest ambient dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxDim = 8;

/// Small dense vector with inline storage. Dimension is a runtime value in [0, kMaxDim].
class Vec {
public:
    Vec() = default;
    explicit Vec(int n, double fill = 0.0) : n_(n)
    {
        if (n < 0 || n > kMaxDim) {
            throw std::invalid_argument("Vec dimension out of range: " + std::to_string(n));
        }
        std::fill_n(data_.begin(), n, fill);
    }
    Vec(std::initializer_list<double> values) : Vec(static_cast<int>(values.size()))
    {
        std::copy(values.begin(), values.end(), data_.begin());
    }

    static Vec unit(int n, int axis)
    {
        Vec e(n);
        e[axis] = 1.0;
        return e;
    }

    int size() const { return n_; }
    double& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

    double* begin() { return data_.data(); }
    double* end() { return data_.data() + n_; }
    const double* begin() const { return data_.data(); }
    const double* end() const { return data_.data() + n_; }

    Vec& operator+=(const Vec& o)
    {
        assert(o.n_ == n_);
        for (int i = 0; i < n_; ++i) data_[i] += o.data_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o)
    {
        assert(o.n_ == n_);
        for (int i = 0; i < n_; ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Vec& operator*=(double s)
    {
        for (int i = 0; i < n_; ++i) data_[i] *= s;
        return *this;
    }
    Vec& operator/=(double s)
    {
        for (int i = 0; i < n_; ++i) data_[i] /= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator-(Vec a) { return a *= -1.0; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator/(Vec a, double s) { return a /= s; }

    friend bool operator==(const Vec& a, const Vec& b)
    {
        return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
    }

private:
    std::array<double, kMaxDim> data_{};
    int n_ = 0;
};

inline double dot(const Vec& a, const Vec& b)
{
    assert(a.size() == b.size());
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a)
{
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

/// Counter-clockwise rotation by a right angle, (a, b) -> (-b, a).
inline Vec perp(const Vec& v)
{
    assert(v.size() == 2);
    return Vec{-v[1], v[0]};
}

inline double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

/// Small dense square matrix, row-major, inline storage.
class Mat {
public:
    Mat() = default;
    explicit Mat(int n, double fill = 0.0) : n_(n)
    {
        if (n < 0 || n > kMaxDim) {
            throw std::invalid_argument("Mat dimension out of range: " + std::to_string(n));
        }
        data_.fill(0.0);
        std::fill_n(data_.begin(), n * n, fill);
    }

    static Mat identity(int n)
    {
        Mat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int size() const { return n_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * n_ + j)]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * n_ + j)]; }

    double trace() const
    {
        double t = 0.0;
        for (int i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    Mat transpose() const
    {
        Mat t(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) t(i, j) = (*this)(j, i);
        return t;
    }

    Mat& operator*=(double s)
    {
        for (int i = 0; i < n_ * n_; ++i) data_[i] *= s;
        return *this;
    }
    friend Mat operator*(Mat m, double s) { return m *= s; }

    friend Vec operator*(const Mat& m, const Vec& v)
    {
        assert(m.n_ == v.size());
        Vec out(m.n_);
        for (int i = 0; i < m.n_; ++i) {
            double s = 0.0;
            for (int j = 0; j < m.n_; ++j) s += m(i, j) * v[j];
            out[i] = s;
        }
        return out;
    }

    friend Mat operator*(const Mat& a, const Mat& b)
    {
        assert(a.n_ == b.n_);
        Mat out(a.n_);
        for (int i = 0; i < a.n_; ++i)
            for (int k = 0; k < a.n_; ++k)
                for (int j = 0; j < a.n_; ++j) out(i, j) += a(i, k) * b(k, j);
        return out;
    }

private:
    std::array<double, kMaxDim * kMaxDim> data_{};
    int n_ = 0;
};

/// Planar rotation taking unit vector `from` onto unit vector `to`.
inline Mat rotation_between(const Vec& from, const Vec& to)
{
    const double c = dot(from, to);
    const double s = cross2(from, to);
    Mat q(2);
    q(0, 0) = c;
    q(0, 1) = -s;
    q(1, 0) = s;
    q(1, 1) = c;
    return q;
}

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace divlab
