#include "divlab/qmc.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

namespace divlab::qmc {

namespace {

constexpr std::array<unsigned, kMaxDim> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19};

}  // namespace

double radical_inverse(unsigned base, std::uint64_t index)
{
    const double inv = 1.0 / base;
    double scale = inv;
    double value = 0.0;
    while (index > 0) {
        value += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv;
    }
    return value;
}

Vec halton(int dim, std::uint64_t index, const Vec& shift)
{
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("halton: dimension out of range");
    Vec u(dim);
    for (int i = 0; i < dim; ++i) {
        double v = radical_inverse(kPrimes[static_cast<std::size_t>(i)], index + 1);
        if (shift.size() == dim) v += shift[i];
        u[i] = v - std::floor(v);
    }
    return u;
}

std::vector<Vec> random_shifts(int dim, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vec> out;
    for (int k = 0; k < count; ++k) {
        Vec s(dim);
        for (int i = 0; i < dim; ++i) s[i] = unif(rng);
        out.push_back(s);
    }
    return out;
}

}  // namespace divlab::qmc
