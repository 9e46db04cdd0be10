#pragma once

#include <cstdint>
#include <vector>

#include "divlab/linalg.hpp"

namespace divlab::qmc {

/// Van der Corput radical inverse of `index` in the given base.
double radical_inverse(unsigned base, std::uint64_t index);

/// Point `index` of the Halton sequence in [0,1)^dim, rotated by `shift` modulo 1.
Vec halton(int dim, std::uint64_t index, const Vec& shift);

/// `count` independent uniform shifts in [0,1)^dim from a seeded generator.
std::vector<Vec> random_shifts(int dim, int count, std::uint64_t seed);

}  // namespace divlab::qmc
