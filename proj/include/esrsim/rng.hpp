#pragma once

#include <cstdint>
#include <utility>

namespace esrsim {

// Counter-based Gaussian noise: the draw for a given (seed, index) pair is a
// pure function, so noisy traces are reproducible and indifferent to the
// order samples are generated in.

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Two independent standard-normal deviates for sample `index`.
std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t index);

// Uniform deviate in (0, 1] for sample `index`.
double uniform_unit(std::uint64_t seed, std::uint64_t index);

}  // namespace esrsim
