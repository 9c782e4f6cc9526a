#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dcs {

// Distribution mapping on top of std::mt19937_64 is pinned here instead of
// using <random> distributions, whose output is implementation-defined.
// Every consumer documents its draw order against these primitives so runs
// reproduce bit-for-bit and external oracles can replay the streams.

/// Uniform on [0, 1), 53-bit resolution.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1); rejects exact zeros.
inline double uniform_open(std::mt19937_64& rng) {
  double u;
  do {
    u = uniform_unit(rng);
  } while (u == 0.0);
  return u;
}

/// Uniform index in [0, n). Plain modulo reduction; the bias is < 2^-40 for
/// any n used at desk scale and the mapping is trivial to replay.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
}

/// Fisher-Yates using uniform_index, swapping from the back.
template <typename T>
void shuffle_inplace(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

/// Standard normal via Box-Muller; one draw consumes two uniforms.
inline double normal_sample(std::mt19937_64& rng) {
  const double u1 = uniform_open(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline double exponential_sample(std::mt19937_64& rng, double rate) {
  return -std::log(uniform_open(rng)) / rate;
}

inline double weibull_sample(std::mt19937_64& rng, double shape, double scale) {
  return scale * std::pow(-std::log(uniform_open(rng)), 1.0 / shape);
}

}  // namespace dcs
