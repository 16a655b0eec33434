// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "pulsecomp/errors.hpp"

namespace pulsecomp {

// One SplitMix64 step. Used for key mixing and engine seeding only.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic substream of random numbers keyed by (seed, stream_id).
//
// Identical keys reproduce identical draw sequences; distinct stream ids
// give streams that can be consumed from different threads in any order
// without affecting each other. Streams are plain values: copying one
// copies its state.
//
// Normal and gamma variates are generated in-library (Box-Muller and
// Marsaglia-Tsang) so the sequence depends only on the key, not on the
// standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64_next(s);
    s = h ^ (stream_id * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL);
    std::uint32_t words[8];
    for (int i = 0; i < 4; ++i) {
      const std::uint64_t w = splitmix64_next(s);
      words[2 * i] = static_cast<std::uint32_t>(w);
      words[2 * i + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    std::seed_seq seq(words, words + 8);
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream with an id derived from (stream_id, k); same seed.
  RngStream derive(std::uint64_t k) const {
    std::uint64_t s = stream_id_;
    std::uint64_t h = splitmix64_next(s);
    s = h ^ (k + 0x9e3779b97f4a7c15ULL);
    return RngStream(seed_, splitmix64_next(s));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform angle in (-pi, pi].
  double uniform_angle() {
    return kPi_ * (1.0 - 2.0 * uniform());
  }

  // Standard real normal via Box-Muller (second variate cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi_ * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Gamma(shape, scale 1), Marsaglia-Tsang; shape < 1 boosted via U^{1/shape}.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
    if (shape < 1.0) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Chi-squared with k > 0 degrees of freedom (k may be non-integer).
  double chi_squared(double k) { return 2.0 * gamma(0.5 * k); }

 private:
  static constexpr double kPi_ = 3.14159265358979323846;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pulsecomp
