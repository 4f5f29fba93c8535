// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Deterministic, splittable random number generation. Results must be
// bit-identical across platforms and runs for a given seed, so all
// distribution transforms are implemented here instead of relying on
// std::<distribution> (whose output is implementation defined).

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace dpmimo {

namespace detail {

// splitmix64 finalizer; good avalanche, used for seed mixing only.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Seeded generator with derivable child streams. child(key) depends only on
// the construction seed and the key, never on how much the parent has been
// consumed, so per-trial streams are order independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : seed_(seed), engine_(detail::mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  Rng child(std::uint64_t key) const {
    return Rng(detail::mix64(seed_ ^ detail::mix64(key + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer uniform on [0, n); rejection-free modulo bias is negligible for
  // the small n used here, but do it properly anyway.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (deterministic across platforms).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so log() is finite.
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Circularly-symmetric complex normal, unit variance: E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dpmimo
