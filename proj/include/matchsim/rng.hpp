#pragma once

// Random source with a fixed draw protocol. The engine is std::mt19937_64,
// whose output sequence is pinned by the standard; the bounded-integer and
// unit-interval transforms below are implemented here instead of using
// <random> distributions, whose outputs differ between standard libraries.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "matchsim/core_model.hpp"

namespace matchsim {

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, n); n must be positive. Lemire's multiply-and-reject.
  std::uint64_t uniform_index(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    std::uint64_t x = engine_();
    auto m = static_cast<u128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = engine_();
        m = static_cast<u128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for replication `stream` of a run seeded with `seed`:
// mix64(mix64(seed) ^ (stream * golden-ratio constant)).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ (stream * 0x9e3779b97f4a7c15ULL));
}

// Inverse-CDF sampler over a finite probability vector. A point mass
// consumes no randomness.
class CategoricalSampler {
 public:
  CategoricalSampler() = default;
  explicit CategoricalSampler(std::span<const double> weights);

  TypeId operator()(Rng& rng) const;
  bool is_point_mass() const noexcept { return point_mass_; }

 private:
  std::vector<double> cumulative_;
  TypeId last_positive_ = 0;
  bool point_mass_ = false;
};

}  // namespace matchsim
