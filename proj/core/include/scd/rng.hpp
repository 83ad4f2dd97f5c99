// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <cstdint>
#include <random>

namespace scd {

/// Seeded, splittable uniform stream with a pinned draw order.
///
/// All randomness in a decode run flows through one RngStream. Per
/// speculative iteration the order is fixed:
///
///   1. gamma draft samples (one uniform each, inverse-CDF),
///   2. gamma acceptance uniforms r_1..r_gamma,
///   3. one uniform for the resample draw (on rejection) or the bonus
///      draw (on all-accept).
///
/// Every iteration therefore consumes exactly 2*gamma + 1 draws, which is
/// what makes traces byte-identical across runs and platforms: mt19937_64
/// output is pinned by the standard, and uniforms are built from the top
/// 53 bits rather than std::uniform_real_distribution (whose mapping is
/// implementation-defined).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution, one engine step.
  double uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  /// Derive an independent stream (e.g. one per Monte Carlo worker or
  /// sweep row). Same parent seed + same id => same child stream.
  RngStream split(std::uint64_t stream_id) const {
    return RngStream(mix(seed_ + 0x9E3779B97F4A7C15ull * (stream_id + 1)));
  }

 private:
  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace scd
