// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scd/vocab.hpp"

namespace scd {

/// Sentinel for a masked (disallowed) score. Masked entries are skipped
/// before any arithmetic; the sentinel value itself never enters an
/// exp/log/subtraction, so no (-inf) - (-inf) NaNs can appear.
inline constexpr double kMaskedScore = -std::numeric_limits<double>::infinity();

inline bool is_masked(double score) { return score == kMaskedScore; }

/// Dense per-token scores over a fixed vocabulary. Entries are finite or
/// kMaskedScore; at least one entry must be finite.
struct LogitVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Dense distribution over a fixed vocabulary: entries >= 0, sum == 1
/// within 1e-9. Produced by the softmax/normalization helpers below.
struct ProbabilityVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Largest finite entry; throws if everything is masked.
inline double max_finite(const LogitVector& logits) {
  double best = kMaskedScore;
  bool any = false;
  for (double v : logits.values) {
    if (is_masked(v)) continue;
    if (!any || v > best) best = v;
    any = true;
  }
  if (!any) throw std::invalid_argument("logit vector has no finite entry");
  return best;
}

/// Temperature softmax, max-subtracted so that temperatures as small as
/// 1e-3 stay overflow-free. Masked entries map to exactly 0.
inline ProbabilityVector probs_from_logits(const LogitVector& logits, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax temperature must be > 0");
  const double top = max_finite(logits);
  ProbabilityVector out;
  out.values.resize(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double v = logits.values[i];
    if (is_masked(v)) continue;
    const double e = std::exp((v - top) / tau);
    out.values[i] = e;
    sum += e;
  }
  // The max entry contributes exp(0) = 1, so sum >= 1.
  for (double& p : out.values) p /= sum;
  return out;
}

/// Shannon entropy in nats, with 0 * ln 0 = 0.
inline double token_entropy(const ProbabilityVector& dist) {
  double h = 0.0;
  for (double p : dist.values) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

/// Index of the largest entry; ties break toward the lowest index.
inline std::size_t argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

/// Inverse-CDF categorical draw: the first index whose cumulative
/// probability exceeds u. Consumes exactly one uniform per sample.
/// If rounding leaves u past the total mass, the last positive entry wins.
inline TokenId sample_index(const ProbabilityVector& dist, double u) {
  double cum = 0.0;
  TokenId last_positive = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist.values[i];
    if (p <= 0.0) continue;
    cum += p;
    last_positive = static_cast<TokenId>(i);
    if (u < cum) return last_positive;
  }
  if (last_positive < 0) throw std::invalid_argument("cannot sample from all-zero distribution");
  return last_positive;
}

/// Entrywise checks for the ProbabilityVector invariants; used at module
/// boundaries and in tests.
inline bool is_distribution(const ProbabilityVector& dist, double tol = 1e-9) {
  double sum = 0.0;
  for (double p : dist.values) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

}  // namespace scd
