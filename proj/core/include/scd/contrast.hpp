// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <string>

#include "scd/prob.hpp"

namespace scd {

enum class ContrastVariant { kOriginal, kImproved };

ContrastVariant contrast_variant_from_string(const std::string& name);
std::string to_string(ContrastVariant variant);

/// Knobs of the contrastive target distribution.
///   alpha: plausibility cutoff, strictly inside (0,1). alpha = 1 would
///          empty the allowed set under the strict inequality, so it is
///          rejected at validation.
///   beta:  expert/amateur mixing coefficient (improved variant only).
///   tau:   softmax temperature of the final contrastive distribution.
struct ContrastConfig {
  ContrastVariant variant = ContrastVariant::kImproved;
  double alpha = 0.5;
  double beta = 0.5;
  double tau = 1.0;

  void validate() const;
};

/// Which tokens may receive a finite contrastive score. Nonempty by
/// construction: the expert argmax always passes the strict threshold.
struct PlausibilityMask {
  std::vector<char> allowed;
  std::size_t count = 0;

  bool operator[](std::size_t i) const { return allowed[i] != 0; }
};

/// Per-token contrastive scores; disallowed entries carry the masked
/// sentinel and never enter arithmetic.
struct ContrastiveScores {
  std::vector<double> values;
  /// Number of allowed tokens whose amateur probability had to be floored
  /// at 1e-12 (original variant with an exact-zero amateur entry).
  int clamped = 0;
};

/// Allowed iff P_e[w] > alpha * max(P_e). Strict, so max-ties all pass.
PlausibilityMask plausibility_mask_original(const ProbabilityVector& expert_probs,
                                            double alpha);

/// Allowed iff Y_e[w] > log(alpha) + max(Y_e). Masked logits never pass.
PlausibilityMask plausibility_mask_improved(const LogitVector& expert_logits,
                                            double alpha);

/// log P_e - log P_a on the allowed set. Amateur zeros on allowed tokens
/// are floored at 1e-12 and counted in `clamped`.
ContrastiveScores contrast_scores_original(const ProbabilityVector& expert_probs,
                                           const ProbabilityVector& amateur_probs,
                                           const PlausibilityMask& mask);

/// (1 + beta) * Y_e - beta * Y_a on the allowed set.
ContrastiveScores contrast_scores_improved(const LogitVector& expert_logits,
                                           const LogitVector& amateur_logits,
                                           double beta, const PlausibilityMask& mask);

/// Temperature-tau softmax over the allowed entries; masked tokens get
/// probability exactly 0.
ProbabilityVector contrastive_distribution(const ContrastiveScores& scores, double tau);

/// Full pipeline from raw model logits to the contrastive target. The
/// original variant derives P_e and P_a by unit-temperature softmax; the
/// plausibility mask is applied on the raw expert scores and `cfg.tau`
/// enters only in the final softmax. `clamped`, when given, accumulates
/// the amateur-zero floor count.
ProbabilityVector contrastive_target(const LogitVector& expert_logits,
                                     const LogitVector& amateur_logits,
                                     const ContrastConfig& cfg, int* clamped = nullptr);

}  // namespace scd
