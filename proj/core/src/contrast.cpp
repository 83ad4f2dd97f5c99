// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include "scd/contrast.hpp"

#include <cmath>
#include <stdexcept>

#include "scd/errors.hpp"

namespace scd {

namespace {

constexpr double kAmateurFloor = 1e-12;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie strictly inside (0,1)");
  }
}

}  // namespace

ContrastVariant contrast_variant_from_string(const std::string& name) {
  if (name == "original") return ContrastVariant::kOriginal;
  if (name == "improved") return ContrastVariant::kImproved;
  throw config_error("unknown contrast variant: " + name);
}

std::string to_string(ContrastVariant variant) {
  return variant == ContrastVariant::kOriginal ? "original" : "improved";
}

void ContrastConfig::validate() const {
  check_alpha(alpha);
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!std::isfinite(beta) || beta < 0.0) {
    throw std::invalid_argument("beta must be finite and >= 0");
  }
}

PlausibilityMask plausibility_mask_original(const ProbabilityVector& expert_probs,
                                            double alpha) {
  check_alpha(alpha);
  double top = 0.0;
  for (double p : expert_probs.values) {
    if (p > top) top = p;
  }
  const double threshold = alpha * top;
  PlausibilityMask mask;
  mask.allowed.resize(expert_probs.size(), 0);
  for (std::size_t i = 0; i < expert_probs.size(); ++i) {
    if (expert_probs[i] > threshold) {
      mask.allowed[i] = 1;
      ++mask.count;
    }
  }
  if (mask.count == 0) throw internal_error("plausibility mask came out empty");
  return mask;
}

PlausibilityMask plausibility_mask_improved(const LogitVector& expert_logits,
                                            double alpha) {
  check_alpha(alpha);
  const double threshold = std::log(alpha) + max_finite(expert_logits);
  PlausibilityMask mask;
  mask.allowed.resize(expert_logits.size(), 0);
  for (std::size_t i = 0; i < expert_logits.size(); ++i) {
    const double y = expert_logits[i];
    if (!is_masked(y) && y > threshold) {
      mask.allowed[i] = 1;
      ++mask.count;
    }
  }
  if (mask.count == 0) throw internal_error("plausibility mask came out empty");
  return mask;
}

ContrastiveScores contrast_scores_original(const ProbabilityVector& expert_probs,
                                           const ProbabilityVector& amateur_probs,
                                           const PlausibilityMask& mask) {
  if (expert_probs.size() != amateur_probs.size() ||
      expert_probs.size() != mask.allowed.size()) {
    throw std::invalid_argument("contrast inputs must share one vocabulary");
  }
  ContrastiveScores scores;
  scores.values.assign(expert_probs.size(), kMaskedScore);
  for (std::size_t i = 0; i < expert_probs.size(); ++i) {
    if (!mask[i]) continue;
    double pa = amateur_probs[i];
    if (pa < kAmateurFloor) {
      pa = kAmateurFloor;
      ++scores.clamped;
    }
    scores.values[i] = std::log(expert_probs[i]) - std::log(pa);
  }
  return scores;
}

ContrastiveScores contrast_scores_improved(const LogitVector& expert_logits,
                                           const LogitVector& amateur_logits,
                                           double beta, const PlausibilityMask& mask) {
  if (expert_logits.size() != amateur_logits.size() ||
      expert_logits.size() != mask.allowed.size()) {
    throw std::invalid_argument("contrast inputs must share one vocabulary");
  }
  ContrastiveScores scores;
  scores.values.assign(expert_logits.size(), kMaskedScore);
  for (std::size_t i = 0; i < expert_logits.size(); ++i) {
    if (!mask[i]) continue;
    const double ye = expert_logits[i];
    const double ya = amateur_logits[i];
    if (is_masked(ya)) {
      // Amateur says "impossible" about a plausible expert token: the
      // contrast pushes it to the top of the allowed set. Mirror the
      // original variant's floor instead of doing -inf arithmetic.
      scores.values[i] = (1.0 + beta) * ye - beta * std::log(kAmateurFloor);
      ++scores.clamped;
      continue;
    }
    scores.values[i] = (1.0 + beta) * ye - beta * ya;
  }
  return scores;
}

ProbabilityVector contrastive_distribution(const ContrastiveScores& scores, double tau) {
  LogitVector as_logits{scores.values};
  return probs_from_logits(as_logits, tau);
}

ProbabilityVector contrastive_target(const LogitVector& expert_logits,
                                     const LogitVector& amateur_logits,
                                     const ContrastConfig& cfg, int* clamped) {
  cfg.validate();
  ContrastiveScores scores;
  if (cfg.variant == ContrastVariant::kOriginal) {
    const auto pe = probs_from_logits(expert_logits, 1.0);
    const auto pa = probs_from_logits(amateur_logits, 1.0);
    const auto mask = plausibility_mask_original(pe, cfg.alpha);
    scores = contrast_scores_original(pe, pa, mask);
  } else {
    const auto mask = plausibility_mask_improved(expert_logits, cfg.alpha);
    scores = contrast_scores_improved(expert_logits, amateur_logits, cfg.beta, mask);
  }
  if (clamped) *clamped += scores.clamped;
  return contrastive_distribution(scores, cfg.tau);
}

}  // namespace scd
