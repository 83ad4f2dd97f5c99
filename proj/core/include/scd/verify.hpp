// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <cstdint>

#include "scd/contrast.hpp"
#include "scd/decode.hpp"
#include "scd/prob.hpp"

namespace scd {

/// Exact per-position law of an emitted token for context-free models:
/// enumerate the accept / reject+resample paths of a speculative
/// iteration. In exact arithmetic this equals the target entrywise (the
/// identity that makes speculative sampling lossless), so any defect
/// in the ratio test or the residual shows up as a mismatch against the
/// target. `corrupt_residual` mirrors the decoder's negative-control hook.
ProbabilityVector enumerate_emitted_distribution(const ProbabilityVector& target,
                                                 const ProbabilityVector& draft,
                                                 bool corrupt_residual = false);

struct ExactCheckReport {
  int pairs = 0;
  double max_abs_error = 0.0;
  double max_tv_distance = 0.0;
  bool pass = false;
};

/// Draw `pairs` random (draft, contrastive-target) pairs over vocab sizes
/// [vocab_min, vocab_max], with targets built through the real contrast
/// pipeline, and compare the enumerated emitted-token law against the
/// target. Passes iff max abs error < tol.
ExactCheckReport verify_exact(int pairs, std::size_t vocab_min, std::size_t vocab_max,
                              std::uint64_t seed, double tol,
                              bool corrupt_residual = false);

struct MonteCarloCheckReport {
  std::int64_t tokens = 0;
  double tv_distance = 0.0;
  bool pass = false;
};

/// Decode `tokens` emitted tokens with real scd iterations over one fixed
/// context-free pair and compare the empirical emitted-token frequencies
/// against the target in total variation. Passes iff TV < tol.
MonteCarloCheckReport verify_monte_carlo(std::int64_t tokens, std::uint64_t seed,
                                         double tol, bool corrupt_residual = false);

}  // namespace scd
