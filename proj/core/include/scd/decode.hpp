// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scd/contrast.hpp"
#include "scd/model.hpp"
#include "scd/prob.hpp"
#include "scd/rng.hpp"

namespace scd {

/// expert / amateur: vanilla single-model sampling.
/// cd:  one expert + one amateur forward per token, sample the contrastive target.
/// sd:  speculative decoding, target = temperature softmax of the expert.
/// scd: speculative decoding, target = the contrastive distribution.
enum class DecodeMode { kExpert, kAmateur, kCd, kSd, kScd };

DecodeMode decode_mode_from_string(const std::string& name);
std::string to_string(DecodeMode mode);

struct DecodeConfig {
  DecodeMode mode = DecodeMode::kScd;
  /// Tokens drafted per speculative iteration (sd/scd).
  int gamma = 4;
  /// Contrast knobs for cd/scd; `contrast.tau` is also the target/sampling
  /// temperature of the sd and vanilla modes. Drafts are always sampled
  /// from the amateur at temperature 1.0 regardless of tau.
  ContrastConfig contrast;
  int max_new_tokens = 64;
  std::uint64_t seed = 0;
  bool stop_on_eos = true;

  /// Keep IterationTraces in the DecodeResult (off for bulk simulation).
  bool record_traces = true;
  /// Keep per-position draft/target distributions inside the traces.
  bool record_distributions = false;

  /// Negative-control hook for the losslessness verifier: resample from
  /// the draft distribution instead of the residual. Never set outside
  /// `verify`-style runs.
  bool corrupt_residual_for_test = false;

  void validate() const;
};

/// Everything one speculative iteration did. `k` is the Algorithm-1
/// rejection position in [1, gamma+1]; gamma+1 means all drafts accepted
/// and a bonus token was drawn. `emitted.size() == k` always.
///
/// Entropies are recorded per drafted position for both models'
/// unit-temperature distributions; positions `i < k-1` were accepted,
/// position `k-1` (0-based) was rejected when `k <= gamma`, later
/// positions were discarded unverified.
struct IterationTrace {
  int iter = 0;
  std::vector<TokenId> drafted;
  std::vector<double> uniforms;
  int k = 1;
  std::vector<TokenId> emitted;
  std::vector<double> entropy_amateur;
  std::vector<double> entropy_expert;
  bool bonus = false;

  /// Zero-residual fallback taken (target == draft up to rounding).
  bool residual_degenerate = false;
  /// Amateur-zero score floors applied this iteration.
  int clamped = 0;
  /// Tokens dropped from the result by max_new_tokens/EOS truncation;
  /// they stay in `emitted` so acceptance statistics remain unbiased.
  int truncated = 0;

  /// Populated only when DecodeConfig::record_distributions is set.
  std::vector<ProbabilityVector> draft_probs;
  std::vector<ProbabilityVector> target_probs;

  /// Accept flag of drafted position i (0-based): accepted iff i < k-1.
  /// Position k-1 was rejected when k <= gamma; positions past the first
  /// rejection were discarded unverified.
  bool draft_accepted(std::size_t i) const {
    return static_cast<int>(i) < k - 1;
  }
  /// Drafted positions that went through the ratio test: min(k, gamma).
  std::size_t verified_positions() const {
    const auto gamma = drafted.size();
    return static_cast<std::size_t>(k) > gamma ? gamma : static_cast<std::size_t>(k);
  }
};

struct DecodeTotals {
  std::int64_t emitted = 0;  // tokens in the final result
  std::int64_t iterations = 0;
  std::int64_t expert_forwards = 0;
  std::int64_t amateur_forwards = 0;
  std::int64_t accepts = 0;
  std::int64_t rejects = 0;
  std::int64_t all_accept_iterations = 0;
  std::int64_t clamped = 0;
  std::int64_t degenerate_residuals = 0;
};

struct DecodeResult {
  std::vector<TokenId> tokens;
  std::vector<IterationTrace> traces;
  DecodeTotals totals;
};

/// norm(max(0, target - draft)). If the residual has no mass (target ==
/// draft entrywise), returns the target itself and sets `degenerate`; the
/// rejection probability is zero in exact arithmetic, so that branch is
/// reachable only through floating-point equality.
ProbabilityVector residual_distribution(const ProbabilityVector& target,
                                        const ProbabilityVector& draft,
                                        bool* degenerate = nullptr);

/// One speculative-contrastive iteration: draft gamma tokens from the
/// amateur at temperature 1.0, verify them in one expert batch forward
/// against the contrastive target, resample from the residual on first
/// rejection, or spend one extra amateur forward to draw the bonus token
/// from the contrastive target on all-accept. Both sessions advance by
/// exactly the emitted tokens.
IterationTrace scd_iteration(ModelSession& expert, ModelSession& amateur,
                             const DecodeConfig& cfg, RngStream& rng);

/// Plain speculative decoding: identical flow with the temperature-tau
/// expert softmax as the target and the bonus token drawn directly from
/// the expert's gamma+1-th output (no extra amateur forward).
IterationTrace sd_iteration(ModelSession& expert, ModelSession& amateur,
                            const DecodeConfig& cfg, RngStream& rng);

/// One contrastive-decoding step: one forward each, sample the target,
/// advance both sessions. Fills `trace` when given.
TokenId cd_step(ModelSession& expert, ModelSession& amateur,
                const ContrastConfig& contrast, RngStream& rng,
                IterationTrace* trace = nullptr);

using TraceSink = std::function<void(const IterationTrace&)>;

/// Run iterations until max_new_tokens is reached or EOS is emitted.
/// Surplus tokens from the final iteration are truncated from the result
/// but kept (marked) in its trace. Session requirements per mode:
/// kExpert needs `expert`, kAmateur needs `amateur`, the two-model modes
/// need both with identical committed contexts.
DecodeResult decode(ModelSession* expert, ModelSession* amateur,
                    const DecodeConfig& cfg, const TraceSink& sink = {});

}  // namespace scd
