// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include "scd/decode.hpp"

#include <algorithm>
#include <cmath>

#include "scd/errors.hpp"

namespace scd {

namespace {

void check_pair(const ModelSession& expert, const ModelSession& amateur) {
  if (!(expert.vocab() == amateur.vocab())) {
    throw config_error("expert and amateur must share one vocabulary");
  }
  // O(1) divergence check: equal lengths plus an identical tail window.
  // A full prefix comparison would be quadratic over long runs; diverging
  // sessions disagree at the tail, where commits happen.
  const auto& e = expert.context();
  const auto& a = amateur.context();
  bool diverged = e.size() != a.size();
  for (std::size_t i = e.size() > 8 ? e.size() - 8 : 0; !diverged && i < e.size(); ++i) {
    diverged = e[i] != a[i];
  }
  if (diverged) throw internal_error("expert/amateur committed contexts diverged");
}

enum class TargetKind { kContrastive, kExpertSoftmax };

// Shared body of scd_iteration / sd_iteration. The two differ only in the
// verification target and in who pays for the bonus token:
//   scd: target P^tau_n; all-accept costs one extra amateur forward to
//         build the contrastive distribution at position gamma+1;
//   sd:  target softmax_tau(Y_e); bonus drawn straight from the expert's
//         gamma+1-th output.
IterationTrace speculative_iteration(ModelSession& expert, ModelSession& amateur,
                                     const DecodeConfig& cfg, RngStream& rng,
                                     TargetKind target_kind) {
  cfg.validate();
  check_pair(expert, amateur);
  const int gamma = cfg.gamma;
  const std::size_t base = amateur.context().size();

  IterationTrace trace;
  trace.drafted.reserve(gamma);

  // Draft phase: gamma amateur forwards, sampling at temperature 1.0.
  std::vector<LogitVector> amateur_logits;
  std::vector<ProbabilityVector> draft_probs;
  amateur_logits.reserve(gamma);
  draft_probs.reserve(gamma);
  for (int i = 0; i < gamma; ++i) {
    amateur_logits.push_back(amateur.logits_next());
    draft_probs.push_back(probs_from_logits(amateur_logits.back(), 1.0));
    const TokenId tok = sample_index(draft_probs.back(), rng.uniform());
    trace.drafted.push_back(tok);
    amateur.append(tok);
  }

  // One expert verification pass over the whole draft.
  const auto expert_logits = batch_forward(expert, trace.drafted);

  // Targets and entropies for positions 1..gamma.
  std::vector<ProbabilityVector> targets(gamma);
  for (int i = 0; i < gamma; ++i) {
    if (target_kind == TargetKind::kContrastive) {
      targets[i] = contrastive_target(expert_logits[i], amateur_logits[i], cfg.contrast,
                                      &trace.clamped);
    } else {
      targets[i] = probs_from_logits(expert_logits[i], cfg.contrast.tau);
    }
    trace.entropy_amateur.push_back(token_entropy(draft_probs[i]));
    trace.entropy_expert.push_back(token_entropy(probs_from_logits(expert_logits[i], 1.0)));
  }

  // Acceptance uniforms r_1..r_gamma, drawn before the branch as in the
  // pinned draw order.
  trace.uniforms.reserve(gamma);
  for (int i = 0; i < gamma; ++i) trace.uniforms.push_back(rng.uniform());

  // k = min{ i : r_i > target(x_i) / draft(x_i) } with the one-past-the-end
  // fallback. The rejection comparison keeps the algorithm's boundary
  // orientation: r <= ratio accepts.
  int k = gamma + 1;
  for (int i = 0; i < gamma; ++i) {
    const TokenId tok = trace.drafted[i];
    const double draft_p = draft_probs[i][tok];
    const double target_p = targets[i][tok];
    const double ratio = draft_p > 0.0 ? std::min(1.0, target_p / draft_p) : 0.0;
    if (trace.uniforms[i] > ratio) {
      k = i + 1;
      break;
    }
  }
  trace.k = k;
  trace.bonus = k == gamma + 1;

  if (k <= gamma) {
    // First rejection at position k: resample from the residual.
    const auto& target = targets[k - 1];
    const auto& draft = draft_probs[k - 1];
    TokenId resampled;
    if (cfg.corrupt_residual_for_test) {
      resampled = sample_index(draft, rng.uniform());
    } else {
      bool degenerate = false;
      const auto residual = residual_distribution(target, draft, &degenerate);
      trace.residual_degenerate = degenerate;
      resampled = sample_index(residual, rng.uniform());
    }
    trace.emitted.assign(trace.drafted.begin(), trace.drafted.begin() + (k - 1));
    trace.emitted.push_back(resampled);
  } else {
    // All accepted: the amateur context already holds the full draft, so
    // its next forward is exactly the position-(gamma+1) computation.
    ProbabilityVector bonus_target;
    if (target_kind == TargetKind::kContrastive) {
      const auto amateur_bonus_logits = amateur.logits_next();
      bonus_target = contrastive_target(expert_logits[gamma], amateur_bonus_logits,
                                        cfg.contrast, &trace.clamped);
    } else {
      bonus_target = probs_from_logits(expert_logits[gamma], cfg.contrast.tau);
    }
    const TokenId bonus_tok = sample_index(bonus_target, rng.uniform());
    trace.emitted = trace.drafted;
    trace.emitted.push_back(bonus_tok);
    if (cfg.record_distributions) targets.push_back(std::move(bonus_target));
  }

  // Commit: both sessions advance by exactly the emitted tokens.
  amateur.truncate(base);
  for (TokenId tok : trace.emitted) {
    amateur.append(tok);
    expert.append(tok);
  }

  if (cfg.record_distributions) {
    trace.draft_probs = std::move(draft_probs);
    trace.target_probs = std::move(targets);
  }
  return trace;
}

IterationTrace vanilla_step(ModelSession& session, bool is_expert, double tau,
                            RngStream& rng, bool record_distributions) {
  IterationTrace trace;
  const auto logits = session.logits_next();
  auto dist = probs_from_logits(logits, tau);
  const TokenId tok = sample_index(dist, rng.uniform());
  session.append(tok);
  trace.k = 1;
  trace.emitted.push_back(tok);
  const double h = token_entropy(probs_from_logits(logits, 1.0));
  (is_expert ? trace.entropy_expert : trace.entropy_amateur).push_back(h);
  if (record_distributions) trace.target_probs.push_back(std::move(dist));
  return trace;
}

}  // namespace

DecodeMode decode_mode_from_string(const std::string& name) {
  if (name == "expert") return DecodeMode::kExpert;
  if (name == "amateur") return DecodeMode::kAmateur;
  if (name == "cd") return DecodeMode::kCd;
  if (name == "sd") return DecodeMode::kSd;
  if (name == "scd") return DecodeMode::kScd;
  throw config_error("unknown decode mode: " + name);
}

std::string to_string(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kExpert: return "expert";
    case DecodeMode::kAmateur: return "amateur";
    case DecodeMode::kCd: return "cd";
    case DecodeMode::kSd: return "sd";
    case DecodeMode::kScd: return "scd";
  }
  throw internal_error("unreachable decode mode");
}

void DecodeConfig::validate() const {
  if (gamma < 1) throw std::invalid_argument("gamma must be >= 1");
  if (max_new_tokens < 1) throw std::invalid_argument("max_new_tokens must be >= 1");
  contrast.validate();
}

ProbabilityVector residual_distribution(const ProbabilityVector& target,
                                        const ProbabilityVector& draft,
                                        bool* degenerate) {
  if (target.size() != draft.size()) {
    throw std::invalid_argument("residual inputs must share one vocabulary");
  }
  ProbabilityVector out;
  out.values.resize(target.size(), 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target[i] - draft[i];
    if (d > 0.0) {
      out.values[i] = d;
      mass += d;
    }
  }
  if (mass <= 0.0) {
    // target <= draft everywhere means target == draft; rejection cannot
    // happen in exact arithmetic, so fall back to the target itself.
    if (degenerate) *degenerate = true;
    return target;
  }
  if (degenerate) *degenerate = false;
  for (double& v : out.values) v /= mass;
  return out;
}

IterationTrace scd_iteration(ModelSession& expert, ModelSession& amateur,
                             const DecodeConfig& cfg, RngStream& rng) {
  return speculative_iteration(expert, amateur, cfg, rng, TargetKind::kContrastive);
}

IterationTrace sd_iteration(ModelSession& expert, ModelSession& amateur,
                            const DecodeConfig& cfg, RngStream& rng) {
  return speculative_iteration(expert, amateur, cfg, rng, TargetKind::kExpertSoftmax);
}

TokenId cd_step(ModelSession& expert, ModelSession& amateur,
                const ContrastConfig& contrast, RngStream& rng, IterationTrace* trace) {
  check_pair(expert, amateur);
  const auto expert_logits = expert.logits_next();
  const auto amateur_logits = amateur.logits_next();
  int clamped = 0;
  auto target = contrastive_target(expert_logits, amateur_logits, contrast, &clamped);
  const TokenId tok = sample_index(target, rng.uniform());
  expert.append(tok);
  amateur.append(tok);
  if (trace) {
    trace->k = 1;
    trace->emitted.assign(1, tok);
    trace->clamped = clamped;
    trace->entropy_expert.push_back(token_entropy(probs_from_logits(expert_logits, 1.0)));
    trace->entropy_amateur.push_back(token_entropy(probs_from_logits(amateur_logits, 1.0)));
    trace->target_probs.assign(1, std::move(target));
  }
  return tok;
}

DecodeResult decode(ModelSession* expert, ModelSession* amateur,
                    const DecodeConfig& cfg, const TraceSink& sink) {
  cfg.validate();
  const bool needs_expert = cfg.mode != DecodeMode::kAmateur;
  const bool needs_amateur = cfg.mode != DecodeMode::kExpert;
  if (needs_expert && !expert) throw config_error("mode needs an expert model");
  if ((cfg.mode == DecodeMode::kCd || cfg.mode == DecodeMode::kSd ||
       cfg.mode == DecodeMode::kScd || cfg.mode == DecodeMode::kAmateur) &&
      !amateur) {
    throw config_error("mode " + to_string(cfg.mode) + " needs an amateur model");
  }
  if (needs_expert && needs_amateur) {
    check_pair(*expert, *amateur);
    if (expert->context() != amateur->context()) {
      throw config_error("expert and amateur must start from the same prompt");
    }
  }

  ModelSession& primary = cfg.mode == DecodeMode::kAmateur ? *amateur : *expert;
  const auto eos = primary.vocab().eos_id();
  RngStream rng(cfg.seed);

  DecodeResult result;
  bool done = false;
  while (!done) {
    const std::size_t base = primary.context().size();
    IterationTrace trace;
    switch (cfg.mode) {
      case DecodeMode::kScd:
        trace = scd_iteration(*expert, *amateur, cfg, rng);
        break;
      case DecodeMode::kSd:
        trace = sd_iteration(*expert, *amateur, cfg, rng);
        break;
      case DecodeMode::kCd: {
        IterationTrace step_trace;
        cd_step(*expert, *amateur, cfg.contrast, rng, &step_trace);
        if (!cfg.record_distributions) step_trace.target_probs.clear();
        trace = std::move(step_trace);
        break;
      }
      case DecodeMode::kExpert:
        trace = vanilla_step(*expert, true, cfg.contrast.tau, rng, cfg.record_distributions);
        break;
      case DecodeMode::kAmateur:
        trace = vanilla_step(*amateur, false, cfg.contrast.tau, rng, cfg.record_distributions);
        break;
    }
    trace.iter = static_cast<int>(result.totals.iterations);

    // Cut at the first EOS, then at the token budget; the trace keeps the
    // full emission (marked) so acceptance statistics remain unbiased.
    std::size_t keep = trace.emitted.size();
    bool eos_hit = false;
    if (cfg.stop_on_eos && eos) {
      for (std::size_t i = 0; i < trace.emitted.size(); ++i) {
        if (trace.emitted[i] == *eos) {
          keep = i + 1;
          eos_hit = true;
          break;
        }
      }
    }
    const std::size_t remaining =
        static_cast<std::size_t>(cfg.max_new_tokens) - result.tokens.size();
    if (keep > remaining) {
      keep = remaining;
      eos_hit = eos_hit && keep > 0 && trace.emitted[keep - 1] == *eos;
    }
    trace.truncated = static_cast<int>(trace.emitted.size() - keep);
    if (trace.truncated > 0) {
      const std::size_t target_len = base + keep;
      if (needs_expert) expert->truncate(target_len);
      if (needs_amateur) amateur->truncate(target_len);
    }
    result.tokens.insert(result.tokens.end(), trace.emitted.begin(),
                         trace.emitted.begin() + static_cast<std::ptrdiff_t>(keep));

    // Totals, from the trace alone.
    auto& totals = result.totals;
    totals.iterations += 1;
    totals.clamped += trace.clamped;
    totals.degenerate_residuals += trace.residual_degenerate ? 1 : 0;
    switch (cfg.mode) {
      case DecodeMode::kScd: {
        const bool all_accept = trace.k == cfg.gamma + 1;
        totals.expert_forwards += 1;
        totals.amateur_forwards += cfg.gamma + (all_accept ? 1 : 0);
        totals.accepts += all_accept ? cfg.gamma : trace.k - 1;
        totals.rejects += all_accept ? 0 : 1;
        totals.all_accept_iterations += all_accept ? 1 : 0;
        break;
      }
      case DecodeMode::kSd: {
        const bool all_accept = trace.k == cfg.gamma + 1;
        totals.expert_forwards += 1;
        totals.amateur_forwards += cfg.gamma;
        totals.accepts += all_accept ? cfg.gamma : trace.k - 1;
        totals.rejects += all_accept ? 0 : 1;
        totals.all_accept_iterations += all_accept ? 1 : 0;
        break;
      }
      case DecodeMode::kCd:
        totals.expert_forwards += 1;
        totals.amateur_forwards += 1;
        break;
      case DecodeMode::kExpert:
        totals.expert_forwards += 1;
        break;
      case DecodeMode::kAmateur:
        totals.amateur_forwards += 1;
        break;
    }

    done = eos_hit || result.tokens.size() >= static_cast<std::size_t>(cfg.max_new_tokens);
    if (sink) sink(trace);
    if (cfg.record_traces) result.traces.push_back(std::move(trace));
  }
  result.totals.emitted = static_cast<std::int64_t>(result.tokens.size());
  return result;
}

}  // namespace scd
