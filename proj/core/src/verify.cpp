// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include "scd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "scd/errors.hpp"
#include "scd/model.hpp"
#include "scd/rng.hpp"

namespace scd {

namespace {

std::shared_ptr<const ModelSpec> context_free_spec(std::size_t vocab_size,
                                                   const LogitVector& logits) {
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) tokens.push_back("t" + std::to_string(i));
  std::map<std::vector<TokenId>, LogitVector> table;
  table[{}] = logits;
  return std::make_shared<const ModelSpec>(
      ModelSpec::table(Vocabulary(std::move(tokens)), std::move(table)));
}

double tv_distance(const ProbabilityVector& a, const ProbabilityVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace

ProbabilityVector enumerate_emitted_distribution(const ProbabilityVector& target,
                                                 const ProbabilityVector& draft,
                                                 bool corrupt_residual) {
  if (target.size() != draft.size()) {
    throw std::invalid_argument("enumeration inputs must share one vocabulary");
  }
  // Accept path: the draft proposes t and the ratio test keeps it.
  ProbabilityVector out;
  out.values.resize(target.size(), 0.0);
  double accept_mass = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    const double d = draft[t];
    if (d <= 0.0) continue;
    const double a = d * std::min(1.0, target[t] / d);
    out.values[t] = a;
    accept_mass += a;
  }
  // Reject path: with the leftover mass, one token from the resampling
  // distribution the implementation would use.
  const double reject_mass = std::max(0.0, 1.0 - accept_mass);
  const ProbabilityVector resample =
      corrupt_residual ? draft : residual_distribution(target, draft);
  for (std::size_t t = 0; t < target.size(); ++t) {
    out.values[t] += reject_mass * resample[t];
  }
  return out;
}

ExactCheckReport verify_exact(int pairs, std::size_t vocab_min, std::size_t vocab_max,
                              std::uint64_t seed, double tol, bool corrupt_residual) {
  if (pairs < 1) throw std::invalid_argument("need at least one pair");
  if (vocab_min < 2 || vocab_max < vocab_min) {
    throw std::invalid_argument("need 2 <= vocab_min <= vocab_max");
  }
  if (vocab_max > 16) throw config_error("exact enumerator is limited to vocab size 16");

  RngStream rng(seed);
  ExactCheckReport report;
  report.pairs = pairs;
  for (int p = 0; p < pairs; ++p) {
    const std::size_t n =
        vocab_min + static_cast<std::size_t>(rng.uniform() * static_cast<double>(
                                                                 vocab_max - vocab_min + 1));
    LogitVector expert_logits, amateur_logits;
    for (std::size_t i = 0; i < n; ++i) {
      expert_logits.values.push_back(-4.0 + 8.0 * rng.uniform());
      amateur_logits.values.push_back(-4.0 + 8.0 * rng.uniform());
    }
    ContrastConfig cfg;
    cfg.variant = rng.uniform() < 0.5 ? ContrastVariant::kOriginal : ContrastVariant::kImproved;
    cfg.alpha = 0.05 + 0.9 * rng.uniform();
    cfg.beta = 1.5 * rng.uniform();
    // Mostly moderate temperatures, with an occasional near-greedy one.
    cfg.tau = rng.uniform() < 0.1 ? 0.001 : 0.2 + 1.8 * rng.uniform();

    const auto target = contrastive_target(expert_logits, amateur_logits, cfg);
    const auto draft = probs_from_logits(amateur_logits, 1.0);
    const auto emitted = enumerate_emitted_distribution(target, draft, corrupt_residual);

    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_err = std::max(max_err, std::abs(emitted[i] - target[i]));
    }
    report.max_abs_error = std::max(report.max_abs_error, max_err);
    report.max_tv_distance = std::max(report.max_tv_distance, tv_distance(emitted, target));
  }
  report.pass = report.max_abs_error < tol;
  return report;
}

MonteCarloCheckReport verify_monte_carlo(std::int64_t tokens, std::uint64_t seed,
                                         double tol, bool corrupt_residual) {
  if (tokens < 1) throw std::invalid_argument("need at least one token");

  // One fixed context-free pair over vocab 8 with a moderate overlap, so
  // both the accept and the reject/resample paths carry real mass.
  const LogitVector expert_logits{{1.2, 0.6, 0.0, -0.4, -0.9, -1.5, -2.2, -3.0}};
  const LogitVector amateur_logits{{0.0, 0.3, -0.2, 0.5, -0.6, 0.1, -1.0, -0.3}};
  DecodeConfig cfg;
  cfg.mode = DecodeMode::kScd;
  cfg.gamma = 4;
  cfg.contrast.variant = ContrastVariant::kImproved;
  cfg.contrast.alpha = 0.1;
  cfg.contrast.beta = 0.5;
  cfg.contrast.tau = 0.9;
  cfg.seed = seed;
  cfg.max_new_tokens = static_cast<int>(tokens);
  cfg.stop_on_eos = false;
  cfg.record_traces = false;
  cfg.corrupt_residual_for_test = corrupt_residual;

  const auto target = contrastive_target(expert_logits, amateur_logits, cfg.contrast);

  auto expert_spec = context_free_spec(8, expert_logits);
  auto amateur_spec = context_free_spec(8, amateur_logits);
  ModelSession expert(expert_spec);
  ModelSession amateur(amateur_spec);
  const auto result = decode(&expert, &amateur, cfg);

  ProbabilityVector freq;
  freq.values.resize(8, 0.0);
  for (TokenId t : result.tokens) freq.values[static_cast<std::size_t>(t)] += 1.0;
  for (double& f : freq.values) f /= static_cast<double>(result.tokens.size());

  MonteCarloCheckReport report;
  report.tokens = result.totals.emitted;
  report.tv_distance = tv_distance(freq, target);
  report.pass = report.tv_distance < tol;
  return report;
}

}  // namespace scd
