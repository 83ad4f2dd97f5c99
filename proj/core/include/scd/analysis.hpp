// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scd/decode.hpp"

namespace scd {

/// Runtime model for the acceleration formulas: one expert forward costs
/// T (arbitrary units), one amateur forward costs c*T. c is an input;
/// it depends on the serving hardware and is never measured here.
struct CostModel {
  double c = 0.05;
  double T = 1.0;

  void validate() const;
};

/// One row of an acceleration sweep.
struct AccelerationPoint {
  double lambda = 0.0;
  int gamma = 1;
  double c = 0.0;
  double expected_tokens = 0.0;
  double factor_scd = 0.0;
  double factor_sd = 0.0;
};

/// Expected emitted tokens per speculative iteration under i.i.d.
/// per-token acceptance rate lambda: (1 - lambda^(gamma+1)) / (1 - lambda).
/// lambda >= 1 is invalid unless `limit_at_one` asks for the gamma+1 limit.
double expected_tokens_per_iteration(double lambda, int gamma, bool limit_at_one = false);

/// Expected speculative-contrastive acceleration factor:
///   (1 - lambda^(gamma+1)) / ((1 - lambda) * (1 + c*gamma + c*lambda^gamma)).
/// The c*lambda^gamma term is the bonus-position amateur forward.
double expected_acceleration_scd(double lambda, int gamma, double c);

/// Plain speculative decoding lacks the bonus amateur forward:
///   (1 - lambda^(gamma+1)) / ((1 - lambda) * (1 + c*gamma)).
double expected_acceleration_sd(double lambda, int gamma, double c);

struct MonteCarloTokens {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::int64_t trials = 0;
};

/// Simulate iterations with i.i.d. Bernoulli(lambda) acceptance capped at
/// gamma drafts; reports the mean emitted tokens per iteration and its
/// standard error.
MonteCarloTokens monte_carlo_iteration_tokens(double lambda, int gamma,
                                              std::int64_t trials, std::uint64_t seed);

/// Empirical acceptance rate over sd/scd traces:
/// accepted drafts / verified drafts. Traces without verified drafts
/// (cd/vanilla) are an error.
double empirical_lambda(std::span<const IterationTrace> traces);

/// Emitted tokens divided by modeled runtime, normalized by the vanilla
/// cost of one expert forward per token:
///   factor = emitted * T / (expert_forwards * T + amateur_forwards * c * T).
/// Uses counted forwards from the traces, not the i.i.d. formula, so the
/// model-vs-measurement gap stays visible. Trace files carry no mode tag,
/// so the caller states who paid for the bonus token: scd spends one
/// extra amateur forward per all-accept iteration, sd does not.
double empirical_acceleration(std::span<const IterationTrace> traces, const CostModel& cost,
                              bool bonus_costs_amateur_forward = true);

struct EntropyGroup {
  std::string model;   // "amateur" | "expert"
  std::string status;  // "accepted" | "rejected"
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::int64_t count = 0;
};

/// Mean and standard error of token-distribution entropy (nats) for
/// {amateur, expert} x {accepted, rejected} verified positions. The
/// direction of the accepted/rejected gap is reported, never asserted.
struct EntropyReport {
  EntropyGroup groups[4];

  const EntropyGroup& group(const std::string& model, const std::string& status) const;
};

EntropyReport entropy_report(std::span<const IterationTrace> traces);

/// Cross product of the lambda settings and the c grid at fixed gamma;
/// rows keep the (setting, c) order of the inputs.
std::vector<AccelerationPoint> sweep_acceleration(std::span<const double> lambdas, int gamma,
                                                  std::span<const double> c_values);

/// Inclusive c grid [c_min, c_max] in steps of c_step, within (0, 1].
std::vector<double> c_grid(double c_min, double c_max, double c_step);

}  // namespace scd
