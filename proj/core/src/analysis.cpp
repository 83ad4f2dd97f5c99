// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include "scd/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "scd/errors.hpp"
#include "scd/rng.hpp"

namespace scd {

namespace {

void check_lambda_gamma(double lambda, int gamma) {
  if (!(lambda >= 0.0) || lambda >= 1.0) {
    throw std::invalid_argument("lambda must lie in [0, 1)");
  }
  if (gamma < 1) throw std::invalid_argument("gamma must be >= 1");
}

struct RunningStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double stderr_mean() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
};

}  // namespace

void CostModel::validate() const {
  if (!(c > 0.0) || c > 1.0) throw std::invalid_argument("cost coefficient c must be in (0, 1]");
  if (!(T > 0.0)) throw std::invalid_argument("per-step runtime T must be > 0");
}

double expected_tokens_per_iteration(double lambda, int gamma, bool limit_at_one) {
  if (gamma < 1) throw std::invalid_argument("gamma must be >= 1");
  if (lambda >= 1.0) {
    if (limit_at_one && lambda == 1.0) return static_cast<double>(gamma) + 1.0;
    throw std::invalid_argument("lambda must lie in [0, 1); the limit at 1 is gamma + 1");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must lie in [0, 1)");
  if (lambda == 0.0) return 1.0;
  return (1.0 - std::pow(lambda, gamma + 1)) / (1.0 - lambda);
}

double expected_acceleration_scd(double lambda, int gamma, double c) {
  check_lambda_gamma(lambda, gamma);
  if (!(c > 0.0)) throw std::invalid_argument("cost coefficient c must be > 0");
  const double numer = 1.0 - std::pow(lambda, gamma + 1);
  const double denom = (1.0 - lambda) * (1.0 + c * gamma + c * std::pow(lambda, gamma));
  return numer / denom;
}

double expected_acceleration_sd(double lambda, int gamma, double c) {
  check_lambda_gamma(lambda, gamma);
  if (!(c > 0.0)) throw std::invalid_argument("cost coefficient c must be > 0");
  const double numer = 1.0 - std::pow(lambda, gamma + 1);
  const double denom = (1.0 - lambda) * (1.0 + c * gamma);
  return numer / denom;
}

MonteCarloTokens monte_carlo_iteration_tokens(double lambda, int gamma,
                                              std::int64_t trials, std::uint64_t seed) {
  check_lambda_gamma(lambda, gamma);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  RngStream rng(seed);
  RunningStats stats;
  for (std::int64_t t = 0; t < trials; ++t) {
    int tokens = gamma + 1;  // all accepted plus the bonus token
    for (int j = 0; j < gamma; ++j) {
      if (rng.uniform() >= lambda) {  // rejected: resampled token ends it
        tokens = j + 1;
        break;
      }
    }
    stats.add(static_cast<double>(tokens));
  }
  return MonteCarloTokens{stats.mean(), stats.stderr_mean(), trials};
}

double empirical_lambda(std::span<const IterationTrace> traces) {
  std::int64_t accepted = 0;
  std::int64_t verified = 0;
  for (const auto& trace : traces) {
    const auto n = trace.verified_positions();
    verified += static_cast<std::int64_t>(n);
    for (std::size_t i = 0; i < n; ++i) accepted += trace.draft_accepted(i) ? 1 : 0;
  }
  if (verified == 0) {
    throw std::invalid_argument("no verified drafts in the traces (need sd/scd runs)");
  }
  return static_cast<double>(accepted) / static_cast<double>(verified);
}

double empirical_acceleration(std::span<const IterationTrace> traces, const CostModel& cost,
                              bool bonus_costs_amateur_forward) {
  cost.validate();
  if (traces.empty()) throw std::invalid_argument("no traces");
  std::int64_t emitted = 0;
  std::int64_t expert_forwards = 0;
  std::int64_t amateur_forwards = 0;
  for (const auto& trace : traces) {
    const auto gamma = static_cast<std::int64_t>(trace.drafted.size());
    emitted += static_cast<std::int64_t>(trace.emitted.size());
    expert_forwards += 1;
    amateur_forwards += gamma;
    if (bonus_costs_amateur_forward && trace.bonus) amateur_forwards += 1;
  }
  const double spec_runtime = static_cast<double>(expert_forwards) * cost.T +
                              static_cast<double>(amateur_forwards) * cost.c * cost.T;
  const double vanilla_runtime = static_cast<double>(emitted) * cost.T;
  return vanilla_runtime / spec_runtime;
}

const EntropyGroup& EntropyReport::group(const std::string& model,
                                         const std::string& status) const {
  for (const auto& g : groups) {
    if (g.model == model && g.status == status) return g;
  }
  throw std::invalid_argument("no such entropy group: " + model + "/" + status);
}

EntropyReport entropy_report(std::span<const IterationTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("no traces");
  RunningStats amateur_acc, amateur_rej, expert_acc, expert_rej;
  for (const auto& trace : traces) {
    for (std::size_t i = 0; i < trace.verified_positions(); ++i) {
      const bool accepted = trace.draft_accepted(i);
      if (i < trace.entropy_amateur.size()) {
        (accepted ? amateur_acc : amateur_rej).add(trace.entropy_amateur[i]);
      }
      if (i < trace.entropy_expert.size()) {
        (accepted ? expert_acc : expert_rej).add(trace.entropy_expert[i]);
      }
    }
  }
  EntropyReport report;
  const RunningStats* stats[4] = {&amateur_acc, &amateur_rej, &expert_acc, &expert_rej};
  const char* models[4] = {"amateur", "amateur", "expert", "expert"};
  const char* statuses[4] = {"accepted", "rejected", "accepted", "rejected"};
  for (int i = 0; i < 4; ++i) {
    report.groups[i].model = models[i];
    report.groups[i].status = statuses[i];
    report.groups[i].mean = stats[i]->mean();
    report.groups[i].stderr_mean = stats[i]->stderr_mean();
    report.groups[i].count = stats[i]->n;
  }
  return report;
}

std::vector<AccelerationPoint> sweep_acceleration(std::span<const double> lambdas, int gamma,
                                                  std::span<const double> c_values) {
  if (lambdas.empty()) throw std::invalid_argument("no lambda settings");
  if (c_values.empty()) throw std::invalid_argument("empty c range");
  std::vector<AccelerationPoint> rows;
  rows.reserve(lambdas.size() * c_values.size());
  for (double lambda : lambdas) {
    for (double c : c_values) {
      AccelerationPoint row;
      row.lambda = lambda;
      row.gamma = gamma;
      row.c = c;
      row.expected_tokens = expected_tokens_per_iteration(lambda, gamma);
      row.factor_scd = expected_acceleration_scd(lambda, gamma, c);
      row.factor_sd = expected_acceleration_sd(lambda, gamma, c);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<double> c_grid(double c_min, double c_max, double c_step) {
  if (!(c_min > 0.0) || c_max > 1.0 || c_min > c_max) {
    throw std::invalid_argument("c range must satisfy 0 < c_min <= c_max <= 1");
  }
  if (!(c_step > 0.0)) throw std::invalid_argument("c step must be > 0");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double c = c_min + static_cast<double>(i) * c_step;
    if (c > c_max + 0.5 * c_step) break;
    grid.push_back(std::min(c, c_max));
  }
  return grid;
}

}  // namespace scd
