// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include <doctest.h>

#include <cmath>

#include "scd/decode.hpp"
#include "scd/errors.hpp"
#include "scd/verify.hpp"
#include "test_util.hpp"

using namespace scd;
using namespace scd::test;

namespace {

// Two context-free table models whose improved-variant beta=0 target is
// exactly `target_probs` while drafts come from `draft_probs`.
struct ContextFreePair {
  std::shared_ptr<const ModelSpec> expert;
  std::shared_ptr<const ModelSpec> amateur;
  ModelSession expert_session;
  ModelSession amateur_session;

  ContextFreePair(const std::vector<double>& target_probs,
                  const std::vector<double>& draft_probs)
      : expert(context_free_table(sized_vocab(target_probs.size()), log_all(target_probs))),
        amateur(context_free_table(sized_vocab(draft_probs.size()), log_all(draft_probs))),
        expert_session(expert),
        amateur_session(amateur) {}

  static std::vector<double> log_all(const std::vector<double>& probs) {
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) out.push_back(p > 0.0 ? std::log(p) : kMaskedScore);
    return out;
  }
};

DecodeConfig scd_config(double alpha = 0.01, double beta = 0.0, double tau = 1.0) {
  DecodeConfig cfg;
  cfg.mode = DecodeMode::kScd;
  cfg.gamma = 4;
  cfg.contrast.variant = ContrastVariant::kImproved;
  cfg.contrast.alpha = alpha;
  cfg.contrast.beta = beta;
  cfg.contrast.tau = tau;
  return cfg;
}

}  // namespace

TEST_CASE("residual distribution") {
  SUBCASE("positive part, renormalized") {
    const auto r = residual_distribution(ProbabilityVector{{0.8, 0.2}},
                                         ProbabilityVector{{0.5, 0.5}});
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r[1] == 0.0);
  }
  SUBCASE("equal distributions degenerate to the target") {
    bool degenerate = false;
    const ProbabilityVector p{{0.25, 0.5, 0.25}};
    const auto r = residual_distribution(p, p, &degenerate);
    CHECK(degenerate);
    CHECK(r.values == p.values);
  }
  SUBCASE("three-way example") {
    const auto r = residual_distribution(ProbabilityVector{{0.5, 0.25, 0.25}},
                                         ProbabilityVector{{0.25, 0.5, 0.25}});
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 0.0);
  }
}

TEST_CASE("scd iteration with target == draft accepts everything") {
  // Uniform logits for both models: the contrastive target equals the
  // draft distribution, the acceptance ratio is 1, k is always gamma+1.
  ContextFreePair pair({0.5, 0.5}, {0.5, 0.5});
  auto cfg = scd_config();
  RngStream rng(1);
  for (int it = 0; it < 50; ++it) {
    const auto trace = scd_iteration(pair.expert_session, pair.amateur_session, cfg, rng);
    CHECK(trace.k == cfg.gamma + 1);
    CHECK(trace.bonus);
    CHECK(trace.emitted.size() == static_cast<std::size_t>(cfg.gamma) + 1);
  }
}

TEST_CASE("scd iteration emits the target marginal (exact enumeration)") {
  // Target [0.8, 0.2], draft uniform: P(emit token0) must be exactly 0.8
  // on every path: 0.5 * 1 + (1 - 0.5 - 0.1) * 1 ... i.e. min(0.5, 0.8)
  // + (1 - 0.5 - 0.2) * residual[0] = 0.5 + 0.3 = 0.8.
  const auto enumerated = enumerate_emitted_distribution(ProbabilityVector{{0.8, 0.2}},
                                                         ProbabilityVector{{0.5, 0.5}});
  CHECK(enumerated[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(enumerated[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("scd iteration is deterministic byte-for-byte") {
  auto run = [] {
    ContextFreePair pair({0.6, 0.3, 0.1}, {0.2, 0.5, 0.3});
    auto cfg = scd_config(0.05, 0.5, 0.7);
    cfg.record_distributions = true;
    RngStream rng(42);
    std::vector<IterationTrace> traces;
    for (int it = 0; it < 25; ++it) {
      traces.push_back(scd_iteration(pair.expert_session, pair.amateur_session, cfg, rng));
    }
    return traces;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].drafted == b[i].drafted);
    CHECK(a[i].uniforms == b[i].uniforms);  // exact doubles
    CHECK(a[i].k == b[i].k);
    CHECK(a[i].emitted == b[i].emitted);
    CHECK(a[i].entropy_amateur == b[i].entropy_amateur);
    CHECK(a[i].entropy_expert == b[i].entropy_expert);
  }
}

TEST_CASE("sessions stay in sync across iterations") {
  ContextFreePair pair({0.6, 0.3, 0.1}, {0.2, 0.5, 0.3});
  auto cfg = scd_config(0.05, 1.0, 0.7);
  RngStream rng(7);
  for (int it = 0; it < 40; ++it) {
    (void)scd_iteration(pair.expert_session, pair.amateur_session, cfg, rng);
    REQUIRE(pair.expert_session.context() == pair.amateur_session.context());
  }
}

TEST_CASE("scd rejects mismatched vocabularies") {
  auto expert = context_free_table(sized_vocab(2), {0.0, 0.0});
  auto amateur = context_free_table(abc_vocab(), {0.0, 0.0, 0.0});
  ModelSession e(expert), a(amateur);
  auto cfg = scd_config();
  RngStream rng(1);
  CHECK_THROWS_AS(scd_iteration(e, a, cfg, rng), config_error);
}

TEST_CASE("sd iteration with identical models accepts everything") {
  auto spec = context_free_table(abc_vocab(), {1.0, 0.5, -0.5});
  ModelSession e(spec), a(spec);
  DecodeConfig cfg;
  cfg.mode = DecodeMode::kSd;
  cfg.gamma = 4;
  cfg.contrast.tau = 1.0;
  RngStream rng(5);
  for (int it = 0; it < 50; ++it) {
    const auto trace = sd_iteration(e, a, cfg, rng);
    CHECK(trace.k == cfg.gamma + 1);
  }
}

TEST_CASE("forward accounting: sd never takes the bonus amateur forward") {
  auto spec = context_free_table(abc_vocab(), {1.0, 0.5, -0.5});
  ModelSession e(spec), a(spec);
  DecodeConfig cfg;
  cfg.mode = DecodeMode::kSd;
  cfg.gamma = 3;
  cfg.max_new_tokens = 200;
  const auto result = decode(&e, &a, cfg);
  // All-accept everywhere, yet amateur forwards stay at gamma per iteration.
  CHECK(result.totals.all_accept_iterations == result.totals.iterations);
  CHECK(result.totals.amateur_forwards == cfg.gamma * result.totals.iterations);
  CHECK(result.totals.expert_forwards == result.totals.iterations);
}

TEST_CASE("forward accounting: scd pays one amateur forward per all-accept iteration") {
  ContextFreePair pair({0.6, 0.3, 0.1}, {0.2, 0.5, 0.3});
  auto cfg = scd_config(0.05, 0.5, 0.9);
  cfg.max_new_tokens = 300;
  const auto result = decode(&pair.expert_session, &pair.amateur_session, cfg);
  CHECK(result.totals.iterations > 0);
  CHECK(result.totals.rejects > 0);          // both branches exercised
  CHECK(result.totals.all_accept_iterations > 0);
  CHECK(result.totals.amateur_forwards ==
        cfg.gamma * result.totals.iterations + result.totals.all_accept_iterations);
  CHECK(result.totals.expert_forwards == result.totals.iterations);
  // Emitted count per iteration is k in [1, gamma+1].
  for (const auto& t : result.traces) {
    CHECK(t.k >= 1);
    CHECK(t.k <= cfg.gamma + 1);
    CHECK(t.emitted.size() == static_cast<std::size_t>(t.k));
  }
}

TEST_CASE("cd step") {
  SUBCASE("identical models, original variant: uniform over the mask") {
    auto spec = context_free_table(abc_vocab(), {1.0, 1.0, -3.0});
    ModelSession e(spec), a(spec);
    ContrastConfig contrast;
    contrast.variant = ContrastVariant::kOriginal;
    contrast.alpha = 0.5;
    contrast.tau = 1.0;
    RngStream rng(3);
    IterationTrace trace;
    cd_step(e, a, contrast, rng, &trace);
    REQUIRE(trace.target_probs.size() == 1);
    const auto& target = trace.target_probs[0];
    CHECK(target[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(target[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(target[2] == 0.0);  // masked out by alpha
    CHECK(e.context().size() == 1);
    CHECK(a.context() == e.context());
  }
  SUBCASE("tiny temperature turns greedy: argmax of the scores wins") {
    auto expert = context_free_table(abc_vocab(), {2.0, 1.0, 0.0});
    auto amateur = context_free_table(abc_vocab(), {0.0, 1.0, 2.0});
    ModelSession e(expert), a(amateur);
    ContrastConfig contrast;
    contrast.variant = ContrastVariant::kImproved;
    contrast.alpha = 0.01;
    contrast.beta = 0.5;
    contrast.tau = 0.001;
    RngStream rng(11);
    for (int step = 0; step < 20; ++step) {
      // scores [3, 1, -1]: token 0 every time
      CHECK(cd_step(e, a, contrast, rng) == TokenId{0});
    }
  }
}

TEST_CASE("decode truncates to max_new_tokens") {
  ContextFreePair pair({0.5, 0.5}, {0.5, 0.5});
  auto cfg = scd_config();
  cfg.max_new_tokens = 1;
  const auto result = decode(&pair.expert_session, &pair.amateur_session, cfg);
  CHECK(result.tokens.size() == 1);
  REQUIRE(result.traces.size() == 1);
  // all-accept iteration emitted gamma+1, surplus marked in the trace
  CHECK(result.traces[0].truncated == cfg.gamma);
  CHECK(result.totals.emitted == 1);
}

TEST_CASE("decode stops on EOS from a point-mass expert") {
  Vocabulary vocab({"a", "</s>"}, "</s>");
  auto spec = context_free_table(std::move(vocab), {kMaskedScore, 0.0});
  ModelSession e(spec);
  DecodeConfig cfg;
  cfg.mode = DecodeMode::kExpert;
  cfg.contrast.tau = 0.001;  // greedy limit
  cfg.max_new_tokens = 64;
  const auto result = decode(&e, nullptr, cfg);
  REQUIRE(result.tokens.size() == 1);
  CHECK(result.tokens[0] == TokenId{1});
}

TEST_CASE("decode discards draft tokens after an accepted EOS") {
  Vocabulary vocab({"a", "</s>"}, "</s>");
  // Both models emit EOS with probability ~1: every draft is EOS, the
  // first accepted EOS ends the run and later tokens are discarded.
  auto spec = context_free_table(std::move(vocab), {-30.0, 0.0});
  ModelSession e(spec), a(spec);
  auto cfg = scd_config();
  cfg.max_new_tokens = 64;
  const auto result = decode(&e, &a, cfg);
  REQUIRE(!result.tokens.empty());
  CHECK(result.tokens.size() == 1);
  CHECK(result.tokens[0] == TokenId{1});
  CHECK(result.traces[0].truncated == result.traces[0].k - 1);
  // sessions were rolled back to the kept prefix
  CHECK(e.context().size() == 1);
  CHECK(a.context() == e.context());
}

TEST_CASE("decode requires the sessions its mode needs") {
  auto spec = context_free_table(abc_vocab(), {0.0, 0.0, 0.0});
  ModelSession e(spec);
  DecodeConfig cfg;
  cfg.mode = DecodeMode::kScd;
  CHECK_THROWS_AS(decode(&e, nullptr, cfg), config_error);
  cfg.mode = DecodeMode::kAmateur;
  CHECK_THROWS_AS(decode(&e, nullptr, cfg), config_error);
}

TEST_CASE("decode is deterministic end to end") {
  auto run = [] {
    ContextFreePair pair({0.6, 0.3, 0.1}, {0.2, 0.5, 0.3});
    auto cfg = scd_config(0.05, 0.5, 0.7);
    cfg.seed = 99;
    cfg.max_new_tokens = 120;
    return decode(&pair.expert_session, &pair.amateur_session, cfg);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.tokens == b.tokens);
  REQUIRE(a.traces.size() == b.traces.size());
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    CHECK(a.traces[i].uniforms == b.traces[i].uniforms);
    CHECK(a.traces[i].emitted == b.traces[i].emitted);
  }
}

TEST_CASE("scd over a zero-smoothing amateur with masked logits stays well-defined") {
  // Corpus gaps give the bigram amateur exact-zero continuations, so its
  // logit rows carry masked entries; drafting, contrast clamping, and
  // residual resampling must all stay finite.
  Vocabulary vocab = abc_vocab();
  auto amateur_spec = std::make_shared<const ModelSpec>(
      train_ngram(vocab, tokenize(vocab, "a b a b c a"), 2, 0.0));
  auto expert_spec = std::make_shared<const ModelSpec>(
      train_ngram(vocab, tokenize(vocab, "a b c a c b a b c"), 2, 0.5));
  const auto prompt = tokenize(vocab, "a");
  ModelSession expert(expert_spec, prompt), amateur(amateur_spec, prompt);
  auto cfg = scd_config(0.05, 0.75, 0.8);
  cfg.max_new_tokens = 500;
  cfg.stop_on_eos = false;
  const auto result = decode(&expert, &amateur, cfg);
  CHECK(result.tokens.size() == 500);
  // The expert mask admits tokens the amateur zeroes out, so the floor
  // has to fire; the contrast then piles mass on exactly those tokens.
  CHECK(result.totals.clamped > 0);
  for (const auto& trace : result.traces) {
    for (double u : trace.uniforms) CHECK(std::isfinite(u));
    for (double h : trace.entropy_amateur) CHECK(std::isfinite(h));
    for (double h : trace.entropy_expert) CHECK(std::isfinite(h));
  }
  CHECK(expert.context() == amateur.context());
}

TEST_CASE("cd matches gamma=1 scd in marginal distribution on context-free models") {
  // cd samples the contrastive target directly; a gamma=1 speculative
  // iteration must land on the same marginal through accept/resample.
  const LogitVector ye{{1.5, 0.2, -0.8, -1.1}};
  const LogitVector ya{{0.1, 0.7, -0.3, 0.0}};
  ContrastConfig contrast;
  contrast.variant = ContrastVariant::kOriginal;
  contrast.alpha = 0.1;
  contrast.tau = 0.8;
  const auto cd_marginal = contrastive_target(ye, ya, contrast);
  const auto scd_marginal =
      enumerate_emitted_distribution(cd_marginal, probs_from_logits(ya, 1.0));
  CHECK(max_abs_diff(cd_marginal.values, scd_marginal.values) < 1e-12);
}

TEST_CASE("recorded entropies stay within [0, ln vocab]") {
  ContextFreePair pair({0.6, 0.3, 0.1}, {0.2, 0.5, 0.3});
  auto cfg = scd_config(0.05, 0.5, 0.7);
  cfg.max_new_tokens = 400;
  const auto result = decode(&pair.expert_session, &pair.amateur_session, cfg);
  const double h_max = std::log(3.0);
  for (const auto& trace : result.traces) {
    for (double h : trace.entropy_amateur) {
      CHECK(h >= 0.0);
      CHECK(h <= h_max + 1e-12);
    }
    for (double h : trace.entropy_expert) {
      CHECK(h >= 0.0);
      CHECK(h <= h_max + 1e-12);
    }
  }
}

TEST_CASE("losslessness: enumerated emitted law equals the contrastive target") {
  // Smaller sibling of the acceptance criterion: 100 random pairs.
  const auto report = verify_exact(100, 2, 8, 20260810, 1e-12);
  CHECK(report.pass);
  CHECK(report.max_abs_error < 1e-12);
}

TEST_CASE("losslessness negative control: corrupted residual is detected") {
  const auto report = verify_exact(100, 2, 8, 20260810, 1e-12, /*corrupt_residual=*/true);
  CHECK(!report.pass);
}

TEST_CASE("monte carlo losslessness on a small budget") {
  const auto report = verify_monte_carlo(200000, 77, 0.01);
  CHECK(report.pass);
  CHECK(report.tokens == 200000);
}
