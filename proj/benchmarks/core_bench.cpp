// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include <benchmark/benchmark.h>

#include <memory>

#include "scd/contrast.hpp"
#include "scd/decode.hpp"
#include "scd/model.hpp"
#include "scd/prob.hpp"
#include "scd/rng.hpp"

namespace {

scd::Vocabulary bench_vocab() {
  return scd::Vocabulary({"the", "a", "cat", "dog", "mat", "tree", "sat", "ran",
                          "saw", "on", "to", "."});
}

const char* kCorpus =
    "the cat sat on the mat . the dog ran to the tree . the cat saw the dog . "
    "a dog saw a cat . the cat ran to the mat . the dog sat on the tree . "
    "a cat sat on a tree . a dog ran to a mat .";

void BM_Softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  scd::RngStream rng(1);
  scd::LogitVector logits;
  for (std::size_t i = 0; i < n; ++i) logits.values.push_back(-4.0 + 8.0 * rng.uniform());
  for (auto _ : state) {
    auto probs = scd::probs_from_logits(logits, 0.7);
    benchmark::DoNotOptimize(probs);
  }
}
BENCHMARK(BM_Softmax)->Arg(16)->Arg(256)->Arg(4096);

void BM_ContrastiveTarget(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  scd::RngStream rng(2);
  scd::LogitVector ye, ya;
  for (std::size_t i = 0; i < n; ++i) {
    ye.values.push_back(-4.0 + 8.0 * rng.uniform());
    ya.values.push_back(-4.0 + 8.0 * rng.uniform());
  }
  scd::ContrastConfig cfg;
  cfg.alpha = 0.1;
  cfg.beta = 0.5;
  cfg.tau = 0.9;
  for (auto _ : state) {
    auto target = scd::contrastive_target(ye, ya, cfg);
    benchmark::DoNotOptimize(target);
  }
}
BENCHMARK(BM_ContrastiveTarget)->Arg(16)->Arg(256)->Arg(4096);

void BM_NgramForward(benchmark::State& state) {
  const auto vocab = bench_vocab();
  const auto corpus = scd::tokenize(vocab, kCorpus);
  auto spec = std::make_shared<const scd::ModelSpec>(scd::train_ngram(vocab, corpus, 3, 0.1));
  scd::ModelSession session(spec, scd::tokenize(vocab, "the cat"));
  scd::RngStream rng(3);
  for (auto _ : state) {
    auto logits = session.logits_next();
    benchmark::DoNotOptimize(logits);
    session.append(static_cast<scd::TokenId>(rng.uniform() * vocab.size()));
  }
}
BENCHMARK(BM_NgramForward);

void BM_ScdDecode256(benchmark::State& state) {
  const auto vocab = bench_vocab();
  const auto corpus = scd::tokenize(vocab, kCorpus);
  auto expert = std::make_shared<const scd::ModelSpec>(scd::train_ngram(vocab, corpus, 3, 0.1));
  auto amateur = std::make_shared<const scd::ModelSpec>(scd::train_ngram(vocab, corpus, 2, 1.0));
  const auto prompt = scd::tokenize(vocab, "the cat");
  scd::DecodeConfig cfg;
  cfg.mode = scd::DecodeMode::kScd;
  cfg.gamma = 4;
  cfg.contrast.alpha = 0.1;
  cfg.contrast.beta = 0.5;
  cfg.contrast.tau = 0.9;
  cfg.max_new_tokens = 256;
  cfg.stop_on_eos = false;
  cfg.record_traces = false;
  for (auto _ : state) {
    scd::ModelSession e(expert, prompt), a(amateur, prompt);
    auto result = scd::decode(&e, &a, cfg);
    benchmark::DoNotOptimize(result);
    state.counters["tokens_per_s"] = benchmark::Counter(
        static_cast<double>(result.totals.emitted), benchmark::Counter::kIsIterationInvariantRate);
  }
}
BENCHMARK(BM_ScdDecode256);

}  // namespace

BENCHMARK_MAIN();
