// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scd/prob.hpp"
#include "scd/vocab.hpp"

namespace scd {

enum class ModelKind { kTable, kNgram };

/// Explicit lookup-table model: context key (token-id sequence) -> logits.
/// Lookup walks suffixes of the history from the longest stored key length
/// down to the required empty-context fallback, so a table with only the
/// "" entry is context-free. Context-free tables are what the exact
/// sampler verification enumerates over.
class TableModel {
 public:
  TableModel(std::map<std::vector<TokenId>, LogitVector> logits_by_context,
             std::size_t vocab_size);

  const LogitVector& score(std::span<const TokenId> history) const;
  std::size_t max_context() const { return max_context_; }
  const std::map<std::vector<TokenId>, LogitVector>& entries() const {
    return logits_by_context_;
  }

 private:
  std::map<std::vector<TokenId>, LogitVector> logits_by_context_;
  std::size_t max_context_ = 0;
};

/// Additive-smoothing n-gram model.
///
///   P(w | ctx) = (count(ctx, w) + smoothing) / (count(ctx, .) + smoothing * |V|)
///
/// Counts are collected for every context length 0..order-1, so histories
/// shorter than order-1 condition on what is available. An unseen context
/// with smoothing 0 falls back to the uniform distribution.
class NgramModel {
 public:
  NgramModel(int order, double smoothing, std::size_t vocab_size,
             std::span<const TokenId> corpus);

  /// Log-probabilities for the next token; exact zeros become the masked
  /// sentinel, so zero-smoothing models can produce genuinely masked logits.
  LogitVector score(std::span<const TokenId> history) const;

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }

  struct ContextCounts {
    std::map<TokenId, std::uint64_t> next;
    std::uint64_t total = 0;
  };
  const std::map<std::vector<TokenId>, ContextCounts>& counts() const { return counts_; }

 private:
  int order_;
  double smoothing_;
  std::size_t vocab_size_;
  std::map<std::vector<TokenId>, ContextCounts> counts_;
};

inline constexpr int kMaxNgramOrder = 8;

/// Immutable model description. Shareable read-only across any number of
/// concurrent sessions.
class ModelSpec {
 public:
  static ModelSpec table(Vocabulary vocab,
                         std::map<std::vector<TokenId>, LogitVector> logits_by_context);
  static ModelSpec ngram(Vocabulary vocab, int order, double smoothing,
                         std::span<const TokenId> corpus);

  ModelKind kind() const { return kind_; }
  const Vocabulary& vocab() const { return vocab_; }

  /// Logits for the position following `history`.
  LogitVector score(std::span<const TokenId> history) const;

  const TableModel& as_table() const;
  const NgramModel& as_ngram() const;

 private:
  ModelSpec(ModelKind kind, Vocabulary vocab) : kind_(kind), vocab_(std::move(vocab)) {}

  ModelKind kind_;
  Vocabulary vocab_;
  std::optional<TableModel> table_;
  std::optional<NgramModel> ngram_;
};

/// Single-owner incremental decoding state over a shared spec: the full
/// token history fed so far, extendable in O(1) per step and truncatable
/// to roll back a speculative suffix.
class ModelSession {
 public:
  explicit ModelSession(std::shared_ptr<const ModelSpec> spec,
                        std::span<const TokenId> prompt = {});

  const ModelSpec& spec() const { return *spec_; }
  const Vocabulary& vocab() const { return spec_->vocab(); }
  const std::vector<TokenId>& context() const { return context_; }

  void append(TokenId token);
  void truncate(std::size_t new_size);
  void reset(std::span<const TokenId> prompt);

  /// Logits for the next position given the current context.
  LogitVector logits_next() const { return spec_->score(context_); }

 private:
  std::shared_ptr<const ModelSpec> spec_;
  std::vector<TokenId> context_;
};

/// One forward computation: optionally append `next`, then score the
/// following position. The context remains advanced by `next`.
LogitVector forward(ModelSession& session, std::optional<TokenId> next = std::nullopt);

/// Verification-style batched call: logits for positions conditioned on
/// prompt + drafted[0..j) for j = 0..drafted.size(). Returns
/// drafted.size() + 1 vectors. The session context is restored afterwards;
/// committing an accepted prefix is the caller's move.
std::vector<LogitVector> batch_forward(ModelSession& session,
                                       std::span<const TokenId> drafted);

/// Train an additive-smoothing n-gram spec over an already-tokenized corpus.
ModelSpec train_ngram(Vocabulary vocab, std::span<const TokenId> corpus, int order,
                      double smoothing);

/// Whitespace-tokenize `text` against `vocab`; unknown tokens are an error.
std::vector<TokenId> tokenize(const Vocabulary& vocab, const std::string& text);

/// Load a model-spec JSON file ({"kind": "table"|"ngram", ...}). The ngram
/// kind's corpus_path is resolved relative to the spec file's directory.
std::shared_ptr<const ModelSpec> load_model(const std::string& path);

/// Same schema, parsed from a string. `base_dir` anchors corpus_path.
std::shared_ptr<const ModelSpec> parse_model(const std::string& json_text,
                                             const std::string& base_dir,
                                             const std::string& origin = "<string>");

}  // namespace scd
