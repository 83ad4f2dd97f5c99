// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include "scd/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "scd/errors.hpp"

namespace scd {

namespace {

void check_logit_row(const LogitVector& row, std::size_t vocab_size) {
  if (row.size() != vocab_size) {
    throw std::invalid_argument("logit row length does not match vocabulary size");
  }
  bool any_finite = false;
  for (double v : row.values) {
    if (!is_masked(v) && !std::isfinite(v)) {
      throw std::invalid_argument("logit entries must be finite or masked");
    }
    any_finite |= !is_masked(v);
  }
  if (!any_finite) throw std::invalid_argument("logit row has no finite entry");
}

}  // namespace

// ---------------------------------------------------------------------------
// TableModel

TableModel::TableModel(std::map<std::vector<TokenId>, LogitVector> logits_by_context,
                       std::size_t vocab_size)
    : logits_by_context_(std::move(logits_by_context)) {
  if (logits_by_context_.find({}) == logits_by_context_.end()) {
    throw config_error("table model must cover the empty (fallback) context");
  }
  for (const auto& [key, row] : logits_by_context_) {
    check_logit_row(row, vocab_size);
    if (key.size() > max_context_) max_context_ = key.size();
  }
}

const LogitVector& TableModel::score(std::span<const TokenId> history) const {
  std::size_t k = std::min(max_context_, history.size());
  for (;; --k) {
    std::vector<TokenId> key(history.end() - static_cast<std::ptrdiff_t>(k), history.end());
    auto it = logits_by_context_.find(key);
    if (it != logits_by_context_.end()) return it->second;
    if (k == 0) break;
  }
  throw internal_error("table model lost its fallback context");
}

// ---------------------------------------------------------------------------
// NgramModel

NgramModel::NgramModel(int order, double smoothing, std::size_t vocab_size,
                       std::span<const TokenId> corpus)
    : order_(order), smoothing_(smoothing), vocab_size_(vocab_size) {
  if (order < 1) throw config_error("ngram order must be >= 1");
  if (order > kMaxNgramOrder) {
    throw config_error("ngram order > " + std::to_string(kMaxNgramOrder) + " is unsupported");
  }
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw config_error("ngram smoothing must be a finite value >= 0");
  }
  // Count continuations for every context length 0..order-1 so that
  // histories shorter than order-1 still condition on what exists.
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (int k = 0; k < order_; ++k) {
      if (static_cast<std::size_t>(k) > i) break;
      std::vector<TokenId> ctx(corpus.begin() + static_cast<std::ptrdiff_t>(i - k),
                               corpus.begin() + static_cast<std::ptrdiff_t>(i));
      auto& slot = counts_[std::move(ctx)];
      slot.next[corpus[i]] += 1;
      slot.total += 1;
    }
  }
}

LogitVector NgramModel::score(std::span<const TokenId> history) const {
  const std::size_t k =
      std::min(static_cast<std::size_t>(order_ - 1), history.size());
  std::vector<TokenId> ctx(history.end() - static_cast<std::ptrdiff_t>(k), history.end());

  LogitVector out;
  out.values.assign(vocab_size_, kMaskedScore);

  const auto it = counts_.find(ctx);
  const std::uint64_t total = it == counts_.end() ? 0 : it->second.total;
  const double denom = static_cast<double>(total) + smoothing_ * static_cast<double>(vocab_size_);

  if (denom <= 0.0) {
    // Unseen context with zero smoothing: uniform fallback.
    const double logp = -std::log(static_cast<double>(vocab_size_));
    out.values.assign(vocab_size_, logp);
    return out;
  }

  for (std::size_t w = 0; w < vocab_size_; ++w) {
    std::uint64_t cnt = 0;
    if (it != counts_.end()) {
      auto jt = it->second.next.find(static_cast<TokenId>(w));
      if (jt != it->second.next.end()) cnt = jt->second;
    }
    const double p = (static_cast<double>(cnt) + smoothing_) / denom;
    if (p > 0.0) out.values[w] = std::log(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec ModelSpec::table(Vocabulary vocab,
                           std::map<std::vector<TokenId>, LogitVector> logits_by_context) {
  ModelSpec spec(ModelKind::kTable, std::move(vocab));
  spec.table_.emplace(std::move(logits_by_context), spec.vocab_.size());
  return spec;
}

ModelSpec ModelSpec::ngram(Vocabulary vocab, int order, double smoothing,
                           std::span<const TokenId> corpus) {
  for (TokenId t : corpus) {
    if (!vocab.contains(t)) throw std::invalid_argument("corpus token id out of range");
  }
  ModelSpec spec(ModelKind::kNgram, std::move(vocab));
  spec.ngram_.emplace(order, smoothing, spec.vocab_.size(), corpus);
  return spec;
}

LogitVector ModelSpec::score(std::span<const TokenId> history) const {
  if (kind_ == ModelKind::kTable) return table_->score(history);
  return ngram_->score(history);
}

const TableModel& ModelSpec::as_table() const {
  if (!table_) throw internal_error("model spec is not a table model");
  return *table_;
}

const NgramModel& ModelSpec::as_ngram() const {
  if (!ngram_) throw internal_error("model spec is not an ngram model");
  return *ngram_;
}

// ---------------------------------------------------------------------------
// ModelSession and the forward ops

ModelSession::ModelSession(std::shared_ptr<const ModelSpec> spec,
                           std::span<const TokenId> prompt)
    : spec_(std::move(spec)) {
  if (!spec_) throw std::invalid_argument("model session needs a spec");
  reset(prompt);
}

void ModelSession::append(TokenId token) {
  if (!spec_->vocab().contains(token)) {
    throw std::invalid_argument("token id " + std::to_string(token) +
                                " is out of range for the vocabulary");
  }
  context_.push_back(token);
}

void ModelSession::truncate(std::size_t new_size) {
  if (new_size > context_.size()) {
    throw internal_error("session truncate beyond current context");
  }
  context_.resize(new_size);
}

void ModelSession::reset(std::span<const TokenId> prompt) {
  context_.clear();
  context_.reserve(prompt.size());
  for (TokenId t : prompt) append(t);
}

LogitVector forward(ModelSession& session, std::optional<TokenId> next) {
  if (next) session.append(*next);
  return session.logits_next();
}

std::vector<LogitVector> batch_forward(ModelSession& session,
                                       std::span<const TokenId> drafted) {
  if (drafted.empty()) throw std::invalid_argument("batch_forward needs a nonempty draft");
  const std::size_t base = session.context().size();
  std::vector<LogitVector> rows;
  rows.reserve(drafted.size() + 1);
  for (std::size_t j = 0; j <= drafted.size(); ++j) {
    rows.push_back(session.logits_next());
    if (j < drafted.size()) session.append(drafted[j]);
  }
  session.truncate(base);
  return rows;
}

ModelSpec train_ngram(Vocabulary vocab, std::span<const TokenId> corpus, int order,
                      double smoothing) {
  return ModelSpec::ngram(std::move(vocab), order, smoothing, corpus);
}

std::vector<TokenId> tokenize(const Vocabulary& vocab, const std::string& text) {
  std::vector<TokenId> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto id = vocab.id(tok);
    if (!id) throw config_error("token not in vocabulary: '" + tok + "'");
    out.push_back(*id);
  }
  return out;
}

}  // namespace scd
