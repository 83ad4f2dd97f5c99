// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace scd {

/// Index into a Vocabulary. Always in [0, vocab.size()).
using TokenId = std::int32_t;

/// Fixed, ordered token inventory shared by every model in a run.
/// Expert and amateur must be built over the same Vocabulary; decoding
/// refuses mismatched vocabularies up front.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens,
             std::optional<std::string> eos = std::nullopt)
      : tokens_(std::move(tokens)) {
    if (tokens_.size() < 2) {
      throw std::invalid_argument("vocabulary needs at least 2 tokens");
    }
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
      if (!inserted) {
        throw std::invalid_argument("duplicate vocabulary token: " + tokens_[i]);
      }
    }
    if (eos) {
      auto it = index_.find(*eos);
      if (it == index_.end()) {
        throw std::invalid_argument("eos token not in vocabulary: " + *eos);
      }
      eos_ = it->second;
    }
  }

  std::size_t size() const { return tokens_.size(); }

  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  /// Token id for a string, if present.
  std::optional<TokenId> id(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<TokenId> eos_id() const { return eos_; }

  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.eos_ == b.eos_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::optional<TokenId> eos_;
};

}  // namespace scd
