// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "scd/vocab.hpp"

namespace scd {

/// Total and unique n-gram counts of a token sequence, for n = 2..4.
struct NGramStats {
  struct Level {
    int n = 0;
    std::size_t total = 0;
    std::size_t unique = 0;
  };
  Level levels[3];
};

inline NGramStats ngram_stats(std::span<const TokenId> tokens) {
  NGramStats stats;
  for (int n = 2; n <= 4; ++n) {
    auto& level = stats.levels[n - 2];
    level.n = n;
    if (tokens.size() + 1 > static_cast<std::size_t>(n)) {
      level.total = tokens.size() - static_cast<std::size_t>(n) + 1;
    }
    std::set<std::vector<TokenId>> seen;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      seen.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    level.unique = seen.size();
  }
  return stats;
}

/// Lexical diversity of a completion: the product over n = 2..4 of
/// unique/total n-grams. Computed on token ids (prompts excluded by the
/// caller). 1.0 iff every n-gram at every level is distinct.
inline double diversity(std::span<const TokenId> tokens) {
  if (tokens.size() < 5) {
    throw std::invalid_argument(
        "diversity needs at least 5 tokens; the metric is undefined below that");
  }
  const auto stats = ngram_stats(tokens);
  double product = 1.0;
  for (const auto& level : stats.levels) {
    product *= static_cast<double>(level.unique) / static_cast<double>(level.total);
  }
  return product;
}

}  // namespace scd
