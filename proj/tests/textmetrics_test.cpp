// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "scd/rng.hpp"
#include "scd/textmetrics.hpp"

using namespace scd;

TEST_CASE("diversity fixtures") {
  SUBCASE("alternating pair") {
    // "a b a b a b a b": 2 unique bigrams of 7, 2/6 trigrams, 2/5 4-grams.
    const std::vector<TokenId> tokens{0, 1, 0, 1, 0, 1, 0, 1};
    CHECK(diversity(tokens) == doctest::Approx((2.0 / 7) * (2.0 / 6) * (2.0 / 5)).epsilon(1e-12));
    CHECK(diversity(tokens) == doctest::Approx(0.0380952380952381).epsilon(1e-12));
  }
  SUBCASE("all distinct") {
    const std::vector<TokenId> tokens{0, 1, 2, 3, 4, 5, 6, 7};
    CHECK(diversity(tokens) == 1.0);
  }
  SUBCASE("single repeated token") {
    const std::vector<TokenId> tokens{0, 0, 0, 0, 0};
    CHECK(diversity(tokens) == doctest::Approx((1.0 / 4) * (1.0 / 3) * (1.0 / 2)).epsilon(1e-12));
  }
}

TEST_CASE("diversity is undefined below 5 tokens") {
  CHECK_THROWS_AS(diversity(std::vector<TokenId>{0, 1, 2, 3}), std::invalid_argument);
}

TEST_CASE("ngram stats totals follow the window count") {
  const std::vector<TokenId> tokens{0, 1, 2, 3, 4, 5};
  const auto stats = ngram_stats(tokens);
  CHECK(stats.levels[0].total == 5);
  CHECK(stats.levels[1].total == 4);
  CHECK(stats.levels[2].total == 3);
}

TEST_CASE("property: diversity is label-invariant and in (0, 1]") {
  RngStream rng(2026);
  for (int trial = 0; trial < 300; ++trial) {
    const int len = 5 + static_cast<int>(rng.uniform() * 40);
    const int vocab = 2 + static_cast<int>(rng.uniform() * 6);
    std::vector<TokenId> tokens;
    for (int i = 0; i < len; ++i) tokens.push_back(static_cast<TokenId>(rng.uniform() * vocab));

    const double d = diversity(tokens);
    CHECK(d > 0.0);
    CHECK(d <= 1.0);

    // permute the labels
    std::vector<TokenId> perm(static_cast<std::size_t>(vocab));
    for (int i = 0; i < vocab; ++i) perm[static_cast<std::size_t>(i)] = static_cast<TokenId>(i);
    for (int i = vocab - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<TokenId> relabeled;
    relabeled.reserve(tokens.size());
    for (TokenId t : tokens) relabeled.push_back(perm[static_cast<std::size_t>(t)]);
    CHECK(diversity(relabeled) == d);
  }
}
