// Copyright 2026 The MPAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mpat/lm.hpp"
#include "mpat/textcore.hpp"

namespace mpat {
namespace {

TEST(NGramTest, HandCounts) {
  auto lm = NGramModel::fit({{"a", "b"}, {"a", "c"}}, 2);
  EXPECT_EQ(lm.count("<s> a"), 2);
  EXPECT_EQ(lm.count("a b"), 1);
  EXPECT_EQ(lm.context_count("a"), 2);
}

TEST(NGramTest, EmptyCorpusAndBadArguments) {
  EXPECT_THROW(NGramModel::fit({}, 2), std::invalid_argument);
  EXPECT_THROW(NGramModel::fit({{"a"}}, 4), std::invalid_argument);
  EXPECT_THROW(NGramModel::fit({{"a"}}, 2, 0.0), std::invalid_argument);
}

// Fit on "a b": outcomes {a, b, </s>, <unk>}; each scored bigram was seen
// once after a context seen once, so every factor is (1 + 1) / (1 + 4).
TEST(NGramTest, ClosedFormPerplexity) {
  auto lm = NGramModel::fit({{"a", "b"}}, 2, 1.0);
  EXPECT_EQ(lm.vocab_size(), 4);
  const double p = 2.0 / 5.0;
  EXPECT_NEAR(lm.perplexity({"a", "b"}), std::pow(p * p * p, -1.0 / 3.0), 1e-12);
  EXPECT_NEAR(lm.perplexity({"a", "b"}), 2.5, 1e-12);
}

TEST(NGramTest, UnigramIsSmoothedFrequency) {
  auto lm = NGramModel::fit({{"a", "a", "b"}}, 1, 1.0);
  // Counts a:2 b:1 </s>:1 over 4 tokens; V = 4.
  EXPECT_NEAR(lm.probability({}, "a"), 3.0 / 8.0, 1e-15);
  EXPECT_NEAR(lm.probability({}, "zzz"), 1.0 / 8.0, 1e-15);
}

TEST(NGramTest, UniformModelPerplexityIsVocabSize) {
  auto lm = NGramModel::uniform(37);
  for (const Tokens& s : {Tokens{"x"}, Tokens{"a", "b", "c", "d"}}) EXPECT_NEAR(lm.perplexity(s), 37.0, 1e-9);
}

TEST(NGramTest, DistributionsSumToOne) {
  for (int order : {1, 2, 3}) {
    auto lm = NGramModel::fit({tokenize("the movie was good"), tokenize("the film was bad"), tokenize("a movie")}, order);
    for (const Tokens& ctx : {Tokens{}, Tokens{"the"}, Tokens{"the", "movie"}, Tokens{"zzz", "qq"}}) {
      double sum = lm.probability(ctx, "</s>") + lm.probability(ctx, "<unk>");
      for (const auto& w : {"the", "movie", "was", "good", "film", "bad", "a"}) sum += lm.probability(ctx, w);
      EXPECT_NEAR(sum, 1.0, 1e-12) << "order " << order;
    }
  }
}

TEST(NGramTest, PerplexityIsPureAndAtLeastOne) {
  auto lm = NGramModel::fit({tokenize("a b a b"), tokenize("b a")}, 2);
  std::mt19937 rng(4);
  for (int i = 0; i < 100; ++i) {
    Tokens s;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 6); k < n; ++k) s.push_back(rng() % 2 ? "a" : "b");
    double p = lm.perplexity(s);
    EXPECT_GE(p, 1.0);
    EXPECT_EQ(p, lm.perplexity(s));
  }
}

TEST(NGramTest, AddingASentenceNeverRaisesItsUnigramPerplexity) {
  std::vector<Tokens> corpus{tokenize("a b c"), tokenize("c c d")};
  for (const auto& s : {tokenize("a a"), tokenize("d c b"), tokenize("e")}) {
    auto before = NGramModel::fit(corpus, 1).perplexity(s);
    auto with = corpus;
    with.push_back(s);
    EXPECT_LE(NGramModel::fit(with, 1).perplexity(s), before);
  }
}

TEST(NGramTest, DumpLoadRoundTrip) {
  auto lm = NGramModel::fit({tokenize("the movie was good"), tokenize("the film")}, 3, 0.5);
  auto back = NGramModel::load(lm.dump());
  EXPECT_EQ(back.dump(), lm.dump());
  EXPECT_EQ(back.perplexity(tokenize("the movie")), lm.perplexity(tokenize("the movie")));
}

}  // namespace
}  // namespace mpat
