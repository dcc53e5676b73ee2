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

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mpat/attacks.hpp"
#include "test_support.hpp"

namespace mpat {
namespace {

using testing::ConstantVictim;
using testing::LinearVictim;

Example single(const std::string& text, int label) { return {"e", {tokenize(text)}, label}; }

class MapCandidates final : public CandidateSource {
 public:
  explicit MapCandidates(std::map<std::string, std::vector<std::string>> m) : m_(std::move(m)) {}
  std::vector<std::string> candidates(const std::string& w) const override {
    auto it = m_.find(w);
    return it == m_.end() ? std::vector<std::string>{} : it->second;
  }

 private:
  std::map<std::string, std::vector<std::string>> m_;
};

// Exhaustive search over every assignment of (original or candidate) per
// position with at most `budget` changes.
bool brute_force_flips(const Classifier& model, const Example& ex, const CandidateSource& src, int budget) {
  const Tokens& x = ex.segments[0];
  std::vector<std::vector<std::string>> options;
  for (const auto& w : x) {
    auto c = src.candidates(w);
    c.insert(c.begin(), w);
    options.push_back(c);
  }
  std::vector<std::size_t> pick(x.size(), 0);
  while (true) {
    Tokens t;
    int changes = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      t.push_back(options[i][pick[i]]);
      changes += pick[i] != 0;
    }
    if (changes <= budget && adversarial_criterion(model, {t}, ex.label)) return true;
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
    if (i == pick.size()) return false;
  }
}

TEST(CriterionTest, Examples) {
  LinearVictim v({{"good", 2.0}}, -1.0);
  EXPECT_EQ(adversarial_criterion(v, {tokenize("good")}, 1), 0);
  EXPECT_EQ(adversarial_criterion(v, {tokenize("good")}, 0), 1);
  EXPECT_EQ(adversarial_criterion(v, {tokenize("meh")}, 1), 1);
  // A tie predicts the lower class.
  ConstantVictim tie((Eigen::VectorXd(2) << 0.5, 0.5).finished());
  EXPECT_EQ(adversarial_criterion(tie, {tokenize("x")}, 0), 0);
  EXPECT_EQ(adversarial_criterion(tie, {tokenize("x")}, 1), 1);
}

TEST(SaliencyTest, UnknownAndConstantModels) {
  LinearVictim v({{"good", 2.0}, {"<unk>", 0.5}}, 0.0);
  auto s = word_saliency(v, {Tokens{"<unk>", "good"}}, 1);
  EXPECT_EQ(s(0), 0.0);
  EXPECT_GT(s(1), 0.0);
  ConstantVictim c((Eigen::VectorXd(2) << 0.3, 0.7).finished());
  EXPECT_TRUE((word_saliency(c, {tokenize("a b c")}, 1).array() == 0).all());
  EXPECT_THROW(word_saliency(c, {Tokens{}}, 1), std::invalid_argument);
}

TEST(SaliencyTest, LinearOrderingFollowsWeights) {
  LinearVictim v({{"a", 0.5}, {"b", 2.0}, {"c", 1.0}}, 0.0);
  auto s = word_saliency(v, {tokenize("a b c")}, 1);
  EXPECT_GT(s(1), s(2));
  EXPECT_GT(s(2), s(0));
  EXPECT_GT(s(0), 0.0);
}

TEST(DeletionTest, Examples) {
  LinearVictim v({{"a", 1.0}}, 0.5);
  auto s = deletion_importance(v, {tokenize("a b a")}, 1);
  const double p = 1 / (1 + std::exp(-2.5)), q = 1 / (1 + std::exp(-1.5));
  EXPECT_NEAR(s(0), p - q, 1e-15);
  EXPECT_EQ(s(0), s(2));
  EXPECT_EQ(s(1), 0.0);
  EXPECT_THROW(deletion_importance(v, {tokenize("a")}, 1), std::invalid_argument);
}

TEST(PwwsTest, ConstantModelNeverFlips) {
  ConstantVictim c((Eigen::VectorXd(2) << 0.2, 0.8).finished());
  MapCandidates src({{"good", {"fine", "decent"}}});
  auto out = pwws_attack(c, single("a good film", 1), src, AttackConfig{});
  EXPECT_TRUE(out.attempted);
  EXPECT_FALSE(out.success);
  EXPECT_TRUE(out.substituted.empty());
}

TEST(PwwsTest, SingleSubstitutionFlip) {
  LinearVictim v({{"good", 1.0}, {"poor", -2.0}}, 0.2);
  MapCandidates src({{"good", {"fine", "poor"}}});
  auto out = pwws_attack(v, single("a good film", 1), src, AttackConfig{});
  EXPECT_TRUE(out.success);
  ASSERT_EQ(out.substituted.size(), 1u);
  EXPECT_EQ(out.substituted[0], 1);
  EXPECT_EQ(join(out.adversarial[0]), "a poor film");
  EXPECT_EQ(out.final_pred, 0);
  EXPECT_DOUBLE_EQ(out.srr, 1.0 / 3.0);
}

TEST(PwwsTest, MisclassifiedInputIsNotAttempted) {
  LinearVictim v({{"good", 1.0}}, -5.0);
  MapCandidates src({});
  auto out = pwws_attack(v, single("good", 1), src, AttackConfig{});
  EXPECT_FALSE(out.attempted);
  EXPECT_FALSE(out.success);
}

TEST(PwwsTest, BudgetIsRespected) {
  LinearVictim v({{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"z", -0.2}}, 0.0);
  MapCandidates src({{"a", {"z"}}, {"b", {"z"}}, {"c", {"z"}}});
  AttackConfig cfg;
  cfg.max_ratio = 0.34;
  EXPECT_EQ(cfg.budget(3), 2);
  auto out = pwws_attack(v, single("a b c", 1), src, cfg);
  EXPECT_LE(out.substituted.size(), 2u);
  EXPECT_FALSE(out.success);
  cfg.max_ratio = 1.0;
  EXPECT_TRUE(pwws_attack(v, single("a b c", 1), src, cfg).success);
}

TEST(PwwsTest, GreedyMatchesExhaustiveSearchOnLinearVictims) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::vector<std::string> words{"w0", "w1", "w2", "w3", "w4", "w5"};
  int flips = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::string, double> weights;
    std::map<std::string, std::vector<std::string>> syn;
    Tokens x;
    const int len = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < len; ++i) {
      const std::string w = words[rng() % words.size()];
      x.push_back(w);
      weights[w] = n(rng);
    }
    for (const auto& w : x) {
      const int k = static_cast<int>(rng() % 4);
      auto& list = syn[w];
      list.clear();
      for (int j = 0; j < k; ++j) {
        std::string s = w + "_s" + std::to_string(j);
        list.push_back(s);
        weights[s] = n(rng);
      }
    }
    LinearVictim v(weights, n(rng));
    Example ex{"e", {x}, 0};
    ex.label = v.predict(ex.segments);
    MapCandidates src(syn);
    auto out = pwws_attack(v, ex, src, AttackConfig{});
    ASSERT_EQ(out.success, brute_force_flips(v, ex, src, len)) << trial;
    flips += out.success;
  }
  EXPECT_GT(flips, 30);
  EXPECT_LT(flips, 270);
}

TEST(AttackInvariantTest, SuccessImpliesCriterionAndCandidatesComeFromSource) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, double> w{{"a", n(rng)}, {"b", n(rng)}, {"c", n(rng)}, {"x", n(rng)}, {"y", n(rng)}};
    LinearVictim v(w, 0.0);
    MapCandidates src({{"a", {"x", "y"}}, {"b", {"y"}}, {"c", {"x"}}});
    Example ex{"e", {tokenize("a b c a")}, 0};
    ex.label = v.predict(ex.segments);
    AttackConfig cfg;
    cfg.max_ratio = 0.5;
    for (auto method : {AttackMethod::Pwws, AttackMethod::TextFooler}) {
      cfg.method = method;
      auto out = run_attack(v, ex, src, cfg);
      if (out.success) EXPECT_EQ(adversarial_criterion(v, out.adversarial, ex.label), 1);
      EXPECT_LE(static_cast<int>(out.substituted.size()), cfg.budget(4));
      for (std::size_t i = 0; i < 4; ++i) {
        const auto& orig = ex.segments[0][i];
        const auto& now = out.adversarial[0][i];
        if (orig == now) continue;
        auto c = src.candidates(orig);
        EXPECT_NE(std::find(c.begin(), c.end(), now), c.end());
        EXPECT_NE(std::find(out.substituted.begin(), out.substituted.end(), static_cast<int>(i)),
                  out.substituted.end());
      }
    }
  }
}

TEST(TextFoolerTest, UnreachableThresholdYieldsNoCandidates) {
  Vocabulary vocab;
  for (auto w : {"good", "fine", "film"}) vocab.add(w);
  nn::RowMatrix<double> emb(5, 2);
  emb << 0, 0, 0.1, 0.1, 1, 0, 0.9, 0.1, 0, 1;
  EmbeddingNeighbors strict(emb, vocab, 5, 1.0);
  EXPECT_TRUE(strict.candidates("good").empty());
  EmbeddingNeighbors loose(emb, vocab, 5, 0.9);
  EXPECT_EQ(loose.candidates("good"), std::vector<std::string>{"fine"});
  EXPECT_TRUE(loose.candidates("nope").empty());
}

TEST(TextFoolerTest, CraftedNeighbourFlipsVictim) {
  Vocabulary vocab;
  for (auto w : {"good", "bad", "film"}) vocab.add(w);
  nn::RowMatrix<double> emb(5, 2);
  emb << 0, 0, 0.1, 0.1, 1, 0, 0.95, 0.2, 0, 1;
  EmbeddingNeighbors src(emb, vocab, 5, 0.5);
  LinearVictim v({{"good", 1.0}, {"bad", -1.0}}, 0.1);
  AttackConfig cfg;
  cfg.method = AttackMethod::TextFooler;
  auto out = textfooler_attack(v, single("good film", 1), src, cfg);
  EXPECT_TRUE(out.success);
  EXPECT_EQ(join(out.adversarial[0]), "bad film");
  cfg.sim_threshold = 1.0;
  EmbeddingNeighbors none(emb, vocab, 5, 1.0);
  EXPECT_FALSE(textfooler_attack(v, single("good film", 1), none, cfg).success);
}

TEST(ThesaurusCandidatesTest, PosFilter) {
  Thesaurus th;
  th.add("fast", "quick");
  th.add("fast", "speed");
  PosLexicon lex;
  lex.insert("fast", PosTag::Adj);
  lex.insert("quick", PosTag::Adj);
  lex.insert("speed", PosTag::Noun);
  EXPECT_EQ(ThesaurusCandidates(th, &lex).candidates("fast"), std::vector<std::string>{"quick"});
  EXPECT_EQ(ThesaurusCandidates(th, nullptr).candidates("fast").size(), 2u);
}

TEST(AttackConfigTest, ValidationAndBudget) {
  AttackConfig c;
  EXPECT_EQ(c.budget(7), 7);
  c.max_ratio = 0.25;
  EXPECT_EQ(c.budget(8), 2);
  EXPECT_EQ(c.budget(9), 3);
  c.max_ratio = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(parse_attack_method("hotflip"), std::invalid_argument);
}

TEST(OutcomeJsonTest, RoundTrip) {
  AttackOutcome o;
  o.id = "test-00003";
  o.label = 1;
  o.orig_pred = 1;
  o.final_pred = 0;
  o.attempted = true;
  o.success = true;
  o.srr = 0.25;
  o.adversarial = {tokenize("a poor film"), tokenize("it was dull")};
  auto line = outcome_to_json(o);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  auto back = outcome_from_json(line);
  EXPECT_EQ(back.id, o.id);
  EXPECT_EQ(back.success, o.success);
  EXPECT_EQ(back.final_pred, 0);
  EXPECT_EQ(back.srr, 0.25);
  EXPECT_EQ(back.adversarial, o.adversarial);
  EXPECT_THROW(outcome_from_json("{\"id\":\"x\"}"), std::runtime_error);
}

}  // namespace
}  // namespace mpat
