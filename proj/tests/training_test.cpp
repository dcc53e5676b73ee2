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

#include <random>

#include <gtest/gtest.h>

#include "mpat/parsing.hpp"
#include "mpat/synth.hpp"
#include "mpat/training.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

namespace mpat {
namespace {

using testing::random_ids;
using testing::random_model;

struct Toy {
  Dataset data;
  Vocabulary vocab;
  Model init;
};

// Label 1 iff the sentence contains "up"; separable by a bag of words.
Toy make_toy(int n, std::uint64_t seed, nn::Arch arch = nn::Arch::MeanPoolMlp) {
  Toy t;
  t.data.num_classes = 2;
  t.data.pad_length = 6;
  Rng rng(seed);
  const std::vector<std::string> filler{"x", "y", "z", "w"};
  for (int i = 0; i < n; ++i) {
    int label = i % 2;
    Tokens s{label ? "up" : "down"};
    for (int k = 0; k < 3; ++k) s.push_back(filler[uniform_index(rng, filler.size())]);
    std::shuffle(s.begin(), s.end(), rng);
    t.data.examples.push_back({"t" + std::to_string(i), {s}, label});
  }
  t.vocab = build_vocab(t.data.examples, 50);
  Rng init_rng(seed + 1);
  t.init = nn::init_params<double>({arch, t.vocab.size(), 6, 6, 2, 2}, init_rng);
  return t;
}

TrainConfig base_config(TrainMode mode) {
  TrainConfig c;
  c.mode = mode;
  c.epochs = 6;
  c.batch_size = 8;
  c.tau = 0.5;
  c.seed = 3;
  return c;
}

bool same_params(const Model& a, const Model& b) {
  bool same = true;
  nn::for_each_tensor_pair(const_cast<Model&>(a), b, [&](const auto& x, const auto& y) { same = same && x == y; });
  return same;
}

TEST(DeltaTest, ClipExamples) {
  Delta d(1, 3);
  d << 0.001, 0.0001, -1;
  Delta c = clip_delta(d, 0.0005);
  EXPECT_EQ(c(0, 0), 0.0005);
  EXPECT_EQ(c(0, 1), 0.0001);
  EXPECT_EQ(c(0, 2), -0.0005);
  EXPECT_EQ(Delta(clip_delta(c, 0.0005)), c);
}

TEST(DeltaTest, AscentExamples) {
  const double eps = 0.0005;
  Delta zero = Delta::Zero(2, 2);
  Delta g = Delta::Constant(2, 2, 3.0);
  Delta one = ascent_step(zero, g, eps);
  EXPECT_TRUE((one.array() == eps).all());
  EXPECT_EQ(Delta(ascent_step(one, g, eps)), one);
  Delta mixed(1, 2);
  mixed << 0.0002, -0.0001;
  EXPECT_EQ(Delta(ascent_step(mixed, Delta::Zero(1, 2), eps)), mixed);
}

TEST(DeltaTest, FuzzedAscentStaysInBall) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> e(1e-6, 1e-2);
  double worst_excess = -1;
  for (int i = 0; i < 10000; ++i) {
    const double eps = e(rng);
    Delta d(3, 4), g(3, 4);
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      d.data()[k] = n(rng) * eps * 3;
      g.data()[k] = (k % 5 == 0) ? 0.0 : n(rng);
    }
    d = clip_delta(d, eps);
    Delta next = ascent_step(d, g, eps);
    worst_excess = std::max(worst_excess, next.cwiseAbs().maxCoeff() - eps);
  }
  EXPECT_LE(worst_excess, 0.0);
}

TEST(DescentTest, Examples) {
  Rng rng(1);
  auto p = random_model(nn::Arch::MeanPoolMlp, 5, 2, 2, 2, 1, rng);
  auto q = p;
  descent_step(q, nn::zeros_like(p), 0.1);
  EXPECT_TRUE(same_params(p, q));

  auto theta = nn::zero_params<double>({nn::Arch::MeanPoolMlp, 3, 1, 1, 2, 1});
  theta.output_bias << 1, 1;
  auto g = nn::zeros_like(theta);
  g.output_bias << 2, 2;
  descent_step(theta, g, 0.1);
  EXPECT_DOUBLE_EQ(theta.output_bias(0), 0.8);
}

// With every weight at zero only the output bias receives gradient, and the
// loss is convex in it.
TEST(DescentTest, ConvexToyLossDecreases) {
  auto theta = nn::zero_params<double>({nn::Arch::MeanPoolMlp, 4, 2, 2, 2, 1});
  std::vector<std::pair<std::vector<int>, int>> data{{{1, 2}, 1}, {{2, 3}, 1}, {{3}, 1}, {{1}, 0}};
  double prev = 1e9;
  for (int step = 0; step < 200; ++step) {
    auto grad = nn::zeros_like(theta);
    double loss = 0;
    for (const auto& [ids, y] : data) {
      auto tr = nn::forward(theta, ids);
      loss += nn::loss_ce(tr, y);
      nn::add_scaled(grad, 0.25, nn::grad_params(theta, tr, ids, y));
    }
    ASSERT_LT(loss, prev);
    prev = loss;
    descent_step(theta, grad, 0.1);
  }
}

TEST(GradThetaTest, ManifoldTermVanishesAtIdentity) {
  for (auto arch : {nn::Arch::MeanPoolMlp, nn::Arch::TextCnn}) {
    Rng rng(4);
    auto p = random_model(arch, 9, 3, 4, 2, 2, rng);
    auto x = random_ids(6, 9, 1, rng);
    Delta zero = Delta::Zero(7, 3);
    auto with = grad_theta(p, x, x, zero, 1, 1.0, false);
    auto without = grad_theta(p, x, x, zero, 1, 0.0, false);
    EXPECT_EQ(with.manifold, 0.0);
    EXPECT_LT(testing::max_relative_error(with.grads, without.grads), 1e-10);
  }
}

TEST(GradThetaTest, LambdaZeroIsPlainAdversarialGradient) {
  Rng rng(5);
  auto p = random_model(nn::Arch::TextCnn, 9, 3, 4, 2, 2, rng);
  auto x = random_ids(6, 9, 0, rng), xp = random_ids(6, 9, 0, rng);
  Delta delta = Delta::Constant(6, 3, 0.01);
  auto g = grad_theta(p, x, xp, delta, 0, 0.0, false);
  auto tr = nn::forward(p, Delta(nn::embed(xp, p.embedding) + delta), nn::mask_of<double>(xp));
  auto plain = nn::grad_params(p, tr, xp, 0);
  EXPECT_TRUE(same_params(g.grads, plain));
  EXPECT_EQ(g.input_grad, nn::grad_input(p, tr, 0));
}

TEST(GradThetaTest, AdditiveInTheManifoldTerm) {
  Rng rng(6);
  auto p = random_model(nn::Arch::MeanPoolMlp, 9, 3, 4, 2, 2, rng);
  auto x = random_ids(5, 9, 1, rng), xp = random_ids(5, 9, 1, rng);
  Delta delta = Delta::Constant(6, 3, -0.002);
  auto full = grad_theta(p, x, xp, delta, 1, 1.0, false);
  auto ce = grad_theta(p, x, xp, delta, 1, 0.0, false);
  auto a = nn::forward(p, x), ap = nn::forward(p, xp);
  auto term = nn::manifold_loss(a.activation, ap.activation);
  nn::Vector<double> none = nn::Vector<double>::Zero(2);
  auto bx = nn::backward(p, a, none, term.grad_a);
  nn::scatter_embedding(bx.grads.embedding, x, bx.input_grad);
  auto bxp = nn::backward(p, ap, none, term.grad_a_prime);
  nn::scatter_embedding(bxp.grads.embedding, xp, bxp.input_grad);
  auto sum = ce.grads;
  nn::add_scaled(sum, 1.0, bx.grads);
  nn::add_scaled(sum, 1.0, bxp.grads);
  EXPECT_LT(testing::max_relative_error(full.grads, sum), 1e-14);
  EXPECT_DOUBLE_EQ(full.manifold, term.value);
}

TEST(TrainVanillaTest, SeparableToyIsLearned) {
  auto t = make_toy(64, 1);
  auto cfg = base_config(TrainMode::Vanilla);
  cfg.epochs = 50;
  auto r = train_vanilla(t.data, t.vocab, t.init, cfg);
  EXPECT_GE(r.history.epochs.back().train_acc, 0.95);
  EXPECT_EQ(r.history.epochs.size(), 50u);
}

TEST(TrainVanillaTest, ZeroEpochsAndDeterminism) {
  auto t = make_toy(20, 2);
  auto cfg = base_config(TrainMode::Vanilla);
  cfg.epochs = 0;
  EXPECT_TRUE(same_params(train_vanilla(t.data, t.vocab, t.init, cfg).model, t.init));
  cfg.epochs = 5;
  EXPECT_TRUE(same_params(train_vanilla(t.data, t.vocab, t.init, cfg).model,
                          train_vanilla(t.data, t.vocab, t.init, cfg).model));
}

TEST(TrainBpatTest, TinyEpsilonSingleStepTracksVanilla) {
  auto t = make_toy(24, 3);
  auto cfg = base_config(TrainMode::Bpat);
  cfg.k_steps = 1;
  cfg.epsilon = 1e-12;
  auto b = train_bpat(t.data, t.vocab, t.init, cfg);
  auto v = train_vanilla(t.data, t.vocab, t.init, cfg);
  EXPECT_LT(testing::max_relative_error(b.model, v.model), 1e-8);
}

TEST(TrainBpatTest, DeltaStaysInBallAndRunsAreRepeatable) {
  auto t = make_toy(24, 4, nn::Arch::TextCnn);
  auto cfg = base_config(TrainMode::Bpat);
  cfg.epsilon = 0.01;
  double worst = 0;
  long updates = 0;
  auto r = train_bpat(t.data, t.vocab, t.init, cfg, [&](const StepEvent& e) {
    ++updates;
    for (const auto& d : e.deltas) worst = std::max(worst, d.cwiseAbs().maxCoeff());
  });
  EXPECT_LE(worst, cfg.epsilon);
  EXPECT_GT(worst, 0.0);
  EXPECT_TRUE(same_params(r.model, train_bpat(t.data, t.vocab, t.init, cfg).model));
  const long batches = 3;  // 24 examples, batch 8
  EXPECT_EQ(updates, cfg.epochs * batches);
  EXPECT_EQ(r.history.total_updates(), cfg.epochs * batches);
}

TEST(TrainBpatTest, EpochsMustDivideBySteps) {
  auto t = make_toy(8, 5);
  auto cfg = base_config(TrainMode::Bpat);
  cfg.epochs = 4;
  EXPECT_THROW(train_bpat(t.data, t.vocab, t.init, cfg), std::invalid_argument);
}

TEST(TrainMpatTest, DegenerateSetupReproducesBpatBitForBit) {
  auto t = make_toy(24, 6);
  auto cfg = base_config(TrainMode::Mpat);
  cfg.lambda = 0.0;
  ChunkParser parser(PosLexicon::bundled());
  NullParaphraser none;
  Thesaurus empty;
  auto lm = NGramModel::uniform(10);
  PerturbationContext ctx{parser, none, lm, empty, GenConfig{}};
  std::vector<Model> mpat_steps, bpat_steps;
  auto m = train_mpat(t.data, t.vocab, t.init, cfg, ctx, [&](const StepEvent& e) { mpat_steps.push_back(e.params); });
  auto b = train_bpat(t.data, t.vocab, t.init, cfg, [&](const StepEvent& e) { bpat_steps.push_back(e.params); });
  ASSERT_EQ(mpat_steps.size(), bpat_steps.size());
  for (std::size_t i = 0; i < mpat_steps.size(); ++i) ASSERT_TRUE(same_params(mpat_steps[i], bpat_steps[i])) << i;
  EXPECT_TRUE(same_params(m.model, b.model));
}

TEST(TrainMpatTest, SeededRunsAgree) {
  SynthConfig sc;
  sc.per_class = 20;
  auto data = synthesize(sc);
  data.pad_length = 10;
  auto lexicon = PosLexicon::bundled();
  ChunkParser parser(lexicon);
  PhraseTableParaphraser para;
  Thesaurus th;
  th.add("good", "fine");
  th.add("bad", "poor");
  th.add("movie", "film");
  std::vector<Tokens> corpus;
  for (const auto& e : data.examples) corpus.push_back(e.segments[0]);
  auto lm = NGramModel::fit(corpus);
  PerturbationContext ctx{parser, para, lm, th, GenConfig{}};
  auto vocab = build_vocab(data.examples, 400, th.words());
  Rng rng(2);
  auto init = nn::init_params<double>({nn::Arch::MeanPoolMlp, vocab.size(), 8, 8, 2, 1}, rng);
  auto cfg = base_config(TrainMode::Mpat);
  auto a = train_mpat(data, vocab, init, cfg, ctx);
  auto b = train_mpat(data, vocab, init, cfg, ctx);
  EXPECT_TRUE(same_params(a.model, b.model));
  EXPECT_EQ(a.history.to_csv(), b.history.to_csv());
  EXPECT_GT(a.history.epochs[0].mean_manifold, 0.0);
}

TEST(TrainConfigTest, ParsesAndRejects) {
  auto kv = KeyValueConfig::parse("mode = mpat\nepsilon = 0.0005\nrate_r = 0.35\nlambda = 1\nk_steps = 3\n");
  kv.check_keys(train_config_keys());
  auto cfg = train_config_from(kv);
  EXPECT_EQ(cfg.mode, TrainMode::Mpat);
  EXPECT_EQ(cfg.k_steps, 3);
  EXPECT_THROW(train_config_from(KeyValueConfig::parse("mode = adversarial\n")), std::runtime_error);
  EXPECT_THROW(train_config_from(KeyValueConfig::parse("epsilon = -1\n")), std::invalid_argument);
}

}  // namespace
}  // namespace mpat
