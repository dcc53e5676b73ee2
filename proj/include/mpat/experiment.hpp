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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mpat/attacks.hpp"
#include "mpat/config.hpp"
#include "mpat/eval.hpp"
#include "mpat/lm.hpp"
#include "mpat/model.hpp"
#include "mpat/nn.hpp"
#include "mpat/parsing.hpp"
#include "mpat/perturbgen.hpp"
#include "mpat/synth.hpp"
#include "mpat/textcore.hpp"
#include "mpat/training.hpp"

namespace mpat {

/// Everything a run reads from a `key = value` file, with defaults.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  SynthConfig synth;
  int test_per_class = 250;
  int max_vocab = 5000;
  int pad_length = 16;
  std::filesystem::path lexicon_path;
  std::filesystem::path thesaurus_path;
  std::filesystem::path phrases_path;
  nn::ModelShape shape;
  bool zero_init = false;
  TrainConfig train;
  GenConfig gen;
  int lm_order = 2;
  double lm_alpha = 1.0;
  AttackConfig attack;
  /// Per-class size of the attacked subset of the test set; 0 attacks all.
  int attack_per_class = 0;
  std::vector<double> sweep_epsilons{0.0001, 0.00025, 0.0005, 0.00075, 0.001};
  std::vector<double> sweep_rates{0.15, 0.25, 0.35, 0.45, 0.55};
  TTestKind ttest_kind = TTestKind::Welch;

  /// Resolved settings, one `key = value` per line in key order.
  std::string resolved;

  std::string describe() const;

  static const std::set<std::string>& keys();
  /// Rejects unknown keys. `seed_override` replaces the `seed` key when set.
  static ExperimentConfig from(const KeyValueConfig& kv, const std::uint64_t* seed_override = nullptr);
};

/// Lexicon, thesaurus, phrase table and the parser bound to the lexicon.
class Assets {
 public:
  static std::unique_ptr<Assets> load(const ExperimentConfig& cfg);

  Assets(const Assets&) = delete;
  Assets& operator=(const Assets&) = delete;

  const PosLexicon& lexicon() const { return lexicon_; }
  const Thesaurus& thesaurus() const { return thesaurus_; }
  const PhraseTableParaphraser& paraphraser() const { return paraphraser_; }
  const ConstituencyParser& parser() const { return parser_; }
  /// (name, path) of every file that was read.
  const std::vector<std::pair<std::string, std::filesystem::path>>& files() const { return files_; }

 private:
  Assets() : parser_(lexicon_) {}

  PosLexicon lexicon_;
  Thesaurus thesaurus_;
  PhraseTableParaphraser paraphraser_;
  ChunkParser parser_;
  std::vector<std::pair<std::string, std::filesystem::path>> files_;
};

/// Corpus vocabulary plus every thesaurus and phrase-table token.
Vocabulary experiment_vocab(const Dataset& train, const Assets& assets, int max_vocab);

/// Bigram (or cfg order) model over the last segment of every example.
NGramModel fit_language_model(const Dataset& train, int order, double alpha);

Model initial_model(const ExperimentConfig& cfg, const Vocabulary& vocab);

/// Initializes and trains per cfg.train. The language model for the
/// perplexity filter is fit on `train`.
TrainResult run_training(const ExperimentConfig& cfg, const Dataset& train, const Vocabulary& vocab,
                         const Assets& assets, const StepObserver& observer = {});

/// The examples that are attacked: a stratified sample when attack_per_class > 0.
Dataset attack_subset(const ExperimentConfig& cfg, const Dataset& test);

std::vector<AttackOutcome> run_attacks(const ExperimentConfig& cfg, const NeuralClassifier& model,
                                       const Dataset& examples, const Assets& assets);

}  // namespace mpat
