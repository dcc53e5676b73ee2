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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpat/model.hpp"
#include "mpat/parsing.hpp"
#include "mpat/perturbgen.hpp"
#include "mpat/textcore.hpp"

namespace mpat {

enum class AttackMethod { Pwws, TextFooler };

std::string to_string(AttackMethod method);
AttackMethod parse_attack_method(const std::string& name);

struct AttackConfig {
  AttackMethod method = AttackMethod::Pwws;
  /// Substitution budget as a fraction of the token count; at most
  /// ceil(max_ratio * n) positions change.
  double max_ratio = 1.0;
  /// TextFooler: nearest neighbours considered per word.
  int neighbors = 15;
  /// TextFooler: minimum cosine similarity of a candidate.
  double sim_threshold = 0.5;
  /// TextFooler: keep only neighbours that are also thesaurus synonyms.
  bool require_thesaurus = false;
  /// Candidates must share the coarse part-of-speech tag of the original.
  bool pos_filter = true;

  void validate() const;
  int budget(std::size_t num_tokens) const;
};

struct AttackOutcome {
  std::string id;
  int label = 0;
  int orig_pred = 0;
  int final_pred = 0;
  bool attempted = false;
  bool success = false;
  /// Flat (all segments) indices of the substituted tokens.
  std::vector<int> substituted;
  double srr = 0.0;
  Segments adversarial;
};

/// 1 iff the predicted class differs from `label`.
int adversarial_criterion(const Classifier& model, const Segments& segments, int label);

/// S(i) = P(y | x) - P(y | x with token i replaced by <unk>).
Eigen::VectorXd word_saliency(const Classifier& model, const Segments& segments, int label);

/// I(i) = P(y | x) - P(y | x with token i deleted). Needs at least two tokens.
Eigen::VectorXd deletion_importance(const Classifier& model, const Segments& segments, int label);

/// Substitution candidates for one word.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  virtual std::vector<std::string> candidates(const std::string& word) const = 0;
};

/// Thesaurus synonyms, optionally restricted to the word's POS tag.
class ThesaurusCandidates final : public CandidateSource {
 public:
  ThesaurusCandidates(const Thesaurus& thesaurus, const PosLexicon* lexicon)
      : thesaurus_(&thesaurus), lexicon_(lexicon) {}
  std::vector<std::string> candidates(const std::string& word) const override;

 private:
  const Thesaurus* thesaurus_;
  const PosLexicon* lexicon_;
};

/// Nearest neighbours by cosine similarity in an embedding table.
class EmbeddingNeighbors final : public CandidateSource {
 public:
  EmbeddingNeighbors(const nn::RowMatrix<double>& embedding, const Vocabulary& vocab, int count, double threshold,
                     const Thesaurus* restrict_to = nullptr, const PosLexicon* lexicon = nullptr);
  std::vector<std::string> candidates(const std::string& word) const override;

 private:
  nn::RowMatrix<double> normalized_;
  const Vocabulary* vocab_;
  int count_;
  double threshold_;
  const Thesaurus* restrict_to_;
  const PosLexicon* lexicon_;
};

/// PWWS-style greedy attack. Each position's best substitute and its gain
/// are computed on the clean input; positions are visited by
/// softmax(saliency) * gain, and a substitution is applied only if it has a
/// positive gain. Stops at the first misclassification or at the budget.
AttackOutcome pwws_attack(const Classifier& model, const Example& example, const CandidateSource& source,
                          const AttackConfig& cfg);

/// TextFooler-style greedy attack: positions by deletion importance, and at
/// each one the candidate minimizing P(y | .) in the current context.
AttackOutcome textfooler_attack(const Classifier& model, const Example& example, const CandidateSource& source,
                                const AttackConfig& cfg);

/// Dispatch on cfg.method. Examples the model already gets wrong are not
/// attacked (attempted = false).
AttackOutcome run_attack(const Classifier& model, const Example& example, const CandidateSource& source,
                         const AttackConfig& cfg);

/// One JSON object: {"id","success","orig_pred","final_pred","srr","adv_text"}.
std::string outcome_to_json(const AttackOutcome& outcome);
AttackOutcome outcome_from_json(const std::string& line);

}  // namespace mpat
