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

#include "mpat/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace mpat {

namespace {

struct Position {
  std::size_t segment;
  std::size_t index;
};

std::vector<Position> positions_of(const Segments& segments) {
  std::vector<Position> out;
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (std::size_t i = 0; i < segments[s].size(); ++i) out.push_back({s, i});
  return out;
}

Segments substitute(Segments segments, const Position& p, const std::string& word) {
  segments[p.segment][p.index] = word;
  return segments;
}

Segments erase(Segments segments, const Position& p) {
  auto& seg = segments[p.segment];
  seg.erase(seg.begin() + static_cast<std::ptrdiff_t>(p.index));
  return segments;
}

double prob_of(const Classifier& model, const Segments& segments, int label) {
  return model.probabilities(segments)(label);
}

// Indices sorted by descending score; ties keep the lower index first.
std::vector<std::size_t> descending(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

AttackOutcome start_outcome(const Classifier& model, const Example& example) {
  AttackOutcome out;
  out.id = example.id;
  out.label = example.label;
  out.orig_pred = model.predict(example.segments);
  out.final_pred = out.orig_pred;
  out.adversarial = example.segments;
  out.attempted = out.orig_pred == example.label;
  return out;
}

void finish_outcome(const Classifier& model, AttackOutcome& out, std::size_t num_tokens) {
  out.final_pred = model.predict(out.adversarial);
  out.success = out.final_pred != out.label;
  out.srr = num_tokens == 0 ? 0.0 : static_cast<double>(out.substituted.size()) / static_cast<double>(num_tokens);
}

}  // namespace

std::string to_string(AttackMethod method) { return method == AttackMethod::Pwws ? "pwws" : "textfooler"; }

AttackMethod parse_attack_method(const std::string& name) {
  if (name == "pwws") return AttackMethod::Pwws;
  if (name == "textfooler") return AttackMethod::TextFooler;
  throw std::invalid_argument("unknown attack method '" + name + "' (expected pwws or textfooler)");
}

void AttackConfig::validate() const {
  if (!(max_ratio > 0 && max_ratio <= 1)) throw std::invalid_argument("attack max_ratio must lie in (0, 1]");
  if (!(sim_threshold >= -1 && sim_threshold <= 1)) throw std::invalid_argument("sim_threshold must lie in [-1, 1]");
  if (neighbors < 0) throw std::invalid_argument("neighbors must be non-negative");
}

int AttackConfig::budget(std::size_t num_tokens) const {
  return static_cast<int>(std::ceil(max_ratio * static_cast<double>(num_tokens) - 1e-9));
}

int adversarial_criterion(const Classifier& model, const Segments& segments, int label) {
  return model.predict(segments) != label ? 1 : 0;
}

Eigen::VectorXd word_saliency(const Classifier& model, const Segments& segments, int label) {
  auto pos = positions_of(segments);
  if (pos.empty()) throw std::invalid_argument("word_saliency: empty input");
  const double base = prob_of(model, segments, label);
  Eigen::VectorXd s(static_cast<Eigen::Index>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i)
    s(static_cast<Eigen::Index>(i)) =
        base - prob_of(model, substitute(segments, pos[i], std::string(Vocabulary::kUnkToken)), label);
  return s;
}

Eigen::VectorXd deletion_importance(const Classifier& model, const Segments& segments, int label) {
  auto pos = positions_of(segments);
  if (pos.size() < 2) throw std::invalid_argument("deletion_importance: needs at least two tokens");
  const double base = prob_of(model, segments, label);
  Eigen::VectorXd s(static_cast<Eigen::Index>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i)
    s(static_cast<Eigen::Index>(i)) = base - prob_of(model, erase(segments, pos[i]), label);
  return s;
}

std::vector<std::string> ThesaurusCandidates::candidates(const std::string& word) const {
  const auto& syns = thesaurus_->synonyms(word);
  if (!lexicon_) return syns;
  const PosTag tag = pos_tag(word, *lexicon_);
  std::vector<std::string> out;
  for (const auto& s : syns)
    if (pos_tag(s, *lexicon_) == tag) out.push_back(s);
  return out;
}

EmbeddingNeighbors::EmbeddingNeighbors(const nn::RowMatrix<double>& embedding, const Vocabulary& vocab, int count,
                                       double threshold, const Thesaurus* restrict_to, const PosLexicon* lexicon)
    : normalized_(embedding), vocab_(&vocab), count_(count), threshold_(threshold), restrict_to_(restrict_to),
      lexicon_(lexicon) {
  if (embedding.rows() != vocab.size()) throw std::invalid_argument("EmbeddingNeighbors: vocabulary/embedding mismatch");
  for (nn::Index r = 0; r < normalized_.rows(); ++r) {
    double norm = normalized_.row(r).norm();
    if (norm > 0) normalized_.row(r) /= norm;
  }
}

std::vector<std::string> EmbeddingNeighbors::candidates(const std::string& word) const {
  if (!vocab_->contains(word)) return {};
  const int id = vocab_->id(word);
  if (id == Vocabulary::kPad || id == Vocabulary::kUnk) return {};
  Eigen::VectorXd sims = normalized_ * normalized_.row(id).transpose();
  std::vector<double> scores(static_cast<std::size_t>(sims.size()));
  for (nn::Index i = 0; i < sims.size(); ++i) scores[static_cast<std::size_t>(i)] = sims(i);

  const PosTag tag = lexicon_ ? pos_tag(word, *lexicon_) : PosTag::Other;
  std::vector<std::string> out;
  for (auto i : descending(scores)) {
    if (static_cast<int>(out.size()) >= count_) break;
    if (scores[i] < threshold_) break;
    const int cand = static_cast<int>(i);
    if (cand == id || cand == Vocabulary::kPad || cand == Vocabulary::kUnk) continue;
    const auto& w = vocab_->token(cand);
    if (restrict_to_) {
      const auto& syns = restrict_to_->synonyms(word);
      if (!std::binary_search(syns.begin(), syns.end(), w)) continue;
    }
    if (lexicon_ && pos_tag(w, *lexicon_) != tag) continue;
    out.push_back(w);
  }
  return out;
}

AttackOutcome pwws_attack(const Classifier& model, const Example& example, const CandidateSource& source,
                          const AttackConfig& cfg) {
  cfg.validate();
  auto out = start_outcome(model, example);
  auto pos = positions_of(example.segments);
  if (!out.attempted || pos.empty()) return out;
  const int y = example.label;
  const double base = prob_of(model, example.segments, y);

  auto saliency = word_saliency(model, example.segments, y);
  Eigen::VectorXd weights = (saliency.array() - saliency.maxCoeff()).exp();
  weights /= weights.sum();

  std::vector<double> gain(pos.size(), -std::numeric_limits<double>::infinity());
  std::vector<std::string> best(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto& word = example.segments[pos[i].segment][pos[i].index];
    for (const auto& cand : source.candidates(word)) {
      double g = base - prob_of(model, substitute(example.segments, pos[i], cand), y);
      if (g > gain[i]) {
        gain[i] = g;
        best[i] = cand;
      }
    }
  }
  std::vector<double> score(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i)
    score[i] = std::isfinite(gain[i]) ? weights(static_cast<Eigen::Index>(i)) * gain[i] : -1.0;

  const int budget = cfg.budget(pos.size());
  for (auto i : descending(score)) {
    if (static_cast<int>(out.substituted.size()) >= budget) break;
    if (!(gain[i] > 0)) continue;
    out.adversarial = substitute(out.adversarial, pos[i], best[i]);
    out.substituted.push_back(static_cast<int>(i));
    if (model.predict(out.adversarial) != y) break;
  }
  finish_outcome(model, out, pos.size());
  return out;
}

AttackOutcome textfooler_attack(const Classifier& model, const Example& example, const CandidateSource& source,
                                const AttackConfig& cfg) {
  cfg.validate();
  auto out = start_outcome(model, example);
  auto pos = positions_of(example.segments);
  if (!out.attempted || pos.empty()) return out;
  const int y = example.label;

  std::vector<double> importance(pos.size(), 0.0);
  if (pos.size() >= 2) {
    auto imp = deletion_importance(model, example.segments, y);
    for (std::size_t i = 0; i < pos.size(); ++i) importance[i] = imp(static_cast<Eigen::Index>(i));
  }

  const int budget = cfg.budget(pos.size());
  double current = prob_of(model, out.adversarial, y);
  for (auto i : descending(importance)) {
    if (static_cast<int>(out.substituted.size()) >= budget) break;
    const auto& word = example.segments[pos[i].segment][pos[i].index];
    double best_p = current;
    std::string best_word;
    for (const auto& cand : source.candidates(word)) {
      double p = prob_of(model, substitute(out.adversarial, pos[i], cand), y);
      if (p < best_p) {
        best_p = p;
        best_word = cand;
      }
    }
    if (best_word.empty()) continue;
    out.adversarial = substitute(out.adversarial, pos[i], best_word);
    out.substituted.push_back(static_cast<int>(i));
    current = best_p;
    if (model.predict(out.adversarial) != y) break;
  }
  finish_outcome(model, out, pos.size());
  return out;
}

AttackOutcome run_attack(const Classifier& model, const Example& example, const CandidateSource& source,
                         const AttackConfig& cfg) {
  return cfg.method == AttackMethod::Pwws ? pwws_attack(model, example, source, cfg)
                                          : textfooler_attack(model, example, source, cfg);
}

std::string outcome_to_json(const AttackOutcome& o) {
  nlohmann::ordered_json j;
  j["id"] = o.id;
  j["success"] = o.success;
  j["orig_pred"] = o.orig_pred;
  j["final_pred"] = o.final_pred;
  j["srr"] = o.srr;
  j["adv_text"] = o.adversarial.empty() ? std::string() : join(o.adversarial[0]);
  if (o.adversarial.size() > 1) j["adv_text2"] = join(o.adversarial[1]);
  return j.dump();
}

AttackOutcome outcome_from_json(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  for (const char* key : {"id", "success", "orig_pred", "final_pred", "srr", "adv_text"})
    if (!j.contains(key)) throw std::runtime_error(std::string("attack outcome: missing \"") + key + "\" field");
  AttackOutcome o;
  o.id = j["id"].get<std::string>();
  o.success = j["success"].get<bool>();
  o.orig_pred = j["orig_pred"].get<int>();
  o.final_pred = j["final_pred"].get<int>();
  o.srr = j["srr"].get<double>();
  o.adversarial.push_back(tokenize(j["adv_text"].get<std::string>()));
  if (j.contains("adv_text2")) o.adversarial.push_back(tokenize(j["adv_text2"].get<std::string>()));
  o.attempted = true;
  o.label = o.orig_pred;
  return o;
}

}  // namespace mpat
