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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mpat/lm.hpp"
#include "mpat/parsing.hpp"
#include "mpat/textcore.hpp"
#include "mpat/util.hpp"

namespace mpat {

/// Symmetric synonym table without self-loops.
class Thesaurus {
 public:
  Thesaurus() = default;

  /// `token<TAB>syn1,syn2,...` per line; the relation is symmetrized on load.
  static Thesaurus from_tsv(std::string_view text);
  static Thesaurus load(const std::filesystem::path& path);

  void add(const std::string& a, const std::string& b);

  /// Sorted synonyms of `token`; empty when uncovered.
  const std::vector<std::string>& synonyms(const std::string& token) const;
  bool covers(const std::string& token) const { return table_.count(token) > 0; }
  bool empty() const { return table_.empty(); }
  std::size_t size() const { return table_.size(); }

  /// Every token mentioned, sorted.
  std::vector<std::string> words() const;

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

class Paraphraser {
 public:
  virtual ~Paraphraser() = default;
  /// Candidate rewrites of `phrase`; each differs from it and is non-empty.
  virtual std::vector<Tokens> paraphrase(const Tokens& phrase, PhraseLabel label) const = 0;
};

/// Phrase-table lookup plus two deterministic rewrites: determiner swap
/// (a <-> the) and copular inversion of short S spans.
class PhraseTableParaphraser final : public Paraphraser {
 public:
  PhraseTableParaphraser() = default;

  /// `src phrase<TAB>tgt phrase` per line.
  static PhraseTableParaphraser from_tsv(std::string_view text);
  static PhraseTableParaphraser load(const std::filesystem::path& path);

  void add(const Tokens& source, const Tokens& target);
  void set_rewrites(bool enabled) { rewrites_ = enabled; }

  std::vector<Tokens> paraphrase(const Tokens& phrase, PhraseLabel label) const override;

  std::vector<std::string> words() const;

 private:
  std::map<std::string, std::vector<Tokens>> table_;
  bool rewrites_ = true;
};

/// Returns nothing; used for the degenerate P_m = {x} configuration.
class NullParaphraser final : public Paraphraser {
 public:
  std::vector<Tokens> paraphrase(const Tokens&, PhraseLabel) const override { return {}; }
};

struct GenConfig {
  double rate = 0.35;
  std::uint64_t seed = 0;
  int max_candidates = 3;
  int min_span = 2;
  /// Also synonym-replace the pristine input (it is still re-appended untouched).
  bool replace_pristine = false;

  void validate() const;
};

struct PerturbationSet {
  std::string origin_id;
  std::vector<Tokens> variants;
  std::vector<bool> pristine;

  std::size_t size() const { return variants.size(); }
  const Tokens& original() const;
};

/// x with positions [c.start, c.end] replaced by `replacement`.
Tokens splice(const Tokens& x, const Constituent& c, const Tokens& replacement);

std::vector<Tokens> paraphrase_candidates(const Tokens& x, const ParseResult& parse, const Paraphraser& paraphraser,
                                          const GenConfig& cfg);

/// Keeps v iff PPL(v) <= PPL(x).
std::vector<Tokens> ppl_filter(const std::vector<Tokens>& variants, const Tokens& x, const LanguageModel& lm);

/// round-half-up(rate * n), never negative.
int replacement_count(double rate, std::size_t n);

/// Replaces min(round(rate * |s|), covered) distinct covered positions, each
/// with a uniformly chosen synonym.
Tokens synonym_replace(const Tokens& s, const Thesaurus& thesaurus, double rate, Rng& rng);

/// Components of the malicious-perturbation pipeline.
struct PerturbationContext {
  const ConstituencyParser& parser;
  const Paraphraser& paraphraser;
  const LanguageModel& lm;
  const Thesaurus& thesaurus;
  GenConfig config;
};

/// Deterministic stages: paraphrase then perplexity filter. The result
/// excludes x itself.
std::vector<Tokens> filtered_paraphrases(const Tokens& x, const PerturbationContext& ctx);

/// Stochastic stage applied to cached paraphrases; dedupes and re-appends x.
PerturbationSet assemble_pm(const std::string& id, const Tokens& x, const std::vector<Tokens>& survivors,
                            const Thesaurus& thesaurus, const GenConfig& cfg, Rng& rng);

/// Full pipeline for one segment. The rng stream is derived from
/// (cfg.seed, id), so the output depends only on the inputs.
PerturbationSet generate_pm(const std::string& id, const Tokens& x, const PerturbationContext& ctx);
PerturbationSet generate_pm(const Example& x, const PerturbationContext& ctx);

const Tokens& random_sample(const PerturbationSet& pm, Rng& rng);

}  // namespace mpat
