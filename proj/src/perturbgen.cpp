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

#include "mpat/perturbgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpat {

namespace {

const std::vector<std::string> kNoSynonyms;

bool is_copula(const std::string& w) { return w == "is" || w == "was" || w == "are" || w == "were"; }

}  // namespace

// --- Thesaurus -------------------------------------------------------------

void Thesaurus::add(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty() || a == b) return;
  auto insert = [this](const std::string& key, const std::string& value) {
    auto& list = table_[key];
    auto it = std::lower_bound(list.begin(), list.end(), value);
    if (it == list.end() || *it != value) list.insert(it, value);
  };
  insert(a, b);
  insert(b, a);
}

Thesaurus Thesaurus::from_tsv(std::string_view text) {
  Thesaurus th;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw std::runtime_error("thesaurus line " + std::to_string(line_no) + ": expected token<TAB>syn1,syn2");
    auto head = trim(fields[0]);
    for (const auto& syn : split(fields[1], ',')) th.add(head, trim(syn));
  }
  return th;
}

Thesaurus Thesaurus::load(const std::filesystem::path& path) { return from_tsv(read_file(path)); }

const std::vector<std::string>& Thesaurus::synonyms(const std::string& token) const {
  auto it = table_.find(token);
  return it == table_.end() ? kNoSynonyms : it->second;
}

std::vector<std::string> Thesaurus::words() const {
  std::vector<std::string> out;
  out.reserve(table_.size());
  for (const auto& [k, v] : table_) out.push_back(k);
  return out;
}

// --- Paraphrasers ----------------------------------------------------------

void PhraseTableParaphraser::add(const Tokens& source, const Tokens& target) {
  if (source.empty() || target.empty() || source == target) return;
  auto& list = table_[join(source)];
  if (std::find(list.begin(), list.end(), target) == list.end()) list.push_back(target);
}

PhraseTableParaphraser PhraseTableParaphraser::from_tsv(std::string_view text) {
  PhraseTableParaphraser p;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw std::runtime_error("phrase table line " + std::to_string(line_no) + ": expected src<TAB>tgt");
    p.add(tokenize(fields[0]), tokenize(fields[1]));
  }
  return p;
}

PhraseTableParaphraser PhraseTableParaphraser::load(const std::filesystem::path& path) { return from_tsv(read_file(path)); }

std::vector<Tokens> PhraseTableParaphraser::paraphrase(const Tokens& phrase, PhraseLabel label) const {
  std::vector<Tokens> out;
  auto push = [&](Tokens cand) {
    if (cand.empty() || cand == phrase) return;
    if (std::find(out.begin(), out.end(), cand) == out.end()) out.push_back(std::move(cand));
  };
  if (auto it = table_.find(join(phrase)); it != table_.end())
    for (const auto& t : it->second) push(t);
  if (!rewrites_) return out;

  Tokens swapped = phrase;
  bool any = false;
  for (auto& w : swapped) {
    if (w == "the") {
      w = "a";
      any = true;
    } else if (w == "a" || w == "an") {
      w = "the";
      any = true;
    }
  }
  if (any) push(swapped);

  if (label == PhraseLabel::S && phrase.size() <= 6) {
    auto it = std::find_if(phrase.begin(), phrase.end(), is_copula);
    if (it != phrase.end() && it != phrase.begin() && it + 1 != phrase.end()) {
      Tokens inverted(it + 1, phrase.end());
      inverted.push_back(*it);
      inverted.insert(inverted.end(), phrase.begin(), it);
      push(inverted);
    }
  }
  return out;
}

std::vector<std::string> PhraseTableParaphraser::words() const {
  std::set<std::string> words;
  for (const auto& [src, targets] : table_) {
    for (const auto& w : split(src, ' ')) words.insert(w);
    for (const auto& t : targets) words.insert(t.begin(), t.end());
  }
  return {words.begin(), words.end()};
}

// --- Pipeline --------------------------------------------------------------

void GenConfig::validate() const {
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("replacement rate must lie in (0, 1)");
  if (max_candidates < 0) throw std::invalid_argument("max_candidates must be non-negative");
  if (min_span < 1) throw std::invalid_argument("min_span must be at least 1");
}

const Tokens& PerturbationSet::original() const {
  for (std::size_t i = 0; i < variants.size(); ++i)
    if (pristine[i]) return variants[i];
  throw std::logic_error("perturbation set has no pristine variant");
}

Tokens splice(const Tokens& x, const Constituent& c, const Tokens& replacement) {
  if (c.start < 0 || c.end < c.start || static_cast<std::size_t>(c.end) >= x.size())
    throw std::out_of_range("splice: constituent [" + std::to_string(c.start) + ", " + std::to_string(c.end) +
                            "] is not a span of a " + std::to_string(x.size()) + "-token sentence");
  Tokens out(x.begin(), x.begin() + c.start);
  out.insert(out.end(), replacement.begin(), replacement.end());
  out.insert(out.end(), x.begin() + c.end + 1, x.end());
  return out;
}

std::vector<Tokens> paraphrase_candidates(const Tokens& x, const ParseResult& parse, const Paraphraser& paraphraser,
                                          const GenConfig& cfg) {
  std::vector<Tokens> out;
  for (const auto& c : eligible_constituents(parse, cfg.min_span)) {
    Tokens phrase(x.begin() + c.start, x.begin() + c.end + 1);
    int taken = 0;
    for (const auto& cand : paraphraser.paraphrase(phrase, c.label)) {
      if (taken >= cfg.max_candidates) break;
      ++taken;
      out.push_back(splice(x, c, cand));
    }
  }
  return out;
}

std::vector<Tokens> ppl_filter(const std::vector<Tokens>& variants, const Tokens& x, const LanguageModel& lm) {
  const double threshold = lm.perplexity(x);
  std::vector<Tokens> out;
  for (const auto& v : variants)
    if (!v.empty() && lm.perplexity(v) <= threshold) out.push_back(v);
  return out;
}

int replacement_count(double rate, std::size_t n) {
  // The epsilon absorbs representation error in products like 0.35 * 10.
  double scaled = rate * static_cast<double>(n);
  return std::max(0, static_cast<int>(std::floor(scaled + 0.5 + 1e-9)));
}

Tokens synonym_replace(const Tokens& s, const Thesaurus& thesaurus, double rate, Rng& rng) {
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("replacement rate must lie in (0, 1)");
  std::vector<std::size_t> covered;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!thesaurus.synonyms(s[i]).empty()) covered.push_back(i);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(replacement_count(rate, s.size())), covered.size());

  Tokens out = s;
  for (std::size_t m = 0; m < k; ++m) {
    std::size_t j = m + uniform_index(rng, covered.size() - m);
    std::swap(covered[m], covered[j]);
    const auto& syns = thesaurus.synonyms(s[covered[m]]);
    out[covered[m]] = syns[uniform_index(rng, syns.size())];
  }
  return out;
}

std::vector<Tokens> filtered_paraphrases(const Tokens& x, const PerturbationContext& ctx) {
  if (x.empty()) return {};
  auto parse = ctx.parser.parse(x);
  auto survivors = ppl_filter(paraphrase_candidates(x, parse, ctx.paraphraser, ctx.config), x, ctx.lm);
  std::vector<Tokens> out;
  for (auto& v : survivors)
    if (v != x && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  return out;
}

PerturbationSet assemble_pm(const std::string& id, const Tokens& x, const std::vector<Tokens>& survivors,
                            const Thesaurus& thesaurus, const GenConfig& cfg, Rng& rng) {
  PerturbationSet pm;
  pm.origin_id = id;
  auto push = [&](Tokens v) {
    if (v.empty() || v == x) return;
    if (std::find(pm.variants.begin(), pm.variants.end(), v) != pm.variants.end()) return;
    pm.variants.push_back(std::move(v));
    pm.pristine.push_back(false);
  };
  for (const auto& v : survivors) push(synonym_replace(v, thesaurus, cfg.rate, rng));
  if (cfg.replace_pristine) push(synonym_replace(x, thesaurus, cfg.rate, rng));
  pm.variants.push_back(x);
  pm.pristine.push_back(true);
  return pm;
}

PerturbationSet generate_pm(const std::string& id, const Tokens& x, const PerturbationContext& ctx) {
  ctx.config.validate();
  Rng rng(derive_seed(ctx.config.seed, id));
  return assemble_pm(id, x, filtered_paraphrases(x, ctx), ctx.thesaurus, ctx.config, rng);
}

PerturbationSet generate_pm(const Example& x, const PerturbationContext& ctx) {
  if (x.segments.empty()) throw std::invalid_argument("generate_pm: example has no segments");
  return generate_pm(x.id, x.segments.back(), ctx);
}

const Tokens& random_sample(const PerturbationSet& pm, Rng& rng) {
  if (pm.variants.empty()) throw std::invalid_argument("random_sample: empty perturbation set");
  return pm.variants[uniform_index(rng, pm.variants.size())];
}

}  // namespace mpat
