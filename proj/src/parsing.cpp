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

#include "mpat/parsing.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace mpat {

namespace {

constexpr std::array<std::pair<PosTag, std::string_view>, 11> kTagNames{{
    {PosTag::Noun, "NOUN"},
    {PosTag::Verb, "VERB"},
    {PosTag::Adj, "ADJ"},
    {PosTag::Adv, "ADV"},
    {PosTag::Pron, "PRON"},
    {PosTag::Prep, "PREP"},
    {PosTag::Det, "DET"},
    {PosTag::Conj, "CONJ"},
    {PosTag::Num, "NUM"},
    {PosTag::Abbr, "ABBR"},
    {PosTag::Other, "OTHER"},
}};

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_nominal(PosTag t) { return t == PosTag::Noun || t == PosTag::Num || t == PosTag::Abbr; }

}  // namespace

std::string_view to_string(PosTag tag) {
  for (const auto& [t, name] : kTagNames)
    if (t == tag) return name;
  return "OTHER";
}

std::optional<PosTag> parse_pos_tag(std::string_view name) {
  for (const auto& [t, n] : kTagNames)
    if (n == name) return t;
  return std::nullopt;
}

std::string_view to_string(PhraseLabel label) {
  switch (label) {
    case PhraseLabel::S: return "S";
    case PhraseLabel::NP: return "NP";
    case PhraseLabel::VP: return "VP";
    case PhraseLabel::ADVP: return "ADVP";
    case PhraseLabel::ADJP: return "ADJP";
    case PhraseLabel::PP: return "PP";
  }
  return "S";
}

bool ParseResult::contains(const Constituent& c) const {
  return std::find(constituents.begin(), constituents.end(), c) != constituents.end();
}

PosLexicon PosLexicon::from_tsv(std::string_view text) {
  PosLexicon lex;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": expected token<TAB>TAG");
    auto tag = parse_pos_tag(trim(fields[1]));
    if (!tag) throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": unknown tag " + fields[1]);
    lex.insert(trim(fields[0]), *tag);
  }
  return lex;
}

PosLexicon PosLexicon::load(const std::filesystem::path& path) { return from_tsv(read_file(path)); }

const PosLexicon& PosLexicon::bundled() {
  static const PosLexicon lex = load(std::filesystem::path(MPAT_DATA_DIR) / "pos_lexicon.tsv");
  return lex;
}

std::optional<PosTag> PosLexicon::find(const std::string& token) const {
  auto it = table_.find(token);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

PosTag pos_tag(const std::string& token, const PosLexicon& lexicon) {
  if (auto tag = lexicon.find(token)) return *tag;
  if (token.empty()) return PosTag::Other;
  if (std::all_of(token.begin(), token.end(), [](unsigned char c) { return c < 0x80 && std::ispunct(c); }))
    return PosTag::Other;
  if (std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c) || c == '.' || c == ','; }) &&
      std::any_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); }))
    return PosTag::Num;
  if (token.size() >= 4) {
    if (ends_with(token, "ly")) return PosTag::Adv;
    if (ends_with(token, "ous") || ends_with(token, "ful")) return PosTag::Adj;
  }
  return PosTag::Noun;
}

std::vector<PosTag> pos_tag(const Tokens& tokens, const PosLexicon& lexicon) {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(pos_tag(t, lexicon));
  return tags;
}

ParseResult chunk(const Tokens& tokens, const std::vector<PosTag>& tags) {
  if (tokens.size() != tags.size() || tokens.empty())
    throw std::invalid_argument("chunk: tokens and tags must be non-empty and of equal length");
  const int n = static_cast<int>(tags.size());
  auto tag = [&](int i) { return tags[static_cast<std::size_t>(i)]; };

  // Top-level chunks in sentence order; nested NPs inside PPs go to `nested`.
  std::vector<Constituent> top;
  std::vector<Constituent> nested;

  // Returns the end of an NP starting at i, or -1.
  auto match_np = [&](int i) {
    int j = i;
    if (j < n && tag(j) == PosTag::Det) ++j;
    while (j < n && tag(j) == PosTag::Adj) ++j;
    int nouns = 0;
    while (j < n && is_nominal(tag(j))) {
      ++j;
      ++nouns;
    }
    return nouns > 0 ? j - 1 : -1;
  };

  int i = 0;
  while (i < n) {
    const PosTag t = tag(i);
    if (t == PosTag::Pron) {
      top.push_back({i, i, PhraseLabel::NP});
      ++i;
      continue;
    }
    if (int e = match_np(i); e >= 0) {
      top.push_back({i, e, PhraseLabel::NP});
      i = e + 1;
      continue;
    }
    if (t == PosTag::Prep && i + 1 < n) {
      int e = tag(i + 1) == PosTag::Pron ? i + 1 : match_np(i + 1);
      if (e >= 0) {
        nested.push_back({i + 1, e, PhraseLabel::NP});
        top.push_back({i, e, PhraseLabel::PP});
        i = e + 1;
        continue;
      }
    }
    if (t == PosTag::Verb) {
      int j = i;
      while (j < n && tag(j) == PosTag::Verb) ++j;
      top.push_back({i, j - 1, PhraseLabel::VP});
      i = j;
      continue;
    }
    if (t == PosTag::Adv || t == PosTag::Adj) {
      int j = i;
      while (j < n && tag(j) == PosTag::Adv) ++j;
      int adv_end = j;
      while (j < n && tag(j) == PosTag::Adj) ++j;
      bool has_adj = j > adv_end;
      if (!has_adj) {
        top.push_back({i, j - 1, PhraseLabel::ADVP});
      } else {
        // Predicative modifiers after a verb are labeled ADVP ("feel good").
        bool after_verb = i > 0 && tag(i - 1) == PosTag::Verb;
        top.push_back({i, j - 1, after_verb ? PhraseLabel::ADVP : PhraseLabel::ADJP});
      }
      i = j;
      continue;
    }
    ++i;
  }

  // A VP absorbs the contiguous chunks to its right (objects, complements,
  // embedded VPs). Right-to-left so that later VPs are already extended.
  for (int k = static_cast<int>(top.size()) - 1; k >= 0; --k) {
    auto& vp = top[static_cast<std::size_t>(k)];
    if (vp.label != PhraseLabel::VP) continue;
    for (std::size_t m = static_cast<std::size_t>(k) + 1; m < top.size(); ++m) {
      if (top[m].start != vp.end + 1) break;
      vp.end = std::max(vp.end, top[m].end);
    }
  }

  ParseResult result;
  result.sentence_length = n;
  result.constituents.push_back({0, n - 1, PhraseLabel::S});
  auto push = [&](const Constituent& c) {
    if (c.start == 0 && c.end == n - 1) return;  // subsumed by S
    if (!result.contains(c)) result.constituents.push_back(c);
  };
  for (const auto& c : top) push(c);
  for (const auto& c : nested) push(c);
  std::stable_sort(result.constituents.begin(), result.constituents.end(),
                   [](const Constituent& a, const Constituent& b) {
                     if (a.start != b.start) return a.start < b.start;
                     return a.end > b.end;
                   });
  return result;
}

std::vector<Constituent> eligible_constituents(const ParseResult& parse, int min_span) {
  std::vector<Constituent> out;
  for (const auto& c : parse.constituents)
    if (c.length() >= min_span) out.push_back(c);
  return out;
}

ParseResult ChunkParser::parse(const Tokens& tokens) const {
  return chunk(tokens, pos_tag(tokens, *lexicon_));
}

}  // namespace mpat
