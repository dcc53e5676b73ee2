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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mpat/util.hpp"

namespace mpat {

enum class PosTag { Noun, Verb, Adj, Adv, Pron, Prep, Det, Conj, Num, Abbr, Other };

std::string_view to_string(PosTag tag);
std::optional<PosTag> parse_pos_tag(std::string_view name);

enum class PhraseLabel { S, NP, VP, ADVP, ADJP, PP };

std::string_view to_string(PhraseLabel label);

/// Labeled span [start, end] (inclusive) over sentence tokens.
struct Constituent {
  int start = 0;
  int end = 0;
  PhraseLabel label = PhraseLabel::S;

  int length() const { return end - start + 1; }
  friend bool operator==(const Constituent&, const Constituent&) = default;
};

struct ParseResult {
  int sentence_length = 0;
  std::vector<Constituent> constituents;

  bool contains(const Constituent& c) const;
};

/// Word -> tag table (`token<TAB>TAG` TSV).
class PosLexicon {
 public:
  PosLexicon() = default;

  static PosLexicon from_tsv(std::string_view text);
  static PosLexicon load(const std::filesystem::path& path);
  /// The lexicon shipped under data/.
  static const PosLexicon& bundled();

  void insert(const std::string& token, PosTag tag) { table_[token] = tag; }
  std::optional<PosTag> find(const std::string& token) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, PosTag> table_;
};

/// Lexicon first, then suffix heuristics, NOUN by default.
PosTag pos_tag(const std::string& token, const PosLexicon& lexicon);
std::vector<PosTag> pos_tag(const Tokens& tokens, const PosLexicon& lexicon);

/// Greedy left-to-right chunker. Output is sorted by (start, longest first)
/// and always contains S(0, n-1).
ParseResult chunk(const Tokens& tokens, const std::vector<PosTag>& tags);

/// Multi-word spans carrying a phrase label. `min_span` is the minimum
/// number of words (2 by default).
std::vector<Constituent> eligible_constituents(const ParseResult& parse, int min_span = 2);

class ConstituencyParser {
 public:
  virtual ~ConstituencyParser() = default;
  virtual ParseResult parse(const Tokens& tokens) const = 0;
};

class ChunkParser final : public ConstituencyParser {
 public:
  explicit ChunkParser(const PosLexicon& lexicon) : lexicon_(&lexicon) {}
  ParseResult parse(const Tokens& tokens) const override;

 private:
  const PosLexicon* lexicon_;
};

}  // namespace mpat
