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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mpat/util.hpp"

namespace mpat {

/// A labeled instance. NLI-style pairs carry two segments (premise, hypothesis).
struct Example {
  std::string id;
  std::vector<Tokens> segments;
  int label = 0;

  /// All segments concatenated, without any separator.
  Tokens flat() const;

  friend bool operator==(const Example&, const Example&) = default;
};

/// Lowercases, splits on whitespace and isolates ASCII punctuation.
Tokens tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  /// Appends a token if absent; returns its id.
  int add(const std::string& token);

  /// Unknown tokens map to kUnk.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  const std::vector<std::string>& tokens() const { return tokens_; }

  /// `token<TAB>id` per line, in id order.
  std::string to_tsv() const;
  static Vocabulary from_tsv(std::string_view text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Dataset {
  std::vector<Example> examples;
  int num_classes = 0;
  int pad_length = 0;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Keeps the `max_size - 2` most frequent corpus tokens (ties broken
/// lexicographically). `extra` tokens that did not make it from the corpus
/// are appended afterwards, in lexicographic order, while room remains.
Vocabulary build_vocab(const std::vector<Example>& corpus, int max_size,
                       const std::vector<std::string>& extra = {});

/// Segments are joined with one PAD id, then truncated (prefix kept) or
/// right-padded with PAD to exactly `pad_length` ids.
std::vector<int> encode(const Example& example, const Vocabulary& vocab, int pad_length);
std::vector<int> encode(const std::vector<Tokens>& segments, const Vocabulary& vocab, int pad_length);

/// Inverse of encode over in-vocabulary tokens: PAD ids split segments and
/// trailing padding is dropped.
std::vector<Tokens> decode(const std::vector<int>& ids, const Vocabulary& vocab);

/// Exactly `per_class` examples of each class, chosen by a seeded shuffle and
/// returned in original dataset order.
Dataset stratified_sample(const Dataset& dataset, int per_class, std::uint64_t seed);

/// Schema: {"id": str, "text": str, "text2": str (optional), "label": int}.
/// num_classes is inferred as max(label) + 1 unless `num_classes` is positive.
Dataset load_jsonl(const std::filesystem::path& path, int num_classes = 0, int pad_length = 0);
Dataset parse_jsonl(std::string_view content, int num_classes = 0, int pad_length = 0);
std::string to_jsonl(const Dataset& dataset);
void save_jsonl(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace mpat
