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
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mpat/util.hpp"

namespace mpat {

/// Fluency scorer used by the perplexity filter.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual double perplexity(const Tokens& tokens) const = 0;
};

/// Laplace-smoothed n-gram model (n in {1, 2, 3}).
///
/// Predicted outcomes are the corpus types plus `</s>` and `<unk>`, so
/// p(w | h) = (count(h, w) + alpha) / (count(h) + alpha * V). Contexts are
/// left-padded with `<s>`. Tokens unseen during fitting score as `<unk>`.
class NGramModel final : public LanguageModel {
 public:
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr std::string_view kUnk = "<unk>";

  static NGramModel fit(const std::vector<Tokens>& corpus, int order = 2, double alpha = 1.0);

  /// Model with no counts over `vocab_size` outcomes: every sentence scores
  /// perplexity `vocab_size`.
  static NGramModel uniform(int vocab_size, int order = 2, double alpha = 1.0);

  double probability(const Tokens& context, const std::string& word) const;
  double perplexity(const Tokens& tokens) const override;

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  long vocab_size() const { return vocab_size_; }

  /// Raw count of a space-joined n-gram (context words followed by the word).
  long count(const std::string& ngram) const;
  long context_count(const std::string& context) const;

  /// Text dump: header lines, then `ngram<TAB>count`.
  std::string dump() const;
  static NGramModel load(std::string_view text);

 private:
  std::string normalize(const std::string& word) const;
  std::string context_key(const Tokens& padded, std::size_t pos) const;

  int order_ = 2;
  double alpha_ = 1.0;
  long vocab_size_ = 2;
  std::unordered_set<std::string> types_;
  std::map<std::string, long> ngrams_;
  std::map<std::string, long> contexts_;
};

}  // namespace mpat
