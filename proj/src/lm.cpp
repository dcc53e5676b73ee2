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

#include "mpat/lm.hpp"

#include <cmath>
#include <stdexcept>

namespace mpat {

namespace {

void check_order(int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("n-gram order must be 1, 2 or 3");
}

}  // namespace

std::string NGramModel::normalize(const std::string& word) const {
  if (word == kEos || types_.count(word)) return word;
  return std::string(kUnk);
}

// `padded` holds order-1 BOS markers followed by the sentence; the context of
// position pos covers the order-1 entries ending just before it.
std::string NGramModel::context_key(const Tokens& padded, std::size_t pos) const {
  std::string key;
  for (std::size_t k = pos + 1 - static_cast<std::size_t>(order_); k < pos; ++k) {
    if (!key.empty()) key += ' ';
    key += padded[k];
  }
  return key;
}

NGramModel NGramModel::fit(const std::vector<Tokens>& corpus, int order, double alpha) {
  check_order(order);
  if (alpha <= 0) throw std::invalid_argument("smoothing alpha must be positive");
  if (corpus.empty()) throw std::invalid_argument("cannot fit a language model on an empty corpus");

  NGramModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  for (const auto& sent : corpus)
    for (const auto& w : sent) m.types_.insert(w);
  m.types_.erase(std::string(kUnk));
  m.vocab_size_ = static_cast<long>(m.types_.size()) + 2;

  for (const auto& sent : corpus) {
    Tokens padded(static_cast<std::size_t>(order - 1), std::string(kBos));
    padded.insert(padded.end(), sent.begin(), sent.end());
    padded.emplace_back(kEos);
    for (std::size_t pos = static_cast<std::size_t>(order - 1); pos < padded.size(); ++pos) {
      auto ctx = m.context_key(padded, pos);
      ++m.contexts_[ctx];
      ++m.ngrams_[ctx.empty() ? padded[pos] : ctx + " " + padded[pos]];
    }
  }
  return m;
}

NGramModel NGramModel::uniform(int vocab_size, int order, double alpha) {
  check_order(order);
  if (alpha <= 0) throw std::invalid_argument("smoothing alpha must be positive");
  if (vocab_size < 1) throw std::invalid_argument("vocab_size must be positive");
  NGramModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  m.vocab_size_ = vocab_size;
  return m;
}

long NGramModel::count(const std::string& ngram) const {
  auto it = ngrams_.find(ngram);
  return it == ngrams_.end() ? 0 : it->second;
}

long NGramModel::context_count(const std::string& context) const {
  auto it = contexts_.find(context);
  return it == contexts_.end() ? 0 : it->second;
}

double NGramModel::probability(const Tokens& context, const std::string& word) const {
  Tokens padded(static_cast<std::size_t>(order_ - 1), std::string(kBos));
  for (const auto& w : context) padded.push_back(w == kBos ? w : normalize(w));
  padded.push_back(normalize(word));
  auto ctx = context_key(padded, padded.size() - 1);
  const auto& w = padded.back();
  double num = static_cast<double>(count(ctx.empty() ? w : ctx + " " + w)) + alpha_;
  double den = static_cast<double>(context_count(ctx)) + alpha_ * static_cast<double>(vocab_size_);
  return num / den;
}

double NGramModel::perplexity(const Tokens& tokens) const {
  if (tokens.empty()) throw std::invalid_argument("perplexity of an empty sequence is undefined");
  Tokens padded(static_cast<std::size_t>(order_ - 1), std::string(kBos));
  for (const auto& w : tokens) padded.push_back(normalize(w));
  padded.emplace_back(kEos);
  double log_sum = 0.0;
  std::size_t scored = 0;
  const double vocab = static_cast<double>(vocab_size_);
  for (std::size_t pos = static_cast<std::size_t>(order_ - 1); pos < padded.size(); ++pos) {
    auto ctx = context_key(padded, pos);
    double num = static_cast<double>(count(ctx.empty() ? padded[pos] : ctx + " " + padded[pos])) + alpha_;
    double den = static_cast<double>(context_count(ctx)) + alpha_ * vocab;
    log_sum += std::log(num / den);
    ++scored;
  }
  return std::exp(-log_sum / static_cast<double>(scored));
}

std::string NGramModel::dump() const {
  std::string out = "#order\t" + std::to_string(order_) + "\n";
  out += "#alpha\t" + format_double(alpha_) + "\n";
  out += "#vocab\t" + std::to_string(vocab_size_) + "\n";
  for (const auto& [ngram, n] : ngrams_) out += ngram + "\t" + std::to_string(n) + "\n";
  return out;
}

NGramModel NGramModel::load(std::string_view text) {
  NGramModel m;
  int line_no = 0;
  bool have_order = false;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw std::runtime_error("lm dump line " + std::to_string(line_no) + ": expected ngram<TAB>count");
    if (fields[0] == "#order") {
      m.order_ = std::stoi(fields[1]);
      check_order(m.order_);
      have_order = true;
    } else if (fields[0] == "#alpha") {
      m.alpha_ = std::stod(fields[1]);
    } else if (fields[0] == "#vocab") {
      m.vocab_size_ = std::stol(fields[1]);
    } else {
      if (!have_order) throw std::runtime_error("lm dump: #order header must come first");
      long n = std::stol(fields[1]);
      auto words = split(fields[0], ' ');
      if (static_cast<int>(words.size()) != m.order_)
        throw std::runtime_error("lm dump line " + std::to_string(line_no) + ": n-gram length does not match order");
      m.ngrams_[fields[0]] += n;
      Tokens ctx(words.begin(), words.end() - 1);
      m.contexts_[join(ctx)] += n;
      if (words.back() != kEos && words.back() != kUnk) m.types_.insert(words.back());
    }
  }
  return m;
}

}  // namespace mpat
