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

#include "mpat/textcore.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace mpat {

Tokens Example::flat() const {
  Tokens out;
  for (const auto& seg : segments) out.insert(out.end(), seg.begin(), seg.end());
  return out;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

int Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  int id = size();
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return index_.count(token) > 0; }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocabulary id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::to_tsv() const {
  std::string out;
  for (int i = 0; i < size(); ++i) out += tokens_[static_cast<std::size_t>(i)] + "\t" + std::to_string(i) + "\n";
  return out;
}

Vocabulary Vocabulary::from_tsv(std::string_view text) {
  Vocabulary vocab;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    if (raw.empty()) continue;
    auto fields = split(raw, '\t');
    if (fields.size() != 2) throw std::runtime_error("vocab line " + std::to_string(line_no) + ": expected token<TAB>id");
    int expected = std::stoi(fields[1]);
    if (vocab.add(fields[0]) != expected)
      throw std::runtime_error("vocab line " + std::to_string(line_no) + ": ids must be dense and ordered");
  }
  return vocab;
}

Vocabulary build_vocab(const std::vector<Example>& corpus, int max_size, const std::vector<std::string>& extra) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  if (max_size < 3) throw std::invalid_argument("build_vocab: max_size must be at least 3");

  std::map<std::string, long> counts;
  for (const auto& ex : corpus)
    for (const auto& seg : ex.segments)
      for (const auto& tok : seg)
        if (tok != Vocabulary::kPadToken && tok != Vocabulary::kUnkToken) ++counts[tok];

  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  for (const auto& [tok, n] : ranked) {
    if (vocab.size() >= max_size) break;
    vocab.add(tok);
  }
  std::vector<std::string> rest(extra.begin(), extra.end());
  std::sort(rest.begin(), rest.end());
  for (const auto& tok : rest) {
    if (vocab.size() >= max_size) break;
    if (tok.empty() || tok == Vocabulary::kPadToken || tok == Vocabulary::kUnkToken) continue;
    vocab.add(tok);
  }
  return vocab;
}

std::vector<int> encode(const std::vector<Tokens>& segments, const Vocabulary& vocab, int pad_length) {
  if (pad_length < 1) throw std::invalid_argument("encode: pad_length must be positive");
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(pad_length));
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (s) ids.push_back(Vocabulary::kPad);
    for (const auto& tok : segments[s]) ids.push_back(vocab.id(tok));
  }
  ids.resize(static_cast<std::size_t>(pad_length), Vocabulary::kPad);
  return ids;
}

std::vector<int> encode(const Example& example, const Vocabulary& vocab, int pad_length) {
  return encode(example.segments, vocab, pad_length);
}

std::vector<Tokens> decode(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::vector<Tokens> segments(1);
  for (int id : ids) {
    if (id == Vocabulary::kPad) {
      segments.emplace_back();
    } else {
      segments.back().push_back(vocab.token(id));
    }
  }
  while (!segments.empty() && segments.back().empty()) segments.pop_back();
  return segments;
}

Dataset stratified_sample(const Dataset& dataset, int per_class, std::uint64_t seed) {
  if (per_class < 0) throw std::invalid_argument("stratified_sample: per_class must be non-negative");
  Dataset out{{}, dataset.num_classes, dataset.pad_length};
  if (per_class == 0) return out;

  std::vector<std::size_t> chosen;
  for (int c = 0; c < dataset.num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i)
      if (dataset.examples[i].label == c) members.push_back(i);
    if (members.size() < static_cast<std::size_t>(per_class))
      throw std::invalid_argument("stratified_sample: class " + std::to_string(c) + " has only " +
                                  std::to_string(members.size()) + " examples, need " + std::to_string(per_class));
    Rng rng(derive_seed(seed, "stratified", static_cast<std::uint64_t>(c)));
    // Partial Fisher-Yates.
    for (std::size_t k = 0; k < static_cast<std::size_t>(per_class); ++k) {
      std::size_t j = k + uniform_index(rng, members.size() - k);
      std::swap(members[k], members[j]);
    }
    chosen.insert(chosen.end(), members.begin(), members.begin() + per_class);
  }
  std::sort(chosen.begin(), chosen.end());
  for (auto i : chosen) out.examples.push_back(dataset.examples[i]);
  return out;
}

Dataset parse_jsonl(std::string_view content, int num_classes, int pad_length) {
  using nlohmann::json;
  Dataset ds{{}, 0, pad_length};
  int max_label = -1;
  int line_no = 0;
  for (const auto& line : split(content, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(where() + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw std::runtime_error(where() + "expected a JSON object");
    for (const char* key : {"id", "text", "label"})
      if (!obj.contains(key)) throw std::runtime_error(where() + "schema error: missing \"" + key + "\" field");
    if (!obj["id"].is_string() || !obj["text"].is_string())
      throw std::runtime_error(where() + "schema error: \"id\" and \"text\" must be strings");
    if (!obj["label"].is_number_integer() || obj["label"].get<long>() < 0)
      throw std::runtime_error(where() + "schema error: \"label\" must be a non-negative integer");

    Example ex;
    ex.id = obj["id"].get<std::string>();
    ex.label = obj["label"].get<int>();
    ex.segments.push_back(tokenize(obj["text"].get<std::string>()));
    if (obj.contains("text2")) {
      if (!obj["text2"].is_string()) throw std::runtime_error(where() + "schema error: \"text2\" must be a string");
      ex.segments.push_back(tokenize(obj["text2"].get<std::string>()));
    }
    for (const auto& seg : ex.segments)
      if (seg.empty()) throw std::runtime_error(where() + "empty text segment");
    max_label = std::max(max_label, ex.label);
    ds.examples.push_back(std::move(ex));
  }
  ds.num_classes = num_classes > 0 ? num_classes : max_label + 1;
  for (const auto& ex : ds.examples)
    if (ex.label >= ds.num_classes)
      throw std::runtime_error("example " + ex.id + ": label " + std::to_string(ex.label) + " out of range");
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path, int num_classes, int pad_length) {
  try {
    return parse_jsonl(read_file(path), num_classes, pad_length);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string to_jsonl(const Dataset& dataset) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& ex : dataset.examples) {
    ordered_json obj;
    obj["id"] = ex.id;
    obj["text"] = ex.segments.empty() ? std::string() : join(ex.segments[0]);
    if (ex.segments.size() > 1) obj["text2"] = join(ex.segments[1]);
    obj["label"] = ex.label;
    out += obj.dump() + "\n";
  }
  return out;
}

void save_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, to_jsonl(dataset));
}

}  // namespace mpat
