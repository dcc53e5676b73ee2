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
#include <string>
#include <vector>

#include "mpat/textcore.hpp"

namespace mpat {

struct SynthConfig {
  int per_class = 500;
  /// Approximate vocabulary size; controls how many topic nouns are used.
  int vocab = 300;
  std::uint64_t seed = 1;
  /// Probability that a review noun comes from the group leaning toward the
  /// example's class.
  double noun_bias = 0.8;

  void validate() const;
};

/// Word inventory of the generator.
struct SynthWords {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  /// Synonyms of the polarity adjectives that the generator never emits.
  std::vector<std::string> held_out;
  std::vector<std::string> nouns_pos;
  std::vector<std::string> nouns_neg;
  std::vector<std::string> topics;
  std::vector<std::string> intensifiers;
};

const SynthWords& synth_words();

/// Two-class review corpus (0 = negative, 1 = positive) from slot templates.
/// The label is the polarity of the adjective slot. `split` salts the stream
/// so that train and test draws are independent.
Dataset synthesize(const SynthConfig& cfg, const std::string& split = "train");

}  // namespace mpat
