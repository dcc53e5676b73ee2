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

#include "mpat/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "mpat/util.hpp"

namespace mpat {

namespace {

const std::vector<std::string> kDeterminerFree = {"i", "we"};
const std::vector<std::string> kOpinionVerbs = {"thought", "felt", "said", "believed"};
const std::vector<std::string> kCopulas = {"was", "is", "seemed"};
const std::vector<std::string> kPreps = {"about", "for", "with", "in", "during", "after"};

SynthWords make_words() {
  SynthWords w;
  w.positive = {"good", "great", "excellent", "wonderful", "enjoyable", "brilliant"};
  w.negative = {"bad", "awful", "terrible", "boring", "dull", "weak"};
  w.held_out = {"fine",   "decent",  "terrific", "outstanding", "marvelous", "pleasant", "splendid",
                "poor",   "lousy",   "dreadful", "horrible",    "tedious",   "bland",    "feeble"};
  w.nouns_pos = {"movie", "story", "cast", "script", "ending", "music"};
  w.nouns_neg = {"film", "tale", "actors", "screenplay", "finale", "soundtrack"};
  w.intensifiers = {"really", "very", "quite", "truly", "so", "rather"};
  w.topics = {
      "war",      "family",   "city",     "ocean",    "island",   "village",  "school",   "church",   "castle",
      "forest",   "desert",   "mountain", "river",    "garden",   "kitchen",  "hospital", "prison",   "office",
      "farm",     "factory",  "museum",   "library",  "station",  "airport",  "harbor",   "bridge",   "tower",
      "palace",   "market",   "theater",  "circus",   "stadium",  "hotel",    "restaurant", "cafe",   "bakery",
      "winter",   "summer",   "autumn",   "spring",   "night",    "morning",  "evening",  "weekend",  "holiday",
      "birthday", "wedding",  "funeral",  "election", "revolution", "invasion", "journey", "voyage",  "expedition",
      "robbery",  "murder",   "trial",    "scandal",  "rescue",   "escape",   "reunion",  "divorce",  "romance",
      "friendship", "rivalry", "betrayal", "revenge", "courage",  "ambition", "memory",   "childhood", "youth",
      "soldier",  "doctor",   "teacher",  "farmer",   "pilot",    "sailor",   "detective", "lawyer",  "priest",
      "king",     "queen",    "prince",   "princess", "knight",   "wizard",   "witch",    "dragon",   "ghost",
      "robot",    "alien",    "spy",      "thief",    "pirate",   "cowboy",   "boxer",    "dancer",   "singer",
      "painter",  "writer",   "poet",     "chef",     "nurse",    "student",  "orphan",   "widow",    "stranger",
      "neighbor", "brother",  "sister",   "mother",   "father",   "daughter", "son",      "uncle",    "aunt",
      "grandmother", "grandfather", "cousin", "twins", "couple",  "gang",     "army",     "navy",     "crew",
      "team",     "band",     "choir",    "club",     "tribe",    "empire",   "kingdom",  "republic", "colony",
      "planet",   "moon",     "star",     "comet",    "storm",    "flood",    "fire",     "earthquake", "volcano",
      "plague",   "drought",  "famine",   "harvest",  "festival", "carnival", "parade",   "concert",  "tournament",
      "race",     "match",    "game",     "chess",    "poker",    "baseball", "football", "hockey",   "tennis",
      "boxing",   "surfing",  "sailing",  "hunting",  "fishing",  "climbing", "skiing",   "train",    "ship",
      "submarine", "car",     "truck",    "bicycle",  "horse",    "dog",      "cat",      "wolf",     "bear",
      "lion",     "tiger",    "shark",    "whale",    "eagle",    "snake",    "spider",   "monkey",   "elephant",
      "money",    "gold",     "diamond",  "treasure", "map",      "letter",   "diary",    "painting", "statue",
      "song",     "dance",    "poem",     "book",     "newspaper", "radio",   "television", "computer", "phone",
      "camera",   "mirror",   "clock",    "key",      "door",     "window",   "house",    "apartment", "basement",
      "attic",    "cellar",   "tunnel",   "cave",     "jungle",   "swamp",    "beach",    "lake",     "valley"};
  return w;
}

const std::string& pick(const std::vector<std::string>& words, Rng& rng) { return words[uniform_index(rng, words.size())]; }

std::string article_for(const std::string& next, Rng& rng) {
  if (uniform_index(rng, 2) == 0) return "the";
  return std::string("aeiou").find(next[0]) != std::string::npos ? "an" : "a";
}

}  // namespace

void SynthConfig::validate() const {
  if (per_class < 1) throw std::invalid_argument("synth: per_class must be at least 1");
  if (vocab < 1) throw std::invalid_argument("synth: vocab must be at least 1");
  if (!(noun_bias >= 0 && noun_bias <= 1)) throw std::invalid_argument("synth: noun_bias must lie in [0, 1]");
}

const SynthWords& synth_words() {
  static const SynthWords words = make_words();
  return words;
}

Dataset synthesize(const SynthConfig& cfg, const std::string& split) {
  cfg.validate();
  const auto& w = synth_words();
  const std::size_t core = w.positive.size() + w.negative.size() + w.nouns_pos.size() + w.nouns_neg.size() +
                           w.intensifiers.size() + kDeterminerFree.size() + kOpinionVerbs.size() + kCopulas.size() +
                           kPreps.size() + 3;
  const std::size_t n_topics =
      std::clamp<std::size_t>(cfg.vocab > static_cast<int>(core) ? cfg.vocab - core : 1, 1, w.topics.size());
  const std::vector<std::string> topics(w.topics.begin(), w.topics.begin() + static_cast<std::ptrdiff_t>(n_topics));

  Rng rng(derive_seed(cfg.seed, "synth/" + split));
  Dataset ds;
  ds.num_classes = 2;
  const int total = 2 * cfg.per_class;
  for (int i = 0; i < total; ++i) {
    const int label = i % 2;
    const auto& adj = pick(label == 1 ? w.positive : w.negative, rng);
    const bool leaning = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.noun_bias;
    const auto& noun = pick((label == 1) == leaning ? w.nouns_pos : w.nouns_neg, rng);
    const auto& topic = pick(topics, rng);
    Tokens s;
    switch (uniform_index(rng, 5)) {
      case 0:
        s = {article_for(noun, rng), noun, pick(kCopulas, rng), pick(w.intensifiers, rng), adj};
        break;
      case 1:
        s = {article_for(noun, rng), noun, pick(kCopulas, rng), adj, pick(kPreps, rng), article_for(topic, rng), topic};
        break;
      case 2:
        s = {pick(kDeterminerFree, rng), pick(kOpinionVerbs, rng), article_for(noun, rng), noun,
             pick(kCopulas, rng), pick(w.intensifiers, rng), adj};
        break;
      case 3:
        s = {article_for(adj, rng), adj, noun, pick(kPreps, rng), article_for(topic, rng), topic};
        break;
      default:
        s = {article_for(topic, rng), topic, noun, pick(kCopulas, rng), adj};
        break;
    }
    char id[32];
    std::snprintf(id, sizeof id, "%s-%05d", split.c_str(), i);
    ds.examples.push_back({id, {s}, label});
  }
  return ds;
}

}  // namespace mpat
