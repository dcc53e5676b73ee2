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

#include "mpat/experiment.hpp"

#include <stdexcept>

#include "mpat/util.hpp"

namespace mpat {

namespace {

std::filesystem::path bundled(const char* name) { return std::filesystem::path(MPAT_DATA_DIR) / name; }

}  // namespace

const std::set<std::string>& ExperimentConfig::keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = train_config_keys();
    k.insert({"synth_per_class", "synth_vocab", "noun_bias", "test_per_class", "max_vocab", "pad_length", "lexicon",
              "thesaurus", "phrases", "arch", "embed_dim", "hidden_dim", "num_filters", "init", "max_candidates",
              "min_span", "replace_pristine", "lm_order", "lm_alpha", "attack", "max_ratio", "neighbors",
              "sim_threshold", "require_thesaurus", "pos_filter", "attack_per_class", "sweep_epsilons",
              "sweep_rates", "ttest"});
    return k;
  }();
  return keys;
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& input, const std::uint64_t* seed_override) {
  input.check_keys(keys());
  KeyValueConfig kv = input;
  if (seed_override) kv.set("seed", std::to_string(*seed_override));

  ExperimentConfig c;
  c.train = train_config_from(kv);
  c.seed = c.train.seed;
  c.synth.per_class = static_cast<int>(kv.get_int("synth_per_class", c.synth.per_class));
  c.synth.vocab = static_cast<int>(kv.get_int("synth_vocab", c.synth.vocab));
  c.synth.noun_bias = kv.get_double("noun_bias", c.synth.noun_bias);
  c.synth.seed = c.seed;
  c.synth.validate();
  c.test_per_class = static_cast<int>(kv.get_int("test_per_class", c.test_per_class));
  if (c.test_per_class < 1) throw std::runtime_error("config key 'test_per_class' must be at least 1");
  c.max_vocab = static_cast<int>(kv.get_int("max_vocab", c.max_vocab));
  c.pad_length = static_cast<int>(kv.get_int("pad_length", c.pad_length));
  if (c.pad_length < 1) throw std::runtime_error("config key 'pad_length' must be positive");
  c.lexicon_path = kv.get_string("lexicon", bundled("pos_lexicon.tsv").string());
  c.thesaurus_path = kv.get_string("thesaurus", bundled("thesaurus.tsv").string());
  c.phrases_path = kv.get_string("phrases", bundled("phrases.tsv").string());

  c.shape.arch = nn::parse_arch(kv.get_string("arch", std::string(nn::to_string(c.shape.arch))));
  c.shape.embed_dim = kv.get_int("embed_dim", c.shape.embed_dim);
  c.shape.hidden_dim = kv.get_int("hidden_dim", c.shape.hidden_dim);
  c.shape.num_filters = kv.get_int("num_filters", c.shape.num_filters);
  if (c.shape.embed_dim < 1 || c.shape.hidden_dim < 1 || c.shape.num_filters < 1)
    throw std::runtime_error("model dimensions must be positive");
  auto init = kv.get_string("init", "random");
  if (init != "random" && init != "zero")
    throw std::runtime_error("config key 'init': expected random or zero, got '" + init + "'");
  c.zero_init = init == "zero";

  c.gen.rate = c.train.rate_r;
  c.gen.seed = c.seed;
  c.gen.max_candidates = static_cast<int>(kv.get_int("max_candidates", c.gen.max_candidates));
  c.gen.min_span = static_cast<int>(kv.get_int("min_span", c.gen.min_span));
  c.gen.replace_pristine = kv.get_bool("replace_pristine", c.gen.replace_pristine);
  c.gen.validate();
  c.lm_order = static_cast<int>(kv.get_int("lm_order", c.lm_order));
  c.lm_alpha = kv.get_double("lm_alpha", c.lm_alpha);

  c.attack.method = parse_attack_method(kv.get_string("attack", to_string(c.attack.method)));
  c.attack.max_ratio = kv.get_double("max_ratio", c.attack.max_ratio);
  c.attack.neighbors = static_cast<int>(kv.get_int("neighbors", c.attack.neighbors));
  c.attack.sim_threshold = kv.get_double("sim_threshold", c.attack.sim_threshold);
  c.attack.require_thesaurus = kv.get_bool("require_thesaurus", c.attack.require_thesaurus);
  c.attack.pos_filter = kv.get_bool("pos_filter", c.attack.pos_filter);
  c.attack.validate();
  c.attack_per_class = static_cast<int>(kv.get_int("attack_per_class", c.attack_per_class));
  if (c.attack_per_class < 0) throw std::runtime_error("config key 'attack_per_class' must be non-negative");

  c.sweep_epsilons = kv.get_doubles("sweep_epsilons", c.sweep_epsilons);
  c.sweep_rates = kv.get_doubles("sweep_rates", c.sweep_rates);
  if (c.sweep_epsilons.empty() || c.sweep_rates.empty()) throw std::runtime_error("sweep grid must be non-empty");
  c.ttest_kind = parse_ttest_kind(kv.get_string("ttest", "welch"));
  c.resolved = c.describe();
  return c;
}

std::string ExperimentConfig::describe() const {
  auto list = [](const std::vector<double>& xs) {
    std::string out;
    for (double x : xs) out += (out.empty() ? "" : ",") + format_double(x);
    return out;
  };
  KeyValueConfig kv;
  kv.set("mode", to_string(train.mode));
  kv.set("epsilon", format_double(train.epsilon));
  kv.set("tau", format_double(train.tau));
  kv.set("lambda", format_double(train.lambda));
  kv.set("k_steps", std::to_string(train.k_steps));
  kv.set("rate_r", format_double(train.rate_r));
  kv.set("epochs", std::to_string(train.epochs));
  kv.set("batch_size", std::to_string(train.batch_size));
  kv.set("seed", std::to_string(seed));
  kv.set("delta_policy", train.delta_policy == DeltaPolicy::Carry ? "carry" : "per_batch");
  kv.set("delta_scope", train.delta_scope == DeltaScope::BatchSlot ? "batch_slot" : "example");
  kv.set("g_on_delta", train.g_on_delta ? "true" : "false");
  kv.set("synth_per_class", std::to_string(synth.per_class));
  kv.set("synth_vocab", std::to_string(synth.vocab));
  kv.set("noun_bias", format_double(synth.noun_bias));
  kv.set("test_per_class", std::to_string(test_per_class));
  kv.set("max_vocab", std::to_string(max_vocab));
  kv.set("pad_length", std::to_string(pad_length));
  kv.set("lexicon", lexicon_path.string());
  kv.set("thesaurus", thesaurus_path.string());
  kv.set("phrases", phrases_path.string());
  kv.set("arch", std::string(nn::to_string(shape.arch)));
  kv.set("embed_dim", std::to_string(shape.embed_dim));
  kv.set("hidden_dim", std::to_string(shape.hidden_dim));
  kv.set("num_filters", std::to_string(shape.num_filters));
  kv.set("init", zero_init ? "zero" : "random");
  kv.set("max_candidates", std::to_string(gen.max_candidates));
  kv.set("min_span", std::to_string(gen.min_span));
  kv.set("replace_pristine", gen.replace_pristine ? "true" : "false");
  kv.set("lm_order", std::to_string(lm_order));
  kv.set("lm_alpha", format_double(lm_alpha));
  kv.set("attack", to_string(attack.method));
  kv.set("max_ratio", format_double(attack.max_ratio));
  kv.set("neighbors", std::to_string(attack.neighbors));
  kv.set("sim_threshold", format_double(attack.sim_threshold));
  kv.set("require_thesaurus", attack.require_thesaurus ? "true" : "false");
  kv.set("pos_filter", attack.pos_filter ? "true" : "false");
  kv.set("attack_per_class", std::to_string(attack_per_class));
  kv.set("sweep_epsilons", list(sweep_epsilons));
  kv.set("sweep_rates", list(sweep_rates));
  kv.set("ttest", ttest_kind == TTestKind::Welch ? "welch" : "student");
  return kv.to_string();
}

std::unique_ptr<Assets> Assets::load(const ExperimentConfig& cfg) {
  std::unique_ptr<Assets> a(new Assets());
  auto need = [&](const char* name, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw std::runtime_error(std::string("missing ") + name + " file: " + path.string());
    a->files_.emplace_back(name, path);
    return read_file(path);
  };
  a->lexicon_ = PosLexicon::from_tsv(need("lexicon", cfg.lexicon_path));
  a->thesaurus_ = Thesaurus::from_tsv(need("thesaurus", cfg.thesaurus_path));
  a->paraphraser_ = PhraseTableParaphraser::from_tsv(need("phrases", cfg.phrases_path));
  return a;
}

Vocabulary experiment_vocab(const Dataset& train, const Assets& assets, int max_vocab) {
  auto extra = assets.thesaurus().words();
  for (const auto& w : assets.paraphraser().words()) extra.push_back(w);
  return build_vocab(train.examples, max_vocab, extra);
}

NGramModel fit_language_model(const Dataset& train, int order, double alpha) {
  std::vector<Tokens> corpus;
  corpus.reserve(train.size());
  for (const auto& ex : train.examples) corpus.push_back(ex.segments.back());
  return NGramModel::fit(corpus, order, alpha);
}

Model initial_model(const ExperimentConfig& cfg, const Vocabulary& vocab) {
  nn::ModelShape shape = cfg.shape;
  shape.vocab_size = vocab.size();
  if (cfg.zero_init) return nn::zero_params<double>(shape);
  Rng rng(derive_seed(cfg.seed, "init"));
  return nn::init_params<double>(shape, rng);
}

TrainResult run_training(const ExperimentConfig& cfg, const Dataset& train, const Vocabulary& vocab,
                         const Assets& assets, const StepObserver& observer) {
  Dataset data = train;
  data.pad_length = cfg.pad_length;
  auto model = initial_model(cfg, vocab);
  if (cfg.train.mode != TrainMode::Mpat) return mpat::train(data, vocab, std::move(model), cfg.train, nullptr, observer);
  auto lm = fit_language_model(train, cfg.lm_order, cfg.lm_alpha);
  PerturbationContext ctx{assets.parser(), assets.paraphraser(), lm, assets.thesaurus(), cfg.gen};
  return mpat::train(data, vocab, std::move(model), cfg.train, &ctx, observer);
}

Dataset attack_subset(const ExperimentConfig& cfg, const Dataset& test) {
  if (cfg.attack_per_class == 0) return test;
  return stratified_sample(test, cfg.attack_per_class, derive_seed(cfg.seed, "attack"));
}

std::vector<AttackOutcome> run_attacks(const ExperimentConfig& cfg, const NeuralClassifier& model,
                                       const Dataset& examples, const Assets& assets) {
  const PosLexicon* lexicon = cfg.attack.pos_filter ? &assets.lexicon() : nullptr;
  std::unique_ptr<CandidateSource> source;
  if (cfg.attack.method == AttackMethod::Pwws)
    source = std::make_unique<ThesaurusCandidates>(assets.thesaurus(), lexicon);
  else
    source = std::make_unique<EmbeddingNeighbors>(model.params().embedding, model.vocab(), cfg.attack.neighbors,
                                                  cfg.attack.sim_threshold,
                                                  cfg.attack.require_thesaurus ? &assets.thesaurus() : nullptr, lexicon);
  std::vector<AttackOutcome> out;
  out.reserve(examples.size());
  for (const auto& ex : examples.examples) out.push_back(run_attack(model, ex, *source, cfg.attack));
  return out;
}

}  // namespace mpat
