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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "mpat/eval.hpp"
#include "mpat/experiment.hpp"
#include "mpat/util.hpp"

namespace fs = std::filesystem;
using namespace mpat;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

ExperimentConfig resolve(const Globals& g) {
  KeyValueConfig kv;
  if (!g.config_path.empty()) kv = KeyValueConfig::load(g.config_path);
  return ExperimentConfig::from(kv, g.seed ? &*g.seed : nullptr);
}

void write_manifest(const Globals& g, const std::string& command, const ExperimentConfig& cfg, const Assets* assets,
                    const std::map<std::string, std::string>& inputs, const std::map<std::string, std::string>& outputs) {
  ordered_json m;
  m["command"] = command;
  m["seed"] = cfg.seed;
  ordered_json resolved = ordered_json::object();
  for (const auto& line : split(cfg.resolved, '\n')) {
    auto eq = line.find(" = ");
    if (eq != std::string::npos) resolved[line.substr(0, eq)] = line.substr(eq + 3);
  }
  m["config"] = resolved;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  ordered_json hashes = ordered_json::object();
  if (assets)
    for (const auto& [name, path] : assets->files())
      hashes[name] = {{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}};
  m["assets"] = hashes;
  write_file_atomic(fs::path(g.out) / ("manifest-" + command + ".json"), m.dump(2) + "\n");
}

std::string out_path(const Globals& g, const std::string& name) { return (fs::path(g.out) / name).string(); }

void require(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw std::runtime_error(std::string("missing ") + what + " file: " + path);
}

Dataset load_data(const std::string& path, const ExperimentConfig& cfg, const char* what) {
  require(path, what);
  return load_jsonl(path, 0, cfg.pad_length);
}

std::string pm_to_json(const PerturbationSet& pm) {
  ordered_json j;
  j["id"] = pm.origin_id;
  std::vector<std::string> texts;
  for (const auto& v : pm.variants) texts.push_back(join(v));
  j["variants"] = texts;
  j["pristine"] = pm.pristine;
  return j.dump();
}

NeuralClassifier load_classifier(const std::string& model_path, const std::string& vocab_path,
                                 const ExperimentConfig& cfg) {
  require(vocab_path, "vocabulary");
  require(model_path, "checkpoint");
  auto vocab = Vocabulary::from_tsv(read_file(vocab_path));
  nn::ModelShape expected = cfg.shape;
  expected.vocab_size = vocab.size();
  return NeuralClassifier(load_checkpoint(model_path, &expected), vocab, cfg.pad_length);
}

std::vector<AttackOutcome> load_outcomes(const std::string& path) {
  std::vector<AttackOutcome> out;
  int line_no = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(outcome_from_json(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> read_numbers(const std::string& path) {
  require(path, "sample");
  std::istringstream in(read_file(path));
  std::vector<double> xs;
  std::string word;
  while (in >> word) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(word, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != word.size()) throw std::runtime_error(path + ": not a number: '" + word + "'");
    xs.push_back(v);
  }
  return xs;
}

// --- subcommands -----------------------------------------------------------

void cmd_synth(const Globals& g) {
  auto cfg = resolve(g);
  auto train = out_path(g, "train.jsonl"), test = out_path(g, "test.jsonl");
  write_manifest(g, "synth", cfg, nullptr, {}, {{"train", train}, {"test", test}});
  save_jsonl(synthesize(cfg.synth, "train"), train);
  SynthConfig tc = cfg.synth;
  tc.per_class = cfg.test_per_class;
  save_jsonl(synthesize(tc, "test"), test);
}

void cmd_gen(const Globals& g, const std::string& train_path) {
  auto cfg = resolve(g);
  auto assets = Assets::load(cfg);
  auto pm_path = out_path(g, "pm.jsonl"), lm_path = out_path(g, "lm.txt");
  write_manifest(g, "gen", cfg, assets.get(), {{"train", train_path}}, {{"pm", pm_path}, {"lm", lm_path}});
  auto train = load_data(train_path, cfg, "training data");
  auto lm = fit_language_model(train, cfg.lm_order, cfg.lm_alpha);
  PerturbationContext ctx{assets->parser(), assets->paraphraser(), lm, assets->thesaurus(), cfg.gen};
  std::string out;
  for (const auto& ex : train.examples) out += pm_to_json(generate_pm(ex, ctx)) + "\n";
  write_file_atomic(lm_path, lm.dump());
  write_file_atomic(pm_path, out);
}

void cmd_train(const Globals& g, const std::string& train_path) {
  auto cfg = resolve(g);
  auto assets = Assets::load(cfg);
  auto model_path = out_path(g, "model.ckpt"), vocab_path = out_path(g, "vocab.tsv"),
       history_path = out_path(g, "history.csv");
  write_manifest(g, "train", cfg, assets.get(), {{"train", train_path}},
                 {{"model", model_path}, {"vocab", vocab_path}, {"history", history_path}});
  auto train = load_data(train_path, cfg, "training data");
  auto vocab = experiment_vocab(train, *assets, cfg.max_vocab);
  auto result = run_training(cfg, train, vocab, *assets);
  write_file_atomic(vocab_path, vocab.to_tsv());
  save_checkpoint(result.model, model_path);
  write_file_atomic(history_path, result.history.to_csv());
}

void cmd_attack(const Globals& g, const std::string& test_path, const std::string& model_path,
                const std::string& vocab_path) {
  auto cfg = resolve(g);
  auto assets = Assets::load(cfg);
  auto outcomes_path = out_path(g, "attack.jsonl");
  write_manifest(g, "attack", cfg, assets.get(), {{"test", test_path}, {"model", model_path}, {"vocab", vocab_path}},
                 {{"outcomes", outcomes_path}});
  auto clf = load_classifier(model_path, vocab_path, cfg);
  auto test = load_data(test_path, cfg, "test data");
  std::string out;
  for (const auto& o : run_attacks(cfg, clf, attack_subset(cfg, test), *assets))
    if (o.attempted) out += outcome_to_json(o) + "\n";
  write_file_atomic(outcomes_path, out);
}

void cmd_eval(const Globals& g, const std::string& test_path, const std::string& model_path,
              const std::string& vocab_path, const std::string& outcomes_path, bool untrained,
              const std::string& train_path) {
  auto cfg = resolve(g);
  auto report_path = out_path(g, "report.json");
  std::unique_ptr<Assets> assets;
  if (untrained) assets = Assets::load(cfg);
  write_manifest(g, "eval", cfg, assets.get(),
                 {{"test", test_path}, {"model", untrained ? "" : model_path}, {"outcomes", outcomes_path}},
                 {{"report", report_path}});
  auto test = load_data(test_path, cfg, "test data");
  std::optional<NeuralClassifier> clf;
  if (untrained) {
    auto cfg0 = cfg;
    cfg0.zero_init = true;
    auto vocab = fs::exists(vocab_path) ? Vocabulary::from_tsv(read_file(vocab_path))
                                        : experiment_vocab(load_data(train_path, cfg, "training data"), *assets,
                                                           cfg.max_vocab);
    clf.emplace(initial_model(cfg0, vocab), vocab, cfg.pad_length);
  } else {
    clf.emplace(load_classifier(model_path, vocab_path, cfg));
  }
  std::vector<AttackOutcome> outcomes;
  if (!untrained && fs::exists(outcomes_path)) outcomes = load_outcomes(outcomes_path);
  auto report = build_report(*clf, attack_subset(cfg, test), test, outcomes, cfg.resolved, cfg.seed);
  write_file_atomic(report_path, report.to_json());
}

std::string csv_field(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '"') c = ';';
  return s;
}

void cmd_sweep(const Globals& g, const std::string& train_path, const std::string& test_path) {
  auto cfg = resolve(g);
  auto assets = Assets::load(cfg);
  auto sweep_path = out_path(g, "sweep.csv");
  write_manifest(g, "sweep", cfg, assets.get(), {{"train", train_path}, {"test", test_path}}, {{"sweep", sweep_path}});
  auto train = load_data(train_path, cfg, "training data");
  auto test = load_data(test_path, cfg, "test data");
  auto vocab = experiment_vocab(train, *assets, cfg.max_vocab);
  auto subset = attack_subset(cfg, test);

  const std::string header = "epsilon,rate_r,asr,acc_adv,status";
  std::map<std::pair<std::string, std::string>, std::string> done;
  if (fs::exists(sweep_path)) {
    for (const auto& line : split(read_file(sweep_path), '\n')) {
      auto f = split(line, ',');
      if (line == header || f.size() != 5 || f[4] != "ok") continue;
      done[{f[0], f[1]}] = line;
    }
  }
  std::vector<std::string> rows;
  auto flush = [&] {
    std::string out = header + "\n";
    for (const auto& r : rows) out += r + "\n";
    write_file_atomic(sweep_path, out);
  };
  for (double eps : cfg.sweep_epsilons) {
    for (double rate : cfg.sweep_rates) {
      const std::pair<std::string, std::string> key{format_double(eps), format_double(rate)};
      if (auto it = done.find(key); it != done.end()) {
        rows.push_back(it->second);
        continue;
      }
      std::string row = key.first + "," + key.second + ",";
      try {
        auto cell = cfg;
        cell.train.mode = TrainMode::Mpat;
        cell.train.epsilon = eps;
        cell.train.rate_r = rate;
        cell.gen.rate = rate;
        cell.train.validate();
        cell.resolved = cell.describe();
        auto result = run_training(cell, train, vocab, *assets);
        NeuralClassifier clf(result.model, vocab, cfg.pad_length);
        auto report = build_report(clf, subset, Dataset{}, run_attacks(cell, clf, subset, *assets), cell.resolved,
                                   cell.seed);
        row += format_double(report.asr) + "," + format_double(report.acc_adv) + ",ok";
      } catch (const std::exception& e) {
        row += ",," + csv_field(std::string("error: ") + e.what());
      }
      rows.push_back(row);
      flush();
    }
  }
  flush();
}

void cmd_ttest(const Globals& g, const std::string& a_path, const std::string& b_path) {
  auto cfg = resolve(g);
  auto out = out_path(g, "ttest.json");
  write_manifest(g, "ttest", cfg, nullptr, {{"a", a_path}, {"b", b_path}}, {{"result", out}});
  auto r = ttest(read_numbers(a_path), read_numbers(b_path), cfg.ttest_kind);
  ordered_json j;
  j["kind"] = cfg.ttest_kind == TTestKind::Welch ? "welch" : "student";
  j["t"] = r.t;
  j["df"] = r.df;
  j["p"] = r.p;
  write_file_atomic(out, j.dump(2) + "\n");
  std::cout << "t = " << format_double(r.t) << "  df = " << format_double(r.df) << "  p = " << format_double(r.p)
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial training and attack toolkit for text classifiers"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--seed", g.seed, "base seed (overrides the config)");
  app.add_option("--out", g.out, "output directory");

  std::string train_path, test_path, model_path, vocab_path, outcomes_path, a_path, b_path;
  bool untrained = false;
  auto data_opts = [&](CLI::App* sub, bool train, bool test) {
    if (train) sub->add_option("--train", train_path, "training JSONL (default OUT/train.jsonl)");
    if (test) sub->add_option("--test", test_path, "test JSONL (default OUT/test.jsonl)");
  };
  auto model_opts = [&](CLI::App* sub) {
    sub->add_option("--model", model_path, "checkpoint (default OUT/model.ckpt)");
    sub->add_option("--vocab", vocab_path, "vocabulary TSV (default OUT/vocab.tsv)");
  };

  auto* synth = app.add_subcommand("synth", "write a synthetic two-class corpus");
  auto* gen = app.add_subcommand("gen", "generate perturbation sets for the training data");
  data_opts(gen, true, false);
  auto* train = app.add_subcommand("train", "train a classifier");
  data_opts(train, true, false);
  auto* attack = app.add_subcommand("attack", "attack a trained classifier");
  data_opts(attack, false, true);
  model_opts(attack);
  auto* eval = app.add_subcommand("eval", "write an evaluation report");
  data_opts(eval, true, true);
  model_opts(eval);
  eval->add_option("--outcomes", outcomes_path, "attack outcomes (default OUT/attack.jsonl)");
  eval->add_flag("--untrained", untrained, "evaluate a zero-initialized model");
  auto* sweep = app.add_subcommand("sweep", "train and attack over a grid of epsilon and rate_r");
  data_opts(sweep, true, true);
  auto* tt = app.add_subcommand("ttest", "independent two-sample t-test");
  tt->add_option("a", a_path, "first sample file")->required();
  tt->add_option("b", b_path, "second sample file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    fs::create_directories(g.out);
    auto dflt = [&](std::string& v, const char* name) {
      if (v.empty()) v = out_path(g, name);
    };
    dflt(train_path, "train.jsonl");
    dflt(test_path, "test.jsonl");
    dflt(model_path, "model.ckpt");
    dflt(vocab_path, "vocab.tsv");
    dflt(outcomes_path, "attack.jsonl");
    if (*synth) cmd_synth(g);
    else if (*gen) cmd_gen(g, train_path);
    else if (*train) cmd_train(g, train_path);
    else if (*attack) cmd_attack(g, test_path, model_path, vocab_path);
    else if (*eval) cmd_eval(g, test_path, model_path, vocab_path, outcomes_path, untrained, train_path);
    else if (*sweep) cmd_sweep(g, train_path, test_path);
    else if (*tt) cmd_ttest(g, a_path, b_path);
  } catch (const std::exception& e) {
    std::cerr << "mpat: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
