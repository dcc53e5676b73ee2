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

#include "mpat/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace mpat {

namespace {

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "shuffle", static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  return order;
}

void check_finite(double loss, int epoch, std::size_t batch) {
  if (!std::isfinite(loss))
    throw TrainingDiverged("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch) + "; lower tau or epsilon");
}

Segments replace_last(const Example& ex, const Tokens& last) {
  Segments segs = ex.segments;
  segs.back() = last;
  return segs;
}

// Shared FreeAT-style loop for BPAT and MPAT. `sample` returns the segments
// of x' for example i in the given outer epoch.
template <typename Sampler>
TrainResult train_adversarial(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                              Sampler&& sample, const StepObserver& observer) {
  cfg.validate();
  if (cfg.epochs % cfg.k_steps != 0)
    throw std::invalid_argument("epochs (" + std::to_string(cfg.epochs) + ") must be a multiple of k_steps (" +
                                std::to_string(cfg.k_steps) + ")");
  const int pad = data.pad_length;
  const nn::Index dim = model.embedding.cols();
  const std::size_t n = data.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t slots = cfg.delta_scope == DeltaScope::BatchSlot ? batch : n;
  std::vector<Delta> deltas(slots, Delta::Zero(pad, dim));

  std::vector<std::vector<int>> clean_ids(n);
  for (std::size_t i = 0; i < n; ++i) clean_ids[i] = encode(data.examples[i], vocab, pad);

  TrainResult result;
  const int outer = cfg.epochs / cfg.k_steps;
  for (int epoch = 1; epoch <= outer; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0, manifold_sum = 0;
    long seen = 0, correct = 0;
    auto order = shuffled_order(n, cfg.seed, epoch);
    for (std::size_t b0 = 0, bi = 0; b0 < n; b0 += batch, ++bi) {
      const std::size_t b1 = std::min(n, b0 + batch);
      if (cfg.delta_policy == DeltaPolicy::PerBatch)
        for (auto& d : deltas) d.setZero();

      std::vector<std::vector<int>> prime_ids;
      prime_ids.reserve(b1 - b0);
      for (std::size_t k = b0; k < b1; ++k) prime_ids.push_back(encode(sample(order[k], epoch), vocab, pad));

      for (int step = 0; step < cfg.k_steps; ++step) {
        Model grad_sum = nn::zeros_like(model);
        for (std::size_t k = b0; k < b1; ++k) {
          const std::size_t ex = order[k];
          auto& delta = deltas[cfg.delta_scope == DeltaScope::BatchSlot ? k - b0 : ex];
          auto g = grad_theta(model, clean_ids[ex], prime_ids[k - b0], delta, data.examples[ex].label, cfg.lambda,
                              cfg.g_on_delta);
          check_finite(g.loss, epoch, bi);
          delta = ascent_step(delta, g.input_grad, cfg.epsilon);
          stats.max_abs_delta = std::max(stats.max_abs_delta, delta.cwiseAbs().maxCoeff());
          nn::add_scaled(grad_sum, 1.0, g.grads);
          loss_sum += g.loss;
          manifold_sum += g.manifold;
          correct += g.correct ? 1 : 0;
          ++seen;
        }
        nn::scale(grad_sum, 1.0 / static_cast<double>(b1 - b0));
        descent_step(model, grad_sum, cfg.tau);
        ++stats.updates;
        if (observer) observer({epoch, bi, step, model, deltas});
      }
    }
    if (seen > 0) {
      stats.mean_loss = loss_sum / static_cast<double>(seen);
      stats.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
      stats.mean_manifold = manifold_sum / static_cast<double>(seen);
    }
    result.history.epochs.push_back(stats);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
  if (k_steps < 1) throw std::invalid_argument("k_steps must be at least 1");
  if (!(lambda >= 0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(rate_r > 0 && rate_r < 1)) throw std::invalid_argument("rate_r must lie in (0, 1)");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
}

const std::set<std::string>& train_config_keys() {
  static const std::set<std::string> keys{"mode",   "epsilon",    "tau",       "lambda",       "k_steps",
                                          "rate_r", "epochs",     "batch_size", "seed",        "delta_policy",
                                          "g_on_delta", "delta_scope"};
  return keys;
}

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::Vanilla: return "vanilla";
    case TrainMode::Bpat: return "bpat";
    case TrainMode::Mpat: return "mpat";
  }
  return "vanilla";
}

TrainConfig train_config_from(const KeyValueConfig& kv) {
  TrainConfig cfg;
  auto mode = kv.get_string("mode", "vanilla");
  if (mode == "vanilla") cfg.mode = TrainMode::Vanilla;
  else if (mode == "bpat") cfg.mode = TrainMode::Bpat;
  else if (mode == "mpat") cfg.mode = TrainMode::Mpat;
  else throw std::runtime_error("config key 'mode': expected vanilla, bpat or mpat, got '" + mode + "'");
  cfg.epsilon = kv.get_double("epsilon", cfg.epsilon);
  cfg.tau = kv.get_double("tau", cfg.tau);
  cfg.lambda = kv.get_double("lambda", cfg.lambda);
  cfg.k_steps = static_cast<int>(kv.get_int("k_steps", cfg.k_steps));
  cfg.rate_r = kv.get_double("rate_r", cfg.rate_r);
  cfg.epochs = static_cast<int>(kv.get_int("epochs", cfg.epochs));
  cfg.batch_size = static_cast<int>(kv.get_int("batch_size", cfg.batch_size));
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(cfg.seed)));
  auto policy = kv.get_string("delta_policy", "carry");
  if (policy == "carry") cfg.delta_policy = DeltaPolicy::Carry;
  else if (policy == "per_batch") cfg.delta_policy = DeltaPolicy::PerBatch;
  else throw std::runtime_error("config key 'delta_policy': expected carry or per_batch, got '" + policy + "'");
  auto scope = kv.get_string("delta_scope", "batch_slot");
  if (scope == "batch_slot") cfg.delta_scope = DeltaScope::BatchSlot;
  else if (scope == "example") cfg.delta_scope = DeltaScope::Example;
  else throw std::runtime_error("config key 'delta_scope': expected batch_slot or example, got '" + scope + "'");
  cfg.g_on_delta = kv.get_bool("g_on_delta", cfg.g_on_delta);
  cfg.validate();
  return cfg;
}

long TrainHistory::total_updates() const {
  long n = 0;
  for (const auto& e : epochs) n += e.updates;
  return n;
}

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,mean_loss,train_acc,mean_manifold_term\n";
  for (const auto& e : epochs)
    out += std::to_string(e.epoch) + "," + format_double(e.mean_loss) + "," + format_double(e.train_acc) + "," +
           format_double(e.mean_manifold) + "\n";
  return out;
}

void descent_step(Model& theta, const Model& grad, double tau) {
  nn::add_scaled(theta, -tau, grad);
  theta.embedding.row(0).setZero();
}

ThetaGradient grad_theta(const Model& params, const std::vector<int>& x_ids, const std::vector<int>& x_prime_ids,
                         const Delta& delta, int label, double lambda, bool g_on_delta) {
  if (static_cast<nn::Index>(x_prime_ids.size()) != delta.rows())
    throw std::invalid_argument("grad_theta: delta has " + std::to_string(delta.rows()) + " rows but x' has " +
                                std::to_string(x_prime_ids.size()) + " positions");
  ThetaGradient out;
  const auto mask_prime = nn::mask_of<double>(x_prime_ids);
  Delta perturbed = nn::embed(x_prime_ids, params.embedding) + delta;
  auto adv = nn::forward(params, perturbed, mask_prime);
  out.loss = nn::loss_ce(adv, label);
  out.correct = nn::argmax(adv.probs) == label;
  auto bp = nn::backward(params, adv, nn::ce_logit_grad(adv, label), nn::Vector<double>());
  nn::scatter_embedding(bp.grads.embedding, x_prime_ids, bp.input_grad);
  out.grads = std::move(bp.grads);
  out.input_grad = std::move(bp.input_grad);

  if (lambda > 0) {
    auto clean = nn::forward(params, x_ids);
    std::optional<nn::ForwardTrace<double>> plain_prime;
    if (!g_on_delta) plain_prime = nn::forward(params, x_prime_ids);
    const auto& prime = g_on_delta ? adv : *plain_prime;
    auto term = nn::manifold_loss(clean.activation, prime.activation);
    out.manifold = term.value;
    const nn::Vector<double> no_logit_grad = nn::Vector<double>::Zero(clean.logits.size());
    auto bx = nn::backward(params, clean, no_logit_grad, term.grad_a);
    nn::scatter_embedding(bx.grads.embedding, x_ids, bx.input_grad);
    auto bxp = nn::backward(params, prime, no_logit_grad, term.grad_a_prime);
    nn::scatter_embedding(bxp.grads.embedding, x_prime_ids, bxp.input_grad);
    nn::add_scaled(out.grads, lambda, bx.grads);
    nn::add_scaled(out.grads, lambda, bxp.grads);
  }
  return out;
}

TrainResult train_vanilla(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                          const StepObserver& observer) {
  cfg.validate();
  const std::size_t n = data.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::vector<int>> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = encode(data.examples[i], vocab, data.pad_length);
  const std::vector<Delta> no_deltas;

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0;
    long correct = 0;
    auto order = shuffled_order(n, cfg.seed, epoch);
    for (std::size_t b0 = 0, bi = 0; b0 < n; b0 += batch, ++bi) {
      const std::size_t b1 = std::min(n, b0 + batch);
      Model grad_sum = nn::zeros_like(model);
      for (std::size_t k = b0; k < b1; ++k) {
        const auto& ex = data.examples[order[k]];
        const auto& x = ids[order[k]];
        auto trace = nn::forward(model, x);
        double loss = nn::loss_ce(trace, ex.label);
        check_finite(loss, epoch, bi);
        loss_sum += loss;
        correct += nn::argmax(trace.probs) == ex.label ? 1 : 0;
        nn::add_scaled(grad_sum, 1.0, nn::grad_params(model, trace, x, ex.label));
      }
      nn::scale(grad_sum, 1.0 / static_cast<double>(b1 - b0));
      descent_step(model, grad_sum, cfg.tau);
      ++stats.updates;
      if (observer) observer({epoch, bi, 0, model, no_deltas});
    }
    if (n > 0) {
      stats.mean_loss = loss_sum / static_cast<double>(n);
      stats.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    }
    result.history.epochs.push_back(stats);
  }
  result.model = std::move(model);
  return result;
}

TrainResult train_bpat(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                       const StepObserver& observer) {
  TrainConfig bpat = cfg;
  bpat.lambda = 0.0;
  return train_adversarial(
      data, vocab, std::move(model), bpat,
      [&](std::size_t i, int) -> const Segments& { return data.examples[i].segments; }, observer);
}

TrainResult train_mpat(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                       const PerturbationContext& perturb, const StepObserver& observer) {
  GenConfig gen = perturb.config;
  gen.rate = cfg.rate_r;
  gen.validate();

  std::vector<std::vector<Tokens>> survivors(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    survivors[i] = filtered_paraphrases(data.examples[i].segments.back(), perturb);

  return train_adversarial(
      data, vocab, std::move(model), cfg,
      [&](std::size_t i, int epoch) {
        const auto& ex = data.examples[i];
        Rng rng(derive_seed(cfg.seed, ex.id, static_cast<std::uint64_t>(epoch)));
        auto pm = assemble_pm(ex.id, ex.segments.back(), survivors[i], perturb.thesaurus, gen, rng);
        return replace_last(ex, random_sample(pm, rng));
      },
      observer);
}

TrainResult train(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                  const PerturbationContext* perturb, const StepObserver& observer) {
  switch (cfg.mode) {
    case TrainMode::Vanilla: return train_vanilla(data, vocab, std::move(model), cfg, observer);
    case TrainMode::Bpat: return train_bpat(data, vocab, std::move(model), cfg, observer);
    case TrainMode::Mpat:
      if (!perturb) throw std::invalid_argument("mpat training requires perturbation components");
      return train_mpat(data, vocab, std::move(model), cfg, *perturb, observer);
  }
  throw std::logic_error("unreachable");
}

}  // namespace mpat
