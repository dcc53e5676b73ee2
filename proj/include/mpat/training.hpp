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
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpat/config.hpp"
#include "mpat/model.hpp"
#include "mpat/nn.hpp"
#include "mpat/perturbgen.hpp"
#include "mpat/textcore.hpp"

namespace mpat {

enum class TrainMode { Vanilla, Bpat, Mpat };
/// Carry: delta persists across minibatches. PerBatch: reset to zero per batch.
enum class DeltaPolicy { Carry, PerBatch };
/// BatchSlot: one delta per position within the minibatch. Example: one per
/// training example.
enum class DeltaScope { BatchSlot, Example };

using Delta = nn::RowMatrix<double>;

struct TrainConfig {
  TrainMode mode = TrainMode::Vanilla;
  double epsilon = 0.0005;
  double tau = 0.1;
  double lambda = 1.0;
  int k_steps = 3;
  double rate_r = 0.35;
  /// Total epoch budget. Adversarial modes run epochs / k_steps outer passes
  /// with k_steps replays per minibatch.
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 1;
  DeltaPolicy delta_policy = DeltaPolicy::Carry;
  DeltaScope delta_scope = DeltaScope::BatchSlot;
  /// Evaluate the manifold term's perturbed activation on x' + delta.
  bool g_on_delta = false;

  void validate() const;
};

const std::set<std::string>& train_config_keys();
TrainConfig train_config_from(const KeyValueConfig& kv);
std::string to_string(TrainMode mode);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0;
  double train_acc = 0;
  double mean_manifold = 0;
  /// Largest |delta| entry seen after any ascent step in this epoch.
  double max_abs_delta = 0;
  /// Parameter updates performed in this epoch.
  long updates = 0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;

  long total_updates() const;
  /// Columns: epoch, mean_loss, train_acc, mean_manifold_term.
  std::string to_csv() const;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Called after every parameter update.
struct StepEvent {
  int epoch;
  std::size_t batch;
  int inner_step;
  const Model& params;
  const std::vector<Delta>& deltas;
};
using StepObserver = std::function<void(const StepEvent&)>;

/// Elementwise projection onto [-eps, eps].
template <typename Derived>
auto clip_delta(const Eigen::MatrixBase<Derived>& delta, typename Derived::Scalar eps) {
  return delta.cwiseMax(-eps).cwiseMin(eps);
}

/// delta + eps * sign(g), projected back onto the eps-ball. sign(0) = 0.
template <typename DerivedD, typename DerivedG>
auto ascent_step(const Eigen::MatrixBase<DerivedD>& delta, const Eigen::MatrixBase<DerivedG>& grad,
                 typename DerivedD::Scalar eps) {
  return clip_delta(delta + eps * grad.cwiseSign(), eps);
}

/// theta - tau * g. The PAD embedding row is kept at zero.
void descent_step(Model& theta, const Model& grad, double tau);

struct ThetaGradient {
  Model grads;
  /// dL_model/dE at embed(x') + delta; the ascent direction.
  Delta input_grad;
  double loss = 0;
  double manifold = 0;
  bool correct = false;
};

/// grad_theta L_model(f(x' + delta), y) + lambda * grad_theta G(x, x').
/// Ids are pad-length encodings; delta has the same number of rows.
ThetaGradient grad_theta(const Model& params, const std::vector<int>& x_ids, const std::vector<int>& x_prime_ids,
                         const Delta& delta, int label, double lambda, bool g_on_delta);

TrainResult train_vanilla(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                          const StepObserver& observer = {});

TrainResult train_bpat(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                       const StepObserver& observer = {});

/// P_m stages that do not depend on randomness are computed once per example;
/// synonym sampling and the draw of x' use a stream derived from
/// (seed, example id, epoch).
TrainResult train_mpat(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                       const PerturbationContext& perturb, const StepObserver& observer = {});

/// Dispatches on cfg.mode; `perturb` is required for Mpat.
TrainResult train(const Dataset& data, const Vocabulary& vocab, Model model, const TrainConfig& cfg,
                  const PerturbationContext* perturb, const StepObserver& observer = {});

}  // namespace mpat
