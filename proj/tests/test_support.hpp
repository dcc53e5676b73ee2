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

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpat/model.hpp"
#include "mpat/nn.hpp"
#include "mpat/perturbgen.hpp"
#include "mpat/util.hpp"

namespace mpat::testing {

// Two classes; logit(1) - logit(0) is a sum of per-word weights plus a bias.
class LinearVictim final : public Classifier {
 public:
  LinearVictim(std::map<std::string, double> weights, double bias) : weights_(std::move(weights)), bias_(bias) {}

  double margin(const Segments& segments) const {
    double s = bias_;
    for (const auto& seg : segments)
      for (const auto& w : seg) {
        auto it = weights_.find(w);
        if (it != weights_.end()) s += it->second;
      }
    return s;
  }

  Eigen::VectorXd probabilities(const Segments& segments) const override {
    const double s = margin(segments);
    Eigen::VectorXd p(2);
    p(1) = 1.0 / (1.0 + std::exp(-s));
    p(0) = 1.0 - p(1);
    return p;
  }

 private:
  std::map<std::string, double> weights_;
  double bias_;
};

class ConstantVictim final : public Classifier {
 public:
  explicit ConstantVictim(Eigen::VectorXd probs) : probs_(std::move(probs)) {}
  Eigen::VectorXd probabilities(const Segments&) const override { return probs_; }

 private:
  Eigen::VectorXd probs_;
};

// Random parameters with non-zero biases so that ReLU units are mixed.
inline Model random_model(nn::Arch arch, int vocab, int dim, int hidden, int classes, int filters, Rng& rng) {
  nn::ModelShape shape{arch, vocab, dim, hidden, classes, filters};
  auto p = nn::init_params<double>(shape, rng);
  std::normal_distribution<double> n(0.0, 0.5);
  p.embedding = p.embedding * 5.0;
  p.embedding.row(0).setZero();
  for (auto& b : p.conv_bias)
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = n(rng);
  for (Eigen::Index i = 0; i < p.hidden_bias.size(); ++i) p.hidden_bias(i) = n(rng);
  for (Eigen::Index i = 0; i < p.output_bias.size(); ++i) p.output_bias(i) = n(rng);
  return p;
}

inline std::vector<int> random_ids(int length, int vocab, int pad_tail, Rng& rng) {
  std::vector<int> ids;
  for (int t = 0; t < length; ++t) ids.push_back(1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(vocab - 1))));
  for (int t = 0; t < pad_tail; ++t) ids.push_back(0);
  return ids;
}

// |a - b| / max(|a|, |b|) over the whole tensor; 0 when both vanish.
template <typename A, typename B>
double relative_error(const A& a, const B& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale < 1e-12) return 0.0;
  return (a - b).norm() / scale;
}

}  // namespace mpat::testing
