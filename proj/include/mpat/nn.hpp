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

// Desk-scale text classifiers with hand-derived gradients.
//
// Two architectures share an embedding lookup and a classification head:
//
//   MeanPoolMlp:  masked mean over positions -> dense + ReLU -> linear -> softmax
//   TextCnn:      width-3/4/5 convolutions -> max over time -> concat
//                 -> dense + ReLU -> linear -> softmax
//
// The post-ReLU dense layer is the penultimate activation used by the
// manifold regulariser. Types are templated on the scalar; training and the
// gradient checks use double.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mpat::nn {

enum class Arch { MeanPoolMlp, TextCnn };

inline constexpr std::array<int, 3> kFilterWidths{3, 4, 5};

std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view name);

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

struct ModelShape {
  Arch arch = Arch::MeanPoolMlp;
  Index vocab_size = 0;
  Index embed_dim = 16;
  Index hidden_dim = 16;
  Index num_classes = 2;
  /// Filters per width; TextCnn only.
  Index num_filters = 8;

  Index feature_dim() const {
    return arch == Arch::MeanPoolMlp ? embed_dim : num_filters * static_cast<Index>(kFilterWidths.size());
  }
  /// Equality ignores num_filters for MeanPoolMlp.
  friend bool operator==(const ModelShape& a, const ModelShape& b) {
    return a.arch == b.arch && a.vocab_size == b.vocab_size && a.embed_dim == b.embed_dim &&
           a.hidden_dim == b.hidden_dim && a.num_classes == b.num_classes &&
           (a.arch == Arch::MeanPoolMlp || a.num_filters == b.num_filters);
  }
};

/// Model parameters; also used as the gradient container.
template <typename Scalar>
struct Params {
  Arch arch = Arch::MeanPoolMlp;
  RowMatrix<Scalar> embedding;                  // V x d, row 0 (PAD) stays zero
  std::array<Matrix<Scalar>, 3> conv;           // F x (w*d), TextCnn only
  std::array<Vector<Scalar>, 3> conv_bias;      // F
  Matrix<Scalar> hidden_weight;                 // h x feature_dim
  Vector<Scalar> hidden_bias;                   // h
  Matrix<Scalar> output_weight;                 // C x h
  Vector<Scalar> output_bias;                   // C

  ModelShape shape() const {
    return {arch, embedding.rows(), embedding.cols(), hidden_weight.rows(), output_weight.rows(),
            arch == Arch::TextCnn ? conv[0].rows() : 0};
  }

  template <typename NewScalar>
  Params<NewScalar> cast() const {
    Params<NewScalar> out;
    out.arch = arch;
    out.embedding = embedding.template cast<NewScalar>();
    for (std::size_t k = 0; k < 3; ++k) {
      out.conv[k] = conv[k].template cast<NewScalar>();
      out.conv_bias[k] = conv_bias[k].template cast<NewScalar>();
    }
    out.hidden_weight = hidden_weight.template cast<NewScalar>();
    out.hidden_bias = hidden_bias.template cast<NewScalar>();
    out.output_weight = output_weight.template cast<NewScalar>();
    out.output_bias = output_bias.template cast<NewScalar>();
    return out;
  }
};

/// Visits every tensor in a fixed order as f(name, tensor). Conv tensors are
/// skipped for MeanPoolMlp.
template <typename P, typename F>
void for_each_tensor(P& params, F&& f) {
  f(std::string_view("embedding"), params.embedding);
  if (params.arch == Arch::TextCnn) {
    static constexpr std::array<std::string_view, 3> kConv{"conv3", "conv4", "conv5"};
    static constexpr std::array<std::string_view, 3> kBias{"conv3_bias", "conv4_bias", "conv5_bias"};
    for (std::size_t k = 0; k < 3; ++k) {
      f(kConv[k], params.conv[k]);
      f(kBias[k], params.conv_bias[k]);
    }
  }
  f(std::string_view("hidden_weight"), params.hidden_weight);
  f(std::string_view("hidden_bias"), params.hidden_bias);
  f(std::string_view("output_weight"), params.output_weight);
  f(std::string_view("output_bias"), params.output_bias);
}

template <typename P, typename F>
void for_each_tensor_pair(P& a, const P& b, F&& f) {
  f(a.embedding, b.embedding);
  if (a.arch == Arch::TextCnn) {
    for (std::size_t k = 0; k < 3; ++k) {
      f(a.conv[k], b.conv[k]);
      f(a.conv_bias[k], b.conv_bias[k]);
    }
  }
  f(a.hidden_weight, b.hidden_weight);
  f(a.hidden_bias, b.hidden_bias);
  f(a.output_weight, b.output_weight);
  f(a.output_bias, b.output_bias);
}

template <typename Scalar>
Params<Scalar> zero_params(const ModelShape& shape) {
  Params<Scalar> p;
  p.arch = shape.arch;
  p.embedding = RowMatrix<Scalar>::Zero(shape.vocab_size, shape.embed_dim);
  if (shape.arch == Arch::TextCnn) {
    for (std::size_t k = 0; k < 3; ++k) {
      p.conv[k] = Matrix<Scalar>::Zero(shape.num_filters, kFilterWidths[k] * shape.embed_dim);
      p.conv_bias[k] = Vector<Scalar>::Zero(shape.num_filters);
    }
  }
  p.hidden_weight = Matrix<Scalar>::Zero(shape.hidden_dim, shape.feature_dim());
  p.hidden_bias = Vector<Scalar>::Zero(shape.hidden_dim);
  p.output_weight = Matrix<Scalar>::Zero(shape.num_classes, shape.hidden_dim);
  p.output_bias = Vector<Scalar>::Zero(shape.num_classes);
  return p;
}

template <typename Scalar>
Params<Scalar> zeros_like(const Params<Scalar>& params) {
  return zero_params<Scalar>(params.shape());
}

/// Embeddings ~ N(0, 0.1^2) with the PAD row zero; dense and conv weights
/// ~ N(0, 1/fan_in); biases zero.
template <typename Scalar, typename Engine>
Params<Scalar> init_params(const ModelShape& shape, Engine& rng) {
  auto p = zero_params<Scalar>(shape);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto fill = [&](auto& m, double stddev) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = static_cast<Scalar>(stddev * unit(rng));
  };
  fill(p.embedding, 0.1);
  p.embedding.row(0).setZero();
  if (shape.arch == Arch::TextCnn)
    for (auto& w : p.conv) fill(w, 1.0 / std::sqrt(static_cast<double>(w.cols())));
  fill(p.hidden_weight, 1.0 / std::sqrt(static_cast<double>(p.hidden_weight.cols())));
  fill(p.output_weight, 1.0 / std::sqrt(static_cast<double>(p.output_weight.cols())));
  return p;
}

/// Row lookup; ids must be in [0, V).
template <typename Scalar>
RowMatrix<Scalar> embed(const std::vector<int>& ids, const RowMatrix<Scalar>& embedding) {
  RowMatrix<Scalar> out(static_cast<Index>(ids.size()), embedding.cols());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || ids[t] >= embedding.rows())
      throw std::out_of_range("embed: token id " + std::to_string(ids[t]) + " outside vocabulary of size " +
                              std::to_string(embedding.rows()));
    out.row(static_cast<Index>(t)) = embedding.row(ids[t]);
  }
  return out;
}

/// 1 for real tokens, 0 for PAD (id 0).
template <typename Scalar>
Vector<Scalar> mask_of(const std::vector<int>& ids) {
  Vector<Scalar> m(static_cast<Index>(ids.size()));
  for (std::size_t t = 0; t < ids.size(); ++t) m(static_cast<Index>(t)) = ids[t] == 0 ? Scalar(0) : Scalar(1);
  return m;
}

template <typename Scalar>
struct ForwardTrace {
  RowMatrix<Scalar> input;                     // masked embedded input, l x d
  Vector<Scalar> mask;                         // l
  Scalar token_count = 0;                      // MeanPoolMlp denominator
  std::array<Matrix<Scalar>, 3> conv_out;      // (l - w + 1) x F
  std::array<std::vector<Index>, 3> argmax;    // per filter, first maximal position
  Vector<Scalar> features;                     // pooled features
  Vector<Scalar> hidden_pre;
  Vector<Scalar> activation;                   // penultimate a^(L)
  Vector<Scalar> logits;
  Vector<Scalar> probs;
};

template <typename Scalar>
Vector<Scalar> softmax(const Vector<Scalar>& logits) {
  Vector<Scalar> e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

/// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

template <typename Scalar, typename Derived>
ForwardTrace<Scalar> forward(const Params<Scalar>& params, const Eigen::MatrixBase<Derived>& embedded,
                             const Vector<Scalar>& mask) {
  if (embedded.rows() != mask.size() || embedded.cols() != params.embedding.cols())
    throw std::invalid_argument("forward: embedded input is " + std::to_string(embedded.rows()) + "x" +
                                std::to_string(embedded.cols()) + " but mask has " + std::to_string(mask.size()) +
                                " positions and embeddings have width " + std::to_string(params.embedding.cols()));
  ForwardTrace<Scalar> tr;
  tr.mask = mask;
  tr.input = mask.asDiagonal() * embedded.derived();
  const Index len = tr.input.rows();
  const Index dim = tr.input.cols();

  if (params.arch == Arch::MeanPoolMlp) {
    tr.token_count = mask.sum();
    tr.features = Vector<Scalar>::Zero(dim);
    if (tr.token_count > 0) tr.features = tr.input.colwise().sum().transpose() / tr.token_count;
  } else {
    if (len < kFilterWidths.back())
      throw std::invalid_argument("forward: TextCnn needs at least " + std::to_string(kFilterWidths.back()) +
                                  " positions; pad the input (got " + std::to_string(len) + ")");
    const Index filters = params.conv[0].rows();
    tr.features.resize(filters * 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const Index w = kFilterWidths[k];
      const Index steps = len - w + 1;
      auto& out = tr.conv_out[k];
      out.resize(steps, filters);
      for (Index t = 0; t < steps; ++t) {
        Eigen::Map<const Vector<Scalar>> window(tr.input.data() + t * dim, w * dim);
        out.row(t) = (params.conv[k] * window + params.conv_bias[k]).transpose();
      }
      tr.argmax[k].assign(static_cast<std::size_t>(filters), 0);
      for (Index f = 0; f < filters; ++f) {
        Index best = argmax(out.col(f));
        tr.argmax[k][static_cast<std::size_t>(f)] = best;
        tr.features(static_cast<Index>(k) * filters + f) = out(best, f);
      }
    }
  }
  tr.hidden_pre = params.hidden_weight * tr.features + params.hidden_bias;
  tr.activation = tr.hidden_pre.cwiseMax(Scalar(0));
  tr.logits = params.output_weight * tr.activation + params.output_bias;
  tr.probs = softmax<Scalar>(tr.logits);
  return tr;
}

template <typename Scalar>
ForwardTrace<Scalar> forward(const Params<Scalar>& params, const std::vector<int>& ids) {
  return forward(params, embed(ids, params.embedding), mask_of<Scalar>(ids));
}

/// -log p_y via log-sum-exp.
template <typename Scalar>
Scalar loss_ce(const ForwardTrace<Scalar>& trace, int label) {
  if (label < 0 || label >= trace.logits.size()) throw std::out_of_range("loss_ce: label out of range");
  const Scalar m = trace.logits.maxCoeff();
  return m + std::log((trace.logits.array() - m).exp().sum()) - trace.logits(label);
}

template <typename Scalar>
struct Backprop {
  Params<Scalar> grads;         // embedding left zero; see scatter_embedding
  RowMatrix<Scalar> input_grad; // dL/dE, zero on PAD rows
};

/// Reverse pass given upstream gradients on the logits and, optionally, on
/// the penultimate activation (empty vector = none).
template <typename Scalar>
Backprop<Scalar> backward(const Params<Scalar>& params, const ForwardTrace<Scalar>& tr, const Vector<Scalar>& dlogits,
                          const Vector<Scalar>& dactivation) {
  Backprop<Scalar> bp{zeros_like(params), RowMatrix<Scalar>::Zero(tr.input.rows(), tr.input.cols())};
  auto& g = bp.grads;
  g.output_weight = dlogits * tr.activation.transpose();
  g.output_bias = dlogits;
  Vector<Scalar> dact = params.output_weight.transpose() * dlogits;
  if (dactivation.size() > 0) dact += dactivation;
  Vector<Scalar> dpre = (tr.hidden_pre.array() > Scalar(0)).select(dact.array(), Scalar(0)).matrix();
  g.hidden_weight = dpre * tr.features.transpose();
  g.hidden_bias = dpre;
  Vector<Scalar> dfeat = params.hidden_weight.transpose() * dpre;

  auto& dx = bp.input_grad;
  const Index dim = tr.input.cols();
  if (params.arch == Arch::MeanPoolMlp) {
    if (tr.token_count > 0) dx.rowwise() += (dfeat / tr.token_count).transpose();
  } else {
    const Index filters = params.conv[0].rows();
    for (std::size_t k = 0; k < 3; ++k) {
      const Index w = kFilterWidths[k];
      for (Index f = 0; f < filters; ++f) {
        const Scalar up = dfeat(static_cast<Index>(k) * filters + f);
        if (up == Scalar(0)) continue;
        const Index t = tr.argmax[k][static_cast<std::size_t>(f)];
        Eigen::Map<const Vector<Scalar>> window(tr.input.data() + t * dim, w * dim);
        g.conv[k].row(f) += up * window.transpose();
        g.conv_bias[k](f) += up;
        Eigen::Map<Vector<Scalar>> dwindow(dx.data() + t * dim, w * dim);
        dwindow += up * params.conv[k].row(f).transpose();
      }
    }
  }
  dx = tr.mask.asDiagonal() * dx;
  return bp;
}

/// Accumulates dL/dE into embedding rows; the PAD row stays frozen.
template <typename Scalar>
void scatter_embedding(RowMatrix<Scalar>& embedding_grad, const std::vector<int>& ids,
                       const RowMatrix<Scalar>& input_grad) {
  for (std::size_t t = 0; t < ids.size(); ++t)
    if (ids[t] != 0) embedding_grad.row(ids[t]) += input_grad.row(static_cast<Index>(t));
}

template <typename Scalar>
Vector<Scalar> ce_logit_grad(const ForwardTrace<Scalar>& tr, int label) {
  Vector<Scalar> d = tr.probs;
  d(label) -= Scalar(1);
  return d;
}

/// dL_ce/dtheta including the embedding rows addressed by `ids`.
template <typename Scalar>
Params<Scalar> grad_params(const Params<Scalar>& params, const ForwardTrace<Scalar>& tr, const std::vector<int>& ids,
                           int label) {
  auto bp = backward(params, tr, ce_logit_grad(tr, label), Vector<Scalar>());
  scatter_embedding(bp.grads.embedding, ids, bp.input_grad);
  return std::move(bp.grads);
}

/// dL_ce/dE at the (possibly perturbed) embedded input.
template <typename Scalar>
RowMatrix<Scalar> grad_input(const Params<Scalar>& params, const ForwardTrace<Scalar>& tr, int label) {
  return backward(params, tr, ce_logit_grad(tr, label), Vector<Scalar>()).input_grad;
}

template <typename Scalar>
struct ManifoldTerm {
  Scalar value = 0;
  Vector<Scalar> grad_a;        // dG/da  = a - a'
  Vector<Scalar> grad_a_prime;  // dG/da' = a' - a
};

/// G(a, a') = 1/2 ||a - a'||^2.
template <typename Scalar>
ManifoldTerm<Scalar> manifold_loss(const Vector<Scalar>& a, const Vector<Scalar>& a_prime) {
  if (a.size() != a_prime.size())
    throw std::invalid_argument("manifold_loss: activation sizes differ (" + std::to_string(a.size()) + " vs " +
                                std::to_string(a_prime.size()) + ")");
  Vector<Scalar> diff = a - a_prime;
  return {Scalar(0.5) * diff.squaredNorm(), diff, -diff};
}

template <typename Scalar>
void add_scaled(Params<Scalar>& acc, Scalar scale, const Params<Scalar>& g) {
  for_each_tensor_pair(acc, g, [scale](auto& x, const auto& y) { x += scale * y; });
}

template <typename Scalar>
void scale(Params<Scalar>& p, Scalar factor) {
  for_each_tensor(p, [factor](std::string_view, auto& t) { t *= factor; });
}

}  // namespace mpat::nn
