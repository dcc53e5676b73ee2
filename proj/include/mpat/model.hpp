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

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpat/nn.hpp"
#include "mpat/textcore.hpp"

namespace mpat {

using Model = nn::Params<double>;
using Segments = std::vector<Tokens>;

/// Black-box view of a text classifier.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Eigen::VectorXd probabilities(const Segments& segments) const = 0;

  /// argmax of probabilities, ties to the lowest class index.
  int predict(const Segments& segments) const;
};

/// Neural model bound to the vocabulary and pad length it was trained with.
class NeuralClassifier final : public Classifier {
 public:
  NeuralClassifier(Model params, Vocabulary vocab, int pad_length);

  Eigen::VectorXd probabilities(const Segments& segments) const override;

  const Model& params() const { return params_; }
  const Vocabulary& vocab() const { return vocab_; }
  int pad_length() const { return pad_length_; }

 private:
  Model params_;
  Vocabulary vocab_;
  int pad_length_;
};

/// Text checkpoint: a manifest line per tensor (`tensor NAME ROWS COLS`)
/// followed by its row-major values. Loading validates every shape against
/// the header and, when given, against `expected`.
std::string checkpoint_to_string(const Model& params);
Model checkpoint_from_string(const std::string& text, const nn::ModelShape* expected = nullptr);
void save_checkpoint(const Model& params, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path, const nn::ModelShape* expected = nullptr);

}  // namespace mpat
