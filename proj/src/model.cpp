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

#include "mpat/model.hpp"

#include <sstream>
#include <stdexcept>

namespace mpat {

namespace nn {

std::string_view to_string(Arch arch) { return arch == Arch::MeanPoolMlp ? "meanpool_mlp" : "text_cnn"; }

Arch parse_arch(std::string_view name) {
  if (name == "meanpool_mlp" || name == "mlp") return Arch::MeanPoolMlp;
  if (name == "text_cnn" || name == "cnn") return Arch::TextCnn;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "' (expected meanpool_mlp or text_cnn)");
}

}  // namespace nn

int Classifier::predict(const Segments& segments) const {
  return static_cast<int>(nn::argmax(probabilities(segments)));
}

NeuralClassifier::NeuralClassifier(Model params, Vocabulary vocab, int pad_length)
    : params_(std::move(params)), vocab_(std::move(vocab)), pad_length_(pad_length) {
  if (params_.embedding.rows() != vocab_.size())
    throw std::invalid_argument("model embedding has " + std::to_string(params_.embedding.rows()) +
                                " rows but the vocabulary has " + std::to_string(vocab_.size()) + " entries");
}

Eigen::VectorXd NeuralClassifier::probabilities(const Segments& segments) const {
  return nn::forward(params_, encode(segments, vocab_, pad_length_)).probs;
}

std::string checkpoint_to_string(const Model& params) {
  const auto shape = params.shape();
  std::ostringstream out;
  out << "mpat-checkpoint 1\n";
  out << "arch " << nn::to_string(shape.arch) << "\n";
  out << "shape " << shape.vocab_size << " " << shape.embed_dim << " " << shape.hidden_dim << " "
      << shape.num_classes << " " << shape.num_filters << "\n";
  nn::for_each_tensor(params, [&](std::string_view name, const auto& t) {
    out << "tensor " << name << " " << t.rows() << " " << t.cols() << "\n";
    for (nn::Index r = 0; r < t.rows(); ++r) {
      for (nn::Index c = 0; c < t.cols(); ++c) out << (c ? " " : "") << format_double(t(r, c));
      out << "\n";
    }
  });
  return out.str();
}

Model checkpoint_from_string(const std::string& text, const nn::ModelShape* expected) {
  std::istringstream in(text);
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "mpat-checkpoint" || version != 1)
    throw std::runtime_error("checkpoint: bad header");
  std::string arch_name;
  if (!(in >> word >> arch_name) || word != "arch") throw std::runtime_error("checkpoint: missing arch line");
  nn::ModelShape shape;
  shape.arch = nn::parse_arch(arch_name);
  if (!(in >> word >> shape.vocab_size >> shape.embed_dim >> shape.hidden_dim >> shape.num_classes >>
        shape.num_filters) ||
      word != "shape")
    throw std::runtime_error("checkpoint: missing shape line");
  if (expected && !(*expected == shape)) throw std::runtime_error("checkpoint: model shape does not match expected shape");

  Model params = nn::zero_params<double>(shape);
  nn::for_each_tensor(params, [&](std::string_view name, auto& t) {
    std::string got_name;
    nn::Index rows = 0, cols = 0;
    if (!(in >> word >> got_name >> rows >> cols) || word != "tensor")
      throw std::runtime_error("checkpoint: expected tensor " + std::string(name));
    if (got_name != name) throw std::runtime_error("checkpoint: expected tensor " + std::string(name) + ", found " + got_name);
    if (rows != t.rows() || cols != t.cols())
      throw std::runtime_error("checkpoint: tensor " + got_name + " has shape " + std::to_string(rows) + "x" +
                               std::to_string(cols) + ", expected " + std::to_string(t.rows()) + "x" +
                               std::to_string(t.cols()));
    for (nn::Index r = 0; r < rows; ++r)
      for (nn::Index c = 0; c < cols; ++c) {
        std::string v;
        if (!(in >> v)) throw std::runtime_error("checkpoint: truncated tensor " + got_name);
        t(r, c) = std::stod(v);
      }
  });
  if (in >> word) throw std::runtime_error("checkpoint: unexpected trailing data '" + word + "'");
  return params;
}

void save_checkpoint(const Model& params, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_string(params));
}

Model load_checkpoint(const std::filesystem::path& path, const nn::ModelShape* expected) {
  try {
    return checkpoint_from_string(read_file(path), expected);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace mpat
