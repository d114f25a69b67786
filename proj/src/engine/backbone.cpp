// Copyright 2026 The SegWorld Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segworld/engine/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "segworld/error.hpp"

namespace segworld::engine {

void check_image(const GridImage& image, const Backbone& backbone) {
  if (image.size() == 0) throw InvalidArgument("image has no cells");
  if (image.max_token() >= backbone.visual_vocab_size()) {
    throw InvalidArgument("image token " + std::to_string(image.max_token()) +
                          " exceeds the backbone's visual vocabulary (" +
                          std::to_string(backbone.visual_vocab_size()) + ")");
  }
}

SegProjection::SegProjection(autodiff::Parameter& weight, autodiff::Parameter& bias)
    : weight_(&weight), bias_(&bias) {
  if (bias.value.rows() != 1 || bias.value.cols() != weight.value.rows()) {
    throw DimensionMismatch("projection bias must be 1 x prompt_dim");
  }
}

PromptEmbedding SegProjection::project(const SegState& state) const {
  if (state.hidden.size() != weight_->value.cols()) {
    throw DimensionMismatch("SegState has dimension " + std::to_string(state.hidden.size()) +
                            ", projection expects " + std::to_string(weight_->value.cols()));
  }
  if (!state.hidden.allFinite()) throw InvalidArgument("SegState has non-finite entries");
  Eigen::VectorXd out = weight_->value * state.hidden + bias_->value.row(0).transpose();
  return PromptEmbedding(std::move(out));
}

autodiff::Var SegProjection::forward(autodiff::Tape& tape, const autodiff::Var& hidden) const {
  auto w = tape.parameter(*weight_);
  auto b = tape.parameter(*bias_);
  return autodiff::add(autodiff::matmul_bt(hidden, w), b);
}

MaskDecoder::MaskDecoder(autodiff::Parameter& u, autodiff::Parameter& bias) : u_(&u), bias_(&bias) {
  if (bias.value.rows() != 1 || bias.value.cols() != 1) {
    throw DimensionMismatch("decoder bias must be 1 x 1");
  }
}

std::vector<double> MaskDecoder::logits(const PromptEmbedding& prompt,
                                        const FeatureGrid& features) const {
  if (prompt.size() != u_->value.rows()) throw DimensionMismatch("prompt dimension");
  if (features.features.cols() != u_->value.cols()) throw DimensionMismatch("feature dimension");
  if (features.features.rows() != static_cast<Eigen::Index>(features.width) * features.height) {
    throw DimensionMismatch("feature grid does not match its dimensions");
  }
  // (cells x fd) (fd x P) (P) computed as cells x fd times (U^T prompt).
  const Eigen::VectorXd key = u_->value.transpose() * prompt.values();
  Eigen::VectorXd z = features.features * key;
  z.array() += bias_->value(0, 0);
  return std::vector<double>(z.data(), z.data() + z.size());
}

Matrix MaskDecoder::feature_keys(const FeatureGrid& features) const {
  if (features.features.cols() != u_->value.cols()) throw DimensionMismatch("feature dimension");
  return features.features * u_->value.transpose();
}

std::vector<double> MaskDecoder::probabilities(const PromptEmbedding& prompt,
                                               const FeatureGrid& features) const {
  auto z = logits(prompt, features);
  for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
  return z;
}

autodiff::Var MaskDecoder::forward(autodiff::Tape& tape, const autodiff::Var& prompt,
                                   const FeatureGrid& features) const {
  if (features.features.cols() != u_->value.cols()) throw DimensionMismatch("feature dimension");
  auto u = tape.parameter(*u_);
  auto b = tape.parameter(*bias_);
  auto f = tape.constant(features.features);
  // key = prompt U  (1 x fd); logits = F key^T + b  (cells x 1).
  auto key = autodiff::matmul(prompt, u);
  return autodiff::add(autodiff::matmul_bt(f, key), b);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (double v : out) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  for (double& v : out) v -= lse;
  return out;
}

}  // namespace segworld::engine
