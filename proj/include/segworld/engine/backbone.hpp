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

#pragma once

// The contract every sequence backbone honours, plus the two learned maps
// downstream of it: the [SEG]-state projection and the mask decoder.

#include <memory>
#include <span>
#include <vector>

#include "segworld/domain.hpp"
#include "segworld/engine/autodiff.hpp"
#include "segworld/engine/vocab.hpp"

namespace segworld::engine {

using autodiff::Matrix;

/// Which forward pass a decoding session belongs to. Each pass has its own
/// learned prompt; everything else in the backbone is shared.
enum class Pass { kObserve, kResolve };

/// Per-cell features of an image (cells x feature_dim, row-major cells).
struct FeatureGrid {
  int width = 0;
  int height = 0;
  Matrix features;
};

/// Hidden state captured at the [SEG] token.
struct SegState {
  Eigen::VectorXd hidden;
};

/// Decoder prompt produced from a SegState by SegProjection.
class PromptEmbedding {
 public:
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }

 private:
  friend class SegProjection;
  explicit PromptEmbedding(Eigen::VectorXd v) : values_(std::move(v)) {}
  Eigen::VectorXd values_;
};

struct StepOutput {
  /// Log-probabilities of the next token, one per vocabulary entry.
  std::vector<double> logprobs;
  /// Final hidden state at the token just fed.
  Eigen::VectorXd hidden;
};

/// Incremental decoding over one sequence. Sessions own their caches, so any
/// number may run concurrently over a shared backbone.
class DecodeSession {
 public:
  virtual ~DecodeSession() = default;
  virtual StepOutput feed(TokenId token) = 0;
};

class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual const TextVocab& vocab() const = 0;
  virtual int hidden_dim() const = 0;
  /// Largest accepted visual token id plus one.
  virtual int visual_vocab_size() const = 0;
  virtual int feature_dim() const = 0;

  /// Frozen image encoder.
  virtual FeatureGrid encode_image(const GridImage& image) const = 0;
  /// Starts a sequence: image tokens followed by the pass prompt.
  virtual std::unique_ptr<DecodeSession> open(const GridImage& image, Pass pass) const = 0;
};

/// Throws InvalidArgument when the image holds tokens the backbone cannot
/// embed.
void check_image(const GridImage& image, const Backbone& backbone);

/// Affine map from the [SEG] hidden state to the decoder prompt:
/// prompt = W h + b with W stored as (prompt_dim x hidden_dim).
class SegProjection {
 public:
  SegProjection(autodiff::Parameter& weight, autodiff::Parameter& bias);

  int input_dim() const { return static_cast<int>(weight_->value.cols()); }
  int prompt_dim() const { return static_cast<int>(weight_->value.rows()); }

  PromptEmbedding project(const SegState& state) const;
  /// Differentiable form: `hidden` is 1 x hidden_dim, result 1 x prompt_dim.
  autodiff::Var forward(autodiff::Tape& tape, const autodiff::Var& hidden) const;

 private:
  autodiff::Parameter* weight_;
  autodiff::Parameter* bias_;
};

/// Per-cell bilinear scorer: logit(cell) = prompt . (U feature(cell)) + bias.
class MaskDecoder {
 public:
  MaskDecoder(autodiff::Parameter& u, autodiff::Parameter& bias);

  int prompt_dim() const { return static_cast<int>(u_->value.rows()); }
  int feature_dim() const { return static_cast<int>(u_->value.cols()); }

  std::vector<double> logits(const PromptEmbedding& prompt, const FeatureGrid& features) const;
  /// Cell features mapped into prompt space, U f per cell (cells x prompt_dim).
  Matrix feature_keys(const FeatureGrid& features) const;
  /// Sigmoid of logits.
  std::vector<double> probabilities(const PromptEmbedding& prompt,
                                    const FeatureGrid& features) const;
  /// Differentiable form: `prompt` is 1 x prompt_dim, result cells x 1.
  autodiff::Var forward(autodiff::Tape& tape, const autodiff::Var& prompt,
                        const FeatureGrid& features) const;

 private:
  autodiff::Parameter* u_;
  autodiff::Parameter* bias_;
};

/// Log-softmax of a logit row.
std::vector<double> log_softmax(std::span<const double> logits);

}  // namespace segworld::engine
