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

// Desk-scale trainable backbone: a pre-norm causal transformer over
// (image tokens | pass prompt | text tokens).
//
// Image cells are embedded as visual-token + row + column embeddings, the
// pass prompt is a short learned block (observe.prompt or resolve.prompt),
// and text tokens get token + position embeddings. Hidden states are
// RMS-normalised after the last layer; next-token logits come from a linear
// head. The frozen image encoder is a fixed random table per visual token.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "segworld/engine/autodiff.hpp"
#include "segworld/engine/backbone.hpp"

namespace segworld::engine {

struct ToyBackboneConfig {
  int hidden = 64;
  int layers = 2;
  int heads = 4;
  int mlp = 128;
  int prompt_len = 2;
  int max_text = 192;
  int max_grid = 16;
  int visual_vocab = 1;
  int feature_dim = 32;
  std::uint64_t seed = 7;
};

class ToyBackbone final : public Backbone {
 public:
  /// Registers (and randomly initialises) every backbone parameter in `store`.
  ToyBackbone(autodiff::ParameterStore& store, ToyBackboneConfig config, TextVocab vocab);

  const TextVocab& vocab() const override { return vocab_; }
  int hidden_dim() const override { return config_.hidden; }
  int visual_vocab_size() const override { return config_.visual_vocab; }
  int feature_dim() const override { return config_.feature_dim; }
  FeatureGrid encode_image(const GridImage& image) const override;
  std::unique_ptr<DecodeSession> open(const GridImage& image, Pass pass) const override;

  const ToyBackboneConfig& config() const { return config_; }

  struct Forward {
    /// Final hidden states, one row per sequence position.
    autodiff::Var hidden;
    /// Row of the first text token.
    int text_offset = 0;
  };

  /// Full-sequence differentiable forward over `text` fed after the prompt.
  Forward forward(autodiff::Tape& tape, const GridImage& image, Pass pass,
                  std::span<const TokenId> text) const;
  /// Next-token logits for the given hidden rows (rows x vocab).
  autodiff::Var logits(autodiff::Tape& tape, const autodiff::Var& hidden_rows) const;

  /// Parameters used only by the observation pass.
  static std::vector<std::string> observe_only_parameters();
  /// Parameters used only by the resolution pass.
  static std::vector<std::string> resolve_only_parameters();

 private:
  class Session;

  struct Layer {
    autodiff::Parameter* norm1;
    autodiff::Parameter* qkv;
    autodiff::Parameter* out;
    autodiff::Parameter* norm2;
    autodiff::Parameter* mlp_in;
    autodiff::Parameter* mlp_in_bias;
    autodiff::Parameter* mlp_out;
    autodiff::Parameter* mlp_out_bias;
  };

  const autodiff::Parameter& prompt(Pass pass) const {
    return pass == Pass::kObserve ? *observe_prompt_ : *resolve_prompt_;
  }
  autodiff::Parameter& prompt(Pass pass) {
    return pass == Pass::kObserve ? *observe_prompt_ : *resolve_prompt_;
  }

  ToyBackboneConfig config_;
  TextVocab vocab_;
  autodiff::Parameter* visual_embed_;
  autodiff::Parameter* row_embed_;
  autodiff::Parameter* col_embed_;
  autodiff::Parameter* token_embed_;
  autodiff::Parameter* pos_embed_;
  autodiff::Parameter* observe_prompt_;
  autodiff::Parameter* resolve_prompt_;
  std::vector<Layer> layers_;
  autodiff::Parameter* final_norm_;
  autodiff::Parameter* lm_head_;
  autodiff::Parameter* vision_features_;
};

}  // namespace segworld::engine
