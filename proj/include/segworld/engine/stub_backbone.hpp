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

// Non-learned backbones whose behaviour is given by tables or callbacks.
// They make the engine's outputs computable by hand and serve as oracles.

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>

#include "segworld/engine/backbone.hpp"

namespace segworld::engine {

class ScriptedBackbone final : public Backbone {
 public:
  /// Next-token probabilities (need not be normalised; zeros are allowed)
  /// given every text token fed so far.
  using Policy = std::function<std::vector<double>(const GridImage&, Pass, std::span<const TokenId>)>;
  /// Hidden state at the last token fed.
  using HiddenFn = std::function<Eigen::VectorXd(const GridImage&, Pass, std::span<const TokenId>)>;
  using EncoderFn = std::function<FeatureGrid(const GridImage&)>;

  ScriptedBackbone(TextVocab vocab, int hidden_dim, int visual_vocab, Policy policy,
                   HiddenFn hidden, EncoderFn encoder = {});

  const TextVocab& vocab() const override { return vocab_; }
  int hidden_dim() const override { return hidden_dim_; }
  int visual_vocab_size() const override { return visual_vocab_; }
  int feature_dim() const override { return visual_vocab_; }
  FeatureGrid encode_image(const GridImage& image) const override;
  std::unique_ptr<DecodeSession> open(const GridImage& image, Pass pass) const override;

 private:
  class Session;

  TextVocab vocab_;
  int hidden_dim_;
  int visual_vocab_;
  Policy policy_;
  HiddenFn hidden_;
  EncoderFn encoder_;
};

/// One-hot encoding of each cell's visual token (feature_dim = visual_vocab).
FeatureGrid one_hot_features(const GridImage& image, int visual_vocab);

/// The context the echo stub reports for an image: scene "scene", objects =
/// distinct objects of the non-background tokens in row-major first-seen
/// order, no relations or events.
SceneContext echo_context(const GridImage& image, const Catalog& catalog);

/// A backbone plus the projection/decoder weights that make it an exact
/// oracle: Stage 0 echoes the image's objects, Stage 1 looks the instruction
/// up in `table` and writes that chain, and the [SEG] state is the one-hot
/// vector of the chain's (object, part) token. With the bundled projection
/// (identity) and decoder (U = 2I, bias = -1) the decoded mask is exactly
/// the cells holding that token.
class OracleStub {
 public:
  OracleStub(const Catalog& catalog, TextVocab vocab,
             std::map<std::string, ReasoningChain> table);
  OracleStub(const OracleStub&) = delete;
  OracleStub& operator=(const OracleStub&) = delete;

  const Backbone& backbone() const { return *backbone_; }
  const SegProjection& projection() const { return *projection_; }
  const MaskDecoder& decoder() const { return *decoder_; }

  /// Table key for an instruction: its normalised words joined by spaces.
  static std::string key(std::string_view instruction);

 private:
  Catalog catalog_;
  std::map<std::string, ReasoningChain> table_;
  autodiff::ParameterStore store_;
  std::unique_ptr<ScriptedBackbone> backbone_;
  std::unique_ptr<SegProjection> projection_;
  std::unique_ptr<MaskDecoder> decoder_;
};

}  // namespace segworld::engine
