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

#include <memory>

#include "segworld/engine/autodiff.hpp"
#include "segworld/engine/engine.hpp"
#include "segworld/engine/toy_backbone.hpp"

namespace segworld::engine {

/// The trainable model: toy backbone, [SEG] projection and mask decoder,
/// with every parameter in one store.
class ToyModel {
 public:
  ToyModel(ToyBackboneConfig config, TextVocab vocab, int prompt_dim = 32);
  ToyModel(const ToyModel&) = delete;
  ToyModel& operator=(const ToyModel&) = delete;

  autodiff::ParameterStore& parameters() { return store_; }
  const autodiff::ParameterStore& parameters() const { return store_; }
  const ToyBackbone& backbone() const { return *backbone_; }
  const SegProjection& projection() const { return *projection_; }
  const MaskDecoder& decoder() const { return *decoder_; }
  Pipeline pipeline() const { return {backbone_.get(), projection_.get(), decoder_.get()}; }
  int prompt_dim() const { return prompt_dim_; }

 private:
  int prompt_dim_;
  autodiff::ParameterStore store_;
  std::unique_ptr<ToyBackbone> backbone_;
  std::unique_ptr<SegProjection> projection_;
  std::unique_ptr<MaskDecoder> decoder_;
};

}  // namespace segworld::engine
