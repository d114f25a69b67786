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

// Two-pass inference: proactive observation (no instruction in scope),
// instruction-conditioned chain decoding that ends in [SEG], projection of the
// [SEG] state into a decoder prompt, and per-cell mask decoding.
//
// Token layout of the observation pass (after image and prompt):
//   <SCENE> w.. <OBJ> item <SEP> item .. <REL> .. <EVT> .. <EOS>
// and of the resolution pass:
//   [context without <EOS>] <Q> instruction.. <O> w.. <A> w.. <P> w.. <F> w.. [SEG]
// With drop_events the <EVT> level is absent; with drop_stage1_cot the chain
// is replaced by a bare [SEG]; with drop_context the context is omitted.

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "segworld/domain.hpp"
#include "segworld/engine/backbone.hpp"

namespace segworld::engine {

struct EngineConfig {
  /// Number of Stage-0 contexts averaged by marginal_estimate.
  int context_samples = 1;
  // Ablation flags.
  bool drop_events = false;
  bool drop_context = false;
  bool drop_stage1_cot = false;
  /// Stage-0 decoding: greedy unless sampled, then softmax(logits / temperature).
  bool sampled = false;
  double temperature = 1.0;
  /// Grammar-constrained chain decoding. When false the resolution pass
  /// decodes freely and may end without [SEG].
  bool forced = true;
  /// At a level's budget, close the level instead of raising DecodeOverflow.
  bool truncate_on_overflow = false;
  int level_budget = 24;
  int field_budget = 4;
  int free_budget = 32;
};

/// Backbone plus the learned maps that turn a [SEG] state into a mask.
struct Pipeline {
  const Backbone* backbone = nullptr;
  const SegProjection* projection = nullptr;
  const MaskDecoder* decoder = nullptr;
};

// Serialisation shared by inference and training.

std::vector<TokenId> context_tokens(const SceneContext& context, const TextVocab& vocab,
                                    bool drop_events);
/// Observation-pass target: context_tokens followed by <EOS>.
std::vector<TokenId> observation_target(const SceneContext& context, const TextVocab& vocab,
                                        bool drop_events);
SceneContext parse_context(std::span<const TokenId> tokens, const TextVocab& vocab);
std::vector<TokenId> chain_tokens(const ReasoningChain& chain, const TextVocab& vocab,
                                  bool drop_stage1_cot);
/// Fields between the chain delimiters; missing fields stay empty.
ReasoningChain parse_chain(std::span<const TokenId> tokens, const TextVocab& vocab);

/// Resolution-pass text up to and including the instruction.
std::vector<TokenId> resolution_prefix(const SceneContext& context, const Instruction& instruction,
                                       const TextVocab& vocab, const EngineConfig& config);

struct ObservationTrace {
  SceneContext context;
  /// Every token fed, starting at <SCENE> and ending with <EOS>.
  std::vector<TokenId> tokens;
};

struct ResolutionTrace {
  ReasoningChain chain;
  std::optional<SegState> state;
  /// Tokens after the instruction, ending with [SEG] when emitted.
  std::vector<TokenId> tokens;
};

/// Stage 0. `rng` is required when config.sampled is set.
ObservationTrace observe_trace(const GridImage& image, const Backbone& backbone,
                               const EngineConfig& config, std::mt19937_64* rng = nullptr);
SceneContext observe(const GridImage& image, const Backbone& backbone, const EngineConfig& config,
                     std::mt19937_64* rng = nullptr);

/// Stage 1 without throwing on non-emission (state is empty then).
ResolutionTrace resolve_trace(const GridImage& image, const Instruction& instruction,
                              const SceneContext& context, const Backbone& backbone,
                              const EngineConfig& config);

struct Resolution {
  ReasoningChain chain;
  SegState state;
};

/// Stage 1; throws NoSegToken when decoding ends without [SEG].
Resolution resolve(const GridImage& image, const Instruction& instruction,
                   const SceneContext& context, const Backbone& backbone,
                   const EngineConfig& config);

PromptEmbedding project_seg(const SegState& state, const SegProjection& projection);

/// Per-cell probabilities in (0, 1); throws DimensionMismatch when the
/// features do not fit the decoder.
std::vector<double> decode_mask(const PromptEmbedding& prompt, const FeatureGrid& features,
                                const MaskDecoder& decoder);

struct SegmentResult {
  BinaryMask mask;
  std::vector<double> probabilities;
  ReasoningChain chain;
  SceneContext context;
  std::optional<SegState> state;
  bool emitted_seg = false;
};

/// observe -> resolve -> project -> decode -> binarize. A missing [SEG]
/// yields an all-background mask with emitted_seg = false. An observed
/// context that came out empty is passed on as the bare level delimiters.
SegmentResult segment(const GridImage& image, const Instruction& instruction,
                      const Pipeline& pipeline, const EngineConfig& config,
                      std::mt19937_64* rng = nullptr);

/// Soft mask of the resolution pass conditioned on a given context (which
/// may be empty, as a sampled observation can be); an all-zero map on
/// non-emission.
std::vector<double> conditional_mask(const GridImage& image, const Instruction& instruction,
                                     const SceneContext& context, const Pipeline& pipeline,
                                     const EngineConfig& config);

/// Monte-Carlo estimate of E_{c ~ P(c|I)} P(M | I, q, c): the mean of K soft
/// masks, each conditioned on a context sampled from the observation pass.
std::vector<double> marginal_estimate(const GridImage& image, const Instruction& instruction,
                                      const Pipeline& pipeline, int k, std::mt19937_64& rng,
                                      EngineConfig config = {});

/// Entry (i, j): cosine between the decoder-space prompt of intent i run on
/// image j and the mean decoder-space feature (U f) over image j's target
/// region.
Matrix similarity_matrix(std::span<const Instruction> intents, std::span<const GridImage> images,
                         std::span<const BinaryMask> targets, const Pipeline& pipeline,
                         const EngineConfig& config);

}  // namespace segworld::engine
