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

#include "segworld/engine/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segworld/error.hpp"
#include "segworld/text.hpp"

namespace segworld::engine {

namespace {

void append_words(std::vector<TokenId>& out, const TextVocab& vocab, std::string_view text) {
  for (TokenId t : vocab.encode(text)) out.push_back(t);
}

void append_name(std::vector<TokenId>& out, const TextVocab& vocab, std::string_view name) {
  for (const auto& w : name_words(name)) out.push_back(vocab.id(w));
}

void append_list(std::vector<TokenId>& out, const TextVocab& vocab,
                 const std::vector<std::string>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out.push_back(kSep);
    append_words(out, vocab, items[i]);
  }
}

template <typename Allowed>
TokenId pick(const std::vector<double>& logprobs, Allowed allowed, bool sampled,
             double temperature, std::mt19937_64* rng) {
  const auto n = static_cast<TokenId>(logprobs.size());
  if (!sampled) {
    TokenId best = -1;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (TokenId t = 0; t < n; ++t) {
      if (!allowed(t)) continue;
      if (best < 0 || logprobs[static_cast<std::size_t>(t)] > best_lp) {
        best = t;
        best_lp = logprobs[static_cast<std::size_t>(t)];
      }
    }
    if (best < 0) throw InvalidArgument("no token is allowed at this decoding step");
    return best;
  }
  if (rng == nullptr) throw InvalidArgument("sampled decoding needs a random generator");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  double mx = -std::numeric_limits<double>::infinity();
  for (TokenId t = 0; t < n; ++t) {
    if (allowed(t)) mx = std::max(mx, logprobs[static_cast<std::size_t>(t)]);
  }
  if (!std::isfinite(mx)) {
    for (TokenId t = 0; t < n; ++t) {
      if (allowed(t)) return t;
    }
    throw InvalidArgument("no token is allowed at this decoding step");
  }
  std::vector<double> weights(logprobs.size(), 0.0);
  for (TokenId t = 0; t < n; ++t) {
    if (allowed(t)) {
      weights[static_cast<std::size_t>(t)] =
          std::exp((logprobs[static_cast<std::size_t>(t)] - mx) / temperature);
    }
  }
  std::discrete_distribution<TokenId> dist(weights.begin(), weights.end());
  return dist(*rng);
}

std::string join_tokens(const std::vector<TokenId>& ids, const TextVocab& vocab, std::string_view sep) {
  std::vector<std::string> words;
  for (TokenId t : ids) words.push_back(vocab.token(t));
  return join(words, sep);
}

}  // namespace

std::vector<TokenId> context_tokens(const SceneContext& context, const TextVocab& vocab,
                                    bool drop_events) {
  std::vector<TokenId> out;
  out.push_back(kScene);
  append_words(out, vocab, context.scene);
  out.push_back(kObj);
  append_list(out, vocab, context.objects);
  out.push_back(kRel);
  append_list(out, vocab, context.relations);
  if (!drop_events) {
    out.push_back(kEvt);
    append_list(out, vocab, context.events);
  }
  return out;
}

std::vector<TokenId> observation_target(const SceneContext& context, const TextVocab& vocab,
                                        bool drop_events) {
  auto out = context_tokens(context, vocab, drop_events);
  out.push_back(kEos);
  return out;
}

SceneContext parse_context(std::span<const TokenId> tokens, const TextVocab& vocab) {
  SceneContext ctx;
  TokenId level = kPad;
  std::vector<TokenId> item;
  auto flush = [&]() {
    if (item.empty()) return;
    std::string text = join_tokens(item, vocab, " ");
    switch (level) {
      case kObj: ctx.objects.push_back(std::move(text)); break;
      case kRel: ctx.relations.push_back(std::move(text)); break;
      case kEvt: ctx.events.push_back(std::move(text)); break;
      default: break;
    }
    item.clear();
  };
  std::vector<TokenId> scene;
  for (TokenId t : tokens) {
    if (t == kScene || t == kObj || t == kRel || t == kEvt || t == kEos) {
      flush();
      level = t;
      if (t == kEos) break;
    } else if (t == kSep) {
      flush();
    } else if (TextVocab::is_word(t) || t == kUnk) {
      if (level == kScene) {
        scene.push_back(t);
      } else {
        item.push_back(t);
      }
    }
  }
  flush();
  ctx.scene = join_tokens(scene, vocab, " ");
  return ctx;
}

std::vector<TokenId> chain_tokens(const ReasoningChain& chain, const TextVocab& vocab,
                                  bool drop_stage1_cot) {
  std::vector<TokenId> out;
  if (!drop_stage1_cot) {
    out.push_back(kO);
    append_name(out, vocab, chain.object);
    out.push_back(kA);
    append_name(out, vocab, chain.action);
    out.push_back(kP);
    append_name(out, vocab, chain.part);
    out.push_back(kF);
    append_name(out, vocab, chain.affordance);
  }
  out.push_back(kSeg);
  return out;
}

ReasoningChain parse_chain(std::span<const TokenId> tokens, const TextVocab& vocab) {
  ReasoningChain chain;
  std::string* field = nullptr;
  std::vector<TokenId> words;
  auto flush = [&]() {
    if (field != nullptr) *field = join_tokens(words, vocab, "_");
    words.clear();
  };
  for (TokenId t : tokens) {
    switch (t) {
      case kO: flush(); field = &chain.object; break;
      case kA: flush(); field = &chain.action; break;
      case kP: flush(); field = &chain.part; break;
      case kF: flush(); field = &chain.affordance; break;
      case kSeg:
      case kEos: flush(); field = nullptr; break;
      default:
        if (field != nullptr && (TextVocab::is_word(t) || t == kUnk)) words.push_back(t);
    }
  }
  flush();
  return chain;
}

std::vector<TokenId> resolution_prefix(const SceneContext& context, const Instruction& instruction,
                                       const TextVocab& vocab, const EngineConfig& config) {
  std::vector<TokenId> out;
  if (!config.drop_context) out = context_tokens(context, vocab, config.drop_events);
  out.push_back(kQuery);
  append_words(out, vocab, instruction.text);
  return out;
}

ObservationTrace observe_trace(const GridImage& image, const Backbone& backbone,
                               const EngineConfig& config, std::mt19937_64* rng) {
  check_image(image, backbone);
  std::vector<TokenId> levels{kScene, kObj, kRel};
  if (!config.drop_events) levels.push_back(kEvt);

  auto session = backbone.open(image, Pass::kObserve);
  ObservationTrace trace;
  StepOutput out = session->feed(kScene);
  trace.tokens.push_back(kScene);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const TokenId next = i + 1 < levels.size() ? levels[i + 1] : kEos;
    const bool list_level = levels[i] != kScene;
    auto allowed = [&](TokenId t) {
      return t == next || TextVocab::is_word(t) || (list_level && t == kSep);
    };
    for (int count = 0;; ++count) {
      TokenId tok;
      if (count >= config.level_budget && config.truncate_on_overflow) {
        tok = next;
      } else {
        tok = pick(out.logprobs, allowed, config.sampled, config.temperature, rng);
        if (count >= config.level_budget && tok != next) {
          throw DecodeOverflow("observation level " + backbone.vocab().token(levels[i]) +
                               " exceeds its budget of " + std::to_string(config.level_budget));
        }
      }
      trace.tokens.push_back(tok);
      if (tok == kEos) break;
      out = session->feed(tok);
      if (tok == next) break;
    }
  }
  trace.context = parse_context(trace.tokens, backbone.vocab());
  return trace;
}

SceneContext observe(const GridImage& image, const Backbone& backbone, const EngineConfig& config,
                     std::mt19937_64* rng) {
  return observe_trace(image, backbone, config, rng).context;
}

namespace {

ResolutionTrace resolve_unchecked(const GridImage& image, const Instruction& instruction,
                                  const SceneContext& context, const Backbone& backbone,
                                  const EngineConfig& config) {
  check_image(image, backbone);
  const TextVocab& vocab = backbone.vocab();
  auto session = backbone.open(image, Pass::kResolve);
  StepOutput out;
  for (TokenId t : resolution_prefix(context, instruction, vocab, config)) out = session->feed(t);

  ResolutionTrace trace;
  auto emit = [&](TokenId t) {
    trace.tokens.push_back(t);
    out = session->feed(t);
  };

  if (config.forced) {
    if (!config.drop_stage1_cot) {
      const TokenId delims[] = {kO, kA, kP, kF, kSeg};
      emit(kO);
      for (int field = 0; field < 4; ++field) {
        const TokenId next = delims[field + 1];
        auto allowed = [&](TokenId t) { return t == next || TextVocab::is_word(t); };
        for (int count = 0;; ++count) {
          TokenId tok;
          if (count >= config.field_budget && config.truncate_on_overflow) {
            tok = next;
          } else {
            tok = pick(out.logprobs, allowed, false, 1.0, nullptr);
            if (count >= config.field_budget && tok != next) {
              throw DecodeOverflow("chain field exceeds its budget of " +
                                   std::to_string(config.field_budget));
            }
          }
          emit(tok);
          if (tok == next) break;
        }
      }
    } else {
      emit(kSeg);
    }
    trace.state = SegState{out.hidden};
  } else {
    auto allowed = [](TokenId t) { return t != kPad; };
    for (int step = 0; step < config.free_budget; ++step) {
      const TokenId tok = pick(out.logprobs, allowed, false, 1.0, nullptr);
      if (tok == kEos) {
        trace.tokens.push_back(tok);
        break;
      }
      emit(tok);
      if (tok == kSeg) {
        trace.state = SegState{out.hidden};
        break;
      }
    }
  }
  trace.chain = parse_chain(trace.tokens, vocab);
  return trace;
}

}  // namespace

ResolutionTrace resolve_trace(const GridImage& image, const Instruction& instruction,
                              const SceneContext& context, const Backbone& backbone,
                              const EngineConfig& config) {
  if (context.empty() && !config.drop_context) {
    throw InvalidArgument("resolution needs a scene context unless drop_context is set");
  }
  return resolve_unchecked(image, instruction, context, backbone, config);
}

Resolution resolve(const GridImage& image, const Instruction& instruction,
                   const SceneContext& context, const Backbone& backbone,
                   const EngineConfig& config) {
  ResolutionTrace trace = resolve_trace(image, instruction, context, backbone, config);
  if (!trace.state) throw NoSegToken("decoding ended without a [SEG] token");
  return Resolution{std::move(trace.chain), std::move(*trace.state)};
}

PromptEmbedding project_seg(const SegState& state, const SegProjection& projection) {
  return projection.project(state);
}

std::vector<double> decode_mask(const PromptEmbedding& prompt, const FeatureGrid& features,
                                const MaskDecoder& decoder) {
  return decoder.probabilities(prompt, features);
}

namespace {

void check_pipeline(const Pipeline& p) {
  if (p.backbone == nullptr || p.projection == nullptr || p.decoder == nullptr) {
    throw InvalidArgument("pipeline is missing a component");
  }
}

}  // namespace

std::vector<double> conditional_mask(const GridImage& image, const Instruction& instruction,
                                     const SceneContext& context, const Pipeline& pipeline,
                                     const EngineConfig& config) {
  check_pipeline(pipeline);
  ResolutionTrace trace = resolve_unchecked(image, instruction, context, *pipeline.backbone, config);
  if (!trace.state) return std::vector<double>(image.size(), 0.0);
  const PromptEmbedding prompt = project_seg(*trace.state, *pipeline.projection);
  return decode_mask(prompt, pipeline.backbone->encode_image(image), *pipeline.decoder);
}

SegmentResult segment(const GridImage& image, const Instruction& instruction,
                      const Pipeline& pipeline, const EngineConfig& config, std::mt19937_64* rng) {
  check_pipeline(pipeline);
  SegmentResult result;
  if (!config.drop_context) result.context = observe(image, *pipeline.backbone, config, rng);
  ResolutionTrace trace =
      resolve_unchecked(image, instruction, result.context, *pipeline.backbone, config);
  result.chain = std::move(trace.chain);
  if (!trace.state) {
    result.emitted_seg = false;
    result.probabilities.assign(image.size(), 0.0);
    result.mask = BinaryMask(image.width(), image.height());
    return result;
  }
  result.emitted_seg = true;
  const PromptEmbedding prompt = project_seg(*trace.state, *pipeline.projection);
  result.probabilities =
      decode_mask(prompt, pipeline.backbone->encode_image(image), *pipeline.decoder);
  result.mask = binarize(result.probabilities, image.width(), image.height());
  result.state = std::move(trace.state);
  return result;
}

std::vector<double> marginal_estimate(const GridImage& image, const Instruction& instruction,
                                      const Pipeline& pipeline, int k, std::mt19937_64& rng,
                                      EngineConfig config) {
  check_pipeline(pipeline);
  if (k < 1) throw InvalidArgument("marginal_estimate needs K >= 1");
  config.sampled = true;
  std::vector<double> mean(image.size(), 0.0);
  for (int i = 0; i < k; ++i) {
    const SceneContext ctx = observe(image, *pipeline.backbone, config, &rng);
    const auto probs = conditional_mask(image, instruction, ctx, pipeline, config);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += probs[c];
  }
  for (double& v : mean) v /= static_cast<double>(k);
  return mean;
}

Matrix similarity_matrix(std::span<const Instruction> intents, std::span<const GridImage> images,
                         std::span<const BinaryMask> targets, const Pipeline& pipeline,
                         const EngineConfig& config) {
  check_pipeline(pipeline);
  if (intents.empty()) throw EmptyInput("similarity_matrix needs at least one pair");
  if (intents.size() != images.size() || images.size() != targets.size()) {
    throw InvalidArgument("similarity_matrix needs equal-length paired lists");
  }
  const auto n = static_cast<Eigen::Index>(intents.size());
  Matrix sim = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const GridImage& image = images[static_cast<std::size_t>(j)];
    const BinaryMask& target = targets[static_cast<std::size_t>(j)];
    if (target.width() != image.width() || target.height() != image.height()) {
      throw DimensionMismatch("target region does not match its image");
    }
    const Matrix keys = pipeline.decoder->feature_keys(pipeline.backbone->encode_image(image));
    Eigen::RowVectorXd region = Eigen::RowVectorXd::Zero(keys.cols());
    std::size_t count = 0;
    for (std::size_t c = 0; c < target.size(); ++c) {
      if (target[c]) {
        region += keys.row(static_cast<Eigen::Index>(c));
        ++count;
      }
    }
    if (count > 0) region /= static_cast<double>(count);
    SceneContext ctx;
    if (!config.drop_context) ctx = observe(image, *pipeline.backbone, config);
    for (Eigen::Index i = 0; i < n; ++i) {
      ResolutionTrace trace = resolve_unchecked(image, intents[static_cast<std::size_t>(i)], ctx,
                                                *pipeline.backbone, config);
      if (!trace.state) continue;
      const Eigen::VectorXd prompt = project_seg(*trace.state, *pipeline.projection).values();
      const double denom = prompt.norm() * region.norm();
      sim(i, j) = denom > 0.0 ? region.dot(prompt.transpose().eval()) / denom : 0.0;
    }
  }
  return sim;
}

}  // namespace segworld::engine
