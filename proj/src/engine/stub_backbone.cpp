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

#include "segworld/engine/stub_backbone.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "segworld/engine/engine.hpp"
#include "segworld/error.hpp"
#include "segworld/text.hpp"

namespace segworld::engine {

class ScriptedBackbone::Session final : public DecodeSession {
 public:
  Session(const ScriptedBackbone& owner, GridImage image, Pass pass)
      : owner_(owner), image_(std::move(image)), pass_(pass) {}

  StepOutput feed(TokenId token) override {
    if (token < 0 || token >= static_cast<TokenId>(owner_.vocab_.size())) {
      throw InvalidArgument("token out of range");
    }
    text_.push_back(token);
    StepOutput out;
    std::vector<double> probs = owner_.policy_(image_, pass_, text_);
    if (probs.size() != owner_.vocab_.size()) {
      throw DimensionMismatch("scripted policy returned the wrong number of probabilities");
    }
    double total = 0.0;
    for (double p : probs) total += p;
    out.logprobs.resize(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      out.logprobs[i] = probs[i] > 0.0 ? std::log(probs[i] / total)
                                       : -std::numeric_limits<double>::infinity();
    }
    out.hidden = owner_.hidden_(image_, pass_, text_);
    if (out.hidden.size() != owner_.hidden_dim_) {
      throw DimensionMismatch("scripted hidden state has the wrong dimension");
    }
    return out;
  }

 private:
  const ScriptedBackbone& owner_;
  GridImage image_;
  Pass pass_;
  std::vector<TokenId> text_;
};

ScriptedBackbone::ScriptedBackbone(TextVocab vocab, int hidden_dim, int visual_vocab, Policy policy,
                                   HiddenFn hidden, EncoderFn encoder)
    : vocab_(std::move(vocab)),
      hidden_dim_(hidden_dim),
      visual_vocab_(visual_vocab),
      policy_(std::move(policy)),
      hidden_(std::move(hidden)),
      encoder_(std::move(encoder)) {
  if (hidden_dim <= 0 || visual_vocab <= 0) {
    throw InvalidArgument("hidden_dim and visual_vocab must be positive");
  }
  if (!policy_ || !hidden_) throw InvalidArgument("scripted backbone needs a policy and a hidden map");
}

FeatureGrid ScriptedBackbone::encode_image(const GridImage& image) const {
  check_image(image, *this);
  return encoder_ ? encoder_(image) : one_hot_features(image, visual_vocab_);
}

std::unique_ptr<DecodeSession> ScriptedBackbone::open(const GridImage& image, Pass pass) const {
  check_image(image, *this);
  return std::make_unique<Session>(*this, image, pass);
}

FeatureGrid one_hot_features(const GridImage& image, int visual_vocab) {
  FeatureGrid grid;
  grid.width = image.width();
  grid.height = image.height();
  grid.features = Matrix::Zero(static_cast<Eigen::Index>(image.size()), visual_vocab);
  const auto cells = image.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    grid.features(static_cast<Eigen::Index>(i), cells[i]) = 1.0;
  }
  return grid;
}

SceneContext echo_context(const GridImage& image, const Catalog& catalog) {
  SceneContext ctx;
  ctx.scene = "scene";
  std::set<std::string> seen;
  for (VisualToken t : image.cells()) {
    const TokenInfo* info = catalog.token(t);
    if (info != nullptr && seen.insert(info->object).second) ctx.objects.push_back(info->object);
  }
  return ctx;
}

std::string OracleStub::key(std::string_view instruction) {
  return join(normalize_words(instruction), " ");
}

namespace {

std::vector<double> point_mass(std::size_t size, TokenId token) {
  std::vector<double> p(size, 0.0);
  p[static_cast<std::size_t>(token)] = 1.0;
  return p;
}

// Position of the last occurrence of `token`, or npos.
std::size_t find_last(std::span<const TokenId> text, TokenId token) {
  for (std::size_t i = text.size(); i > 0; --i) {
    if (text[i - 1] == token) return i - 1;
  }
  return std::span<const TokenId>::extent;
}

}  // namespace

OracleStub::OracleStub(const Catalog& catalog, TextVocab vocab,
                       std::map<std::string, ReasoningChain> table)
    : catalog_(catalog) {
  for (auto& [text, chain] : table) table_.emplace(key(text), std::move(chain));
  const int nv = catalog_.visual_vocab_size();

  auto policy = [this](const GridImage& image, Pass pass, std::span<const TokenId> text) {
    const TextVocab& v = backbone_->vocab();
    if (pass == Pass::kObserve) {
      // Script: the echo context, then <EOS>. text[0] is <SCENE>.
      const auto script = observation_target(echo_context(image, catalog_), v, false);
      const std::size_t next = text.size();
      return point_mass(v.size(), next < script.size() ? script[next] : kEos);
    }
    const std::size_t q = find_last(text, kQuery);
    const std::size_t o = find_last(text, kO);
    if (q == std::span<const TokenId>::extent) return point_mass(v.size(), kEos);
    const std::size_t instr_end = (o != std::span<const TokenId>::extent && o > q) ? o : text.size();
    const std::string instr = v.decode(text.subspan(q + 1, instr_end - q - 1));
    auto it = table_.find(instr);
    if (it == table_.end()) return point_mass(v.size(), kEos);
    const auto script = chain_tokens(it->second, v, false);
    if (o == std::span<const TokenId>::extent || o < q) return point_mass(v.size(), kO);
    const std::size_t next = text.size() - o;  // tokens emitted after <O>
    return point_mass(v.size(), next < script.size() ? script[next] : kEos);
  };

  auto hidden = [this, nv](const GridImage&, Pass pass, std::span<const TokenId> text) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(nv);
    if (pass != Pass::kResolve || text.empty() || text.back() != kSeg) return h;
    const std::size_t o = find_last(text, kO);
    if (o == std::span<const TokenId>::extent) return h;
    const ReasoningChain chain = parse_chain(text.subspan(o), backbone_->vocab());
    const VisualToken target = catalog_.token_of(chain.object, chain.part);
    if (target != kBackground) h(target) = 1.0;
    return h;
  };

  backbone_ = std::make_unique<ScriptedBackbone>(std::move(vocab), nv, nv, policy, hidden);

  autodiff::Matrix eye = autodiff::Matrix::Identity(nv, nv);
  auto& pw = store_.add("proj.weight", eye);
  auto& pb = store_.add("proj.bias", autodiff::Matrix::Zero(1, nv));
  auto& du = store_.add("decoder.U", 2.0 * eye);
  auto& db = store_.add("decoder.bias", autodiff::Matrix::Constant(1, 1, -1.0));
  projection_ = std::make_unique<SegProjection>(pw, pb);
  decoder_ = std::make_unique<MaskDecoder>(du, db);
}

}  // namespace segworld::engine
