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

#include "segworld/engine/toy_backbone.hpp"

#include <cmath>
#include <random>

#include "segworld/error.hpp"

namespace segworld::engine {

using autodiff::Parameter;
using autodiff::Tape;
using autodiff::Var;

namespace {

constexpr double kNormEps = 1e-6;
constexpr double kGeluC = 0.7978845608028654;
constexpr double kGeluA = 0.044715;

Matrix gaussian(std::mt19937_64& rng, int rows, int cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix ones(int cols) { return Matrix::Ones(1, cols); }

Eigen::RowVectorXd rms(const Eigen::RowVectorXd& x, const Matrix& gain) {
  const double inv = 1.0 / std::sqrt(x.squaredNorm() / static_cast<double>(x.size()) + kNormEps);
  return (x * inv).cwiseProduct(gain.row(0));
}

double gelu(double z) { return 0.5 * z * (1.0 + std::tanh(kGeluC * (z + kGeluA * z * z * z))); }

}  // namespace

ToyBackbone::ToyBackbone(autodiff::ParameterStore& store, ToyBackboneConfig config, TextVocab vocab)
    : config_(config), vocab_(std::move(vocab)) {
  if (config_.hidden <= 0 || config_.heads <= 0 || config_.hidden % config_.heads != 0) {
    throw InvalidArgument("hidden size must be a positive multiple of the head count");
  }
  if (config_.layers <= 0 || config_.mlp <= 0 || config_.prompt_len <= 0) {
    throw InvalidArgument("layers, mlp and prompt_len must be positive");
  }
  if (config_.visual_vocab <= 0 || config_.feature_dim <= 0 || config_.max_grid <= 0 ||
      config_.max_text <= 0) {
    throw InvalidArgument("visual_vocab, feature_dim, max_grid and max_text must be positive");
  }
  std::mt19937_64 rng(config_.seed);
  const int d = config_.hidden;
  const int v = static_cast<int>(vocab_.size());
  const double embed_std = 0.3;
  const double in_std = 1.0 / std::sqrt(static_cast<double>(d));

  visual_embed_ = &store.add("backbone.visual_embed", gaussian(rng, config_.visual_vocab, d, embed_std));
  row_embed_ = &store.add("backbone.row_embed", gaussian(rng, config_.max_grid, d, embed_std));
  col_embed_ = &store.add("backbone.col_embed", gaussian(rng, config_.max_grid, d, embed_std));
  token_embed_ = &store.add("backbone.token_embed", gaussian(rng, v, d, embed_std));
  pos_embed_ = &store.add("backbone.pos_embed", gaussian(rng, config_.max_text, d, embed_std));
  observe_prompt_ = &store.add("observe.prompt", gaussian(rng, config_.prompt_len, d, embed_std));
  resolve_prompt_ = &store.add("resolve.prompt", gaussian(rng, config_.prompt_len, d, embed_std));
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "backbone.layer" + std::to_string(l) + ".";
    Layer layer;
    layer.norm1 = &store.add(p + "norm1", ones(d));
    layer.qkv = &store.add(p + "qkv", gaussian(rng, d, 3 * d, in_std));
    layer.out = &store.add(p + "out", gaussian(rng, d, d, 0.5 * in_std));
    layer.norm2 = &store.add(p + "norm2", ones(d));
    layer.mlp_in = &store.add(p + "mlp_in", gaussian(rng, d, config_.mlp, in_std));
    layer.mlp_in_bias = &store.add(p + "mlp_in_bias", Matrix::Zero(1, config_.mlp));
    layer.mlp_out = &store.add(p + "mlp_out",
                               gaussian(rng, config_.mlp, d, 0.5 / std::sqrt(static_cast<double>(config_.mlp))));
    layer.mlp_out_bias = &store.add(p + "mlp_out_bias", Matrix::Zero(1, d));
    layers_.push_back(layer);
  }
  final_norm_ = &store.add("backbone.final_norm", ones(d));
  lm_head_ = &store.add("backbone.lm_head", gaussian(rng, d, v, 0.5 * in_std));
  vision_features_ = &store.add("vision.features",
                                gaussian(rng, config_.visual_vocab, config_.feature_dim, 1.0),
                                /*trainable=*/false);
}

std::vector<std::string> ToyBackbone::observe_only_parameters() { return {"observe.prompt"}; }
std::vector<std::string> ToyBackbone::resolve_only_parameters() { return {"resolve.prompt"}; }

FeatureGrid ToyBackbone::encode_image(const GridImage& image) const {
  check_image(image, *this);
  FeatureGrid grid;
  grid.width = image.width();
  grid.height = image.height();
  grid.features.resize(static_cast<Eigen::Index>(image.size()), config_.feature_dim);
  const auto cells = image.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    grid.features.row(static_cast<Eigen::Index>(i)) = vision_features_->value.row(cells[i]);
  }
  return grid;
}

ToyBackbone::Forward ToyBackbone::forward(Tape& tape, const GridImage& image, Pass pass,
                                          std::span<const TokenId> text) const {
  check_image(image, *this);
  if (image.width() > config_.max_grid || image.height() > config_.max_grid) {
    throw InvalidArgument("image exceeds the backbone's maximum grid size");
  }
  if (static_cast<int>(text.size()) > config_.max_text) {
    throw DecodeOverflow("text sequence exceeds the backbone's position table");
  }
  const int d = config_.hidden;
  const int heads = config_.heads;
  const int dh = d / heads;

  std::vector<int> cell_tokens, rows, cols;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      cell_tokens.push_back(image.at(r, c));
      rows.push_back(r);
      cols.push_back(c);
    }
  }
  Var img = autodiff::add(
      autodiff::add(autodiff::gather_rows(tape.parameter(*visual_embed_), cell_tokens),
                    autodiff::gather_rows(tape.parameter(*row_embed_), rows)),
      autodiff::gather_rows(tape.parameter(*col_embed_), cols));
  Parameter& prompt_param = pass == Pass::kObserve ? *observe_prompt_ : *resolve_prompt_;
  std::vector<Var> parts{img, tape.parameter(prompt_param)};
  if (!text.empty()) {
    std::vector<int> ids(text.begin(), text.end());
    std::vector<int> pos(text.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);
    for (int id : ids) {
      if (id < 0 || id >= static_cast<int>(vocab_.size())) throw InvalidArgument("token out of range");
    }
    parts.push_back(autodiff::add(autodiff::gather_rows(tape.parameter(*token_embed_), ids),
                                  autodiff::gather_rows(tape.parameter(*pos_embed_), pos)));
  }
  Var x = autodiff::concat_rows(parts);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  for (const Layer& layer : layers_) {
    Var h = autodiff::rms_norm(x, tape.parameter(*layer.norm1), kNormEps);
    Var qkv = autodiff::matmul(h, tape.parameter(*layer.qkv));
    std::vector<Var> head_out;
    head_out.reserve(static_cast<std::size_t>(heads));
    for (int k = 0; k < heads; ++k) {
      Var q = autodiff::slice_cols(qkv, k * dh, dh);
      Var kk = autodiff::slice_cols(qkv, d + k * dh, dh);
      Var v = autodiff::slice_cols(qkv, 2 * d + k * dh, dh);
      Var att = autodiff::causal_softmax(autodiff::scale(autodiff::matmul_bt(q, kk), inv_sqrt));
      head_out.push_back(autodiff::matmul(att, v));
    }
    x = autodiff::add(x, autodiff::matmul(autodiff::concat_cols(head_out), tape.parameter(*layer.out)));
    Var h2 = autodiff::rms_norm(x, tape.parameter(*layer.norm2), kNormEps);
    Var m = autodiff::gelu(autodiff::add(autodiff::matmul(h2, tape.parameter(*layer.mlp_in)),
                                         tape.parameter(*layer.mlp_in_bias)));
    x = autodiff::add(x, autodiff::add(autodiff::matmul(m, tape.parameter(*layer.mlp_out)),
                                       tape.parameter(*layer.mlp_out_bias)));
  }
  Forward f;
  f.hidden = autodiff::rms_norm(x, tape.parameter(*final_norm_), kNormEps);
  f.text_offset = static_cast<int>(image.size()) + config_.prompt_len;
  return f;
}

Var ToyBackbone::logits(Tape& tape, const Var& hidden_rows) const {
  return autodiff::matmul(hidden_rows, tape.parameter(*lm_head_));
}

// ---------------------------------------------------------------------------
// Cached incremental decoding. Mirrors `forward` row by row.

class ToyBackbone::Session final : public DecodeSession {
 public:
  Session(const ToyBackbone& model, const GridImage& image, Pass pass) : m_(model) {
    const auto& cfg = m_.config_;
    const int capacity = static_cast<int>(image.size()) + cfg.prompt_len + cfg.max_text;
    keys_.assign(m_.layers_.size(), Matrix(capacity, cfg.hidden));
    values_.assign(m_.layers_.size(), Matrix(capacity, cfg.hidden));
    for (int r = 0; r < image.height(); ++r) {
      for (int c = 0; c < image.width(); ++c) {
        Eigen::RowVectorXd x = m_.visual_embed_->value.row(image.at(r, c)) +
                               m_.row_embed_->value.row(r) + m_.col_embed_->value.row(c);
        push(x);
      }
    }
    const Parameter& prompt = pass == Pass::kObserve ? *m_.observe_prompt_ : *m_.resolve_prompt_;
    for (Eigen::Index r = 0; r < prompt.value.rows(); ++r) push(prompt.value.row(r));
  }

  StepOutput feed(TokenId token) override {
    if (token < 0 || token >= static_cast<TokenId>(m_.vocab_.size())) {
      throw InvalidArgument("token out of range");
    }
    if (text_pos_ >= m_.config_.max_text) {
      throw DecodeOverflow("text sequence exceeds the backbone's position table");
    }
    Eigen::RowVectorXd x = m_.token_embed_->value.row(token) + m_.pos_embed_->value.row(text_pos_);
    ++text_pos_;
    StepOutput out;
    const Eigen::RowVectorXd hidden = push(x);
    out.hidden = hidden.transpose();
    const Eigen::RowVectorXd logits = hidden * m_.lm_head_->value;
    out.logprobs = log_softmax(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())));
    return out;
  }

 private:
  // Runs one position through every layer, appending to the caches, and
  // returns its final normalised hidden state.
  Eigen::RowVectorXd push(Eigen::RowVectorXd x) {
    const auto& cfg = m_.config_;
    const int d = cfg.hidden;
    const int dh = d / cfg.heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    const Eigen::Index n = length_ + 1;
    for (std::size_t l = 0; l < m_.layers_.size(); ++l) {
      const Layer& layer = m_.layers_[l];
      const Eigen::RowVectorXd h = rms(x, layer.norm1->value);
      const Eigen::RowVectorXd qkv = h * layer.qkv->value;
      keys_[l].row(length_) = qkv.segment(d, d);
      values_[l].row(length_) = qkv.segment(2 * d, d);
      Eigen::RowVectorXd attn(d);
      for (int k = 0; k < cfg.heads; ++k) {
        const auto q = qkv.segment(k * dh, dh);
        const auto keys = keys_[l].block(0, k * dh, n, dh);
        Eigen::VectorXd scores = (keys * q.transpose()) * inv_sqrt;
        scores.array() -= scores.maxCoeff();
        scores = scores.array().exp().matrix();
        scores /= scores.sum();
        attn.segment(k * dh, dh) = scores.transpose() * values_[l].block(0, k * dh, n, dh);
      }
      x += attn * layer.out->value;
      const Eigen::RowVectorXd h2 = rms(x, layer.norm2->value);
      Eigen::RowVectorXd mid = h2 * layer.mlp_in->value + layer.mlp_in_bias->value.row(0);
      mid = mid.unaryExpr([](double z) { return gelu(z); });
      x += mid * layer.mlp_out->value + layer.mlp_out_bias->value.row(0);
    }
    ++length_;
    return rms(x, m_.final_norm_->value);
  }

  const ToyBackbone& m_;
  std::vector<Matrix> keys_;
  std::vector<Matrix> values_;
  Eigen::Index length_ = 0;
  int text_pos_ = 0;
};

std::unique_ptr<DecodeSession> ToyBackbone::open(const GridImage& image, Pass pass) const {
  check_image(image, *this);
  if (image.width() > config_.max_grid || image.height() > config_.max_grid) {
    throw InvalidArgument("image exceeds the backbone's maximum grid size");
  }
  return std::make_unique<Session>(*this, image, pass);
}

}  // namespace segworld::engine
