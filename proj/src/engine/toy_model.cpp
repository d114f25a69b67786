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

#include "segworld/engine/toy_model.hpp"

#include <cmath>
#include <random>

#include "segworld/error.hpp"

namespace segworld::engine {

namespace {

autodiff::Matrix gaussian(std::mt19937_64& rng, int rows, int cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  autodiff::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

ToyModel::ToyModel(ToyBackboneConfig config, TextVocab vocab, int prompt_dim)
    : prompt_dim_(prompt_dim) {
  if (prompt_dim <= 0) throw InvalidArgument("prompt_dim must be positive");
  backbone_ = std::make_unique<ToyBackbone>(store_, config, std::move(vocab));
  std::mt19937_64 rng(config.seed ^ 0x5e9d3c1bULL);
  const int d = config.hidden;
  const int fd = config.feature_dim;
  auto& pw = store_.add("proj.weight", gaussian(rng, prompt_dim, d, 1.0 / std::sqrt(d)));
  auto& pb = store_.add("proj.bias", autodiff::Matrix::Zero(1, prompt_dim));
  auto& du = store_.add("decoder.U", gaussian(rng, prompt_dim, fd, 1.0 / std::sqrt(fd)));
  auto& db = store_.add("decoder.bias", autodiff::Matrix::Zero(1, 1));
  projection_ = std::make_unique<SegProjection>(pw, pb);
  decoder_ = std::make_unique<MaskDecoder>(du, db);
}

}  // namespace segworld::engine
