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

#include "segworld/training/losses.hpp"

#include <algorithm>
#include <cmath>

#include "segworld/error.hpp"

namespace segworld::training {

namespace {

void require_cells(std::size_t n, const BinaryMask& gt) {
  if (n != gt.size()) {
    throw DimensionMismatch("prediction has " + std::to_string(n) + " cells, ground truth has " +
                            std::to_string(gt.size()));
  }
}

}  // namespace

double dice_loss(std::span<const double> pred_probs, const BinaryMask& gt, double eps) {
  require_cells(pred_probs.size(), gt);
  double inter = 0.0, sp = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < pred_probs.size(); ++i) {
    const double g = gt[i] ? 1.0 : 0.0;
    inter += pred_probs[i] * g;
    sp += pred_probs[i];
    sg += g;
  }
  return 1.0 - (2.0 * inter + eps) / (sp + sg + eps);
}

double bce_loss(std::span<const double> pred_logits, const BinaryMask& gt) {
  require_cells(pred_logits.size(), gt);
  if (pred_logits.empty()) throw DimensionMismatch("empty mask");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred_logits.size(); ++i) {
    const double x = pred_logits[i];
    const double g = gt[i] ? 1.0 : 0.0;
    sum += std::max(x, 0.0) - x * g + std::log1p(std::exp(-std::abs(x)));
  }
  return sum / static_cast<double>(pred_logits.size());
}

double lm_loss(std::span<const std::vector<double>> token_logprobs, std::span<const int> target_tokens) {
  if (token_logprobs.size() != target_tokens.size()) {
    throw LengthMismatch(std::to_string(token_logprobs.size()) + " distributions for " +
                         std::to_string(target_tokens.size()) + " targets");
  }
  if (target_tokens.empty()) throw LengthMismatch("no response tokens");
  double sum = 0.0;
  for (std::size_t i = 0; i < target_tokens.size(); ++i) {
    const auto t = static_cast<std::size_t>(target_tokens[i]);
    if (t >= token_logprobs[i].size()) throw InvalidArgument("target token outside the vocabulary");
    sum -= token_logprobs[i][t];
  }
  return sum / static_cast<double>(target_tokens.size());
}

double total_loss(double mask, double lm0, double lm1, const LossWeights& w) {
  return w.lambda_mask * mask + w.lambda_0 * lm0 + w.lambda_1 * lm1;
}

double total_loss(std::span<const double> mask_logits, const BinaryMask& mask_gt, double lm0,
                  double lm1, const LossWeights& weights) {
  std::vector<double> probs(mask_logits.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = 1.0 / (1.0 + std::exp(-mask_logits[i]));
  const double mask = bce_loss(mask_logits, mask_gt) + dice_loss(probs, mask_gt);
  return total_loss(mask, lm0, lm1, weights);
}

}  // namespace segworld::training
