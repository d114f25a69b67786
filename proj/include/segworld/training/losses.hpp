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

// Scalar forms of the joint objective. The differentiable forms used by the
// trainer live in autodiff (bce_with_logits, dice_with_logits,
// softmax_cross_entropy) and agree with these to rounding.

#include <span>
#include <vector>

#include "segworld/domain.hpp"

namespace segworld::training {

inline constexpr double kDiceEps = 1e-6;

/// 1 - (2 sum(p g) + eps) / (sum(p) + sum(g) + eps).
double dice_loss(std::span<const double> pred_probs, const BinaryMask& gt, double eps = kDiceEps);

/// Mean logistic cross-entropy over cells.
double bce_loss(std::span<const double> pred_logits, const BinaryMask& gt);

/// Mean negative log-probability of the targets. Row i of `token_logprobs`
/// is the distribution over the vocabulary at response position i.
double lm_loss(std::span<const std::vector<double>> token_logprobs, std::span<const int> target_tokens);

/// lambda_mask * mask + lambda_0 * lm0 + lambda_1 * lm1, where `mask` is the
/// already summed bce + dice term.
double total_loss(double mask, double lm0, double lm1, const LossWeights& weights);

/// Same, computing the mask term from logits.
double total_loss(std::span<const double> mask_logits, const BinaryMask& mask_gt, double lm0,
                  double lm1, const LossWeights& weights);

}  // namespace segworld::training
