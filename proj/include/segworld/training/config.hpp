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

// Training configuration and its flat key=value file form. File keys are
// the field names below; the nested LossWeights and ScheduleConfig fields
// appear under their own names (lambda_mask, warmup_steps, ...).
//
//   # comment
//   steps = 800
//   intent_mix = 0.2
//
// warmup_steps has no default and must be given.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "segworld/domain.hpp"

namespace segworld::training {

struct TrainConfig {
  LossWeights weights;
  ScheduleConfig schedule;
  double intent_mix = 0.0;
  long steps = 1;
  double learning_rate = 2e-3;
  int batch_size = 4;
  std::uint64_t seed = 1;

  // Optimiser.
  double beta2 = 0.99;
  double adam_eps = 1e-8;

  // Model size.
  int hidden = 64;
  int layers = 2;
  int heads = 4;
  int mlp = 128;
  int prompt_len = 2;
  int prompt_dim = 32;
  int feature_dim = 32;

  // Ablation flags, applied to both training and evaluation.
  bool drop_events = false;
  bool drop_context = false;
  bool drop_stage1_cot = false;

  /// Evaluate on the training set every this many steps (0 = never).
  long eval_every = 0;
  /// Parameter-name prefixes excluded from updates.
  std::vector<std::string> frozen;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Parses a flat key=value text. Throws ParseError on unknown keys,
/// malformed values or a missing warmup_steps.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string format_train_config(const TrainConfig& config);

/// Throws InvalidArgument on out-of-range values.
void check_train_config(const TrainConfig& config);

}  // namespace segworld::training
