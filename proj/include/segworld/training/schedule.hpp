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

// Scheduled sampling over Stage-0 contexts and the instruction pool.

#include <functional>
#include <optional>
#include <random>

#include "segworld/domain.hpp"

namespace segworld::training {

/// min(t / warmup_steps, 1) * p_max.
double self_context_probability(long t, const ScheduleConfig& schedule);

struct ContextChoice {
  SceneContext context;
  bool self_generated = false;
  /// Set for self-generated contexts: they enter Stage 1 as constants.
  bool gradient_blocked = false;
};

/// Draws one uniform variate from `rng`; returns `self_generated` with
/// probability self_context_probability(t), `synthesized` otherwise.
ContextChoice choose_context(long t, const ScheduleConfig& schedule, std::mt19937_64& rng,
                             const std::optional<SceneContext>& synthesized,
                             const SceneContext& self_generated);

/// Same, but the self-generated context is only produced when chosen.
ContextChoice choose_context(long t, const ScheduleConfig& schedule, std::mt19937_64& rng,
                             const std::optional<SceneContext>& synthesized,
                             const std::function<SceneContext()>& generate);

/// Intent instruction with probability intent_mix, otherwise a uniform pick
/// among the sample's referring and reasoning instructions.
/// Throws MissingIntentInstruction when intent_mix > 0 and the sample has none.
Instruction sample_instruction(const Sample& sample, double intent_mix, std::mt19937_64& rng);

}  // namespace segworld::training
