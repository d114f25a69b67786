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

#include "segworld/training/schedule.hpp"

#include <algorithm>
#include <vector>

#include "segworld/error.hpp"

namespace segworld::training {

double self_context_probability(long t, const ScheduleConfig& schedule) {
  if (t < 0) throw InvalidArgument("step must be non-negative");
  if (schedule.warmup_steps <= 0) throw InvalidArgument("warmup_steps must be positive");
  if (schedule.p_max < 0.0 || schedule.p_max > 1.0) throw InvalidArgument("p_max must lie in [0, 1]");
  const double ramp = std::min(static_cast<double>(t) / static_cast<double>(schedule.warmup_steps), 1.0);
  return ramp * schedule.p_max;
}

ContextChoice choose_context(long t, const ScheduleConfig& schedule, std::mt19937_64& rng,
                             const std::optional<SceneContext>& synthesized,
                             const std::function<SceneContext()>& generate) {
  if (!synthesized) throw MissingSynthesizedContext("training sample has no synthesized observation");
  const double p = self_context_probability(t, schedule);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < p) return ContextChoice{generate(), true, true};
  return ContextChoice{*synthesized, false, false};
}

ContextChoice choose_context(long t, const ScheduleConfig& schedule, std::mt19937_64& rng,
                             const std::optional<SceneContext>& synthesized,
                             const SceneContext& self_generated) {
  return choose_context(t, schedule, rng, synthesized,
                        std::function<SceneContext()>([&] { return self_generated; }));
}

Instruction sample_instruction(const Sample& sample, double intent_mix, std::mt19937_64& rng) {
  if (intent_mix < 0.0 || intent_mix > 1.0) throw InvalidArgument("intent_mix must lie in [0, 1]");
  const Instruction* intent = sample.instruction(InstructionKind::kIntent);
  if (intent_mix > 0.0 && intent == nullptr) {
    throw MissingIntentInstruction("sample " + sample.id + " has no intent instruction");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < intent_mix) return *intent;
  std::vector<const Instruction*> pool;
  for (auto kind : {InstructionKind::kReferring, InstructionKind::kReasoning}) {
    if (const Instruction* i = sample.instruction(kind)) pool.push_back(i);
  }
  if (pool.empty()) {
    throw InvalidArgument("sample " + sample.id + " has no target-referential instruction");
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return *pool[pick(rng)];
}

}  // namespace segworld::training
