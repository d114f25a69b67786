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

// Joint optimisation of the mask and language-modelling objectives with
// scheduled sampling over Stage-0 contexts.
//
// Per sample: the observation pass is teacher-forced on the synthesized
// context (lm0); the Stage-1 context is then either that synthesized context
// or one greedily decoded by the current model, which enters Stage 1 as
// plain tokens and so carries no gradient back into the observation pass.
// The resolution pass is teacher-forced on the ground-truth chain (lm1, over
// every response token including [SEG]); the [SEG] row is projected and
// decoded into mask logits scored by BCE + dice.

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "segworld/domain.hpp"
#include "segworld/engine/engine.hpp"
#include "segworld/engine/toy_model.hpp"
#include "segworld/metrics/metrics.hpp"
#include "segworld/training/config.hpp"

namespace segworld::training {

/// Builds an untrained model sized by `config` for `catalog` and `vocab`.
std::unique_ptr<engine::ToyModel> make_model(const TrainConfig& config, const Catalog& catalog,
                                             engine::TextVocab vocab);

/// Inference settings matching the training flags.
engine::EngineConfig engine_config(const TrainConfig& config);

/// One sample with every random choice already made.
struct TrainCase {
  const Sample* sample;
  Instruction instruction;
  /// Context fed to Stage 1 (ignored with drop_context).
  SceneContext context;
  bool self_generated;
};

struct LossBreakdown {
  double loss_mask = 0.0;  // bce + dice
  double loss_bce = 0.0;
  double loss_dice = 0.0;
  double loss_lm0 = 0.0;
  double loss_lm1 = 0.0;
  double total = 0.0;
};

/// Batch-mean loss components as tape nodes (each 1x1).
struct LossGraph {
  autodiff::Var bce;
  autodiff::Var dice;
  autodiff::Var lm0;
  autodiff::Var lm1;
  autodiff::Var total;
};

LossGraph build_loss(autodiff::Tape& tape, const engine::ToyModel& model,
                     std::span<const TrainCase> cases, const TrainConfig& config);

LossBreakdown breakdown(const LossGraph& graph);

/// Adam with beta1 = 0: a per-entry step scaled by a running second moment.
class Adam {
 public:
  Adam(double learning_rate, double beta2, double eps);

  /// Applies one update from the current gradients. Parameters that are not
  /// trainable or whose name starts with a `frozen` prefix are left alone.
  void step(autodiff::ParameterStore& store, std::span<const std::string> frozen = {});
  long steps() const { return t_; }

 private:
  double lr_;
  double beta2_;
  double eps_;
  long t_ = 0;
  std::map<std::string, autodiff::Matrix> v_;
};

bool is_frozen(std::string_view name, std::span<const std::string> frozen);

struct StepReport {
  long step = 0;
  LossBreakdown loss;
  double p_self = 0.0;
  double intent_fraction = 0.0;
  double self_fraction = 0.0;
};

class Trainer {
 public:
  /// `samples` must outlive the trainer.
  Trainer(engine::ToyModel& model, std::span<const Sample> samples, TrainConfig config);

  /// Draws the next batch (epoch-wise shuffled) and runs train_step on it.
  StepReport step();
  /// Makes the random choices for `batch`, computes the loss, applies one
  /// optimiser update and increments t. Throws NonFiniteLoss.
  StepReport train_step(std::span<const Sample* const> batch);
  /// Random choices only (instruction, context source), consuming the rng.
  std::vector<TrainCase> plan(std::span<const Sample* const> batch);

  long t() const { return t_; }
  const TrainConfig& config() const { return config_; }

 private:
  engine::ToyModel& model_;
  std::span<const Sample> samples_;
  TrainConfig config_;
  Adam adam_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  long t_ = 0;
};

/// One JSON line: step, loss_mask, loss_lm0, loss_lm1, total, p_self,
/// intent_fraction.
std::string log_line(const StepReport& report);

struct EvalOutcome {
  std::vector<metrics::EvalRecord> records;
  /// Ids of samples lacking the requested instruction kind.
  std::vector<std::string> skipped;
};

/// Runs segment on every sample carrying `kind`, spread over the available
/// hardware threads. Records keep the input order.
EvalOutcome evaluate(const engine::Pipeline& pipeline, std::span<const Sample> samples,
                     InstructionKind kind, const engine::EngineConfig& config);

struct TrainResult {
  std::vector<StepReport> history;
  /// (step, train-set intent mIoU) at every evaluation.
  std::vector<std::pair<long, double>> evaluations;
};

/// Runs config.steps optimiser steps, writing one log line per step to `log`
/// when given, and evaluating on `samples` every config.eval_every steps.
TrainResult train(engine::ToyModel& model, std::span<const Sample> samples, const TrainConfig& config,
                  std::ostream* log = nullptr);

}  // namespace segworld::training
