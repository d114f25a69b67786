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

#include "segworld/training/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "segworld/error.hpp"
#include "segworld/training/losses.hpp"
#include "segworld/training/schedule.hpp"

namespace segworld::training {

using autodiff::Matrix;
using autodiff::Tape;
using autodiff::Var;
using engine::TokenId;

std::unique_ptr<engine::ToyModel> make_model(const TrainConfig& config, const Catalog& catalog,
                                             engine::TextVocab vocab) {
  check_train_config(config);
  engine::ToyBackboneConfig b;
  b.hidden = config.hidden;
  b.layers = config.layers;
  b.heads = config.heads;
  b.mlp = config.mlp;
  b.prompt_len = config.prompt_len;
  b.visual_vocab = catalog.visual_vocab_size();
  b.feature_dim = config.feature_dim;
  b.seed = config.seed;
  return std::make_unique<engine::ToyModel>(b, std::move(vocab), config.prompt_dim);
}

engine::EngineConfig engine_config(const TrainConfig& config) {
  engine::EngineConfig e;
  e.drop_events = config.drop_events;
  e.drop_context = config.drop_context;
  e.drop_stage1_cot = config.drop_stage1_cot;
  e.truncate_on_overflow = true;
  return e;
}

namespace {

Var zero(Tape& tape) { return tape.constant(Matrix::Zero(1, 1)); }

// Cross-entropy of next-token predictions: rows [first, first + targets)
// of `hidden` predict `targets`.
Var next_token_loss(Tape& tape, const engine::ToyBackbone& bb, const Var& hidden, int first,
                    std::span<const TokenId> targets) {
  std::vector<int> rows(targets.size());
  std::iota(rows.begin(), rows.end(), first);
  const std::vector<int> labels(targets.begin(), targets.end());
  return autodiff::softmax_cross_entropy(bb.logits(tape, autodiff::gather_rows(hidden, rows)), labels);
}

}  // namespace

LossGraph build_loss(Tape& tape, const engine::ToyModel& model, std::span<const TrainCase> cases,
                     const TrainConfig& config) {
  if (cases.empty()) throw InvalidArgument("empty batch");
  const engine::ToyBackbone& bb = model.backbone();
  const engine::TextVocab& vocab = bb.vocab();
  const engine::EngineConfig ecfg = engine_config(config);

  Var bce = zero(tape), dice = zero(tape), lm0 = zero(tape), lm1 = zero(tape);
  for (const TrainCase& c : cases) {
    const Sample& s = *c.sample;
    if (!config.drop_context) {
      if (!s.observation) {
        throw MissingSynthesizedContext("sample " + s.id + " has no synthesized observation");
      }
      const auto target = engine::observation_target(*s.observation, vocab, config.drop_events);
      const std::vector<TokenId> input(target.begin(), target.end() - 1);
      const auto fwd = bb.forward(tape, s.image, engine::Pass::kObserve, input);
      lm0 = autodiff::add(lm0, next_token_loss(tape, bb, fwd.hidden, fwd.text_offset,
                                               std::span(target).subspan(1)));
    }

    std::vector<TokenId> text = engine::resolution_prefix(c.context, c.instruction, vocab, ecfg);
    const auto prefix_len = static_cast<int>(text.size());
    const auto response = engine::chain_tokens(s.chain, vocab, config.drop_stage1_cot);
    text.insert(text.end(), response.begin(), response.end());
    const auto fwd = bb.forward(tape, s.image, engine::Pass::kResolve, text);
    lm1 = autodiff::add(lm1, next_token_loss(tape, bb, fwd.hidden, fwd.text_offset + prefix_len - 1, response));

    const int seg_row = fwd.text_offset + static_cast<int>(text.size()) - 1;
    const std::vector<int> seg_rows{seg_row};
    const Var prompt = model.projection().forward(tape, autodiff::gather_rows(fwd.hidden, seg_rows));
    const Var logits = model.decoder().forward(tape, prompt, bb.encode_image(s.image));
    std::vector<double> gt(s.mask_gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = s.mask_gt[i] ? 1.0 : 0.0;
    bce = autodiff::add(bce, autodiff::bce_with_logits(logits, gt));
    dice = autodiff::add(dice, autodiff::dice_with_logits(logits, gt, kDiceEps));
  }
  const double inv = 1.0 / static_cast<double>(cases.size());
  LossGraph g;
  g.bce = autodiff::scale(bce, inv);
  g.dice = autodiff::scale(dice, inv);
  g.lm0 = autodiff::scale(lm0, inv);
  g.lm1 = autodiff::scale(lm1, inv);
  const auto& w = config.weights;
  g.total = autodiff::add(
      autodiff::add(autodiff::scale(autodiff::add(g.bce, g.dice), w.lambda_mask),
                    autodiff::scale(g.lm0, w.lambda_0)),
      autodiff::scale(g.lm1, w.lambda_1));
  return g;
}

LossBreakdown breakdown(const LossGraph& g) {
  LossBreakdown b;
  b.loss_bce = g.bce.scalar();
  b.loss_dice = g.dice.scalar();
  b.loss_mask = b.loss_bce + b.loss_dice;
  b.loss_lm0 = g.lm0.scalar();
  b.loss_lm1 = g.lm1.scalar();
  b.total = g.total.scalar();
  return b;
}

bool is_frozen(std::string_view name, std::span<const std::string> frozen) {
  return std::any_of(frozen.begin(), frozen.end(),
                     [&](const std::string& prefix) { return name.starts_with(prefix); });
}

Adam::Adam(double learning_rate, double beta2, double eps)
    : lr_(learning_rate), beta2_(beta2), eps_(eps) {
  if (!(learning_rate > 0) || !(beta2 > 0 && beta2 < 1) || !(eps > 0)) {
    throw InvalidArgument("invalid optimiser settings");
  }
}

void Adam::step(autodiff::ParameterStore& store, std::span<const std::string> frozen) {
  ++t_;
  const double correction = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (autodiff::Parameter* p : store.all()) {
    if (!p->trainable || is_frozen(p->name, frozen)) continue;
    if (p->grad.size() != p->value.size()) continue;
    auto [it, fresh] = v_.try_emplace(p->name);
    if (fresh) it->second = Matrix::Zero(p->value.rows(), p->value.cols());
    Matrix& v = it->second;
    v = beta2_ * v + (1.0 - beta2_) * p->grad.cwiseAbs2();
    p->value.array() -= lr_ * p->grad.array() / ((v.array() / correction).sqrt() + eps_);
  }
}

Trainer::Trainer(engine::ToyModel& model, std::span<const Sample> samples, TrainConfig config)
    : model_(model),
      samples_(samples),
      config_(std::move(config)),
      adam_(config_.learning_rate, config_.beta2, config_.adam_eps),
      rng_(config_.seed) {
  check_train_config(config_);
  if (samples_.empty()) throw EmptyInput("no training samples");
  order_.resize(samples_.size());
  std::iota(order_.begin(), order_.end(), 0);
  cursor_ = order_.size();
}

std::vector<TrainCase> Trainer::plan(std::span<const Sample* const> batch) {
  const engine::EngineConfig ecfg = engine_config(config_);
  std::vector<TrainCase> cases;
  cases.reserve(batch.size());
  for (const Sample* s : batch) {
    Instruction instr = sample_instruction(*s, config_.intent_mix, rng_);
    if (config_.drop_context) {
      cases.push_back(TrainCase{s, std::move(instr), SceneContext{}, false});
      continue;
    }
    ContextChoice choice = choose_context(t_, config_.schedule, rng_, s->observation,
                                          std::function<SceneContext()>([&] {
                                            return engine::observe(s->image, model_.backbone(), ecfg);
                                          }));
    cases.push_back(TrainCase{s, std::move(instr), std::move(choice.context), choice.self_generated});
  }
  return cases;
}

StepReport Trainer::train_step(std::span<const Sample* const> batch) {
  StepReport report;
  report.step = t_;
  report.p_self = self_context_probability(t_, config_.schedule);
  const auto cases = plan(batch);

  Tape tape;
  const LossGraph graph = build_loss(tape, model_, cases, config_);
  report.loss = breakdown(graph);
  const auto& l = report.loss;
  for (double v : {l.loss_bce, l.loss_dice, l.loss_lm0, l.loss_lm1, l.total}) {
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << t_ << ": bce=" << l.loss_bce << " dice=" << l.loss_dice
          << " lm0=" << l.loss_lm0 << " lm1=" << l.loss_lm1 << " samples=";
      for (const auto& c : cases) msg << c.sample->id << ' ';
      throw NonFiniteLoss(msg.str());
    }
  }
  model_.parameters().zero_grad();
  tape.backward(graph.total);
  adam_.step(model_.parameters(), config_.frozen);

  std::size_t intents = 0, selfs = 0;
  for (const auto& c : cases) {
    intents += c.instruction.kind == InstructionKind::kIntent ? 1 : 0;
    selfs += c.self_generated ? 1 : 0;
  }
  report.intent_fraction = static_cast<double>(intents) / static_cast<double>(cases.size());
  report.self_fraction = static_cast<double>(selfs) / static_cast<double>(cases.size());
  ++t_;
  return report;
}

StepReport Trainer::step() {
  std::vector<const Sample*> batch;
  const auto n = static_cast<std::size_t>(config_.batch_size);
  while (batch.size() < n) {
    if (cursor_ >= order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    batch.push_back(&samples_[order_[cursor_++]]);
  }
  return train_step(batch);
}

std::string log_line(const StepReport& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["loss_mask"] = r.loss.loss_mask;
  j["loss_lm0"] = r.loss.loss_lm0;
  j["loss_lm1"] = r.loss.loss_lm1;
  j["total"] = r.loss.total;
  j["p_self"] = r.p_self;
  j["intent_fraction"] = r.intent_fraction;
  return j.dump();
}

EvalOutcome evaluate(const engine::Pipeline& pipeline, std::span<const Sample> samples,
                     InstructionKind kind, const engine::EngineConfig& config) {
  EvalOutcome out;
  std::vector<const Sample*> todo;
  for (const Sample& s : samples) {
    if (s.instruction(kind) == nullptr) {
      out.skipped.push_back(s.id);
    } else {
      todo.push_back(&s);
    }
  }
  out.records.resize(todo.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      try {
        const Sample& s = *todo[i];
        const auto res = engine::segment(s.image, *s.instruction(kind), pipeline, config);
        out.records[i] = metrics::make_record(s.id, s.chain.action, res.emitted_seg, res.mask, s.mask_gt);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = todo.size();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), todo.size() / 8 + 1);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

TrainResult train(engine::ToyModel& model, std::span<const Sample> samples, const TrainConfig& config,
                  std::ostream* log) {
  TrainResult result;
  if (config.steps == 0) return result;
  Trainer trainer(model, samples, config);
  const auto ecfg = engine_config(config);
  for (long i = 0; i < config.steps; ++i) {
    result.history.push_back(trainer.step());
    if (log != nullptr) *log << log_line(result.history.back()) << '\n';
    if (config.eval_every > 0 && (trainer.t() % config.eval_every == 0 || i + 1 == config.steps)) {
      const auto outcome = evaluate(model.pipeline(), samples, InstructionKind::kIntent, ecfg);
      if (!outcome.records.empty()) {
        result.evaluations.emplace_back(trainer.t(), metrics::miou(outcome.records));
      }
    }
  }
  return result;
}

}  // namespace segworld::training
