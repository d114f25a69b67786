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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "segworld/benchkit/toy_world.hpp"
#include "segworld/engine/engine.hpp"
#include "segworld/error.hpp"
#include "segworld/training/checkpoint.hpp"
#include "segworld/training/config.hpp"
#include "segworld/training/losses.hpp"
#include "segworld/training/schedule.hpp"
#include "segworld/training/trainer.hpp"

namespace segworld::training {
namespace {

BinaryMask mask_of(int w, int h, std::vector<std::uint8_t> cells) {
  return BinaryMask(w, h, std::move(cells));
}

// Direct per-cell forms used as oracles.
double oracle_bce(const std::vector<double>& z, const std::vector<int>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z[i]));
    s -= g[i] ? std::log(p) : std::log(1.0 - p);
  }
  return s / static_cast<double>(z.size());
}

TEST(Losses, DiceExamples) {
  const auto gt = mask_of(2, 2, {1, 1, 0, 0});
  const std::vector<double> same{1, 1, 0, 0};
  EXPECT_LE(dice_loss(same, gt), 1e-6);
  const std::vector<double> zero(4, 0.0);
  EXPECT_NEAR(dice_loss(zero, gt), 1.0, 1e-6);
  const std::vector<double> half(4, 0.5);
  EXPECT_NEAR(dice_loss(half, gt), 1.0 - (2.0 + 1e-6) / (4.0 + 1e-6), 1e-15);
  EXPECT_NEAR(dice_loss(half, gt), 0.5, 1e-6);
  EXPECT_THROW(dice_loss(std::vector<double>(3, 0.5), gt), DimensionMismatch);
}

TEST(Losses, BceExamples) {
  const auto gt = mask_of(2, 1, {1, 0});
  EXPECT_NEAR(bce_loss(std::vector<double>{0, 0}, gt), std::log(2.0), 1e-15);
  EXPECT_LT(bce_loss(std::vector<double>{40, -40}, gt), 1e-15);
  EXPECT_NEAR(bce_loss(std::vector<double>{1.0}, mask_of(1, 1, {1})), 0.3132616875182228, 1e-12);
  EXPECT_THROW(bce_loss(std::vector<double>{0}, gt), DimensionMismatch);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 5.0);
  std::vector<double> z(30);
  std::vector<int> g(30);
  std::vector<std::uint8_t> cells(30);
  for (int i = 0; i < 30; ++i) {
    z[static_cast<std::size_t>(i)] = n(rng);
    g[static_cast<std::size_t>(i)] = i % 3 == 0;
    cells[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(g[static_cast<std::size_t>(i)]);
  }
  EXPECT_NEAR(bce_loss(z, mask_of(6, 5, cells)), oracle_bce(z, g), 1e-12);
}

TEST(Losses, LmExamples) {
  const std::vector<std::vector<double>> certain{{0.0, -INFINITY}, {-INFINITY, 0.0}};
  const std::vector<int> t{0, 1};
  EXPECT_EQ(lm_loss(certain, t), 0.0);
  const double lv = -std::log(5.0);
  const std::vector<std::vector<double>> uniform{std::vector<double>(5, lv)};
  EXPECT_NEAR(lm_loss(uniform, std::vector<int>{3}), std::log(5.0), 1e-15);
  const std::vector<std::vector<double>> two{{std::log(0.5), std::log(0.5)},
                                             {std::log(0.25), std::log(0.75)}};
  EXPECT_NEAR(lm_loss(two, std::vector<int>{0, 0}),
              (std::log(2.0) + std::log(4.0)) / 2.0, 1e-15);
  EXPECT_THROW(lm_loss(two, std::vector<int>{0}), LengthMismatch);
}

TEST(Losses, TotalExamples) {
  const LossWeights w{1.0, 0.5, 1.0};
  EXPECT_NEAR(total_loss(0.4, 0.2, 0.6, w), 1.1, 1e-15);
  EXPECT_EQ(total_loss(0.0, 0.0, 0.0, w), 0.0);
  EXPECT_EQ(total_loss(0.3, 7.0, 0.1, LossWeights{1.0, 0.0, 1.0}), 0.3 + 0.1);
  const auto gt = mask_of(2, 1, {1, 0});
  const std::vector<double> z{0.3, -1.2};
  std::vector<double> p;
  for (double v : z) p.push_back(1.0 / (1.0 + std::exp(-v)));
  EXPECT_NEAR(total_loss(z, gt, 0.2, 0.6, w), bce_loss(z, gt) + dice_loss(p, gt) + 0.1 + 0.6, 1e-12);
}

TEST(Schedule, Examples) {
  ScheduleConfig s{400, 0.5};
  EXPECT_EQ(self_context_probability(0, s), 0.0);
  EXPECT_EQ(self_context_probability(200, s), 0.25);
  EXPECT_EQ(self_context_probability(400, s), 0.5);
  EXPECT_EQ(self_context_probability(1200, s), 0.5);
  for (long t = 0; t < 1000; t += 7) {
    EXPECT_EQ(self_context_probability(t, s), std::min(static_cast<double>(t) / 400.0, 1.0) * 0.5);
  }
}

SceneContext ctx(std::string name) {
  SceneContext c;
  c.scene = "a scene";
  c.objects = {std::move(name)};
  return c;
}

TEST(Schedule, ChooseContextAtStartIsSynthesized) {
  std::mt19937_64 rng(1);
  ScheduleConfig s{100, 0.5};
  int calls = 0;
  for (int i = 0; i < 200; ++i) {
    auto c = choose_context(0, s, rng, ctx("mug"), std::function<SceneContext()>([&] {
                              ++calls;
                              return ctx("kettle");
                            }));
    EXPECT_FALSE(c.self_generated);
    EXPECT_FALSE(c.gradient_blocked);
    EXPECT_EQ(c.context.objects[0], "mug");
  }
  EXPECT_EQ(calls, 0);
}

TEST(Schedule, ChooseContextBinomial) {
  std::mt19937_64 rng(42);
  ScheduleConfig s{100, 0.5};
  int self = 0;
  for (int i = 0; i < 10000; ++i) {
    auto c = choose_context(5000, s, rng, ctx("mug"), ctx("kettle"));
    if (c.self_generated) {
      ++self;
      EXPECT_TRUE(c.gradient_blocked);
      EXPECT_EQ(c.context.objects[0], "kettle");
    }
  }
  EXPECT_NEAR(self / 10000.0, 0.5, 0.02);
}

TEST(Schedule, ChooseContextNeedsSynthesized) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(choose_context(0, ScheduleConfig{10, 0.5}, rng, std::nullopt, ctx("a")),
               MissingSynthesizedContext);
}

Sample sample_with(bool intent) {
  Sample s;
  s.id = "x";
  s.instructions.emplace(InstructionKind::kReferring, Instruction("the handle of the mug", InstructionKind::kReferring));
  s.instructions.emplace(InstructionKind::kReasoning, Instruction("the graspable part of the mug", InstructionKind::kReasoning));
  if (intent) {
    s.instructions.emplace(InstructionKind::kIntent,
                           Instruction("I need to quench my thirst before the meeting", InstructionKind::kIntent));
  }
  return s;
}

TEST(Schedule, SampleInstructionRegimes) {
  std::mt19937_64 rng(9);
  const Sample s = sample_with(true);
  int referring = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto kind = sample_instruction(s, 0.0, rng).kind;
    EXPECT_NE(kind, InstructionKind::kIntent);
    referring += kind == InstructionKind::kReferring;
  }
  EXPECT_NEAR(referring / 2000.0, 0.5, 0.05);
  for (int i = 0; i < 500; ++i) EXPECT_EQ(sample_instruction(s, 1.0, rng).kind, InstructionKind::kIntent);
  int intents = 0;
  for (int i = 0; i < 10000; ++i) intents += sample_instruction(s, 0.2, rng).kind == InstructionKind::kIntent;
  EXPECT_NEAR(intents / 10000.0, 0.2, 0.015);
  EXPECT_THROW(sample_instruction(sample_with(false), 0.2, rng), MissingIntentInstruction);
  EXPECT_NO_THROW(sample_instruction(sample_with(false), 0.0, rng));
}

TEST(Config, ParseAndRoundTrip) {
  const auto c = parse_train_config(
      "# comment\nwarmup_steps = 50\nintent_mix = 0.2\nlambda_0 = 0.25  # inline\n"
      "frozen = backbone.,resolve.\ndrop_events = true\n");
  EXPECT_EQ(c.schedule.warmup_steps, 50);
  EXPECT_EQ(c.intent_mix, 0.2);
  EXPECT_EQ(c.weights.lambda_0, 0.25);
  EXPECT_TRUE(c.drop_events);
  ASSERT_EQ(c.frozen.size(), 2u);
  EXPECT_EQ(c.frozen[1], "resolve.");
  EXPECT_EQ(parse_train_config(format_train_config(c)), c);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_train_config("steps = 3\n"), ParseError);
  EXPECT_THROW(parse_train_config("warmup_steps = 3\nbogus = 1\n"), ParseError);
  EXPECT_THROW(parse_train_config("warmup_steps = 3\nwarmup_steps = 4\n"), ParseError);
  EXPECT_THROW(parse_train_config("warmup_steps = x\n"), ParseError);
  EXPECT_THROW(parse_train_config("warmup_steps\n"), ParseError);
  EXPECT_THROW(load_train_config("/nonexistent/train.conf"), UnreadableFile);
  auto c = parse_train_config("warmup_steps = 3\n");
  c.intent_mix = 1.5;
  EXPECT_THROW(check_train_config(c), InvalidArgument);
}

TEST(Config, ShippedVariantsDifferOnlyInIntentMix) {
  const std::filesystem::path dir = SEGWORLD_DATA_DIR "/configs";
  auto v1 = load_train_config(dir / "v1.conf");
  auto v2 = load_train_config(dir / "v2.conf");
  EXPECT_EQ(v1.intent_mix, 0.0);
  EXPECT_EQ(v2.intent_mix, 0.2);
  v2.intent_mix = 0.0;
  EXPECT_EQ(v1, v2);
  EXPECT_NO_THROW(check_train_config(load_train_config(dir / "overfit.conf")));
  EXPECT_NO_THROW(check_train_config(load_train_config(dir / "ablation.conf")));
}

// Small model over a handful of toy samples.
class TinyTraining : public ::testing::Test {
 protected:
  void SetUp() override {
    benchkit::ToyWorldConfig wc;
    wc.train = 6;
    wc.seed = 5;
    world_ = benchkit::generate_toy_world(wc);
    config_ = parse_train_config("warmup_steps = 4\n");
    config_.hidden = 16;
    config_.heads = 2;
    config_.layers = 2;
    config_.mlp = 24;
    config_.prompt_len = 1;
    config_.prompt_dim = 6;
    config_.feature_dim = 8;
    config_.batch_size = 3;
    config_.intent_mix = 0.5;
    config_.steps = 3;
    config_.seed = 11;
    vocab_ = engine::TextVocab(engine::collect_words(world_.samples, world_.catalog));
  }

  std::unique_ptr<engine::ToyModel> model(const TrainConfig& c) const {
    return make_model(c, world_.catalog, vocab_);
  }

  std::vector<TrainCase> cases(const engine::ToyModel& m, bool self_generated) const {
    std::vector<TrainCase> out;
    for (std::size_t i = 0; i < 2; ++i) {
      const Sample& s = world_.samples[i];
      SceneContext c = self_generated ? engine::observe(s.image, m.backbone(), engine_config(config_))
                                      : *s.observation;
      out.push_back(TrainCase{&s, s.instructions.at(i == 0 ? InstructionKind::kIntent : InstructionKind::kReferring),
                              c, self_generated});
    }
    return out;
  }

  benchkit::ToyWorld world_;
  TrainConfig config_;
  engine::TextVocab vocab_;
};

std::vector<autodiff::Matrix> snapshot(const engine::ToyModel& m) {
  std::vector<autodiff::Matrix> out;
  for (const auto* p : m.parameters().all()) out.push_back(p->value);
  return out;
}

TEST_F(TinyTraining, StepsAreBitReproducible) {
  auto a = model(config_);
  auto b = model(config_);
  Trainer ta(*a, world_.samples, config_);
  Trainer tb(*b, world_.samples, config_);
  for (int i = 0; i < 3; ++i) {
    const auto ra = ta.step();
    const auto rb = tb.step();
    EXPECT_EQ(log_line(ra), log_line(rb));
  }
  EXPECT_EQ(snapshot(*a), snapshot(*b));
  EXPECT_EQ(ta.t(), 3);
}

TEST_F(TinyTraining, FrozenStageOneOnlyMovesProjectionAndDecoder) {
  TrainConfig c = config_;
  c.weights.lambda_0 = 0.0;
  c.weights.lambda_1 = 0.0;
  c.frozen = {"backbone.", "resolve."};
  auto m = model(c);
  const auto before = snapshot(*m);
  Trainer t(*m, world_.samples, c);
  t.step();
  t.step();
  const auto params = m->parameters().all();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params[i]->name;
    const bool movable = name.starts_with("proj.") || name.starts_with("decoder.");
    if (movable) {
      EXPECT_NE(params[i]->value, before[i]) << name;
    } else {
      EXPECT_EQ(params[i]->value, before[i]) << name;
    }
  }
}

double grad_norm(const engine::ToyModel& m, const std::string& name) {
  return m.parameters().at(name).grad.cwiseAbs().maxCoeff();
}

// Gradient of one loss component on a fresh tape.
void backprop(engine::ToyModel& m, std::span<const TrainCase> cs, const TrainConfig& c,
              autodiff::Var LossGraph::*which) {
  autodiff::Tape tape;
  const LossGraph g = build_loss(tape, m, cs, c);
  m.parameters().zero_grad();
  tape.backward(g.*which);
}

TEST_F(TinyTraining, SelfGeneratedContextBlocksStageZeroGradient) {
  auto m = model(config_);
  // A few steps so the observation pass emits non-trivial contexts.
  Trainer t(*m, world_.samples, config_);
  t.step();
  const auto cs = cases(*m, true);
  for (auto which : {&LossGraph::bce, &LossGraph::dice, &LossGraph::lm1}) {
    backprop(*m, cs, config_, which);
    EXPECT_EQ(grad_norm(*m, "observe.prompt"), 0.0);
    EXPECT_GT(grad_norm(*m, "resolve.prompt"), 0.0);
  }
  backprop(*m, cs, config_, &LossGraph::lm0);
  EXPECT_GT(grad_norm(*m, "observe.prompt"), 0.0);
  EXPECT_EQ(grad_norm(*m, "resolve.prompt"), 0.0);
  EXPECT_EQ(grad_norm(*m, "decoder.U"), 0.0);
  // Mask loss reaches Stage-1 parameters through the [SEG] state.
  backprop(*m, cs, config_, &LossGraph::bce);
  EXPECT_GT(grad_norm(*m, "proj.weight"), 0.0);
  EXPECT_GT(grad_norm(*m, "backbone.token_embed"), 0.0);
}

TEST_F(TinyTraining, TotalGradientMatchesFiniteDifferences) {
  auto m = model(config_);
  const auto cs = cases(*m, false);
  TrainConfig c = config_;
  backprop(*m, cs, c, &LossGraph::total);

  std::vector<autodiff::Parameter*> trainable;
  for (auto* p : m->parameters().all()) {
    if (p->trainable) trainable.push_back(p);
  }
  std::vector<std::pair<autodiff::Parameter*, Eigen::Index>> picks;
  std::mt19937_64 rng(17);
  for (int i = 0; i < 24; ++i) {
    auto* p = trainable[std::uniform_int_distribution<std::size_t>(0, trainable.size() - 1)(rng)];
    picks.emplace_back(p, std::uniform_int_distribution<Eigen::Index>(0, p->value.size() - 1)(rng));
  }
  auto total = [&] {
    autodiff::Tape tape(false);
    return build_loss(tape, *m, cs, c).total.scalar();
  };
  for (auto [p, k] : picks) {
    const double analytic = p->grad.data()[k];
    double& x = p->value.data()[k];
    const double saved = x, h = 1e-5;
    x = saved + h;
    const double up = total();
    x = saved - h;
    const double down = total();
    x = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
    EXPECT_LT(std::abs(analytic - numeric) / denom, 1e-4) << p->name << "[" << k << "] " << analytic << " vs " << numeric;
  }
}

TEST_F(TinyTraining, MaskWeightScalesItsContribution) {
  auto m = model(config_);
  const auto cs = cases(*m, false);
  TrainConfig one = config_, two = config_;
  two.weights.lambda_mask = 2.0 * one.weights.lambda_mask;
  autodiff::Tape t1(false), t2(false);
  const auto b1 = breakdown(build_loss(t1, *m, cs, one));
  const auto b2 = breakdown(build_loss(t2, *m, cs, two));
  const auto& w = one.weights;
  const double c1 = b1.total - w.lambda_0 * b1.loss_lm0 - w.lambda_1 * b1.loss_lm1;
  const double c2 = b2.total - w.lambda_0 * b2.loss_lm0 - w.lambda_1 * b2.loss_lm1;
  EXPECT_NEAR(c2, 2.0 * c1, 1e-12 * std::abs(c1));
  EXPECT_NEAR(c1, w.lambda_mask * b1.loss_mask, 1e-12);
  EXPECT_EQ(b1.loss_mask, b2.loss_mask);
  for (double v : {b1.loss_bce, b1.loss_dice, b1.loss_lm0, b1.loss_lm1, b1.total}) EXPECT_GE(v, 0.0);
}

TEST_F(TinyTraining, ComponentsAreNonNegativeAcrossSteps) {
  auto m = model(config_);
  TrainConfig c = config_;
  c.steps = 8;
  std::ostringstream log;
  const auto result = train(*m, world_.samples, c, &log);
  ASSERT_EQ(result.history.size(), 8u);
  for (const auto& r : result.history) {
    for (double v : {r.loss.loss_bce, r.loss.loss_dice, r.loss.loss_lm0, r.loss.loss_lm1, r.loss.total}) {
      EXPECT_GE(v, 0.0);
    }
  }
  // The log carries the exact schedule value at every step.
  std::istringstream in(log.str());
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const long step = j.at("step").get<long>();
    EXPECT_EQ(step, n);
    EXPECT_EQ(j.at("p_self").get<double>(), self_context_probability(step, c.schedule));
    for (const char* key : {"loss_mask", "loss_lm0", "loss_lm1", "total", "intent_fraction"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    ++n;
  }
  EXPECT_EQ(n, 8);
}

TEST_F(TinyTraining, NonFiniteLossAborts) {
  auto m = model(config_);
  m->parameters().at("decoder.bias").value(0, 0) = std::nan("");
  Trainer t(*m, world_.samples, config_);
  try {
    t.step();
    FAIL() << "expected NonFiniteLoss";
  } catch (const NonFiniteLoss& e) {
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("s-"), std::string::npos);
  }
}

TEST_F(TinyTraining, DropContextSkipsObservationLoss) {
  TrainConfig c = config_;
  c.drop_context = true;
  auto m = model(c);
  Trainer t(*m, world_.samples, c);
  const auto r = t.step();
  EXPECT_EQ(r.loss.loss_lm0, 0.0);
  EXPECT_EQ(r.self_fraction, 0.0);
}

TEST_F(TinyTraining, CheckpointRoundTripAndZeroSteps) {
  TrainConfig c = config_;
  c.steps = 0;
  auto m = model(c);
  const auto result = train(*m, world_.samples, c);
  EXPECT_TRUE(result.history.empty());
  const auto path = std::filesystem::temp_directory_path() / "segworld_ckpt_test.bin";
  save_checkpoint(path, *m, c, 0);
  const auto fresh = model(c);
  const Checkpoint loaded = load_checkpoint(path);
  EXPECT_EQ(loaded.config, c);
  EXPECT_EQ(loaded.step, 0);
  EXPECT_EQ(snapshot(*loaded.model), snapshot(*fresh));
  EXPECT_EQ(loaded.model->backbone().vocab().words(), vocab_.words());

  Trainer t(*m, world_.samples, config_);
  t.step();
  save_checkpoint(path, *m, config_, t.t());
  const Checkpoint after = load_checkpoint(path);
  EXPECT_EQ(after.step, 1);
  EXPECT_EQ(snapshot(*after.model), snapshot(*m));
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "segworld_garbage.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTACKPT";
  }
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin"), UnreadableFile);
}

TEST_F(TinyTraining, EvaluateSkipsMissingKinds) {
  auto m = model(config_);
  std::vector<Sample> samples(world_.samples.begin(), world_.samples.begin() + 3);
  samples[1].instructions.erase(InstructionKind::kIntent);
  const auto out = evaluate(m->pipeline(), samples, InstructionKind::kIntent, engine_config(config_));
  EXPECT_EQ(out.records.size(), 2u);
  ASSERT_EQ(out.skipped.size(), 1u);
  EXPECT_EQ(out.skipped[0], samples[1].id);
  for (const auto& r : out.records) EXPECT_TRUE(r.emitted_seg);
}

}  // namespace
}  // namespace segworld::training
