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

#include <random>

#include "../support/fixtures.hpp"
#include "segworld/error.hpp"
#include "segworld/metrics/metrics.hpp"

namespace segworld::metrics {
namespace {

BinaryMask rows(int w, int h, std::initializer_list<int> set_rows) {
  BinaryMask m(w, h);
  for (int r : set_rows) {
    for (int c = 0; c < w; ++c) m.set(r, c, true);
  }
  return m;
}

EvalRecord rec(std::string action, double iou_value, std::size_t i = 0, std::size_t u = 0,
               bool emitted = true) {
  EvalRecord r;
  r.action = std::move(action);
  r.emitted_seg = emitted;
  r.iou = iou_value;
  r.intersection = i;
  r.union_ = u;
  return r;
}

// Per-cell double loop, independent of overlap().
std::pair<std::size_t, std::size_t> brute(const BinaryMask& a, const BinaryMask& b) {
  std::size_t inter = 0, uni = 0;
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      inter += (a.at(r, c) && b.at(r, c)) ? 1 : 0;
      uni += (a.at(r, c) || b.at(r, c)) ? 1 : 0;
    }
  }
  return {inter, uni};
}

TEST(IouTest, Identical) {
  const auto m = rows(4, 4, {1, 2});
  EXPECT_DOUBLE_EQ(iou(m, m), 1.0);
}

TEST(IouTest, Disjoint) { EXPECT_DOUBLE_EQ(iou(rows(4, 4, {0}), rows(4, 4, {3})), 0.0); }

TEST(IouTest, OverlappingRows) {
  const auto o = overlap(rows(4, 4, {0, 1}), rows(4, 4, {1, 2}));
  EXPECT_EQ(o.intersection, 4u);
  EXPECT_EQ(o.union_, 12u);
  EXPECT_DOUBLE_EQ(iou(rows(4, 4, {0, 1}), rows(4, 4, {1, 2})), 1.0 / 3.0);
}

TEST(IouTest, ShapeMismatch) { EXPECT_THROW(iou(BinaryMask(2, 2), BinaryMask(2, 3)), DimensionMismatch); }

TEST(MiouTest, Examples) {
  std::vector<EvalRecord> a{rec("x", 1.0), rec("x", 0.0)};
  EXPECT_DOUBLE_EQ(miou(a), 0.5);
  std::vector<EvalRecord> b{rec("x", 1.0 / 3), rec("x", 1.0 / 3), rec("x", 1.0 / 3)};
  EXPECT_NEAR(miou(b), 1.0 / 3, 1e-15);
  EXPECT_THROW(miou(std::vector<EvalRecord>{}), EmptyEvaluation);
}

TEST(CiouTest, Examples) {
  std::vector<EvalRecord> a{rec("x", 4.0 / 12, 4, 12), rec("x", 1.0, 12, 12)};
  EXPECT_DOUBLE_EQ(ciou(a), 2.0 / 3);
  EXPECT_DOUBLE_EQ(miou(a), 2.0 / 3);
  std::vector<EvalRecord> b{rec("x", 0.1, 1, 10), rec("x", 0.9, 9, 10)};
  EXPECT_DOUBLE_EQ(ciou(b), 0.5);
  EXPECT_DOUBLE_EQ(miou(b), 0.5);
  std::vector<EvalRecord> c{rec("x", 1.0, 3, 3), rec("x", 1.0, 5, 5)};
  EXPECT_DOUBLE_EQ(ciou(c), 1.0);
  EXPECT_THROW(ciou(std::vector<EvalRecord>{}), EmptyEvaluation);
}

TEST(SegRateTest, Examples) {
  std::vector<EvalRecord> all{rec("x", 1.0), rec("x", 1.0)};
  EXPECT_DOUBLE_EQ(seg_emission_rate(all), 1.0);
  std::vector<EvalRecord> quarter{rec("x", 1.0), rec("x", 0, 0, 4, false), rec("x", 0, 0, 4, false),
                                  rec("x", 0, 0, 4, false)};
  EXPECT_DOUBLE_EQ(seg_emission_rate(quarter), 0.25);
  EXPECT_THROW(seg_emission_rate(std::vector<EvalRecord>{}), EmptyEvaluation);
}

TEST(PerActionTest, Examples) {
  std::vector<EvalRecord> r{rec("hold", 0.2), rec("hold", 0.3), rec("sit", 0.8)};
  const auto m = per_action_miou(r);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("hold").count, 2u);
  EXPECT_DOUBLE_EQ(m.at("hold").miou, 0.25);
  EXPECT_EQ(m.at("sit").count, 1u);
  EXPECT_DOUBLE_EQ(m.at("sit").miou, 0.8);
  std::vector<EvalRecord> one{rec("sit", 0.4), rec("sit", 0.6)};
  EXPECT_DOUBLE_EQ(per_action_miou(one).at("sit").miou, miou(one));
  EXPECT_THROW(per_action_miou(std::vector<EvalRecord>{}), EmptyEvaluation);
}

TEST(MakeRecordTest, NonEmissionKeepsGroundTruthInUnion) {
  const auto gt = rows(4, 4, {0});
  const auto r = make_record("s", "sit", false, gt, gt);
  EXPECT_EQ(r.iou, 0.0);
  EXPECT_EQ(r.intersection, 0u);
  EXPECT_EQ(r.union_, 4u);
  std::vector<EvalRecord> records{r, make_record("t", "sit", true, gt, gt)};
  EXPECT_DOUBLE_EQ(miou(records), 0.5);
  EXPECT_DOUBLE_EQ(ciou(records), 0.5);
}

TEST(MetricsPropertyTest, OracleEquivalenceOnRandomPairs) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    BinaryMask a = testing::random_mask(rng);
    BinaryMask b(a.width(), a.height());
    std::bernoulli_distribution coin(0.4);
    for (std::size_t k = 0; k < b.size(); ++k) b.set(k, coin(rng));
    const auto [inter, uni] = brute(a, b);
    const auto o = overlap(a, b);
    ASSERT_EQ(o.intersection, inter);
    ASSERT_EQ(o.union_, uni);
    ASSERT_EQ(iou(a, b), uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni));
  }
}

TEST(MetricsPropertyTest, BoundsAndReplicationInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 40);
  std::bernoulli_distribution coin(0.7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EvalRecord> records;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      BinaryMask gt = testing::random_mask(rng, 8);
      gt.set(0, true);
      BinaryMask pred(gt.width(), gt.height());
      for (std::size_t k = 0; k < pred.size(); ++k) pred.set(k, coin(rng));
      records.push_back(make_record("s", i % 2 ? "a" : "b", coin(rng), pred, gt));
    }
    const auto rep = summarize(records);
    for (double v : {rep.miou, rep.ciou, rep.seg_rate}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    std::vector<EvalRecord> tripled;
    for (int k = 0; k < 3; ++k) tripled.insert(tripled.end(), records.begin(), records.end());
    const auto rep3 = summarize(tripled);
    EXPECT_NEAR(rep3.miou, rep.miou, 1e-12);
    EXPECT_DOUBLE_EQ(rep3.ciou, rep.ciou);
    EXPECT_DOUBLE_EQ(rep3.seg_rate, rep.seg_rate);
  }
}

TEST(MetricsPropertyTest, EqualUnionsMakeCiouEqualMiou) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> inter(0, 20);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 30; ++i) {
    const std::size_t in = inter(rng);
    records.push_back(rec("x", static_cast<double>(in) / 20.0, in, 20));
  }
  EXPECT_NEAR(ciou(records), miou(records), 1e-12);
}

TEST(ReportTest, JsonSchemaAndRoundTrip) {
  std::vector<EvalRecord> r{rec("hold", 0.2, 1, 5), rec("sit", 0.8, 4, 5)};
  const auto report = summarize(r);
  const auto j = to_json(report);
  for (const char* key : {"miou", "ciou", "seg_rate", "per_action"}) EXPECT_TRUE(j.contains(key)) << key;
  const auto back = report_from_json(j);
  EXPECT_DOUBLE_EQ(back.miou, report.miou);
  EXPECT_EQ(back.per_action, report.per_action);
  const std::string csv = to_csv(report);
  EXPECT_NE(csv.find("hold"), std::string::npos);
  EXPECT_NE(csv.find("sit"), std::string::npos);
}

}  // namespace
}  // namespace segworld::metrics
