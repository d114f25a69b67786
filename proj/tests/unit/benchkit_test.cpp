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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "../support/fixtures.hpp"
#include "segworld/benchkit/ingest.hpp"
#include "segworld/benchkit/observation.hpp"
#include "segworld/benchkit/splits.hpp"
#include "segworld/benchkit/toy_world.hpp"
#include "segworld/benchkit/validator.hpp"
#include "segworld/dataset_io.hpp"
#include "segworld/error.hpp"

namespace segworld::benchkit {
namespace {

const std::filesystem::path kData = SEGWORLD_DATA_DIR;
const std::filesystem::path kTestData = SEGWORLD_TEST_DATA_DIR;

ValidatorRuleSet shipped_rules() {
  return load_rules(kData / "lexicon.json", kData / "first_person_patterns.txt");
}

ReasoningChain chain(std::string o, std::string a, std::string p, std::string f) {
  return ReasoningChain{std::move(o), std::move(a), std::move(p), std::move(f)};
}

std::set<std::string> rules_of(const ValidationVerdict& v) {
  std::set<std::string> out;
  for (const auto& x : v.violations) out.insert(x.rule);
  return out;
}

TEST(Variants, HandleExample) {
  const Lexicon lex{{"handle", {"grip"}}};
  const auto v = term_variants("handle", lex);
  for (const char* w : {"handle", "handles", "handling", "handled", "handler", "grip", "grips", "gripping"}) {
    EXPECT_TRUE(v.count(w)) << w;
  }
}

TEST(Variants, InflectionRules) {
  auto has = [](const std::string& t, const std::string& w) { return inflections(t).count(w) == 1; };
  EXPECT_TRUE(has("cut", "cutting"));
  EXPECT_TRUE(has("cut", "cuts"));
  EXPECT_TRUE(has("cut", "cutter"));
  EXPECT_TRUE(has("box", "boxes"));
  EXPECT_TRUE(has("switch", "switches"));
  EXPECT_TRUE(has("carry", "carries"));
  EXPECT_TRUE(has("carry", "carried"));
  EXPECT_TRUE(has("lie", "lying"));
  EXPECT_TRUE(has("pour", "pouring"));
  EXPECT_TRUE(has("pour", "poured"));
  EXPECT_TRUE(has("open", "opening"));
  EXPECT_TRUE(has("slice", "slicing"));
  EXPECT_TRUE(has("slice", "sliced"));
  EXPECT_TRUE(has("sip", "sipping"));
  EXPECT_TRUE(has("sip", "sipped"));
  EXPECT_FALSE(has("open", "openning"));
  EXPECT_FALSE(has("show", "showwing"));
  EXPECT_TRUE(inflections("").empty());
  EXPECT_THROW(term_variants("", {}), InvalidArgument);
}

TEST(Variants, LexiconClosureIsDirectedAndTransitive) {
  const Lexicon lex{{"a", {"b"}}, {"b", {"c"}}, {"d", {"a"}}};
  const auto v = term_variants("a", lex);
  EXPECT_TRUE(v.count("b"));
  EXPECT_TRUE(v.count("c"));
  EXPECT_FALSE(v.count("d"));
  const auto multi = term_variants("Coffee Mug", {});
  EXPECT_TRUE(multi.count("coffee mug"));
  EXPECT_TRUE(multi.count("coffee mugs"));
}

// Oracle for the lexicon closure: breadth-first search over synonym edges.
std::set<std::string> closure(const std::string& term, const Lexicon& lex) {
  std::set<std::string> seen{term};
  std::vector<std::string> queue{term};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto it = lex.find(queue[i]);
    if (it == lex.end()) continue;
    for (const auto& s : it->second) {
      if (seen.insert(s).second) queue.push_back(s);
    }
  }
  return seen;
}

// Expanding any base of a closure adds nothing, and every non-base variant
// is a single inflection of some base.
TEST(Variants, ClosureIsIdempotentOnShippedTerms) {
  const auto rules = shipped_rules();
  for (const auto& [term, syns] : rules.lexicon) {
    const auto v = term_variants(term, rules.lexicon);
    const auto bases = closure(term, rules.lexicon);
    for (const auto& base : bases) {
      ASSERT_TRUE(v.count(base)) << base;
      for (const auto& w : term_variants(base, rules.lexicon)) EXPECT_TRUE(v.count(w)) << term << " -> " << w;
    }
    for (const auto& w : v) {
      if (bases.count(w)) continue;
      bool single = false;
      for (const auto& base : bases) single |= inflections(base).count(w) == 1;
      EXPECT_TRUE(single) << term << " -> " << w;
    }
  }
  const auto handle = term_variants("handle", rules.lexicon);
  EXPECT_FALSE(handle.count("handleses"));
  EXPECT_FALSE(handle.count("handlers"));
  EXPECT_FALSE(handle.count("handlinging"));
}

TEST(Validator, WorkedExamples) {
  auto rules = shipped_rules();
  const auto mug = chain("mug", "drink", "handle", "graspable");
  const auto v1 = validate_intent_instruction("I want to drink water.", mug, rules);
  EXPECT_FALSE(v1.accepted);
  EXPECT_EQ(rules_of(v1), (std::set<std::string>{kRuleLength, kRuleBannedTerm}));
  bool drink_span = false;
  for (const auto& x : v1.violations) {
    if (x.rule == kRuleLength) {
      EXPECT_EQ(x.span, "5 words");
    }
    drink_span |= x.rule == kRuleBannedTerm && x.span == "drink";
  }
  EXPECT_TRUE(drink_span);

  const auto v2 = validate_intent_instruction("I'd really like something refreshing to sip on right now.", mug, rules);
  EXPECT_FALSE(v2.accepted);
  ASSERT_EQ(v2.violations.size(), 1u);
  EXPECT_EQ(v2.violations[0], (Violation{kRuleBannedTerm, "sip"}));

  const auto v3 = validate_intent_instruction("I would like to enjoy a hot beverage this morning.",
                                              chain("kettle", "pour", "spout", "pourable"), rules);
  EXPECT_TRUE(v3.accepted);
  EXPECT_TRUE(v3.violations.empty());
}

TEST(Validator, BannedSetContainsChainTermsVerbatim) {
  ValidatorRuleSet bare;
  bare.first_person = compile_patterns({"^i "});
  bare.expand_variants = false;
  const auto c = chain("teapot", "brew", "lid", "liftable");
  for (const char* term : {"teapot", "brew", "lid", "liftable"}) {
    const auto v = validate_intent_instruction(std::string("I would like the ") + term + " for my purposes today", c, bare);
    ASSERT_EQ(v.violations.size(), 1u) << term;
    EXPECT_EQ(v.violations[0].span, term);
  }
  // Without expansion an inflected form passes.
  EXPECT_TRUE(validate_intent_instruction("I would like some brewing for my purposes today", c, bare).accepted);
}

TEST(Validator, GoldenCorpusAgreement) {
  const auto rules = shipped_rules();
  std::ifstream in(kTestData / "golden_intents.jsonl");
  ASSERT_TRUE(in);
  std::string line;
  int n = 0, agree = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto c = chain_from_json(j.at("chain"));
    std::set<std::string> expected;
    for (const auto& r : j.at("violations")) expected.insert(r.get<std::string>());
    const auto v = validate_intent_instruction(j.at("text").get<std::string>(), c, rules);
    const bool ok = rules_of(v) == expected && v.accepted == expected.empty();
    EXPECT_TRUE(ok) << j.at("text").get<std::string>();
    agree += ok;
    ++n;
  }
  EXPECT_GE(n, 60);
  EXPECT_EQ(agree, n);
}

TEST(Validator, AcceptedIffNoViolations) {
  const auto rules = shipped_rules();
  std::mt19937_64 rng(4);
  const std::vector<std::string> words{"i", "want", "to", "drink", "a", "mug", "of", "something", "cold", "need"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    const int n = std::uniform_int_distribution<int>(1, 30)(rng);
    for (int k = 0; k < n; ++k) text += words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)] + " ";
    const auto v = validate_intent_instruction(text, chain("mug", "drink", "handle", "graspable"), rules);
    EXPECT_EQ(v.accepted, v.violations.empty());
  }
}

TEST(Validator, MissingFilesAreReported) {
  EXPECT_THROW(load_rules("/nonexistent/lexicon.json", kData / "first_person_patterns.txt"), UnreadableFile);
  EXPECT_THROW(load_rules(kData / "lexicon.json", "/nonexistent/patterns.txt"), UnreadableFile);
}

Sample split_sample(std::string id, std::string base, SplitTag split) {
  Sample s;
  s.id = std::move(id);
  s.base_image_id = std::move(base);
  s.split = split;
  return s;
}

TEST(Splits, ToyLeakageCase) {
  const std::vector<Sample> samples{
      split_sample("t1", "a", SplitTag::kTrain), split_sample("t2", "b", SplitTag::kTrain),
      split_sample("x1", "a", SplitTag::kTest),  split_sample("x2", "c", SplitTag::kTest),
      split_sample("x3", "c", SplitTag::kTest)};
  const auto split = build_splits(samples);
  EXPECT_EQ(split.train, (std::vector<std::string>{"t1", "t2"}));
  EXPECT_EQ(split.test_official, (std::vector<std::string>{"x1", "x2", "x3"}));
  EXPECT_EQ(split.test_clean, (std::vector<std::string>{"x2", "x3"}));
  EXPECT_EQ(split.test_overlap, (std::vector<std::string>{"x1"}));
  EXPECT_EQ(split_counts(split), "train=2 test_official=3 test_clean=2 test_overlap=1");
}

TEST(Splits, NoSharedBasesMeansAllClean) {
  const std::vector<Sample> samples{split_sample("t", "a", SplitTag::kTrain), split_sample("x", "b", SplitTag::kTest),
                                    split_sample("y", "c", SplitTag::kTest)};
  const auto split = build_splits(samples);
  EXPECT_EQ(split.test_clean, split.test_official);
  EXPECT_TRUE(split.test_overlap.empty());
}

TEST(Splits, MissingBaseImageIdThrows) {
  const std::vector<Sample> samples{split_sample("t", "", SplitTag::kTrain)};
  EXPECT_THROW(build_splits(samples), MissingBaseImageId);
}

TEST(Splits, OrderIndependentAndPartitioning) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Sample> samples;
    const int n = std::uniform_int_distribution<int>(1, 60)(rng);
    for (int i = 0; i < n; ++i) {
      samples.push_back(split_sample("s" + std::to_string(i), "b" + std::to_string(std::uniform_int_distribution<int>(0, 12)(rng)),
                                     std::bernoulli_distribution(0.6)(rng) ? SplitTag::kTrain : SplitTag::kTest));
    }
    const auto a = build_splits(samples);
    std::shuffle(samples.begin(), samples.end(), rng);
    const auto b = build_splits(samples);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test_clean, b.test_clean);
    EXPECT_EQ(a.test_overlap, b.test_overlap);
    // Oracle: set arithmetic on base ids.
    std::set<std::string> train_bases;
    for (const auto& s : samples) {
      if (s.split == SplitTag::kTrain) train_bases.insert(s.base_image_id);
    }
    std::vector<std::string> clean, overlap;
    for (const auto& s : samples) {
      if (s.split != SplitTag::kTest) continue;
      (train_bases.count(s.base_image_id) ? overlap : clean).push_back(s.id);
    }
    std::sort(clean.begin(), clean.end());
    std::sort(overlap.begin(), overlap.end());
    EXPECT_EQ(a.test_clean, clean);
    EXPECT_EQ(a.test_overlap, overlap);
    EXPECT_EQ(a.test_clean.size() + a.test_overlap.size(), a.test_official.size());
  }
}

TEST(Observation, DescriberNamesVisibleObjects) {
  const GridDescriber d(testing::small_catalog());
  const auto ctx = synthesize_observation(testing::small_image(), d);
  EXPECT_EQ(ctx.objects, (std::vector<std::string>{"mug", "kettle"}));
  EXPECT_EQ(ctx.scene, "a scene with two objects");
  // The two objects touch only diagonally.
  EXPECT_TRUE(ctx.relations.empty());
  EXPECT_TRUE(ctx.valid_for_supervision());
}

TEST(Observation, EmptyGridIsFlagged) {
  const GridDescriber d(testing::small_catalog());
  const auto ctx = synthesize_observation(GridImage(3, 3, std::vector<VisualToken>(9, kBackground), 4), d);
  EXPECT_TRUE(ctx.objects.empty());
  EXPECT_FALSE(ctx.valid_for_supervision());
}

class ScriptedGenerator final : public ObservationGenerator {
 public:
  explicit ScriptedGenerator(nlohmann::json out, bool fail = false) : out_(std::move(out)), fail_(fail) {}
  nlohmann::json describe(const GridImage&) const override {
    if (fail_) throw std::runtime_error("backend down");
    return out_;
  }

 private:
  nlohmann::json out_;
  bool fail_;
};

TEST(Observation, GeneratorContract) {
  const auto img = testing::small_image();
  nlohmann::json ok = {{"scene", "s"}, {"objects", {"mug"}}, {"relations", nlohmann::json::array()},
                       {"events", {"drink mug"}}};
  EXPECT_EQ(synthesize_observation(img, ScriptedGenerator(ok)).events, (std::vector<std::string>{"drink mug"}));
  auto missing = ok;
  missing.erase("events");
  EXPECT_THROW(synthesize_observation(img, ScriptedGenerator(missing)), GeneratorFailure);
  EXPECT_THROW(synthesize_observation(img, ScriptedGenerator(nlohmann::json::array())), GeneratorFailure);
  EXPECT_THROW(synthesize_observation(img, ScriptedGenerator(ok, true)), GeneratorFailure);
}

TEST(Observation, InhibitorSilencesNeighbours) {
  const auto cat = toy_catalog();
  const GridDescriber d(cat);
  // kettle at slot 0, box at slot 1 (touching), jug at slot 8.
  std::vector<VisualToken> cells(36, kBackground);
  auto put = [&](const std::string& obj, int slot) {
    const auto* o = cat.object(obj);
    const int r0 = 2 * (slot / 3), c0 = 2 * (slot % 3);
    for (int dr = 0; dr < 2; ++dr) {
      for (int dc = 0; dc < 2; ++dc) cells[static_cast<std::size_t>((r0 + dr) * 6 + c0 + dc)] = o->parts[static_cast<std::size_t>(dr)].token;
    }
  };
  put("kettle", 0);
  put("box", 1);
  put("jug", 8);
  const auto ctx = synthesize_observation(GridImage(6, 6, cells, 1), d);
  EXPECT_EQ(ctx.events, (std::vector<std::string>{"pour jug"}));
  EXPECT_EQ(ctx.relations, (std::vector<std::string>{"kettle near box"}));
}

TEST(ToyWorld, IntentInstructionsPassTheValidator) {
  const auto rules = shipped_rules();
  for (bool informative : {false, true}) {
    ToyWorldConfig c;
    c.train = 64;
    c.test = 32;
    c.informative = informative;
    c.overlap_fraction = 0.5;
    const auto world = generate_toy_world(c);
    for (const auto& s : world.samples) {
      const auto v = validate_intent_instruction(s.instruction(InstructionKind::kIntent)->text, s.chain, rules);
      EXPECT_TRUE(v.accepted) << s.instruction(InstructionKind::kIntent)->text << " / " << s.chain.object;
    }
  }
}

TEST(ToyWorld, InformativeTargetIsTheOnlyActiveAfforder) {
  ToyWorldConfig c;
  c.train = 40;
  c.informative = true;
  c.min_objects = 3;
  c.max_objects = 3;
  const auto world = generate_toy_world(c);
  for (const auto& s : world.samples) {
    ASSERT_TRUE(s.observation.has_value());
    const auto& ev = s.observation->events;
    EXPECT_NE(std::find(ev.begin(), ev.end(), s.chain.action + " " + s.chain.object), ev.end());
    int afforders = 0;
    for (const auto& o : s.observation->objects) {
      const auto* spec = world.catalog.object(o);
      afforders += spec->actions.count(s.chain.action) ? 1 : 0;
    }
    EXPECT_EQ(afforders, 2);
    EXPECT_EQ(s.observation->objects.size(), 3u);
    EXPECT_NO_THROW(check_sample(s));
  }
}

TEST(ToyWorld, SplitsFollowOverlapFraction) {
  ToyWorldConfig c;
  c.train = 20;
  c.test = 10;
  c.overlap_fraction = 0.3;
  const auto world = generate_toy_world(c);
  const auto split = build_splits(world.samples);
  EXPECT_EQ(split.train.size(), 20u);
  EXPECT_EQ(split.test_overlap.size(), 3u);
  EXPECT_EQ(split.test_clean.size(), 7u);
  for (const auto& s : world.samples) EXPECT_EQ(s.observation.has_value(), s.split == SplitTag::kTrain);
  const auto again = generate_toy_world(c);
  for (std::size_t i = 0; i < world.samples.size(); ++i) EXPECT_EQ(to_json(world.samples[i]), to_json(again.samples[i]));
}

class IngestTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "segworld_ingest_test";
    std::filesystem::create_directories(dir_);
    ToyWorldConfig c;
    c.train = 3;
    world_ = generate_toy_world(c);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path write(const std::vector<std::string>& lines) {
    const auto path = dir_ / "data.jsonl";
    std::ofstream out(path);
    for (const auto& l : lines) out << l << "\n";
    return path;
  }

  std::filesystem::path dir_;
  ToyWorld world_;
};

TEST_F(IngestTest, WellFormedFile) {
  std::vector<std::string> lines;
  for (const auto& s : world_.samples) lines.push_back(to_json(s).dump());
  const auto r = ingest_dataset(write(lines));
  EXPECT_EQ(r.samples.size(), 3u);
  EXPECT_TRUE(r.diagnostics.empty());
}

TEST_F(IngestTest, DiagnosticsPerLine) {
  auto bad_rle = to_json(world_.samples[0]);
  bad_rle["mask"]["runs"] = {1, 2};
  auto no_part = to_json(world_.samples[1]);
  no_part["chain"].erase("part");
  auto leaky = to_json(world_.samples[2]);
  leaky["instructions"]["intent"] = "I want to hold the " + world_.samples[2].chain.part + " of this thing right now";
  const auto path = write({bad_rle.dump(), "{not json", no_part.dump(), leaky.dump()});
  const auto rules = shipped_rules();
  const auto r = ingest_dataset(path, &rules);
  EXPECT_TRUE(r.samples.empty());
  ASSERT_GE(r.diagnostics.size(), 4u);
  EXPECT_EQ(r.diagnostics[0].line, 1u);
  EXPECT_EQ(r.diagnostics[0].rule, "malformed_rle");
  EXPECT_EQ(r.diagnostics[1].rule, "parse_error");
  EXPECT_EQ(r.diagnostics[2].rule, "missing_chain_field");
  bool part_span = false;
  for (const auto& d : r.diagnostics) {
    if (d.line == 4 && d.rule == std::string("validator.") + kRuleBannedTerm) part_span |= d.span == world_.samples[2].chain.part;
  }
  EXPECT_TRUE(part_span);

  const auto diag = dir_ / "diag.jsonl";
  write_diagnostics(diag, r.diagnostics);
  std::ifstream in(diag);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("rule") && j.contains("line") && j.contains("span"));
    ++n;
  }
  EXPECT_EQ(n, r.diagnostics.size());
}

TEST_F(IngestTest, EmptyMaskIsRejected) {
  auto j = to_json(world_.samples[0]);
  const int cells = j["mask"]["width"].get<int>() * j["mask"]["height"].get<int>();
  j["mask"]["runs"] = {cells};
  const auto r = ingest_dataset(write({j.dump()}));
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].rule, "invalid_sample");
}

TEST(Ingest, UnreadableFile) {
  EXPECT_THROW(ingest_dataset("/nonexistent/data.jsonl"), UnreadableFile);
}

}  // namespace
}  // namespace segworld::benchkit
