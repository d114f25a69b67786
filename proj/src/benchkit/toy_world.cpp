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

#include "segworld/benchkit/toy_world.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "segworld/benchkit/observation.hpp"
#include "segworld/error.hpp"

namespace segworld::benchkit {

namespace {

constexpr int kSlots = 3;
constexpr int kSide = 2 * kSlots;

struct ObjectDef {
  const char* name;
  const char* top;
  const char* top_affordance;
  const char* bottom;
  const char* bottom_affordance;
  const char* action;  // nullptr for none
  bool action_on_top;
};

const ObjectDef kObjects[] = {
    {"chair", "back", "supportive", "seat", "sittable", "sit", false},
    {"bench", "backrest", "supportive", "seat", "sittable", "sit", false},
    {"knife", "blade", "cutting", "handle", "graspable", "cut", true},
    {"scissors", "blades", "cutting", "grip", "graspable", "cut", true},
    {"kettle", "spout", "pourable", "base", "stable", "pour", true},
    {"jug", "lip", "pourable", "body", "containable", "pour", true},
    {"drawer", "knob", "pullable", "panel", "supportive", "open", true},
    {"door", "handle", "pullable", "panel", "supportive", "open", true},
    {"mug", "rim", "drinkable", "handle", "graspable", "drink", false},
    {"bottle", "cap", "twistable", "body", "graspable", "drink", false},
    {"bed", "headboard", "supportive", "mattress", "reclinable", "lie", false},
    {"sofa", "backrest", "supportive", "cushion", "reclinable", "lie", false},
    {"suitcase", "handle", "graspable", "shell", "containable", "carry", true},
    {"bag", "strap", "graspable", "pouch", "containable", "carry", true},
    {"lamp", "shade", "diffusing", "switch", "pressable", "light", false},
    {"candle", "wick", "flammable", "wax", "meltable", "light", true},
    {"box", "lid", "openable", "base", "stable", nullptr, false},
};

const char* const kInhibitor = "box";

struct Placement {
  std::string object;
  int slot;
};

bool adjacent(int a, int b) {
  const int ar = a / kSlots, ac = a % kSlots, br = b / kSlots, bc = b % kSlots;
  return std::abs(ar - br) + std::abs(ac - bc) == 1;
}

std::string action_of(const Catalog& catalog, const std::string& object) {
  const ObjectSpec* o = catalog.object(object);
  return o->actions.empty() ? std::string() : o->actions.begin()->first;
}

GridImage render(const Catalog& catalog, const std::vector<Placement>& placements) {
  std::vector<VisualToken> cells(kSide * kSide, kBackground);
  for (const auto& p : placements) {
    const ObjectSpec* o = catalog.object(p.object);
    const int r0 = 2 * (p.slot / kSlots), c0 = 2 * (p.slot % kSlots);
    for (int dr = 0; dr < 2; ++dr) {
      for (int dc = 0; dc < 2; ++dc) {
        cells[static_cast<std::size_t>((r0 + dr) * kSide + c0 + dc)] = o->parts[static_cast<std::size_t>(dr)].token;
      }
    }
  }
  return GridImage(kSide, kSide, std::move(cells), 1);
}

class Builder {
 public:
  Builder(const ToyWorldConfig& config, Catalog catalog)
      : config_(config), catalog_(std::move(catalog)), rng_(config.seed), describer_(catalog_) {
    for (const auto& o : catalog_.objects()) {
      if (o.name == kInhibitor) continue;
      afforders_[action_of(catalog_, o.name)].push_back(o.name);
    }
    for (const auto& [a, objs] : afforders_) actions_.push_back(a);
  }

  std::vector<Placement> standard_layout(const std::string& target) {
    const std::string action = action_of(catalog_, target);
    std::vector<std::string> pool;
    for (const auto& [a, objs] : afforders_) {
      if (a != action) pool.insert(pool.end(), objs.begin(), objs.end());
    }
    std::shuffle(pool.begin(), pool.end(), rng_);
    std::vector<std::string> chosen{target};
    std::set<std::string> used_actions{action};
    const int k = std::uniform_int_distribution<int>(config_.min_objects, config_.max_objects)(rng_);
    for (const auto& o : pool) {
      if (static_cast<int>(chosen.size()) >= k) break;
      if (used_actions.insert(action_of(catalog_, o)).second) chosen.push_back(o);
    }
    std::vector<int> slots(kSlots * kSlots);
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng_);
    std::vector<Placement> out;
    for (std::size_t i = 0; i < chosen.size(); ++i) out.push_back({chosen[i], slots[i]});
    return out;
  }

  std::vector<Placement> informative_layout(const std::string& target) {
    const std::string action = action_of(catalog_, target);
    const auto& pair = afforders_.at(action);
    const std::string decoy = pair[0] == target ? pair[1] : pair[0];
    std::uniform_int_distribution<int> slot(0, kSlots * kSlots - 1);
    for (;;) {
      const int d = slot(rng_), b = slot(rng_), t = slot(rng_);
      if (d == b || d == t || b == t || !adjacent(d, b) || adjacent(t, b)) continue;
      std::vector<Placement> out{{target, t}, {decoy, d}, {kInhibitor, b}};
      std::vector<std::string> pool;
      for (const auto& [a, objs] : afforders_) {
        if (a != action) pool.insert(pool.end(), objs.begin(), objs.end());
      }
      std::shuffle(pool.begin(), pool.end(), rng_);
      const int extra = std::uniform_int_distribution<int>(0, std::max(0, config_.max_objects - 3))(rng_);
      std::set<std::string> used_actions{action};
      std::vector<int> free;
      for (int s = 0; s < kSlots * kSlots; ++s) {
        if (s != d && s != b && s != t) free.push_back(s);
      }
      std::shuffle(free.begin(), free.end(), rng_);
      for (const auto& o : pool) {
        if (static_cast<int>(out.size()) - 3 >= extra) break;
        if (used_actions.insert(action_of(catalog_, o)).second) out.push_back({o, free[out.size() - 3]});
      }
      return out;
    }
  }

  Sample make_sample(const std::string& id, const std::string& base, SplitTag split,
                     const GridImage& image, const std::string& target) {
    Sample s;
    s.id = id;
    s.base_image_id = base;
    s.split = split;
    s.image = image;
    const auto chain = catalog_.chain_for(target, action_of(catalog_, target));
    if (!chain) throw InvalidArgument("object " + target + " has no action");
    s.chain = *chain;
    s.mask_gt = part_mask(image, catalog_, s.chain);
    const auto& templates = intent_templates(s.chain.action);
    const std::string intent = templates[std::uniform_int_distribution<std::size_t>(0, templates.size() - 1)(rng_)];
    s.instructions.emplace(InstructionKind::kReferring,
                           Instruction("the " + s.chain.part + " of the " + s.chain.object, InstructionKind::kReferring));
    s.instructions.emplace(InstructionKind::kReasoning,
                           Instruction("the " + s.chain.affordance + " part of the " + s.chain.object,
                                       InstructionKind::kReasoning));
    s.instructions.emplace(InstructionKind::kIntent, Instruction(intent, InstructionKind::kIntent));
    if (split == SplitTag::kTrain) s.observation = synthesize_observation(image, describer_);
    check_sample(s);
    return s;
  }

  std::string random_target() {
    const std::string& action = actions_[std::uniform_int_distribution<std::size_t>(0, actions_.size() - 1)(rng_)];
    const auto& objs = afforders_.at(action);
    return objs[std::uniform_int_distribution<std::size_t>(0, objs.size() - 1)(rng_)];
  }

  ToyWorld build() {
    ToyWorld world{catalog_, {}};
    struct Image {
      std::string base;
      GridImage image;
      std::vector<Placement> layout;
      std::string target;
    };
    std::vector<Image> train_images;
    int image_counter = 0, sample_counter = 0;
    auto next_base = [&] {
      char buf[32];
      std::snprintf(buf, sizeof buf, "img-%04d", image_counter++);
      return std::string(buf);
    };
    auto next_id = [&] {
      char buf[32];
      std::snprintf(buf, sizeof buf, "s-%04d", sample_counter++);
      return std::string(buf);
    };
    auto fresh = [&](SplitTag split) {
      const std::string target = random_target();
      auto layout = config_.informative ? informative_layout(target) : standard_layout(target);
      Image img{next_base(), render(catalog_, layout), layout, target};
      world.samples.push_back(make_sample(next_id(), img.base, split, img.image, target));
      return img;
    };
    for (int i = 0; i < config_.train; ++i) train_images.push_back(fresh(SplitTag::kTrain));

    const int overlap = train_images.empty() ? 0
                        : static_cast<int>(std::lround(config_.overlap_fraction * config_.test));
    for (int i = 0; i < config_.test; ++i) {
      if (i < overlap) {
        const Image& src = train_images[static_cast<std::size_t>(i) % train_images.size()];
        std::vector<std::string> others;
        for (const auto& p : src.layout) {
          if (p.object != src.target && p.object != kInhibitor && unique_afforder(src.layout, p.object)) {
            others.push_back(p.object);
          }
        }
        const std::string target = others.empty() ? src.target
                                                  : others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng_)];
        world.samples.push_back(make_sample(next_id(), src.base, SplitTag::kTest, src.image, target));
      } else {
        fresh(SplitTag::kTest);
      }
    }
    return world;
  }

 private:
  bool unique_afforder(const std::vector<Placement>& layout, const std::string& object) const {
    const std::string action = action_of(catalog_, object);
    int n = 0;
    for (const auto& p : layout) n += action_of(catalog_, p.object) == action ? 1 : 0;
    return n == 1;
  }

  ToyWorldConfig config_;
  Catalog catalog_;
  std::mt19937_64 rng_;
  GridDescriber describer_;
  std::map<std::string, std::vector<std::string>> afforders_;
  std::vector<std::string> actions_;
};

}  // namespace

Catalog toy_catalog() {
  std::vector<ObjectSpec> objects;
  VisualToken next = 1;
  for (const auto& d : kObjects) {
    ObjectSpec o;
    o.name = d.name;
    o.parts.push_back({d.top, next++, d.top_affordance});
    o.parts.push_back({d.bottom, next++, d.bottom_affordance});
    if (d.action != nullptr) o.actions[d.action] = d.action_on_top ? d.top : d.bottom;
    objects.push_back(std::move(o));
  }
  return Catalog(std::move(objects), kInhibitor);
}

const std::vector<std::string>& intent_templates(const std::string& action) {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"sit", {"I need to take the weight off my tired legs for a while",
               "I would like to take a short break after standing all day"}},
      {"cut", {"I need to split this loaf of bread into even pieces",
               "I want to divide this sheet of paper into two halves"}},
      {"pour", {"I would like to fill my teapot with hot water",
                "I want to serve some boiling water into the teapot"}},
      {"open", {"I need to get access to whatever is kept behind it",
                "I want to see what is hidden on the other side"}},
      {"drink", {"I want something cold and refreshing after my long run",
                 "I need to quench my thirst before the meeting starts"}},
      {"lie", {"I want to stretch out flat and take a long nap",
               "I need to rest my back properly after this long day"}},
      {"carry", {"I need to take all my belongings along on the trip",
                 "I want to move my things to the other room in one go"}},
      {"light", {"I want to brighten up this dark room a little",
                 "I need some illumination so that I can read my book"}},
  };
  const auto it = table.find(action);
  if (it == table.end()) throw InvalidArgument("no intent templates for action '" + action + "'");
  return it->second;
}

ToyWorld generate_toy_world(const ToyWorldConfig& config) {
  if (config.train < 0 || config.test < 0) throw InvalidArgument("sample counts must be non-negative");
  if (config.min_objects < 1 || config.max_objects < config.min_objects || config.max_objects > 8) {
    throw InvalidArgument("object counts must satisfy 1 <= min <= max <= 8");
  }
  if (config.informative && config.max_objects < 3) {
    throw InvalidArgument("context-informative images need at least three objects");
  }
  if (config.overlap_fraction < 0.0 || config.overlap_fraction > 1.0) {
    throw InvalidArgument("overlap_fraction must lie in [0, 1]");
  }
  return Builder(config, toy_catalog()).build();
}

}  // namespace segworld::benchkit
