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

// Synthetic Intent2Part-style data on a 6x6 grid.
//
// Objects occupy 2x2 blocks on a 3x3 lattice of slots: the top row of a block
// holds the object's first part, the bottom row its second. Every action is
// afforded by two catalog objects; the catalog's inhibitor ("box") silences
// the events of any object it touches.
//
// Standard images contain one afforder per action, so the intent alone fixes
// the target. Context-informative images contain both afforders of the
// target action with the box touching the decoy, so the target is the
// afforder that still appears among the scene's events.

#include <cstdint>
#include <string>
#include <vector>

#include "segworld/domain.hpp"

namespace segworld::benchkit {

struct ToyWorldConfig {
  int train = 32;
  int test = 0;
  bool informative = false;
  /// Fraction of test samples that reuse a training image with a different
  /// target.
  double overlap_fraction = 0.0;
  int min_objects = 3;
  int max_objects = 4;
  std::uint64_t seed = 1;
};

struct ToyWorld {
  Catalog catalog;
  std::vector<Sample> samples;
};

Catalog toy_catalog();

/// First-person intent sentences for an action of the toy catalog.
const std::vector<std::string>& intent_templates(const std::string& action);

ToyWorld generate_toy_world(const ToyWorldConfig& config);

}  // namespace segworld::benchkit
