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

#include <random>
#include <vector>

#include "segworld/domain.hpp"

namespace segworld::testing {

/// Two objects with two parts each: mug (handle 1, body 2) and kettle
/// (spout 3, lid 4).
inline Catalog small_catalog() {
  ObjectSpec mug{"mug", {{"handle", 1, "graspable"}, {"body", 2, "containable"}}, {{"drink", "handle"}}};
  ObjectSpec kettle{"kettle", {{"spout", 3, "pourable"}, {"lid", 4, "openable"}}, {{"pour", "spout"}}};
  return Catalog({mug, kettle});
}

/// 4x4 grid: mug in the top-left 2x2 block, kettle in the bottom-right.
inline GridImage small_image() {
  return GridImage(4, 4, {1, 1, 0, 0,
                          2, 2, 0, 0,
                          0, 0, 3, 3,
                          0, 0, 4, 4}, 4);
}

inline BinaryMask random_mask(std::mt19937_64& rng, int max_side = 32) {
  std::uniform_int_distribution<int> side(1, max_side);
  const int w = side(rng);
  const int h = side(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = u(rng);
  BinaryMask m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, u(rng) < density);
  return m;
}

}  // namespace segworld::testing
