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

// Stage-0 supervision synthesis. A generator sees only the image and returns
// a JSON object with the four context fields; synthesize_observation checks
// the shape of that output.

#include <nlohmann/json.hpp>

#include "segworld/domain.hpp"

namespace segworld::benchkit {

class ObservationGenerator {
 public:
  virtual ~ObservationGenerator() = default;
  /// {"scene": str, "objects": [str], "relations": [str], "events": [str]}
  virtual nlohmann::json describe(const GridImage& image) const = 0;
};

/// Rule-based describer over the catalog:
///   scene     "a scene with <n> objects" ("an empty scene" for none)
///   objects   distinct object names, in row-major first-seen order
///   relations "a near b" for each pair of objects with 4-adjacent cells
///   events    "<action> <object>" for each action of each object that does
///             not touch the catalog's inhibitor object
class GridDescriber final : public ObservationGenerator {
 public:
  explicit GridDescriber(Catalog catalog) : catalog_(std::move(catalog)) {}
  nlohmann::json describe(const GridImage& image) const override;

 private:
  Catalog catalog_;
};

/// Throws GeneratorFailure when the generator throws or returns a malformed
/// or incomplete object. An empty objects list is returned as is and is
/// invalid for supervision.
SceneContext synthesize_observation(const GridImage& image, const ObservationGenerator& generator);

}  // namespace segworld::benchkit
