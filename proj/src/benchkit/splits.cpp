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

#include "segworld/benchkit/splits.hpp"

#include <algorithm>
#include <set>

#include "segworld/error.hpp"

namespace segworld::benchkit {

DatasetSplit build_splits(std::span<const Sample> samples) {
  std::set<std::string> train_bases;
  for (const auto& s : samples) {
    if (s.base_image_id.empty()) throw MissingBaseImageId("sample " + s.id + " has no base_image_id");
    if (s.split == SplitTag::kTrain) train_bases.insert(s.base_image_id);
  }
  DatasetSplit out;
  for (const auto& s : samples) {
    if (s.split == SplitTag::kTrain) {
      out.train.push_back(s.id);
      continue;
    }
    out.test_official.push_back(s.id);
    (train_bases.count(s.base_image_id) ? out.test_overlap : out.test_clean).push_back(s.id);
  }
  for (auto* v : {&out.train, &out.test_official, &out.test_clean, &out.test_overlap}) {
    std::sort(v->begin(), v->end());
  }
  return out;
}

std::string split_counts(const DatasetSplit& s) {
  return "train=" + std::to_string(s.train.size()) + " test_official=" + std::to_string(s.test_official.size()) +
         " test_clean=" + std::to_string(s.test_clean.size()) +
         " test_overlap=" + std::to_string(s.test_overlap.size());
}

}  // namespace segworld::benchkit
