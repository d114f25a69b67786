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

#include "segworld/benchkit/observation.hpp"

#include <set>

#include "segworld/dataset_io.hpp"
#include "segworld/error.hpp"
#include "segworld/text.hpp"

namespace segworld::benchkit {

namespace {

const char* const kCountWords[] = {"no", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};

std::string count_word(std::size_t n) {
  return n < std::size(kCountWords) ? kCountWords[n] : std::to_string(n);
}

std::string words_of(const std::string& name) { return join(name_words(name), " "); }

}  // namespace

nlohmann::json GridDescriber::describe(const GridImage& image) const {
  std::vector<std::string> objects;
  std::map<std::string, std::size_t> order;
  std::vector<std::string> cell_object(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const TokenInfo* info = catalog_.token(image.cells()[i]);
    if (info == nullptr) continue;
    cell_object[i] = info->object;
    if (order.emplace(info->object, objects.size()).second) objects.push_back(info->object);
  }

  std::set<std::pair<std::size_t, std::size_t>> touching;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const auto& a = cell_object[image.index(r, c)];
      if (a.empty()) continue;
      for (auto [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}}) {
        if (r + dr >= image.height() || c + dc >= image.width()) continue;
        const auto& b = cell_object[image.index(r + dr, c + dc)];
        if (b.empty() || b == a) continue;
        const std::size_t ia = order.at(a), ib = order.at(b);
        touching.emplace(std::min(ia, ib), std::max(ia, ib));
      }
    }
  }

  std::vector<std::string> relations;
  std::set<std::string> inhibited;
  for (const auto& [ia, ib] : touching) {
    relations.push_back(words_of(objects[ia]) + " near " + words_of(objects[ib]));
    if (!catalog_.inhibitor().empty()) {
      if (objects[ia] == catalog_.inhibitor()) inhibited.insert(objects[ib]);
      if (objects[ib] == catalog_.inhibitor()) inhibited.insert(objects[ia]);
    }
  }

  std::vector<std::string> events;
  for (const auto& o : objects) {
    if (inhibited.count(o)) continue;
    const ObjectSpec* spec = catalog_.object(o);
    for (const auto& [action, part] : spec->actions) events.push_back(words_of(action) + " " + words_of(o));
  }

  std::vector<std::string> object_words;
  for (const auto& o : objects) object_words.push_back(words_of(o));
  const std::string scene =
      objects.empty() ? "an empty scene" : "a scene with " + count_word(objects.size()) + " objects";
  return {{"scene", scene}, {"objects", object_words}, {"relations", relations}, {"events", events}};
}

SceneContext synthesize_observation(const GridImage& image, const ObservationGenerator& generator) {
  nlohmann::json out;
  try {
    out = generator.describe(image);
  } catch (const std::exception& e) {
    throw GeneratorFailure(std::string("observation generator failed: ") + e.what());
  }
  try {
    return context_from_json(out);
  } catch (const ParseError& e) {
    throw GeneratorFailure(std::string("observation generator returned a malformed context: ") + e.what());
  }
}

}  // namespace segworld::benchkit
