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

#include "segworld/dataset_io.hpp"

#include <fstream>

#include "segworld/error.hpp"
#include "segworld/rle.hpp"

namespace segworld {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const SceneContext& context) {
  return json{{"scene", context.scene},
              {"objects", context.objects},
              {"relations", context.relations},
              {"events", context.events}};
}

SceneContext context_from_json(const json& j) {
  SceneContext c;
  c.scene = field<std::string>(j, "scene");
  c.objects = field<std::vector<std::string>>(j, "objects");
  c.relations = field<std::vector<std::string>>(j, "relations");
  c.events = field<std::vector<std::string>>(j, "events");
  return c;
}

json to_json(const ReasoningChain& chain) {
  return json{{"object", chain.object},
              {"action", chain.action},
              {"part", chain.part},
              {"affordance", chain.affordance}};
}

ReasoningChain chain_from_json(const json& j) {
  return ReasoningChain{field<std::string>(j, "object"), field<std::string>(j, "action"),
                        field<std::string>(j, "part"), field<std::string>(j, "affordance")};
}

json to_json(const Sample& sample) {
  json instructions = json::object();
  for (const auto& [kind, ins] : sample.instructions) {
    instructions[std::string(to_string(kind))] = ins.text;
  }
  json j{{"id", sample.id},
         {"base_image_id", sample.base_image_id},
         {"split", std::string(to_string(sample.split))},
         {"image",
          {{"width", sample.image.width()},
           {"height", sample.image.height()},
           {"feature_dim", sample.image.feature_dim()},
           {"cells", std::vector<VisualToken>(sample.image.cells().begin(),
                                              sample.image.cells().end())}}},
         {"instructions", instructions},
         {"chain", to_json(sample.chain)},
         {"mask",
          {{"width", sample.mask_gt.width()},
           {"height", sample.mask_gt.height()},
           {"runs", rle_runs(sample.mask_gt)}}}};
  if (sample.observation) j["observation"] = to_json(*sample.observation);
  return j;
}

Sample sample_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  Sample s;
  s.id = field<std::string>(j, "id");
  s.base_image_id = j.contains("base_image_id") ? field<std::string>(j, "base_image_id") : "";
  s.split = j.contains("split") ? parse_split_tag(field<std::string>(j, "split")) : SplitTag::kTrain;

  const json& img = j.contains("image") ? j.at("image") : throw ParseError("missing field 'image'");
  try {
    s.image = GridImage(field<int>(img, "width"), field<int>(img, "height"),
                        field<std::vector<VisualToken>>(img, "cells"),
                        field<int>(img, "feature_dim"));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("image: ") + e.what());
  }

  const json& ins = j.contains("instructions") ? j.at("instructions")
                                               : throw ParseError("missing field 'instructions'");
  if (!ins.is_object()) throw ParseError("instructions must be an object");
  for (const auto& [key, value] : ins.items()) {
    if (!value.is_string()) throw ParseError("instruction '" + key + "' is not a string");
    try {
      const InstructionKind kind = parse_instruction_kind(key);
      s.instructions.emplace(kind, Instruction(value.get<std::string>(), kind));
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string("instructions: ") + e.what());
    }
  }

  if (!j.contains("chain")) throw ParseError("missing field 'chain'");
  s.chain = chain_from_json(j.at("chain"));

  const json& mask = j.contains("mask") ? j.at("mask") : throw ParseError("missing field 'mask'");
  const auto runs = field<std::vector<std::uint32_t>>(mask, "runs");
  s.mask_gt = mask_from_runs(field<int>(mask, "width"), field<int>(mask, "height"), runs);

  if (j.contains("observation") && !j.at("observation").is_null()) {
    s.observation = context_from_json(j.at("observation"));
  }
  return s;
}

json to_json(const Catalog& catalog) {
  json objects = json::array();
  for (const auto& o : catalog.objects()) {
    json parts = json::array();
    for (const auto& p : o.parts) {
      parts.push_back({{"name", p.name}, {"token", p.token}, {"affordance", p.affordance}});
    }
    objects.push_back({{"name", o.name}, {"parts", parts}, {"actions", o.actions}});
  }
  json j{{"objects", objects},
         {"object_names", catalog.object_names()},
         {"action_names", catalog.action_names()},
         {"part_names", catalog.part_names()},
         {"affordance_names", catalog.affordance_names()}};
  if (!catalog.inhibitor().empty()) j["inhibitor"] = catalog.inhibitor();
  return j;
}

Catalog catalog_from_json(const json& j) {
  std::vector<ObjectSpec> objects;
  for (const auto& o : field<json>(j, "objects")) {
    ObjectSpec spec;
    spec.name = field<std::string>(o, "name");
    for (const auto& p : field<json>(o, "parts")) {
      spec.parts.push_back(PartSpec{field<std::string>(p, "name"), field<VisualToken>(p, "token"),
                                    field<std::string>(p, "affordance")});
    }
    spec.actions = field<std::map<std::string, std::string>>(o, "actions");
    objects.push_back(std::move(spec));
  }
  std::string inhibitor = j.contains("inhibitor") ? field<std::string>(j, "inhibitor") : "";
  try {
    return Catalog(std::move(objects), std::move(inhibitor));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("catalog: ") + e.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& dataset) {
  std::filesystem::path p = dataset;
  p.replace_extension(".vocab.json");
  return p;
}

void write_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path);
  if (!out) throw UnreadableFile("cannot write " + path.string());
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

void write_catalog(const std::filesystem::path& path, const Catalog& catalog) {
  std::ofstream out(path);
  if (!out) throw UnreadableFile("cannot write " + path.string());
  out << to_json(catalog).dump(2) << '\n';
}

Catalog read_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return catalog_from_json(j);
}

std::vector<Sample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot read " + path.string());
  std::vector<Sample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      samples.push_back(sample_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return samples;
}

}  // namespace segworld
