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

// JSON-lines dataset files and their vocabulary sidecar.
//
// One Sample per line:
//   {"id": "...", "base_image_id": "...", "split": "train" | "test",
//    "image": {"width": W, "height": H, "feature_dim": F, "cells": [row-major ids]},
//    "instructions": {"referring": "...", "reasoning": "...", "intent": "..."},
//    "chain": {"object": "...", "action": "...", "part": "...", "affordance": "..."},
//    "mask": {"width": W, "height": H, "runs": [...]},
//    "observation": {"scene": "...", "objects": [...], "relations": [...], "events": [...]}}
//
// The sidecar (`<stem>.vocab.json`) holds the object catalog from which the
// controlled vocabularies are derived.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segworld/domain.hpp"

namespace segworld {

nlohmann::json to_json(const SceneContext& context);
SceneContext context_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReasoningChain& chain);
ReasoningChain chain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Sample& sample);
/// Parses one record; throws ParseError for schema problems and MalformedRle
/// for inconsistent masks. Does not check the Sample invariants.
Sample sample_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Catalog& catalog);
Catalog catalog_from_json(const nlohmann::json& j);

std::filesystem::path sidecar_path(const std::filesystem::path& dataset);

void write_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples);
void write_catalog(const std::filesystem::path& path, const Catalog& catalog);
Catalog read_catalog(const std::filesystem::path& path);

/// Reads every line strictly; the first bad record aborts with an exception.
/// Use benchkit::ingest_dataset for per-line diagnostics.
std::vector<Sample> read_dataset(const std::filesystem::path& path);

}  // namespace segworld
