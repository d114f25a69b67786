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

// Run manifests. Each command writes one to its output directory before it
// computes anything; every report it produces carries the manifest hash.

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace segworld::cli {

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::string code_version;
  std::string started_at;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

/// FNV-1a 64 over the manifest fields except the timestamp, as 16 hex digits.
/// Equal hashes mean the same command, config, seed, data and code.
std::string manifest_hash(const RunManifest& manifest);

/// FNV-1a 64 of the file's bytes; a missing file hashes as empty.
std::uint64_t hash_file(const std::filesystem::path& path, std::uint64_t seed = 0xcbf29ce484222325ULL);
/// Hash of a dataset file and its vocabulary sidecar.
std::string dataset_hash(const std::filesystem::path& dataset);

std::string code_version();
/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_now();

/// Writes `dir/manifest.json` (creating `dir`) and returns the manifest hash.
std::string write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace segworld::cli
