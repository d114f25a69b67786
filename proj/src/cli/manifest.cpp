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

#include "segworld/cli/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "segworld/dataset_io.hpp"
#include "segworld/error.hpp"

#ifndef SEGWORLD_VERSION
#define SEGWORLD_VERSION "unknown"
#endif

namespace segworld::cli {

namespace {

constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["dataset_hash"] = m.dataset_hash;
  j["code_version"] = m.code_version;
  j["started_at"] = m.started_at;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.dataset_hash = j.at("dataset_hash").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.started_at = j.value("started_at", "");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
}

std::string manifest_hash(const RunManifest& m) {
  RunManifest stable = m;
  stable.started_at.clear();
  nlohmann::json j = to_json(stable);
  j.erase("started_at");
  return hex(fnv1a(j.dump(), 0xcbf29ce484222325ULL));
}

std::uint64_t hash_file(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return seed;
  std::uint64_t h = seed;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

std::string dataset_hash(const std::filesystem::path& dataset) {
  return hex(hash_file(sidecar_path(dataset), hash_file(dataset)));
}

std::string code_version() { return SEGWORLD_VERSION; }

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw UnreadableFile("cannot write " + (dir / "manifest.json").string());
  nlohmann::ordered_json j = to_json(m);
  const std::string hash = manifest_hash(m);
  j["manifest_hash"] = hash;
  out << j.dump(2) << '\n';
  return hash;
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw UnreadableFile("no manifest.json in " + dir.string());
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
}

}  // namespace segworld::cli
