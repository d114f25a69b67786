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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segworld/benchkit/validator.hpp"
#include "segworld/domain.hpp"

namespace segworld::benchkit {

struct Diagnostic {
  std::size_t line = 0;
  std::string sample_id;
  /// parse_error, malformed_rle, missing_chain_field, invalid_sample or
  /// validator.<rule>.
  std::string rule;
  std::string message;
  std::string span;
};

struct IngestResult {
  std::vector<Sample> samples;
  std::vector<Diagnostic> diagnostics;
};

/// Reads a JSON-lines dataset, keeping the records that parse, satisfy the
/// sample invariants and (when `rules` is given) whose intent instruction
/// passes the validator. Throws UnreadableFile.
IngestResult ingest_dataset(const std::filesystem::path& path,
                            const ValidatorRuleSet* rules = nullptr);

nlohmann::json to_json(const Diagnostic& d);
void write_diagnostics(const std::filesystem::path& path, const std::vector<Diagnostic>& diagnostics);

}  // namespace segworld::benchkit
