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

#include "segworld/benchkit/ingest.hpp"

#include <fstream>

#include "segworld/dataset_io.hpp"
#include "segworld/error.hpp"

namespace segworld::benchkit {

IngestResult ingest_dataset(const std::filesystem::path& path, const ValidatorRuleSet* rules) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot read dataset " + path.string());
  IngestResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Diagnostic d;
    d.line = lineno;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      d.rule = "parse_error";
      d.message = e.what();
      result.diagnostics.push_back(std::move(d));
      continue;
    }
    if (j.is_object() && j.contains("id") && j["id"].is_string()) d.sample_id = j["id"].get<std::string>();
    Sample s;
    try {
      s = sample_from_json(j);
      if (!s.chain.complete()) {
        d.rule = "missing_chain_field";
        d.message = "chain has an empty field";
      } else {
        check_sample(s);
      }
    } catch (const MalformedRle& e) {
      d.rule = "malformed_rle";
      d.message = e.what();
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      const bool chain = j.is_object() && j.contains("chain") && msg.find("missing field") != std::string::npos;
      d.rule = chain ? "missing_chain_field" : "parse_error";
      d.message = msg;
    } catch (const Error& e) {
      d.rule = "invalid_sample";
      d.message = e.what();
    }
    if (!d.rule.empty()) {
      result.diagnostics.push_back(std::move(d));
      continue;
    }
    bool ok = true;
    if (rules != nullptr) {
      if (const Instruction* intent = s.instruction(InstructionKind::kIntent)) {
        const auto verdict = validate_intent_instruction(intent->text, s.chain, *rules);
        for (const auto& v : verdict.violations) {
          Diagnostic vd = d;
          vd.rule = std::string("validator.") + v.rule;
          vd.message = "intent instruction fails the " + v.rule + " rule";
          vd.span = v.span;
          result.diagnostics.push_back(std::move(vd));
          ok = false;
        }
      }
    }
    if (ok) result.samples.push_back(std::move(s));
  }
  return result;
}

nlohmann::json to_json(const Diagnostic& d) {
  nlohmann::ordered_json j;
  j["line"] = d.line;
  j["sample_id"] = d.sample_id;
  j["rule"] = d.rule;
  j["message"] = d.message;
  j["span"] = d.span;
  return j;
}

void write_diagnostics(const std::filesystem::path& path, const std::vector<Diagnostic>& diagnostics) {
  std::ofstream out(path);
  if (!out) throw UnreadableFile("cannot write " + path.string());
  for (const auto& d : diagnostics) out << to_json(d).dump() << '\n';
}

}  // namespace segworld::benchkit
