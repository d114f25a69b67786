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

// The segworld command set. Every command writes a manifest to its output
// directory first, then its artifacts. Exit codes: 0 success, 1 validation
// or assertion failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "segworld/benchkit/toy_world.hpp"
#include "segworld/domain.hpp"
#include "segworld/engine/autodiff.hpp"
#include "segworld/error.hpp"
#include "segworld/training/config.hpp"

namespace segworld::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, missing inputs or unusable files.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Dataset argument resolution: an empty argument means
/// $SEGWORLD_DATA_DIR/dataset.jsonl; a relative path that does not exist
/// from the working directory is looked up under $SEGWORLD_DATA_DIR.
std::filesystem::path resolve_dataset(const std::string& arg);

struct ValidateOptions {
  std::string dataset;
  std::filesystem::path lexicon;
  std::filesystem::path patterns;
  std::filesystem::path out;
};
/// Writes diagnostics.jsonl; returns 1 when any record is rejected.
int cmd_validate(const ValidateOptions& options, std::ostream& log);

struct SplitOptions {
  std::string dataset;
  std::filesystem::path out;
};
/// Writes split.json with the four id lists and their counts.
int cmd_split(const SplitOptions& options, std::ostream& log);

struct TrainOptions {
  std::filesystem::path config;
  std::string dataset;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};
/// Trains on the dataset's train split. Writes train_log.jsonl,
/// checkpoint.bin, train_metrics.json (train-set intent level) and
/// train_evals.csv.
int cmd_train(const TrainOptions& options, std::ostream& log);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::string dataset;
  std::filesystem::path out;
  /// "official", "clean" or "all".
  std::string split = "all";
  /// "referring", "reasoning", "intent" or "all".
  std::string kind = "all";
};
/// Writes metrics_<split>_<kind>.{json,csv}, summary.csv and per_action.csv.
int cmd_eval(const EvalOptions& options, std::ostream& log);

struct AblationVariant {
  std::string label;
  std::string slug;
  bool drop_events = false;
  bool drop_context = false;
  bool drop_stage1_cot = false;
};
/// full, w/o event level, w/o proactive context, w/o Stage-1 CoT.
const std::vector<AblationVariant>& ablation_variants();

struct AblateOptions {
  std::filesystem::path config;
  std::string dataset;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  /// Slugs to run; empty runs all four.
  std::vector<std::string> variants;
  std::string kind = "intent";
};
/// Trains and evaluates each variant on test_clean (test_official when
/// test_clean is empty). Writes ablation.{json,csv,md}.
int cmd_ablate(const AblateOptions& options, std::ostream& log);

struct ReportOptions {
  std::filesystem::path run;
  /// Defaults to <run>/report.
  std::filesystem::path out;
};
/// Loss and schedule curves, the intent-region similarity heat map with
/// similarity_stats.json, and a metric table over the run's reports.
int cmd_report(const ReportOptions& options, std::ostream& log);

struct SynthOptions {
  std::filesystem::path out;
  benchkit::ToyWorldConfig world;
};
/// Writes a toy dataset (dataset.jsonl and its sidecar) to `out`.
int cmd_synth(const SynthOptions& options, std::ostream& log);

struct SimilarityStats {
  std::size_t n = 0;
  double diagonal_mean = 0.0;
  double off_diagonal_mean = 0.0;
};
/// Needs a square matrix with at least two rows.
SimilarityStats similarity_stats(const autodiff::Matrix& m);

/// Parses `args` (without the program name) and runs the command, mapping
/// errors onto exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace segworld::cli
