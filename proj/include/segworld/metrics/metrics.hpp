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

// Mask-overlap metrics and aggregate evaluation reports.
//
// Records with no [SEG] emission score iou = 0 and stay in every denominator;
// in the cumulative IoU they contribute (0, |gt|).

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segworld/domain.hpp"

namespace segworld::metrics {

struct EvalRecord {
  std::string sample_id;
  std::string action;
  bool emitted_seg = false;
  double iou = 0.0;
  std::size_t intersection = 0;
  std::size_t union_ = 0;
};

struct ActionStats {
  std::size_t count = 0;
  double miou = 0.0;

  friend bool operator==(const ActionStats&, const ActionStats&) = default;
};

struct MetricsReport {
  double miou = 0.0;
  double ciou = 0.0;
  double seg_rate = 0.0;
  std::map<std::string, ActionStats> per_action;
  std::size_t count = 0;
};

struct Overlap {
  std::size_t intersection = 0;
  std::size_t union_ = 0;
};

/// Throws DimensionMismatch when the masks differ in shape.
Overlap overlap(const BinaryMask& pred, const BinaryMask& gt);

/// |pred & gt| / |pred | gt|; 0 when the union is empty.
double iou(const BinaryMask& pred, const BinaryMask& gt);

/// Scores one prediction. `pred` is ignored when `emitted` is false.
EvalRecord make_record(std::string sample_id, std::string action, bool emitted,
                       const BinaryMask& pred, const BinaryMask& gt);

double miou(std::span<const EvalRecord> records);
double ciou(std::span<const EvalRecord> records);
double seg_emission_rate(std::span<const EvalRecord> records);
std::map<std::string, ActionStats> per_action_miou(std::span<const EvalRecord> records);

MetricsReport summarize(std::span<const EvalRecord> records);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

/// Two-section CSV: a `metric,value` block, then `action,n,miou` rows.
std::string to_csv(const MetricsReport& report);

}  // namespace segworld::metrics
