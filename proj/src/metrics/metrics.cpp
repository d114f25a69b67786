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

#include "segworld/metrics/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "segworld/error.hpp"

namespace segworld::metrics {

namespace {

void require_nonempty(std::span<const EvalRecord> records) {
  if (records.empty()) throw EmptyEvaluation("no evaluation records");
}

}  // namespace

Overlap overlap(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) {
    throw DimensionMismatch("prediction is " + std::to_string(pred.width()) + "x" +
                            std::to_string(pred.height()) + ", ground truth is " +
                            std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
  }
  Overlap o;
  const auto a = pred.bits();
  const auto b = gt.bits();
  for (std::size_t i = 0; i < a.size(); ++i) {
    o.intersection += static_cast<std::size_t>(a[i] & b[i]);
    o.union_ += static_cast<std::size_t>(a[i] | b[i]);
  }
  return o;
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  const Overlap o = overlap(pred, gt);
  return o.union_ == 0 ? 0.0
                       : static_cast<double>(o.intersection) / static_cast<double>(o.union_);
}

EvalRecord make_record(std::string sample_id, std::string action, bool emitted,
                       const BinaryMask& pred, const BinaryMask& gt) {
  EvalRecord r;
  r.sample_id = std::move(sample_id);
  r.action = std::move(action);
  r.emitted_seg = emitted;
  if (emitted) {
    const Overlap o = overlap(pred, gt);
    r.intersection = o.intersection;
    r.union_ = o.union_;
    r.iou = o.union_ == 0 ? 0.0
                          : static_cast<double>(o.intersection) / static_cast<double>(o.union_);
  } else {
    r.union_ = gt.count();
  }
  return r;
}

double miou(std::span<const EvalRecord> records) {
  require_nonempty(records);
  double sum = 0.0;
  for (const auto& r : records) sum += r.emitted_seg ? r.iou : 0.0;
  return sum / static_cast<double>(records.size());
}

double ciou(std::span<const EvalRecord> records) {
  require_nonempty(records);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (const auto& r : records) {
    inter += r.emitted_seg ? r.intersection : 0;
    uni += r.union_;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double seg_emission_rate(std::span<const EvalRecord> records) {
  require_nonempty(records);
  std::size_t emitted = 0;
  for (const auto& r : records) emitted += r.emitted_seg ? 1 : 0;
  return static_cast<double>(emitted) / static_cast<double>(records.size());
}

std::map<std::string, ActionStats> per_action_miou(std::span<const EvalRecord> records) {
  require_nonempty(records);
  std::map<std::string, std::vector<EvalRecord>> groups;
  for (const auto& r : records) groups[r.action].push_back(r);
  std::map<std::string, ActionStats> out;
  for (const auto& [action, group] : groups) {
    out[action] = ActionStats{group.size(), miou(group)};
  }
  return out;
}

MetricsReport summarize(std::span<const EvalRecord> records) {
  MetricsReport report;
  report.miou = miou(records);
  report.ciou = ciou(records);
  report.seg_rate = seg_emission_rate(records);
  report.per_action = per_action_miou(records);
  report.count = records.size();
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json per_action = nlohmann::json::object();
  for (const auto& [action, stats] : report.per_action) {
    per_action[action] = {{"n", stats.count}, {"miou", stats.miou}};
  }
  return {{"miou", report.miou},
          {"ciou", report.ciou},
          {"seg_rate", report.seg_rate},
          {"count", report.count},
          {"per_action", per_action}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.miou = j.at("miou").get<double>();
  r.ciou = j.at("ciou").get<double>();
  r.seg_rate = j.at("seg_rate").get<double>();
  r.count = j.value("count", std::size_t{0});
  for (const auto& [action, stats] : j.at("per_action").items()) {
    r.per_action[action] = ActionStats{stats.at("n").get<std::size_t>(),
                                       stats.at("miou").get<double>()};
  }
  return r;
}

std::string to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << std::setprecision(6) << std::fixed;
  out << "metric,value\n";
  out << "miou," << report.miou << '\n';
  out << "ciou," << report.ciou << '\n';
  out << "seg_rate," << report.seg_rate << '\n';
  out << "count," << report.count << '\n';
  out << '\n' << "action,n,miou\n";
  for (const auto& [action, stats] : report.per_action) {
    out << action << ',' << stats.count << ',' << stats.miou << '\n';
  }
  return out.str();
}

}  // namespace segworld::metrics
