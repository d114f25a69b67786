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

#include "segworld/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "segworld/benchkit/ingest.hpp"
#include "segworld/benchkit/splits.hpp"
#include "segworld/benchkit/validator.hpp"
#include "segworld/cli/manifest.hpp"
#include "segworld/cli/plots.hpp"
#include "segworld/dataset_io.hpp"
#include "segworld/engine/engine.hpp"
#include "segworld/engine/vocab.hpp"
#include "segworld/metrics/metrics.hpp"
#include "segworld/training/checkpoint.hpp"
#include "segworld/training/schedule.hpp"
#include "segworld/training/trainer.hpp"

#ifndef SEGWORLD_SHARE_DIR
#define SEGWORLD_SHARE_DIR "data"
#endif

namespace segworld::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const ordered_json& j) { open_out(path) << j.dump(2) << '\n'; }

void require_out(const fs::path& out) {
  if (out.empty()) throw UsageError("--out is required");
}

RunManifest start(const std::string& command, json config, std::uint64_t seed, const fs::path& dataset) {
  RunManifest m;
  m.command = command;
  m.config = std::move(config);
  m.seed = seed;
  m.dataset_hash = dataset.empty() ? "" : dataset_hash(dataset);
  m.code_version = code_version();
  m.started_at = utc_now();
  return m;
}

training::TrainConfig load_config(const fs::path& path) {
  try {
    return training::load_train_config(path);
  } catch (const UnreadableFile& e) {
    throw UsageError(e.what());
  } catch (const ParseError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

Catalog load_catalog(const fs::path& dataset) {
  const fs::path side = sidecar_path(dataset);
  if (!fs::exists(side)) throw UsageError("missing vocabulary sidecar " + side.string());
  return read_catalog(side);
}

// Ingests strictly: any rejected record is a failure.
std::vector<Sample> ingest_all(const fs::path& dataset, std::ostream& log) {
  if (!fs::exists(dataset)) throw UsageError("dataset not found: " + dataset.string());
  auto result = benchkit::ingest_dataset(dataset);
  if (!result.diagnostics.empty()) {
    for (const auto& d : result.diagnostics) {
      log << "line " << d.line << ": " << d.rule << ": " << d.message << '\n';
    }
    throw InvalidArgument(std::to_string(result.diagnostics.size()) + " record(s) failed ingestion in " +
                          dataset.string());
  }
  return std::move(result.samples);
}

std::vector<Sample> subset(const std::vector<Sample>& samples, const std::vector<std::string>& ids) {
  std::map<std::string, const Sample*> by_id;
  for (const auto& s : samples) by_id[s.id] = &s;
  std::vector<Sample> out;
  for (const auto& id : ids) out.push_back(*by_id.at(id));
  return out;
}

std::vector<Sample> train_split(const std::vector<Sample>& samples) {
  std::vector<Sample> out;
  for (const auto& s : samples) {
    if (s.split == SplitTag::kTrain) out.push_back(s);
  }
  return out;
}

ordered_json report_json(const metrics::MetricsReport& report, const std::string& manifest) {
  ordered_json j = metrics::to_json(report);
  j["manifest"] = manifest;
  return j;
}

InstructionKind parse_kind(const std::string& s) {
  if (s == "referring") return InstructionKind::kReferring;
  if (s == "reasoning") return InstructionKind::kReasoning;
  if (s == "intent") return InstructionKind::kIntent;
  throw UsageError("unknown instruction kind '" + s + "'");
}

std::vector<std::string> kinds_for(const std::string& arg) {
  if (arg == "all") return {"referring", "reasoning", "intent"};
  parse_kind(arg);
  return {arg};
}

std::vector<std::string> splits_for(const std::string& arg) {
  if (arg == "all") return {"official", "clean"};
  if (arg != "official" && arg != "clean") throw UsageError("unknown split '" + arg + "'");
  return {arg};
}

std::string fmt(double v) { return format_number(v); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

fs::path resolve_dataset(const std::string& arg) {
  const char* root = std::getenv("SEGWORLD_DATA_DIR");
  if (arg.empty()) {
    if (root == nullptr || *root == '\0') throw UsageError("no --dataset given and SEGWORLD_DATA_DIR is unset");
    return fs::path(root) / "dataset.jsonl";
  }
  const fs::path p(arg);
  if (p.is_relative() && !fs::exists(p) && root != nullptr && *root != '\0') return fs::path(root) / p;
  return p;
}

int cmd_validate(const ValidateOptions& o, std::ostream& log) {
  require_out(o.out);
  const fs::path dataset = resolve_dataset(o.dataset);
  const fs::path lexicon = o.lexicon.empty() ? fs::path(SEGWORLD_SHARE_DIR) / "lexicon.json" : o.lexicon;
  const fs::path patterns =
      o.patterns.empty() ? fs::path(SEGWORLD_SHARE_DIR) / "first_person_patterns.txt" : o.patterns;
  if (!fs::exists(dataset)) throw UsageError("dataset not found: " + dataset.string());
  benchkit::ValidatorRuleSet rules;
  try {
    rules = benchkit::load_rules(lexicon, patterns);
  } catch (const UnreadableFile& e) {
    throw UsageError(e.what());
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  const std::string hash = write_manifest(
      o.out, start("validate", {{"dataset", dataset.string()}, {"lexicon", lexicon.string()}, {"patterns", patterns.string()}},
                   0, dataset));
  const auto result = benchkit::ingest_dataset(dataset, &rules);
  benchkit::write_diagnostics(o.out / "diagnostics.jsonl", result.diagnostics);
  for (const auto& d : result.diagnostics) {
    log << "line " << d.line << " sample " << d.sample_id << ": " << d.rule;
    if (!d.span.empty()) log << " '" << d.span << "'";
    log << '\n';
  }
  log << result.samples.size() << " accepted, " << result.diagnostics.size() << " diagnostic(s); manifest " << hash
      << '\n';
  return result.diagnostics.empty() ? kExitOk : kExitFailure;
}

int cmd_split(const SplitOptions& o, std::ostream& log) {
  require_out(o.out);
  const fs::path dataset = resolve_dataset(o.dataset);
  const std::string hash = write_manifest(o.out, start("split", {{"dataset", dataset.string()}}, 0, dataset));
  const auto samples = ingest_all(dataset, log);
  const DatasetSplit split = benchkit::build_splits(samples);
  ordered_json j;
  j["manifest"] = hash;
  j["counts"] = {{"train", split.train.size()},
                 {"test_official", split.test_official.size()},
                 {"test_clean", split.test_clean.size()},
                 {"test_overlap", split.test_overlap.size()}};
  j["train"] = split.train;
  j["test_official"] = split.test_official;
  j["test_clean"] = split.test_clean;
  j["test_overlap"] = split.test_overlap;
  write_json(o.out / "split.json", j);
  log << benchkit::split_counts(split) << '\n';
  return kExitOk;
}

int cmd_train(const TrainOptions& o, std::ostream& log) {
  require_out(o.out);
  training::TrainConfig config = load_config(o.config);
  if (o.seed) config.seed = *o.seed;
  try {
    training::check_train_config(config);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const fs::path dataset = resolve_dataset(o.dataset);
  const std::string hash = write_manifest(
      o.out, start("train", {{"dataset", dataset.string()}, {"train_config", training::format_train_config(config)}},
                   config.seed, dataset));

  const auto samples = ingest_all(dataset, log);
  const Catalog catalog = load_catalog(dataset);
  const auto train = train_split(samples);
  if (train.empty()) throw InvalidArgument("dataset has no training samples");
  auto model = training::make_model(config, catalog, engine::TextVocab(engine::collect_words(samples, catalog)));

  training::TrainResult result;
  {
    auto train_log = open_out(o.out / "train_log.jsonl");
    result = training::train(*model, train, config, &train_log);
  }
  training::save_checkpoint(o.out / "checkpoint.bin", *model, config, config.steps);
  {
    auto evals = open_out(o.out / "train_evals.csv");
    evals << "step,train_intent_miou\n";
    for (const auto& [step, miou] : result.evaluations) evals << step << ',' << fmt(miou) << '\n';
  }
  const auto outcome = training::evaluate(model->pipeline(), train, InstructionKind::kIntent,
                                          training::engine_config(config));
  ordered_json report = outcome.records.empty() ? ordered_json{{"count", 0}}
                                                : report_json(metrics::summarize(outcome.records), hash);
  report["manifest"] = hash;
  report["split"] = "train";
  report["kind"] = "intent";
  report["skipped"] = outcome.skipped;
  write_json(o.out / "train_metrics.json", report);
  log << "trained " << config.steps << " steps on " << train.size() << " samples";
  if (!result.history.empty()) log << "; final loss " << fmt(result.history.back().loss.total);
  if (!outcome.records.empty()) {
    log << "; train intent mIoU " << fmt(report["miou"].get<double>()) << " seg_rate "
        << fmt(report["seg_rate"].get<double>());
  }
  log << '\n';
  return kExitOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& log) {
  require_out(o.out);
  const auto splits = splits_for(o.split);
  const auto kinds = kinds_for(o.kind);
  const fs::path dataset = resolve_dataset(o.dataset);
  if (!fs::exists(o.checkpoint)) throw UsageError("checkpoint not found: " + o.checkpoint.string());
  const std::string hash = write_manifest(
      o.out, start("eval",
                   {{"checkpoint_hash", hex64(hash_file(o.checkpoint))},
                    {"dataset", dataset.string()},
                    {"split", o.split},
                    {"kind", o.kind}},
                   0, dataset));
  const training::Checkpoint ckpt = training::load_checkpoint(o.checkpoint);
  const auto samples = ingest_all(dataset, log);
  const DatasetSplit split = benchkit::build_splits(samples);
  const auto ecfg = training::engine_config(ckpt.config);

  auto summary = open_out(o.out / "summary.csv");
  summary << "split,kind,miou,ciou,seg_rate,count,skipped\n";
  auto per_action = open_out(o.out / "per_action.csv");
  per_action << "split,kind,action,n,miou\n";
  for (const auto& sp : splits) {
    const auto subset_samples = subset(samples, sp == "official" ? split.test_official : split.test_clean);
    const std::string split_name = "test_" + sp;
    for (const auto& k : kinds) {
      const auto outcome = training::evaluate(ckpt.model->pipeline(), subset_samples, parse_kind(k), ecfg);
      ordered_json j;
      if (outcome.records.empty()) {
        j = {{"count", 0}};
        j["manifest"] = hash;
      } else {
        const auto report = metrics::summarize(outcome.records);
        j = report_json(report, hash);
        open_out(o.out / ("metrics_" + split_name + "_" + k + ".csv")) << metrics::to_csv(report);
        summary << split_name << ',' << k << ',' << fmt(report.miou) << ',' << fmt(report.ciou) << ','
                << fmt(report.seg_rate) << ',' << report.count << ',' << outcome.skipped.size() << '\n';
        for (const auto& [action, stats] : report.per_action) {
          per_action << split_name << ',' << k << ',' << action << ',' << stats.count << ',' << fmt(stats.miou) << '\n';
        }
        log << split_name << ' ' << k << ": mIoU " << fmt(report.miou) << " cIoU " << fmt(report.ciou)
            << " seg_rate " << fmt(report.seg_rate) << " (" << report.count << " samples, "
            << outcome.skipped.size() << " skipped)\n";
      }
      j["split"] = split_name;
      j["kind"] = k;
      j["skipped"] = outcome.skipped;
      write_json(o.out / ("metrics_" + split_name + "_" + k + ".json"), j);
    }
  }
  return kExitOk;
}

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> v = {
      {"full", "full", false, false, false},
      {"w/o event level", "no_events", true, false, false},
      {"w/o proactive context", "no_context", false, true, false},
      {"w/o Stage-1 CoT", "no_cot", false, false, true},
  };
  return v;
}

int cmd_ablate(const AblateOptions& o, std::ostream& log) {
  require_out(o.out);
  training::TrainConfig base = load_config(o.config);
  if (o.seed) base.seed = *o.seed;
  const InstructionKind kind = parse_kind(o.kind);
  std::vector<AblationVariant> chosen;
  for (const auto& v : ablation_variants()) {
    if (o.variants.empty() || std::find(o.variants.begin(), o.variants.end(), v.slug) != o.variants.end()) {
      chosen.push_back(v);
    }
  }
  for (const auto& s : o.variants) {
    const auto& all = ablation_variants();
    if (std::none_of(all.begin(), all.end(), [&](const AblationVariant& v) { return v.slug == s; })) {
      throw UsageError("unknown variant '" + s + "' (full, no_events, no_context, no_cot)");
    }
  }
  const fs::path dataset = resolve_dataset(o.dataset);
  json variant_slugs = json::array();
  for (const auto& v : chosen) variant_slugs.push_back(v.slug);
  const std::string hash = write_manifest(o.out, start("ablate",
                                                       {{"dataset", dataset.string()},
                                                        {"train_config", training::format_train_config(base)},
                                                        {"variants", variant_slugs},
                                                        {"kind", o.kind}},
                                                       base.seed, dataset));
  const auto samples = ingest_all(dataset, log);
  const Catalog catalog = load_catalog(dataset);
  const DatasetSplit split = benchkit::build_splits(samples);
  const auto train = train_split(samples);
  const bool clean = !split.test_clean.empty();
  const auto test = subset(samples, clean ? split.test_clean : split.test_official);
  if (train.empty() || test.empty()) throw InvalidArgument("ablation needs train and test samples");
  const engine::TextVocab vocab(engine::collect_words(samples, catalog));

  ordered_json rows = ordered_json::array();
  std::ostringstream csv, md;
  csv << "variant,miou,ciou,seg_rate,count\n";
  md << "| variant | mIoU | cIoU | seg rate |\n|---|---|---|---|\n";
  for (const auto& v : chosen) {
    training::TrainConfig c = base;
    c.drop_events = v.drop_events;
    c.drop_context = v.drop_context;
    c.drop_stage1_cot = v.drop_stage1_cot;
    auto model = training::make_model(c, catalog, vocab);
    {
      auto train_log = open_out(o.out / v.slug / "train_log.jsonl");
      training::train(*model, train, c, &train_log);
    }
    const auto outcome = training::evaluate(model->pipeline(), test, kind, training::engine_config(c));
    if (outcome.records.empty()) throw InvalidArgument("no test sample carries the requested instruction kind");
    const auto report = metrics::summarize(outcome.records);
    ordered_json row;
    row["variant"] = v.label;
    row["miou"] = report.miou;
    row["ciou"] = report.ciou;
    row["seg_rate"] = report.seg_rate;
    row["count"] = report.count;
    rows.push_back(row);
    csv << v.label << ',' << fmt(report.miou) << ',' << fmt(report.ciou) << ',' << fmt(report.seg_rate) << ','
        << report.count << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "| %s | %.4f | %.4f | %.4f |\n", v.label.c_str(), report.miou, report.ciou,
                  report.seg_rate);
    md << line;
    log << v.label << ": mIoU " << fmt(report.miou) << '\n';
  }
  ordered_json j;
  j["manifest"] = hash;
  j["split"] = clean ? "test_clean" : "test_official";
  j["kind"] = o.kind;
  j["rows"] = rows;
  write_json(o.out / "ablation.json", j);
  open_out(o.out / "ablation.csv") << csv.str();
  open_out(o.out / "ablation.md") << md.str();
  return kExitOk;
}

SimilarityStats similarity_stats(const autodiff::Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 2) throw InvalidArgument("similarity stats need a square matrix of size >= 2");
  SimilarityStats s;
  s.n = static_cast<std::size_t>(m.rows());
  double diag = 0.0, off = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) (i == j ? diag : off) += m(i, j);
  }
  const double n = static_cast<double>(s.n);
  s.diagonal_mean = diag / n;
  s.off_diagonal_mean = off / (n * n - n);
  return s;
}

int cmd_report(const ReportOptions& o, std::ostream& log) {
  const fs::path run = o.run;
  const fs::path log_path = run / "train_log.jsonl";
  if (run.empty() || !fs::exists(log_path)) {
    throw UsageError("no train_log.jsonl in '" + run.string() +
                     "'; point --run at a directory written by `segworld train --out DIR`");
  }
  const fs::path out = o.out.empty() ? run / "report" : o.out;
  const RunManifest run_manifest = read_manifest(run);
  const std::string hash = write_manifest(
      out, start("report", {{"run_manifest", manifest_hash(run_manifest)}}, run_manifest.seed, ""));

  std::vector<double> steps, mask, lm0, lm1, total, p_logged, p_schedule;
  const training::TrainConfig config =
      training::parse_train_config(run_manifest.config.at("train_config").get<std::string>());
  {
    std::ifstream in(log_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const long step = j.at("step").get<long>();
      steps.push_back(static_cast<double>(step));
      mask.push_back(j.at("loss_mask").get<double>());
      lm0.push_back(j.at("loss_lm0").get<double>());
      lm1.push_back(j.at("loss_lm1").get<double>());
      total.push_back(j.at("total").get<double>());
      p_logged.push_back(j.at("p_self").get<double>());
      p_schedule.push_back(training::self_context_probability(step, config.schedule));
    }
  }
  if (steps.empty()) throw UsageError("train_log.jsonl in '" + run.string() + "' is empty");
  write_line_plot(out / "loss_curves.svg", "training losses", "step", steps,
                  {{"loss_mask", mask}, {"loss_lm0", lm0}, {"loss_lm1", lm1}, {"total", total}});
  write_line_plot(out / "p_self.svg", "self-generated context probability", "step", steps,
                  {{"p_self_logged", p_logged}, {"p_self_schedule", p_schedule}});

  ordered_json report;
  report["manifest"] = hash;
  report["run_manifest"] = manifest_hash(run_manifest);
  report["steps"] = steps.size();
  report["final_total"] = total.back();
  report["p_self_matches_schedule"] = p_logged == p_schedule;

  // Similarity between intent prompts and target regions on training images.
  const fs::path ckpt_path = run / "checkpoint.bin";
  const fs::path dataset = run_manifest.config.value("dataset", "");
  if (fs::exists(ckpt_path) && fs::exists(dataset)) {
    const auto ckpt = training::load_checkpoint(ckpt_path);
    const auto samples = train_split(ingest_all(dataset, log));
    std::vector<Instruction> intents;
    std::vector<GridImage> images;
    std::vector<BinaryMask> targets;
    for (const auto& s : samples) {
      const Instruction* i = s.instruction(InstructionKind::kIntent);
      if (i == nullptr || intents.size() >= 32) continue;
      intents.push_back(*i);
      images.push_back(s.image);
      targets.push_back(s.mask_gt);
    }
    if (intents.size() >= 2) {
      const auto m = engine::similarity_matrix(intents, images, targets, ckpt.model->pipeline(),
                                               training::engine_config(ckpt.config));
      write_heatmap(out / "similarity.pgm", m);
      const auto stats = similarity_stats(m);
      ordered_json sj;
      sj["manifest"] = hash;
      sj["n"] = stats.n;
      sj["diagonal_mean"] = stats.diagonal_mean;
      sj["off_diagonal_mean"] = stats.off_diagonal_mean;
      sj["diagonal_exceeds_off_diagonal"] = stats.diagonal_mean > stats.off_diagonal_mean;
      write_json(out / "similarity_stats.json", sj);
      log << "similarity: diagonal " << fmt(stats.diagonal_mean) << " off-diagonal " << fmt(stats.off_diagonal_mean)
          << '\n';
    }
  }

  // Metric tables from the run's reports.
  std::vector<fs::path> reports;
  for (const auto& entry : fs::recursive_directory_iterator(run)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && (name == "train_metrics.json" || name.starts_with("metrics_")) &&
        entry.path().extension() == ".json" && entry.path().parent_path() != out) {
      reports.push_back(entry.path());
    }
  }
  std::sort(reports.begin(), reports.end());
  auto table = open_out(out / "metrics_table.csv");
  table << "report,split,kind,miou,ciou,seg_rate,count\n";
  for (const auto& p : reports) {
    std::ifstream in(p);
    const json j = json::parse(in);
    if (!j.contains("miou")) continue;
    table << fs::relative(p, run).string() << ',' << j.value("split", "") << ',' << j.value("kind", "") << ','
          << fmt(j.at("miou").get<double>()) << ',' << fmt(j.at("ciou").get<double>()) << ','
          << fmt(j.at("seg_rate").get<double>()) << ',' << j.at("count").get<std::size_t>() << '\n';
  }
  write_json(out / "report.json", report);
  log << "report written to " << out.string() << '\n';
  return kExitOk;
}

int cmd_synth(const SynthOptions& o, std::ostream& log) {
  require_out(o.out);
  const auto& w = o.world;
  const std::string hash = write_manifest(o.out, start("synth",
                                                       {{"train", w.train},
                                                        {"test", w.test},
                                                        {"informative", w.informative},
                                                        {"overlap_fraction", w.overlap_fraction},
                                                        {"min_objects", w.min_objects},
                                                        {"max_objects", w.max_objects}},
                                                       w.seed, ""));
  benchkit::ToyWorld world;
  try {
    world = benchkit::generate_toy_world(w);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const fs::path dataset = o.out / "dataset.jsonl";
  write_dataset(dataset, world.samples);
  write_catalog(sidecar_path(dataset), world.catalog);
  log << "wrote " << world.samples.size() << " samples to " << dataset.string() << " (manifest " << hash << ")\n";
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"intent-level part segmentation experiments on toy grids", "segworld"};
  app.require_subcommand(1);

  ValidateOptions vo;
  auto* validate = app.add_subcommand("validate", "check every intent instruction of a dataset");
  validate->add_option("--dataset", vo.dataset, "JSON-lines dataset");
  validate->add_option("--lexicon", vo.lexicon, "near-synonym lexicon (JSON)");
  validate->add_option("--patterns", vo.patterns, "first-person pattern list");
  validate->add_option("--out", vo.out, "output directory")->required();

  SplitOptions so;
  auto* split = app.add_subcommand("split", "build train / test_clean / test_overlap splits");
  split->add_option("--dataset", so.dataset, "JSON-lines dataset");
  split->add_option("--out", so.out, "output directory")->required();

  TrainOptions to;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "train the toy model");
  train->add_option("--config", to.config, "training config")->required();
  train->add_option("--dataset", to.dataset, "JSON-lines dataset");
  train->add_option("--out", to.out, "run directory")->required();
  auto* train_seed_opt = train->add_option("--seed", train_seed, "override the config seed");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", eo.checkpoint, "checkpoint file")->required();
  eval->add_option("--dataset", eo.dataset, "JSON-lines dataset");
  eval->add_option("--split", eo.split, "official, clean or all")
      ->check(CLI::IsMember({"official", "clean", "all"}));
  eval->add_option("--kind", eo.kind, "referring, reasoning, intent or all")
      ->check(CLI::IsMember({"referring", "reasoning", "intent", "all"}));
  eval->add_option("--out", eo.out, "output directory")->required();
  std::uint64_t eval_seed = 0;
  eval->add_option("--seed", eval_seed, "recorded only; decoding is greedy");

  AblateOptions ao;
  std::uint64_t ablate_seed = 0;
  auto* ablate = app.add_subcommand("ablate", "train and compare the four ablation variants");
  ablate->add_option("--config", ao.config, "base training config")->required();
  ablate->add_option("--dataset", ao.dataset, "JSON-lines dataset");
  ablate->add_option("--out", ao.out, "output directory")->required();
  ablate->add_option("--variants", ao.variants, "subset of full, no_events, no_context, no_cot")->delimiter(',');
  ablate->add_option("--kind", ao.kind, "instruction kind to evaluate")
      ->check(CLI::IsMember({"referring", "reasoning", "intent"}));
  auto* ablate_seed_opt = ablate->add_option("--seed", ablate_seed, "override the config seed");

  ReportOptions ro;
  auto* report = app.add_subcommand("report", "plots and tables for a training run");
  report->add_option("--run", ro.run, "run directory")->required();
  report->add_option("--out", ro.out, "output directory (default <run>/report)");

  SynthOptions yo;
  auto* synth = app.add_subcommand("synth", "write a synthetic toy dataset");
  synth->add_option("--out", yo.out, "output directory")->required();
  synth->add_option("--train", yo.world.train, "training samples");
  synth->add_option("--test", yo.world.test, "test samples");
  synth->add_flag("--informative", yo.world.informative, "context-informative images");
  synth->add_option("--overlap", yo.world.overlap_fraction, "fraction of test samples on training images");
  synth->add_option("--min-objects", yo.world.min_objects, "fewest objects per image");
  synth->add_option("--max-objects", yo.world.max_objects, "most objects per image");
  synth->add_option("--seed", yo.world.seed, "generator seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(vo, out);
    if (*split) return cmd_split(so, out);
    if (*train) {
      if (*train_seed_opt) to.seed = train_seed;
      return cmd_train(to, out);
    }
    if (*eval) return cmd_eval(eo, out);
    if (*ablate) {
      if (*ablate_seed_opt) ao.seed = ablate_seed;
      return cmd_ablate(ao, out);
    }
    if (*report) return cmd_report(ro, out);
    if (*synth) return cmd_synth(yo, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnreadableFile& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace segworld::cli
