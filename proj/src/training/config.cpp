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

#include "segworld/training/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "segworld/error.hpp"
#include "segworld/text.hpp"

namespace segworld::training {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParseError("bad boolean for " + key + ": '" + value + "'");
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"lambda_mask", [](TrainConfig& c, const std::string& k, const std::string& v) { c.weights.lambda_mask = parse_number<double>(k, v); }},
      {"lambda_0", [](TrainConfig& c, const std::string& k, const std::string& v) { c.weights.lambda_0 = parse_number<double>(k, v); }},
      {"lambda_1", [](TrainConfig& c, const std::string& k, const std::string& v) { c.weights.lambda_1 = parse_number<double>(k, v); }},
      {"warmup_steps", [](TrainConfig& c, const std::string& k, const std::string& v) { c.schedule.warmup_steps = parse_number<long>(k, v); }},
      {"p_max", [](TrainConfig& c, const std::string& k, const std::string& v) { c.schedule.p_max = parse_number<double>(k, v); }},
      {"intent_mix", [](TrainConfig& c, const std::string& k, const std::string& v) { c.intent_mix = parse_number<double>(k, v); }},
      {"steps", [](TrainConfig& c, const std::string& k, const std::string& v) { c.steps = parse_number<long>(k, v); }},
      {"learning_rate", [](TrainConfig& c, const std::string& k, const std::string& v) { c.learning_rate = parse_number<double>(k, v); }},
      {"batch_size", [](TrainConfig& c, const std::string& k, const std::string& v) { c.batch_size = parse_number<int>(k, v); }},
      {"seed", [](TrainConfig& c, const std::string& k, const std::string& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"beta2", [](TrainConfig& c, const std::string& k, const std::string& v) { c.beta2 = parse_number<double>(k, v); }},
      {"adam_eps", [](TrainConfig& c, const std::string& k, const std::string& v) { c.adam_eps = parse_number<double>(k, v); }},
      {"hidden", [](TrainConfig& c, const std::string& k, const std::string& v) { c.hidden = parse_number<int>(k, v); }},
      {"layers", [](TrainConfig& c, const std::string& k, const std::string& v) { c.layers = parse_number<int>(k, v); }},
      {"heads", [](TrainConfig& c, const std::string& k, const std::string& v) { c.heads = parse_number<int>(k, v); }},
      {"mlp", [](TrainConfig& c, const std::string& k, const std::string& v) { c.mlp = parse_number<int>(k, v); }},
      {"prompt_len", [](TrainConfig& c, const std::string& k, const std::string& v) { c.prompt_len = parse_number<int>(k, v); }},
      {"prompt_dim", [](TrainConfig& c, const std::string& k, const std::string& v) { c.prompt_dim = parse_number<int>(k, v); }},
      {"feature_dim", [](TrainConfig& c, const std::string& k, const std::string& v) { c.feature_dim = parse_number<int>(k, v); }},
      {"drop_events", [](TrainConfig& c, const std::string& k, const std::string& v) { c.drop_events = parse_bool(k, v); }},
      {"drop_context", [](TrainConfig& c, const std::string& k, const std::string& v) { c.drop_context = parse_bool(k, v); }},
      {"drop_stage1_cot", [](TrainConfig& c, const std::string& k, const std::string& v) { c.drop_stage1_cot = parse_bool(k, v); }},
      {"eval_every", [](TrainConfig& c, const std::string& k, const std::string& v) { c.eval_every = parse_number<long>(k, v); }},
      {"frozen", [](TrainConfig& c, const std::string&, const std::string& v) { c.frozen = parse_list(v); }},
  };
  return table;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig config;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError("duplicate key '" + key + "'");
    it->second(config, key, value);
  }
  if (!seen.count("warmup_steps")) throw ParseError("warmup_steps is required");
  return config;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream out;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "lambda_mask = " << fmt(c.weights.lambda_mask) << "\n"
      << "lambda_0 = " << fmt(c.weights.lambda_0) << "\n"
      << "lambda_1 = " << fmt(c.weights.lambda_1) << "\n"
      << "warmup_steps = " << c.schedule.warmup_steps << "\n"
      << "p_max = " << fmt(c.schedule.p_max) << "\n"
      << "intent_mix = " << fmt(c.intent_mix) << "\n"
      << "steps = " << c.steps << "\n"
      << "learning_rate = " << fmt(c.learning_rate) << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "seed = " << c.seed << "\n"
      << "beta2 = " << fmt(c.beta2) << "\n"
      << "adam_eps = " << fmt(c.adam_eps) << "\n"
      << "hidden = " << c.hidden << "\n"
      << "layers = " << c.layers << "\n"
      << "heads = " << c.heads << "\n"
      << "mlp = " << c.mlp << "\n"
      << "prompt_len = " << c.prompt_len << "\n"
      << "prompt_dim = " << c.prompt_dim << "\n"
      << "feature_dim = " << c.feature_dim << "\n"
      << "drop_events = " << b(c.drop_events) << "\n"
      << "drop_context = " << b(c.drop_context) << "\n"
      << "drop_stage1_cot = " << b(c.drop_stage1_cot) << "\n"
      << "eval_every = " << c.eval_every << "\n"
      << "frozen = " << join(c.frozen, ",") << "\n";
  return out.str();
}

void check_train_config(const TrainConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
  };
  require(c.weights.lambda_mask >= 0 && c.weights.lambda_0 >= 0 && c.weights.lambda_1 >= 0,
          "loss weights must be non-negative");
  require(c.schedule.warmup_steps > 0, "warmup_steps must be positive");
  require(c.schedule.p_max >= 0 && c.schedule.p_max <= 1, "p_max must lie in [0, 1]");
  require(c.intent_mix >= 0 && c.intent_mix <= 1, "intent_mix must lie in [0, 1]");
  require(c.steps >= 0, "steps must be non-negative");
  require(c.learning_rate > 0, "learning_rate must be positive");
  require(c.batch_size > 0, "batch_size must be positive");
  require(c.beta2 > 0 && c.beta2 < 1, "beta2 must lie in (0, 1)");
  require(c.adam_eps > 0, "adam_eps must be positive");
  require(c.hidden > 0 && c.layers > 0 && c.heads > 0 && c.hidden % c.heads == 0,
          "hidden must be a positive multiple of heads");
  require(c.mlp > 0 && c.prompt_len > 0 && c.prompt_dim > 0 && c.feature_dim > 0,
          "model sizes must be positive");
  require(c.eval_every >= 0, "eval_every must be non-negative");
}

}  // namespace segworld::training
