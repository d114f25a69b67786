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

#include "segworld/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "segworld/error.hpp"

namespace segworld::training {

namespace {

constexpr char kMagic[8] = {'S', 'W', 'C', 'K', 'P', 'T', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint64_t get_u64(const unsigned char* b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const engine::ToyModel& model,
                     const TrainConfig& config, long step) {
  const auto& bc = model.backbone().config();
  nlohmann::ordered_json header;
  header["version"] = kCheckpointVersion;
  header["step"] = step;
  header["config"] = format_train_config(config);
  header["model"] = {{"hidden", bc.hidden},         {"layers", bc.layers},
                     {"heads", bc.heads},           {"mlp", bc.mlp},
                     {"prompt_len", bc.prompt_len}, {"max_text", bc.max_text},
                     {"max_grid", bc.max_grid},     {"visual_vocab", bc.visual_vocab},
                     {"feature_dim", bc.feature_dim}, {"seed", bc.seed},
                     {"prompt_dim", model.prompt_dim()}};
  header["vocab"] = model.backbone().vocab().words();
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  const auto params = model.parameters().all();
  for (const auto* p : params) {
    index.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()},
                     {"offset", offset}});
    offset += static_cast<std::uint64_t>(p->value.size());
  }
  header["tensors"] = index;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableFile("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      put_u64(out, std::bit_cast<std::uint64_t>(p->value.data()[i]));
    }
  }
  if (!out) throw UnreadableFile("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile("cannot read checkpoint " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint archive");
  }
  const std::uint64_t hlen = get_u64(bytes.data() + 8);
  if (hlen > bytes.size() - 16) throw CheckpointError("truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  const unsigned char* data = bytes.data() + 16 + hlen;
  const std::size_t ndouble = (bytes.size() - 16 - hlen) / 8;

  Checkpoint ck;
  try {
    if (header.at("version").get<int>() != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + header.at("version").dump());
    }
    ck.step = header.at("step").get<long>();
    ck.config = parse_train_config(header.at("config").get<std::string>());
    const auto& m = header.at("model");
    engine::ToyBackboneConfig bc;
    bc.hidden = m.at("hidden");
    bc.layers = m.at("layers");
    bc.heads = m.at("heads");
    bc.mlp = m.at("mlp");
    bc.prompt_len = m.at("prompt_len");
    bc.max_text = m.at("max_text");
    bc.max_grid = m.at("max_grid");
    bc.visual_vocab = m.at("visual_vocab");
    bc.feature_dim = m.at("feature_dim");
    bc.seed = m.at("seed");
    ck.model = std::make_unique<engine::ToyModel>(
        bc, engine::TextVocab(header.at("vocab").get<std::vector<std::string>>()), m.at("prompt_dim").get<int>());
    auto& store = ck.model->parameters();
    std::size_t loaded = 0;
    for (const auto& t : header.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      if (!store.contains(name)) throw CheckpointError("unknown tensor " + name);
      auto& p = store.at(name);
      if (p.value.rows() != t.at("rows").get<Eigen::Index>() || p.value.cols() != t.at("cols").get<Eigen::Index>()) {
        throw CheckpointError("tensor " + name + " has the wrong shape");
      }
      const auto offset = t.at("offset").get<std::size_t>();
      if (offset + static_cast<std::size_t>(p.value.size()) > ndouble) {
        throw CheckpointError("tensor " + name + " runs past the data block");
      }
      for (Eigen::Index i = 0; i < p.value.size(); ++i) {
        p.value.data()[i] = std::bit_cast<double>(get_u64(data + 8 * (offset + static_cast<std::size_t>(i))));
      }
      ++loaded;
    }
    if (loaded != store.size()) throw CheckpointError("checkpoint is missing tensors");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  } catch (const ParseError& e) {
    throw CheckpointError(std::string("bad checkpoint config: ") + e.what());
  }
  return ck;
}

}  // namespace segworld::training
