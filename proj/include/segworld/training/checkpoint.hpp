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

// Checkpoint archive:
//
//   "SWCKPT01" | u64 header_bytes | header JSON | f64 data (little-endian)
//
// The header holds the format version, the training config, the model
// sizes, the vocabulary words and a tensor index (name, rows, cols, offset
// in doubles from the start of the data block).

#include <filesystem>
#include <memory>

#include "segworld/engine/toy_model.hpp"
#include "segworld/training/config.hpp"

namespace segworld::training {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  long step = 0;
  std::unique_ptr<engine::ToyModel> model;
};

void save_checkpoint(const std::filesystem::path& path, const engine::ToyModel& model,
                     const TrainConfig& config, long step);

/// Throws UnreadableFile or CheckpointError.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace segworld::training
