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

// Run-length codec for BinaryMask.
//
// Runs are taken over the row-major scan and alternate between background
// and foreground, starting with a (possibly empty) background run. The byte
// form is little-endian:
//
//   u32 width | u32 height | u32 run_count | u32 run[run_count]
//
// Encoding never emits a zero-length run except the leading one.

#include <cstdint>
#include <span>
#include <vector>

#include "segworld/domain.hpp"

namespace segworld {

std::vector<std::uint32_t> rle_runs(const BinaryMask& mask);

/// Rebuilds a mask from runs; throws MalformedRle when the runs do not sum to
/// width * height.
BinaryMask mask_from_runs(int width, int height, std::span<const std::uint32_t> runs);

std::vector<std::uint8_t> rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(std::span<const std::uint8_t> bytes);

}  // namespace segworld
