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

#include "segworld/rle.hpp"

#include <string>

#include "segworld/error.hpp"

namespace segworld {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint32_t> rle_runs(const BinaryMask& mask) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t length = 0;
  for (std::uint8_t bit : mask.bits()) {
    if (bit != current) {
      runs.push_back(length);
      current = bit;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

BinaryMask mask_from_runs(int width, int height, std::span<const std::uint32_t> runs) {
  if (width <= 0 || height <= 0) {
    throw MalformedRle("mask dimensions must be positive");
  }
  const std::uint64_t total = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  std::uint64_t sum = 0;
  for (std::uint32_t r : runs) sum += r;
  if (sum != total) {
    throw MalformedRle("runs sum to " + std::to_string(sum) + ", expected " +
                       std::to_string(total));
  }
  std::vector<std::uint8_t> bits;
  bits.reserve(total);
  std::uint8_t value = 0;
  for (std::uint32_t r : runs) {
    bits.insert(bits.end(), r, value);
    value ^= 1;
  }
  return BinaryMask(width, height, std::move(bits));
}

std::vector<std::uint8_t> rle_encode(const BinaryMask& mask) {
  const auto runs = rle_runs(mask);
  std::vector<std::uint8_t> out;
  out.reserve(12 + 4 * runs.size());
  put_u32(out, static_cast<std::uint32_t>(mask.width()));
  put_u32(out, static_cast<std::uint32_t>(mask.height()));
  put_u32(out, static_cast<std::uint32_t>(runs.size()));
  for (std::uint32_t r : runs) put_u32(out, r);
  return out;
}

BinaryMask rle_decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw MalformedRle("truncated header");
  const std::uint32_t width = get_u32(bytes, 0);
  const std::uint32_t height = get_u32(bytes, 4);
  const std::uint32_t count = get_u32(bytes, 8);
  if (bytes.size() != 12 + 4 * static_cast<std::size_t>(count)) {
    throw MalformedRle("byte length does not match run count");
  }
  std::vector<std::uint32_t> runs(count);
  for (std::uint32_t i = 0; i < count; ++i) runs[i] = get_u32(bytes, 12 + 4 * i);
  return mask_from_runs(static_cast<int>(width), static_cast<int>(height), runs);
}

}  // namespace segworld
