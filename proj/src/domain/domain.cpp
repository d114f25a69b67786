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

#include "segworld/domain.hpp"

#include <algorithm>
#include <set>

#include "segworld/error.hpp"

namespace segworld {

GridImage::GridImage(int width, int height, std::vector<VisualToken> cells, int feature_dim)
    : width_(width), height_(height), feature_dim_(feature_dim), cells_(std::move(cells)) {
  if (width <= 0 || height <= 0) throw InvalidArgument("grid dimensions must be positive");
  if (feature_dim <= 0) throw InvalidArgument("feature_dim must be positive");
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("grid cell count does not match width * height");
  }
  for (VisualToken t : cells_) {
    if (t < 0) throw InvalidArgument("visual tokens must be non-negative");
  }
}

VisualToken GridImage::max_token() const {
  return cells_.empty() ? kBackground : *std::max_element(cells_.begin(), cells_.end());
}

bool GridImage::empty() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](VisualToken t) { return t == kBackground; });
}

std::string_view to_string(InstructionKind kind) {
  switch (kind) {
    case InstructionKind::kReferring: return "referring";
    case InstructionKind::kReasoning: return "reasoning";
    case InstructionKind::kIntent: return "intent";
  }
  return "unknown";
}

InstructionKind parse_instruction_kind(std::string_view text) {
  if (text == "referring") return InstructionKind::kReferring;
  if (text == "reasoning") return InstructionKind::kReasoning;
  if (text == "intent") return InstructionKind::kIntent;
  throw InvalidArgument("unknown instruction kind '" + std::string(text) + "'");
}

Instruction::Instruction(std::string text_in, InstructionKind kind_in)
    : text(std::move(text_in)), kind(kind_in) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw InvalidArgument("instruction text must be non-empty");
  }
}

BinaryMask::BinaryMask(int width, int height)
    : BinaryMask(width, height,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                           static_cast<std::size_t>(std::max(height, 0)))) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width <= 0 || height <= 0) throw InvalidArgument("mask dimensions must be positive");
  if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("mask bit count does not match width * height");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask binarize(std::span<const double> probs, int width, int height, double threshold) {
  if (probs.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionMismatch("probability map does not match mask dimensions");
  }
  std::vector<std::uint8_t> bits(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) bits[i] = probs[i] > threshold ? 1 : 0;
  return BinaryMask(width, height, std::move(bits));
}

std::string_view to_string(SplitTag tag) {
  return tag == SplitTag::kTrain ? "train" : "test";
}

SplitTag parse_split_tag(std::string_view text) {
  if (text == "train") return SplitTag::kTrain;
  if (text == "test") return SplitTag::kTest;
  throw InvalidArgument("unknown split tag '" + std::string(text) + "'");
}

const Instruction* Sample::instruction(InstructionKind kind) const {
  auto it = instructions.find(kind);
  return it == instructions.end() ? nullptr : &it->second;
}

void check_sample(const Sample& sample) {
  if (sample.id.empty()) throw InvalidArgument("sample id is empty");
  if (sample.instructions.empty()) {
    throw InvalidArgument("sample " + sample.id + " has no instructions");
  }
  if (!sample.chain.complete()) {
    throw InvalidArgument("sample " + sample.id + " has an incomplete chain");
  }
  if (sample.mask_gt.width() != sample.image.width() ||
      sample.mask_gt.height() != sample.image.height()) {
    throw DimensionMismatch("sample " + sample.id + ": mask does not match image");
  }
  if (sample.mask_gt.count() == 0) {
    throw InvalidArgument("sample " + sample.id + " has an empty ground-truth mask");
  }
}

const PartSpec* ObjectSpec::part(std::string_view part_name) const {
  for (const auto& p : parts) {
    if (p.name == part_name) return &p;
  }
  return nullptr;
}

Catalog::Catalog(std::vector<ObjectSpec> objects, std::string inhibitor)
    : objects_(std::move(objects)), inhibitor_(std::move(inhibitor)) {
  std::set<std::string> obj, act, prt, aff;
  std::set<std::string> seen_objects;
  for (const auto& o : objects_) {
    if (o.name.empty()) throw InvalidArgument("object name is empty");
    if (!seen_objects.insert(o.name).second) {
      throw InvalidArgument("duplicate object '" + o.name + "'");
    }
    obj.insert(o.name);
    for (const auto& p : o.parts) {
      if (p.token <= kBackground) {
        throw InvalidArgument("part " + o.name + "/" + p.name + " needs a positive token");
      }
      if (!tokens_.emplace(p.token, TokenInfo{o.name, p.name}).second) {
        throw InvalidArgument("visual token " + std::to_string(p.token) + " reused");
      }
      visual_vocab_size_ = std::max(visual_vocab_size_, p.token + 1);
      prt.insert(p.name);
      if (!p.affordance.empty()) aff.insert(p.affordance);
    }
    for (const auto& [action, part_name] : o.actions) {
      if (o.part(part_name) == nullptr) {
        throw InvalidArgument("action " + action + " of " + o.name + " names unknown part " +
                              part_name);
      }
      act.insert(action);
    }
  }
  if (!inhibitor_.empty() && object(inhibitor_) == nullptr) {
    throw InvalidArgument("inhibitor '" + inhibitor_ + "' is not a catalog object");
  }
  object_names_.assign(obj.begin(), obj.end());
  action_names_.assign(act.begin(), act.end());
  part_names_.assign(prt.begin(), prt.end());
  affordance_names_.assign(aff.begin(), aff.end());
}

const ObjectSpec* Catalog::object(std::string_view name) const {
  for (const auto& o : objects_) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

const TokenInfo* Catalog::token(VisualToken id) const {
  auto it = tokens_.find(id);
  return it == tokens_.end() ? nullptr : &it->second;
}

VisualToken Catalog::token_of(std::string_view object_name, std::string_view part_name) const {
  const ObjectSpec* o = object(object_name);
  if (o == nullptr) return kBackground;
  const PartSpec* p = o->part(part_name);
  return p == nullptr ? kBackground : p->token;
}

std::optional<ReasoningChain> Catalog::chain_for(std::string_view object_name,
                                                 std::string_view action) const {
  const ObjectSpec* o = object(object_name);
  if (o == nullptr) return std::nullopt;
  auto it = o->actions.find(std::string(action));
  if (it == o->actions.end()) return std::nullopt;
  const PartSpec* p = o->part(it->second);
  return ReasoningChain{o->name, it->first, p->name, p->affordance};
}

BinaryMask part_mask(const GridImage& image, const Catalog& catalog,
                     const ReasoningChain& chain) {
  const VisualToken target = catalog.token_of(chain.object, chain.part);
  BinaryMask mask(image.width(), image.height());
  if (target == kBackground) return mask;
  const auto cells = image.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) mask.set(i, cells[i] == target);
  return mask;
}

}  // namespace segworld
