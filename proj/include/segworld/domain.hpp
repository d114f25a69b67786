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

// Core value types shared by every module. All of them are immutable after
// construction apart from BinaryMask, which is built cell by cell and then
// handed around by value.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace segworld {

/// Identifier of a visual token stored in a grid cell. 0 is background.
using VisualToken = std::int32_t;
inline constexpr VisualToken kBackground = 0;

/// A synthetic image: a grid of visual tokens. Features for each cell are
/// derived by the backbone's frozen encoder; feature_dim records how many
/// channels that encoder produces.
class GridImage {
 public:
  GridImage() = default;
  /// `cells` is row-major and must hold exactly width * height entries.
  GridImage(int width, int height, std::vector<VisualToken> cells, int feature_dim);

  int width() const { return width_; }
  int height() const { return height_; }
  int feature_dim() const { return feature_dim_; }
  std::size_t size() const { return cells_.size(); }

  VisualToken at(int row, int col) const { return cells_[index(row, col)]; }
  std::span<const VisualToken> cells() const { return cells_; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  /// Largest token identifier in the grid (0 for an empty grid).
  VisualToken max_token() const;
  /// True when every cell is background.
  bool empty() const;

  friend bool operator==(const GridImage&, const GridImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int feature_dim_ = 0;
  std::vector<VisualToken> cells_;
};

enum class InstructionKind { kReferring, kReasoning, kIntent };

std::string_view to_string(InstructionKind kind);
InstructionKind parse_instruction_kind(std::string_view text);

struct Instruction {
  Instruction(std::string text, InstructionKind kind);

  std::string text;
  InstructionKind kind;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Stage-0 output: scene sentence, salient objects, relations and plausible
/// events. Each list entry is a whitespace separated word sequence.
struct SceneContext {
  std::string scene;
  std::vector<std::string> objects;
  std::vector<std::string> relations;
  std::vector<std::string> events;

  bool empty() const {
    return scene.empty() && objects.empty() && relations.empty() && events.empty();
  }
  /// A context can supervise the observation pass only when it names at
  /// least one object.
  bool valid_for_supervision() const { return !objects.empty(); }

  friend bool operator==(const SceneContext&, const SceneContext&) = default;
};

/// The latent chain (object, action, part, affordance).
struct ReasoningChain {
  std::string object;
  std::string action;
  std::string part;
  std::string affordance;

  bool complete() const {
    return !object.empty() && !action.empty() && !part.empty() && !affordance.empty();
  }
  bool empty() const {
    return object.empty() && action.empty() && part.empty() && affordance.empty();
  }

  friend bool operator==(const ReasoningChain&, const ReasoningChain&) = default;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(int row, int col, bool value) { bits_[index(row, col)] = value ? 1 : 0; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t count() const;
  bool same_shape(const BinaryMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Binarize per-cell probabilities with a strict `p > threshold` test.
BinaryMask binarize(std::span<const double> probs, int width, int height,
                    double threshold = 0.5);

enum class SplitTag { kTrain, kTest };

std::string_view to_string(SplitTag tag);
SplitTag parse_split_tag(std::string_view text);

struct Sample {
  std::string id;
  std::string base_image_id;
  SplitTag split = SplitTag::kTrain;
  GridImage image;
  std::map<InstructionKind, Instruction> instructions;
  ReasoningChain chain;
  BinaryMask mask_gt;
  std::optional<SceneContext> observation;

  const Instruction* instruction(InstructionKind kind) const;
};

/// Checks the Sample invariants; throws InvalidArgument describing the first
/// violation.
void check_sample(const Sample& sample);

struct LossWeights {
  double lambda_mask = 1.0;
  double lambda_0 = 0.5;
  double lambda_1 = 1.0;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct ScheduleConfig {
  long warmup_steps = 1;
  double p_max = 0.5;
  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> test_official;
  std::vector<std::string> test_clean;
  std::vector<std::string> test_overlap;
};

// Controlled vocabularies and the object catalog of a dataset. Every visual
// token names one part of one object.

struct PartSpec {
  std::string name;
  VisualToken token = kBackground;
  std::string affordance;
};

struct ObjectSpec {
  std::string name;
  std::vector<PartSpec> parts;
  /// action -> part name.
  std::map<std::string, std::string> actions;

  const PartSpec* part(std::string_view part_name) const;
};

struct TokenInfo {
  std::string object;
  std::string part;
};

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<ObjectSpec> objects, std::string inhibitor = {});

  std::span<const ObjectSpec> objects() const { return objects_; }
  const ObjectSpec* object(std::string_view name) const;
  /// Object and part of a visual token, or nullptr for background/unknown ids.
  const TokenInfo* token(VisualToken id) const;
  /// Visual token of (object, part); kBackground when unknown.
  VisualToken token_of(std::string_view object, std::string_view part) const;
  /// One past the largest visual token id.
  int visual_vocab_size() const { return visual_vocab_size_; }

  /// Object whose proximity suppresses events of its neighbours; empty when
  /// the dataset has no such rule.
  const std::string& inhibitor() const { return inhibitor_; }

  // Controlled vocabularies, sorted and deduplicated.
  const std::vector<std::string>& object_names() const { return object_names_; }
  const std::vector<std::string>& action_names() const { return action_names_; }
  const std::vector<std::string>& part_names() const { return part_names_; }
  const std::vector<std::string>& affordance_names() const { return affordance_names_; }

  /// Builds the full ground-truth chain for (object, action); nullopt when
  /// the object does not afford the action.
  std::optional<ReasoningChain> chain_for(std::string_view object,
                                          std::string_view action) const;

 private:
  std::vector<ObjectSpec> objects_;
  std::string inhibitor_;
  std::map<VisualToken, TokenInfo> tokens_;
  int visual_vocab_size_ = 1;
  std::vector<std::string> object_names_;
  std::vector<std::string> action_names_;
  std::vector<std::string> part_names_;
  std::vector<std::string> affordance_names_;
};

/// Ground-truth mask of a chain's part on an image.
BinaryMask part_mask(const GridImage& image, const Catalog& catalog,
                     const ReasoningChain& chain);

}  // namespace segworld
