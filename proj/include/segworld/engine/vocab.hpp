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

// Text vocabulary of the backbone: a fixed block of reserved tokens followed
// by the sorted word list of the dataset it was built for.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segworld/domain.hpp"

namespace segworld::engine {

using TokenId = std::int32_t;

enum Special : TokenId {
  kPad = 0,
  kUnk,
  kEos,
  kScene,  // <SCENE>
  kObj,    // <OBJ>
  kRel,    // <REL>
  kEvt,    // <EVT>
  kQuery,  // <Q>, opens the instruction
  kO,      // <O>
  kA,      // <A>
  kP,      // <P>
  kF,      // <F>
  kSeg,    // [SEG]
  kSep,    // <SEP>, separates list items inside a level
  kNumSpecial
};

class TextVocab {
 public:
  /// Reserved tokens only.
  TextVocab();
  /// Reserved tokens followed by the sorted, deduplicated `words`.
  explicit TextVocab(std::vector<std::string> words);

  std::size_t size() const { return tokens_.size(); }
  TokenId id(std::string_view word) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  static bool is_word(TokenId id) { return id >= kNumSpecial; }

  /// The word entries, in id order, without the reserved block.
  std::vector<std::string> words() const;

  /// normalize_words followed by lookup; unknown words map to kUnk.
  std::vector<TokenId> encode(std::string_view text) const;
  /// Space-joined words; reserved tokens are rendered by name.
  std::string decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, TokenId, std::less<>> index_;
};

/// Every word that can appear in instructions, chains, observations or the
/// catalog of a dataset.
std::vector<std::string> collect_words(std::span<const Sample> samples, const Catalog& catalog);

}  // namespace segworld::engine
