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

#include "segworld/engine/vocab.hpp"

#include <set>

#include "segworld/text.hpp"

namespace segworld::engine {

namespace {

const char* const kSpecialNames[kNumSpecial] = {
    "<PAD>", "<UNK>", "<EOS>", "<SCENE>", "<OBJ>", "<REL>", "<EVT>",
    "<Q>",   "<O>",   "<A>",   "<P>",     "<F>",   "[SEG]", "<SEP>"};

}  // namespace

TextVocab::TextVocab() : TextVocab(std::vector<std::string>{}) {}

TextVocab::TextVocab(std::vector<std::string> words) {
  for (TokenId i = 0; i < kNumSpecial; ++i) {
    tokens_.emplace_back(kSpecialNames[i]);
    index_.emplace(tokens_.back(), i);
  }
  std::set<std::string> unique(words.begin(), words.end());
  for (const auto& w : unique) {
    if (w.empty() || index_.count(w) != 0) continue;
    index_.emplace(w, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(w);
  }
}

TokenId TextVocab::id(std::string_view word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::string> TextVocab::words() const {
  return std::vector<std::string>(tokens_.begin() + kNumSpecial, tokens_.end());
}

std::vector<TokenId> TextVocab::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& w : normalize_words(text)) ids.push_back(id(w));
  return ids;
}

std::string TextVocab::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> parts;
  parts.reserve(ids.size());
  for (TokenId t : ids) parts.push_back(token(t));
  return join(parts, " ");
}

std::vector<std::string> collect_words(std::span<const Sample> samples, const Catalog& catalog) {
  std::set<std::string> words;
  auto add = [&](std::string_view text) {
    for (auto& w : normalize_words(text)) words.insert(std::move(w));
  };
  auto add_name = [&](std::string_view name) {
    for (auto& w : name_words(name)) words.insert(std::move(w));
  };
  for (const auto& n : catalog.object_names()) add_name(n);
  for (const auto& n : catalog.action_names()) add_name(n);
  for (const auto& n : catalog.part_names()) add_name(n);
  for (const auto& n : catalog.affordance_names()) add_name(n);
  for (const auto& s : samples) {
    for (const auto& [_, ins] : s.instructions) add(ins.text);
    add_name(s.chain.object);
    add_name(s.chain.action);
    add_name(s.chain.part);
    add_name(s.chain.affordance);
    if (s.observation) {
      add(s.observation->scene);
      for (const auto& x : s.observation->objects) add(x);
      for (const auto& x : s.observation->relations) add(x);
      for (const auto& x : s.observation->events) add(x);
    }
  }
  return std::vector<std::string>(words.begin(), words.end());
}

}  // namespace segworld::engine
