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

// Intent-instruction validator. An intent instruction must
//   1. use a first-person intent form (pattern list),
//   2. have between min_words and max_words words,
//   3. avoid every variant of the chain's object, part, action and
//      affordance names.
// Every failing rule is reported, each with the span that triggered it.

#include <filesystem>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "segworld/domain.hpp"

namespace segworld::benchkit {

/// term -> near-synonyms. Lookups are directed and transitive.
using Lexicon = std::map<std::string, std::vector<std::string>>;

/// JSON object mapping each term to an array of synonyms.
Lexicon load_lexicon(const std::filesystem::path& path);

struct FirstPersonPattern {
  std::string source;
  std::regex regex;
};

/// One ECMAScript regex per line; blank lines and lines starting with '#'
/// are skipped. Patterns are searched in the lowercased, punctuation-stripped
/// instruction.
std::vector<FirstPersonPattern> load_patterns(const std::filesystem::path& path);
std::vector<FirstPersonPattern> compile_patterns(const std::vector<std::string>& sources);

struct ValidatorRuleSet {
  int min_words = 6;
  int max_words = 25;
  bool expand_variants = true;
  std::vector<FirstPersonPattern> first_person;
  Lexicon lexicon;
};

/// Reads the lexicon and pattern files.
ValidatorRuleSet load_rules(const std::filesystem::path& lexicon, const std::filesystem::path& patterns);

/// Plural, gerund, past and agentive forms of one word.
std::set<std::string> inflections(const std::string& word);

/// The term, its lexicon closure, and one round of inflection of each (the
/// last word of multi-word entries is inflected).
std::set<std::string> term_variants(const std::string& term, const Lexicon& lexicon);

inline constexpr const char* kRuleFirstPerson = "first_person";
inline constexpr const char* kRuleLength = "length";
inline constexpr const char* kRuleBannedTerm = "banned_term";

struct Violation {
  std::string rule;
  std::string span;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationVerdict {
  bool accepted = true;
  std::vector<Violation> violations;
};

ValidationVerdict validate_intent_instruction(const std::string& text, const ReasoningChain& chain,
                                              const ValidatorRuleSet& rules);

}  // namespace segworld::benchkit
