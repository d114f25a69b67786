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

#include "segworld/benchkit/validator.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "segworld/error.hpp"
#include "segworld/text.hpp"

namespace segworld::benchkit {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool is_consonant(char c) { return c >= 'a' && c <= 'z' && !is_vowel(c); }

bool ends_with(const std::string& s, std::string_view suffix) { return s.ends_with(suffix); }

int vowel_groups(const std::string& w) {
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups;
}

// Short consonant-vowel-consonant words double their final consonant (cut ->
// cutting). Words with more than one vowel group keep it (open -> opening).
bool doubles_final(const std::string& w) {
  const std::size_t n = w.size();
  if (n < 3 || vowel_groups(w) != 1) return false;
  const char last = w[n - 1];
  return is_consonant(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(w[n - 2]) &&
         is_consonant(w[n - 3]);
}

bool consonant_y(const std::string& w) {
  return w.size() >= 2 && w.back() == 'y' && is_consonant(w[w.size() - 2]);
}

// Final 'e' that is dropped before a vowel suffix (not ee/ye/oe).
bool silent_e(const std::string& w) {
  if (w.size() < 2 || w.back() != 'e') return false;
  const char prev = w[w.size() - 2];
  return prev != 'e' && prev != 'y' && prev != 'o';
}

std::string plural(const std::string& w) {
  if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") ||
      ends_with(w, "sh")) {
    return w + "es";
  }
  if (consonant_y(w)) return w.substr(0, w.size() - 1) + "ies";
  return w + "s";
}

std::string gerund(const std::string& w) {
  if (ends_with(w, "ie")) return w.substr(0, w.size() - 2) + "ying";
  if (silent_e(w)) return w.substr(0, w.size() - 1) + "ing";
  if (doubles_final(w)) return w + w.back() + "ing";
  return w + "ing";
}

std::string with_e_suffix(const std::string& w, const char* suffix) {
  if (w.back() == 'e') return w + (suffix + 1);
  if (consonant_y(w)) return w.substr(0, w.size() - 1) + "i" + suffix;
  if (doubles_final(w)) return w + w.back() + suffix;
  return w + suffix;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Instruction tokens: normalised words with a trailing possessive removed.
std::vector<std::string> instruction_tokens(const std::string& text) {
  std::vector<std::string> words = normalize_words(text);
  for (auto& w : words) {
    if (w.size() > 2 && w.ends_with("'s")) w.resize(w.size() - 2);
  }
  return words;
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot read lexicon " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    Lexicon lex;
    for (const auto& [term, syns] : j.items()) {
      auto& entry = lex[to_lower(term)];
      for (const auto& s : syns) entry.push_back(to_lower(s.get<std::string>()));
    }
    return lex;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("lexicon " + path.string() + ": " + e.what());
  }
}

std::vector<FirstPersonPattern> compile_patterns(const std::vector<std::string>& sources) {
  std::vector<FirstPersonPattern> out;
  for (const auto& src : sources) {
    try {
      out.push_back({src, std::regex(src, std::regex::ECMAScript | std::regex::optimize)});
    } catch (const std::regex_error& e) {
      throw ParseError("bad pattern '" + src + "': " + e.what());
    }
  }
  return out;
}

std::vector<FirstPersonPattern> load_patterns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot read pattern list " + path.string());
  std::vector<std::string> sources;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    sources.push_back(line);
  }
  return compile_patterns(sources);
}

ValidatorRuleSet load_rules(const std::filesystem::path& lexicon, const std::filesystem::path& patterns) {
  ValidatorRuleSet rules;
  rules.lexicon = load_lexicon(lexicon);
  rules.first_person = load_patterns(patterns);
  return rules;
}

std::set<std::string> inflections(const std::string& word) {
  if (word.empty()) return {};
  return {plural(word), gerund(word), with_e_suffix(word, "ed"), with_e_suffix(word, "er")};
}

std::set<std::string> term_variants(const std::string& term, const Lexicon& lexicon) {
  const std::string base = join(split_words(to_lower(term)), " ");
  if (base.empty()) throw InvalidArgument("term_variants needs a non-empty term");
  std::set<std::string> bases{base};
  std::vector<std::string> frontier{base};
  while (!frontier.empty()) {
    const std::string t = frontier.back();
    frontier.pop_back();
    const auto it = lexicon.find(t);
    if (it == lexicon.end()) continue;
    for (const auto& syn : it->second) {
      const std::string s = join(split_words(to_lower(syn)), " ");
      if (!s.empty() && bases.insert(s).second) frontier.push_back(s);
    }
  }
  std::set<std::string> out = bases;
  for (const auto& b : bases) {
    const auto space = b.rfind(' ');
    const std::string head = space == std::string::npos ? "" : b.substr(0, space + 1);
    const std::string last = space == std::string::npos ? b : b.substr(space + 1);
    for (const auto& f : inflections(last)) out.insert(head + f);
  }
  return out;
}

ValidationVerdict validate_intent_instruction(const std::string& text, const ReasoningChain& chain,
                                              const ValidatorRuleSet& rules) {
  ValidationVerdict verdict;
  const std::vector<std::string> words = normalize_words(text);
  const std::string normalised = join(words, " ");

  bool first_person = false;
  for (const auto& p : rules.first_person) {
    if (std::regex_search(normalised, p.regex)) {
      first_person = true;
      break;
    }
  }
  if (!first_person) {
    const std::string opening = words.empty() ? "" : join(std::vector<std::string>(words.begin(), words.begin() + std::min<std::size_t>(3, words.size())), " ");
    verdict.violations.push_back({kRuleFirstPerson, opening});
  }

  const auto n = static_cast<int>(words.size());
  if (n < rules.min_words || n > rules.max_words) {
    verdict.violations.push_back({kRuleLength, std::to_string(n) + " words"});
  }

  std::set<std::string> banned;
  for (const std::string* field : {&chain.object, &chain.part, &chain.action, &chain.affordance}) {
    if (field->empty()) continue;
    const std::string term = join(name_words(*field), " ");
    if (rules.expand_variants) {
      const auto v = term_variants(term, rules.lexicon);
      banned.insert(v.begin(), v.end());
    } else {
      banned.insert(to_lower(term));
    }
  }
  const std::vector<std::string> tokens = instruction_tokens(text);
  std::set<std::string> reported;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& b : banned) {
      const auto parts = split_words(b);
      if (i + parts.size() > tokens.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < parts.size() && match; ++k) match = tokens[i + k] == parts[k];
      if (match) {
        const std::string span = join(std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                                               tokens.begin() + static_cast<std::ptrdiff_t>(i + parts.size())),
                                      " ");
        if (reported.insert(span).second) verdict.violations.push_back({kRuleBannedTerm, span});
      }
    }
  }
  verdict.accepted = verdict.violations.empty();
  return verdict;
}

}  // namespace segworld::benchkit
