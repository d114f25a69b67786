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

#include <string>
#include <string_view>
#include <vector>

namespace segworld {

/// ASCII lower-casing; other bytes pass through unchanged.
std::string to_lower(std::string_view text);

/// Splits on whitespace, case-folds, and strips punctuation from both ends of
/// every token. Inner apostrophes and hyphens survive ("I'd" -> "i'd").
/// Typographic apostrophes are mapped to ASCII first. Tokens that become
/// empty are dropped.
std::vector<std::string> normalize_words(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Splits on single spaces and underscores; used for catalog names such as
/// "pick_up".
std::vector<std::string> name_words(std::string_view name);

}  // namespace segworld
