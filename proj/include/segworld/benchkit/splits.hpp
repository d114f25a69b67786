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

#include <span>
#include <string>

#include "segworld/domain.hpp"

namespace segworld::benchkit {

/// test_clean holds the test samples whose base image appears in no training
/// sample; test_overlap holds the rest. Every id list is sorted, so the
/// result does not depend on input order. Throws MissingBaseImageId.
DatasetSplit build_splits(std::span<const Sample> samples);

/// "train=N test_official=N test_clean=N test_overlap=N"
std::string split_counts(const DatasetSplit& split);

}  // namespace segworld::benchkit
