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

#include <stdexcept>
#include <string>

namespace segworld {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SEGWORLD_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

SEGWORLD_DEFINE_ERROR(InvalidArgument);
SEGWORLD_DEFINE_ERROR(MalformedRle);
SEGWORLD_DEFINE_ERROR(DimensionMismatch);
SEGWORLD_DEFINE_ERROR(EmptyEvaluation);
SEGWORLD_DEFINE_ERROR(EmptyInput);
SEGWORLD_DEFINE_ERROR(DecodeOverflow);
SEGWORLD_DEFINE_ERROR(NoSegToken);
SEGWORLD_DEFINE_ERROR(LengthMismatch);
SEGWORLD_DEFINE_ERROR(NonFiniteLoss);
SEGWORLD_DEFINE_ERROR(MissingSynthesizedContext);
SEGWORLD_DEFINE_ERROR(MissingIntentInstruction);
SEGWORLD_DEFINE_ERROR(MissingBaseImageId);
SEGWORLD_DEFINE_ERROR(GeneratorFailure);
SEGWORLD_DEFINE_ERROR(UnreadableFile);
SEGWORLD_DEFINE_ERROR(ParseError);
SEGWORLD_DEFINE_ERROR(CheckpointError);

#undef SEGWORLD_DEFINE_ERROR

}  // namespace segworld
