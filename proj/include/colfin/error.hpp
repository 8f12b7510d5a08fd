// Copyright 2026 The colfin Authors
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

namespace colfin {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define COLFIN_DEFINE_ERROR(Name)                                   \
  struct Name : Error {                                             \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

COLFIN_DEFINE_ERROR(FileNotFound);
COLFIN_DEFINE_ERROR(DecodeError);
COLFIN_DEFINE_ERROR(TooSmall);
COLFIN_DEFINE_ERROR(InvalidLayout);
COLFIN_DEFINE_ERROR(NonConvergence);
COLFIN_DEFINE_ERROR(MarginTooLarge);
COLFIN_DEFINE_ERROR(DimensionMismatch);
COLFIN_DEFINE_ERROR(AngleOutOfRange);
COLFIN_DEFINE_ERROR(SmoothnessViolation);
COLFIN_DEFINE_ERROR(EmptySupport);
COLFIN_DEFINE_ERROR(AmplitudeTooLarge);
COLFIN_DEFINE_ERROR(ConfigInvalid);
COLFIN_DEFINE_ERROR(InsufficientData);
COLFIN_DEFINE_ERROR(EmptyScores);
COLFIN_DEFINE_ERROR(OutputUnwritable);

#undef COLFIN_DEFINE_ERROR

}  // namespace colfin
