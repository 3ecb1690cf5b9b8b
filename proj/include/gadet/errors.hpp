// Copyright 2026 The gadet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace gadet {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GADET_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

GADET_DEFINE_ERROR(FormatError);      // malformed binary file
GADET_DEFINE_ERROR(DataError);        // well-formed file carrying bad values
GADET_DEFINE_ERROR(IoError);          // filesystem failure
GADET_DEFINE_ERROR(ManifestError);    // inconsistent dataset manifest
GADET_DEFINE_ERROR(ConfigError);      // invalid or unparsable configuration
GADET_DEFINE_ERROR(GenerationError);  // synthetic data cannot be produced
GADET_DEFINE_ERROR(SplitError);       // train/test split impossible
GADET_DEFINE_ERROR(ShapeError);       // tensor dimension mismatch
GADET_DEFINE_ERROR(GradientError);    // gradient check failure
GADET_DEFINE_ERROR(MetricError);      // metric undefined for its input
GADET_DEFINE_ERROR(DivergenceError);  // non-finite training loss

#undef GADET_DEFINE_ERROR

}  // namespace gadet
