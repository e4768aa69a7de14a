// Copyright 2026 The envaff Authors
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

#ifndef ENVAFF_ERROR_HPP
#define ENVAFF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace envaff {

/// Every failure raised by the library carries a stable machine-readable code
/// (e.g. "PlacementFailure") next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define ENVAFF_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

ENVAFF_DEFINE_ERROR(InvalidArgument)
ENVAFF_DEFINE_ERROR(PlacementFailure)
ENVAFF_DEFINE_ERROR(AugmentFailure)
ENVAFF_DEFINE_ERROR(OutOfRange)
ENVAFF_DEFINE_ERROR(InvalidPoint)
ENVAFF_DEFINE_ERROR(QuotaFailure)
ENVAFF_DEFINE_ERROR(CorruptData)
ENVAFF_DEFINE_ERROR(VersionMismatch)
ENVAFF_DEFINE_ERROR(ShapeMismatch)
ENVAFF_DEFINE_ERROR(NonFiniteGradient)
ENVAFF_DEFINE_ERROR(LengthMismatch)
ENVAFF_DEFINE_ERROR(EmptyScene)
ENVAFF_DEFINE_ERROR(IoFailure)
ENVAFF_DEFINE_ERROR(ConfigError)

#undef ENVAFF_DEFINE_ERROR

}  // namespace envaff

#endif  // ENVAFF_ERROR_HPP
