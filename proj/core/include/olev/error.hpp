// Copyright 2026 The olev-billing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OLEV_ERROR_HPP_
#define OLEV_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace olev {

// Precondition and contract violations. Protocol-level rejections (a bad
// handshake, a replayed chain member) are reported as AuthFailure values
// instead, since they are expected outcomes rather than programming errors.
enum class ErrorCode {
  kInvalidArgument,
  kMalformedInput,
  kZeroScalar,
  kBelowThreshold,
  kDuplicateIndex,
  kDuplicateVehicle,
  kMissingWarrant,
  kBadSignature,
  kInconsistentDecryption,
  kUnknownPseudonym,
  kNoLiveNode,
  kNotRegistered,
  kInvalidCertificate,
  kBadPassword,
  kNoSessionKey,
  kUnknownTarget,
  kConfig,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace olev

#endif  // OLEV_ERROR_HPP_
