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

#ifndef OLEV_AUTH_HPP_
#define OLEV_AUTH_HPP_

#include <chrono>
#include <cstdint>
#include <string_view>
#include <utility>
#include <variant>

namespace olev {

// Simulated time. Timestamps on the wire carry the low 48 bits.
using SimTime = std::chrono::microseconds;

enum class Protocol { kDma, kPha };

std::string_view to_string(Protocol p);

// Closed set of protocol rejection causes.
enum class AuthFailure {
  kMalformed,
  kTriesExhausted,
  kUnknownVehicle,
  kC3Mismatch,
  kBadSignature,
  kC6Mismatch,
  kNotRegistered,
  kChainMismatch,
  kReplay,
  kChainExhausted,
  kLinkDown,
  kStaleTimestamp,
  kDecryptFailed,
  kTimeBudgetExceeded,
  kNoConsent,
};

std::string_view to_string(AuthFailure f);

template <typename T>
class AuthResult {
 public:
  AuthResult(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  AuthResult(AuthFailure f) : v_(f) {}          // NOLINT

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }
  const T& value() const { return std::get<T>(v_); }
  T& value() { return std::get<T>(v_); }
  AuthFailure failure() const { return std::get<AuthFailure>(v_); }

 private:
  std::variant<T, AuthFailure> v_;
};

}  // namespace olev

#endif  // OLEV_AUTH_HPP_
