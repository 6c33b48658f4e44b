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

#include <set>

#include "olev/crypto.hpp"
#include "olev/error.hpp"

namespace olev {

std::uint32_t default_threshold(std::uint32_t j) { return (j + 2) / 2; }

std::vector<SecretShare> share_secret(const Scalar& secret, std::uint32_t j,
                                      std::uint32_t t, DeterministicRng& rng) {
  if (j == 0 || t == 0 || t > j) {
    throw Error(ErrorCode::kInvalidArgument,
                "threshold sharing requires 1 <= t <= j");
  }
  // f(X) = secret + a_1 X + ... + a_{t-1} X^{t-1}
  std::vector<Scalar> coeffs{secret};
  for (std::uint32_t k = 1; k < t; ++k) coeffs.push_back(rng.scalar());

  std::vector<SecretShare> shares;
  shares.reserve(j);
  for (std::uint32_t i = 1; i <= j; ++i) {
    const Scalar x = Scalar::from_u64(i);
    Scalar y;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
      y = y * x + *it;
    }
    shares.push_back(SecretShare{i, y});
  }
  return shares;
}

Scalar reconstruct_secret(std::span<const SecretShare> shares,
                          std::uint32_t t) {
  if (t == 0) throw Error(ErrorCode::kInvalidArgument, "threshold is zero");
  std::set<std::uint32_t> seen;
  for (const auto& s : shares) {
    if (s.index == 0) {
      throw Error(ErrorCode::kInvalidArgument, "share index must be positive");
    }
    if (!seen.insert(s.index).second) {
      throw Error(ErrorCode::kDuplicateIndex, "duplicate share index");
    }
  }
  if (shares.size() < t) {
    throw Error(ErrorCode::kBelowThreshold, "fewer than t shares");
  }
  const auto used = shares.first(t);
  Scalar secret;
  for (const auto& si : used) {
    // lambda_i = prod_{m != i} x_m / (x_m - x_i)
    Scalar num = Scalar::from_u64(1);
    Scalar den = Scalar::from_u64(1);
    const Scalar xi = Scalar::from_u64(si.index);
    for (const auto& sm : used) {
      if (sm.index == si.index) continue;
      const Scalar xm = Scalar::from_u64(sm.index);
      num = num * xm;
      den = den * (xm - xi);
    }
    secret = secret + si.value * num * den.inverse();
  }
  return secret;
}

}  // namespace olev
