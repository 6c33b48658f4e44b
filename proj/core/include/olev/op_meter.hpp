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

#ifndef OLEV_OP_METER_HPP_
#define OLEV_OP_METER_HPP_

#include <cstdint>

#include "olev/crypto.hpp"

namespace olev {

struct OpCounts {
  std::uint64_t hash = 0;
  std::uint64_t xor_ops = 0;
  std::uint64_t enc = 0;
  std::uint64_t dec = 0;

  OpCounts& operator+=(const OpCounts& o) {
    hash += o.hash;
    xor_ops += o.xor_ops;
    enc += o.enc;
    dec += o.dec;
    return *this;
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

// Counting front-end over the primitives. Each protocol role owns one meter
// per phase; a value computed once and reused (h(PS) feeding both c2 and c3,
// for instance) is charged once because callers hold on to the result.
class OpMeter {
 public:
  Digest hash(ByteView data) {
    ++counts_.hash;
    return olev::hash(data);
  }
  Digest xor_digest(const Digest& a, const Digest& b) {
    ++counts_.xor_ops;
    return a ^ b;
  }
  Bytes xor_bytes(ByteView a, ByteView b) {
    ++counts_.xor_ops;
    return olev::xor_equal(a, b);
  }
  Bytes xor_mask(const Digest& mask, ByteView data) {
    ++counts_.xor_ops;
    return olev::xor_mask(mask, data);
  }
  void count_enc() { ++counts_.enc; }
  void count_dec() { ++counts_.dec; }

  const OpCounts& counts() const { return counts_; }
  void reset() { counts_ = {}; }

 private:
  OpCounts counts_;
};

}  // namespace olev

#endif  // OLEV_OP_METER_HPP_
