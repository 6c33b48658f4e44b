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

#ifndef OLEV_BYTES_HPP_
#define OLEV_BYTES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace olev {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <std::size_t N>
using FixedBytes = std::array<std::uint8_t, N>;

std::string to_hex(ByteView data);

// Throws olev::Error(kMalformedInput) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline Bytes to_bytes(ByteView v) { return Bytes(v.begin(), v.end()); }

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline void append(Bytes& out, ByteView v) {
  out.insert(out.end(), v.begin(), v.end());
}

// Concatenation of any number of byte ranges.
template <typename... Parts>
Bytes concat(const Parts&... parts) {
  Bytes out;
  out.reserve((ByteView(parts).size() + ... + 0));
  (append(out, ByteView(parts)), ...);
  return out;
}

// Big-endian encoding of the low `width` bytes of `value`.
Bytes encode_be(std::uint64_t value, std::size_t width);
std::uint64_t decode_be(ByteView data);

// Byte-wise XOR of equal-length ranges; throws on length mismatch.
Bytes xor_equal(ByteView a, ByteView b);

}  // namespace olev

#endif  // OLEV_BYTES_HPP_
