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

#ifndef OLEV_CRYPTO_HPP_
#define OLEV_CRYPTO_HPP_

// Primitive layer. Every randomized operation takes its randomness as an
// explicit argument, so all results are reproducible from a seed.
//
// Canonical encodings (these bytes feed every hash and signature):
//   GroupElement  33 bytes, SEC1 compressed point on P-256; the identity
//                 element is 33 zero bytes.
//   Scalar        32 bytes, big-endian, always reduced modulo the group order.
//   Digest        64 bytes, SHA-512 output.
//   Signature     64 bytes, Schnorr (challenge || response), both 32-byte
//                 big-endian scalars.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "olev/bytes.hpp"

namespace olev {

inline constexpr std::size_t kDigestSize = 64;
inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kScalarSize = 32;
inline constexpr std::size_t kPointSize = 33;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kBlockSize = 16;

struct Digest {
  FixedBytes<kDigestSize> bytes{};

  ByteView view() const { return bytes; }
  Bytes to_vector() const { return Bytes(bytes.begin(), bytes.end()); }
  std::string hex() const { return to_hex(bytes); }

  // Throws kMalformedInput unless data is exactly 64 bytes.
  static Digest from_bytes(ByteView data);

  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;
};

Digest operator^(const Digest& a, const Digest& b);

struct SymmetricKey {
  FixedBytes<kKeySize> bytes{};

  ByteView view() const { return bytes; }
  static SymmetricKey from_bytes(ByteView data);
  // First 32 bytes of a digest; used for session keys derived by hashing.
  static SymmetricKey from_digest(const Digest& d);

  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
};

// Integer modulo the group order q.
class Scalar {
 public:
  Scalar() = default;

  static Scalar from_u64(std::uint64_t v);
  // Rejects encodings >= q.
  static Scalar from_bytes(ByteView be32);
  // Interprets arbitrary bytes as a big-endian integer and reduces mod q.
  static Scalar reduce(ByteView data);

  bool is_zero() const;
  ByteView view() const { return bytes_; }
  std::string hex() const { return to_hex(bytes_); }

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  // Throws kZeroScalar for zero.
  Scalar inverse() const;

  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  FixedBytes<kScalarSize> bytes_{};
};

class GroupElement {
 public:
  // Identity element.
  GroupElement() = default;

  static GroupElement generator();
  // Validates curve membership; throws kMalformedInput otherwise.
  static GroupElement from_bytes(ByteView encoded);

  bool is_identity() const;
  ByteView view() const { return bytes_; }
  std::string hex() const { return to_hex(bytes_); }

  friend GroupElement operator+(const GroupElement& a, const GroupElement& b);
  friend GroupElement operator*(const Scalar& k, const GroupElement& p);
  friend bool operator==(const GroupElement&, const GroupElement&) = default;

 private:
  FixedBytes<kPointSize> bytes_{};
};

// k * P for the group generator P.
GroupElement mul_base(const Scalar& k);

struct Signature {
  FixedBytes<kSignatureSize> bytes{};
  ByteView view() const { return bytes; }
  static Signature from_bytes(ByteView data);
  friend bool operator==(const Signature&, const Signature&) = default;
};

struct SigningKeypair {
  Scalar secret;
  GroupElement public_key;

  static SigningKeypair from_secret(const Scalar& sk);
};

struct SecretShare {
  std::uint32_t index = 0;
  Scalar value;
  friend bool operator==(const SecretShare&, const SecretShare&) = default;
};

struct ElGamalCiphertext {
  GroupElement ephemeral;  // rP
  Bytes masked;            // plaintext XOR keystream(H(r * pk))
  friend bool operator==(const ElGamalCiphertext&,
                         const ElGamalCiphertext&) = default;
};

// Seeded source of the explicit randomness passed to the primitives.
// Draws raw 64-bit words from mt19937_64, whose output sequence is fixed by
// the standard, so a seed gives the same bytes on every platform.
// Not a CSPRNG.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  Bytes bytes(std::size_t n);
  // Uniform non-zero scalar.
  Scalar scalar();
  SymmetricKey key();
  // Independent child stream, so adding draws in one place does not shift
  // the randomness seen by another.
  DeterministicRng fork();

 private:
  std::mt19937_64 engine_;
};

Digest hash(ByteView data);

// HMAC-SHA-512.
Digest keyed_hash(const SymmetricKey& key, ByteView data);

// seed when i == 0, otherwise hash applied i times. The result is the seed
// bytes (any length) for i == 0 and a 64-byte digest otherwise.
Bytes hash_chain(ByteView seed, std::uint64_t i);

// XOR with a keystream derived from mask_source, truncated to |data|. For
// |data| <= 64 the keystream is the digest itself; longer inputs extend it
// with hash(mask_source || be32(1)), hash(mask_source || be32(2)), ...
// Self-inverse.
Bytes xor_mask(const Digest& mask_source, ByteView data);

// H(.) of the protocol: digest of the canonical point encoding.
Digest hash_point(const GroupElement& p);

ElGamalCiphertext elgamal_encrypt(const GroupElement& pk, ByteView plaintext,
                                  const Scalar& r);
Bytes elgamal_decrypt(const Scalar& sk, const ElGamalCiphertext& ct);

// Shamir sharing over Z_q with evaluation points 1..j. The t-1 polynomial
// coefficients are drawn from rng.
std::vector<SecretShare> share_secret(const Scalar& secret, std::uint32_t j,
                                      std::uint32_t t, DeterministicRng& rng);
// Lagrange interpolation at zero over the first t shares supplied.
Scalar reconstruct_secret(std::span<const SecretShare> shares,
                          std::uint32_t t);

// Default threshold for j authorities: ceil((j + 1) / 2).
std::uint32_t default_threshold(std::uint32_t j);

// AES-256 applied block by block with no padding and no IV: a deterministic,
// length-preserving encryption of fixed-width field values. Throws
// kMalformedInput when the length is not a multiple of 16.
Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext);
Bytes sym_decrypt(const SymmetricKey& key, ByteView ciphertext);

// AES-256-CTR keystream XOR for session frames of arbitrary length. The
// nonce is expanded to the 16-byte initial counter block by zero padding.
Bytes stream_xcrypt(const SymmetricKey& key, ByteView nonce, ByteView data);

// Schnorr signature over hash(msg) with a deterministic nonce derived from
// (sk, msg).
Signature sign(const Scalar& sk, ByteView msg);
bool verify(const GroupElement& pk, ByteView msg, const Signature& sig);

}  // namespace olev

#endif  // OLEV_CRYPTO_HPP_
