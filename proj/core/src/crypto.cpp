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

#include "olev/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <memory>

#include "olev/error.hpp"

namespace olev {

namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

Bytes run_cipher(const EVP_CIPHER* cipher, const SymmetricKey& key,
                 const std::uint8_t* iv, ByteView input, bool encrypt) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::bad_alloc();
  if (EVP_CipherInit_ex(ctx.get(), cipher, nullptr, key.bytes.data(), iv,
                        encrypt ? 1 : 0) != 1) {
    throw std::runtime_error("cipher init failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  Bytes out(input.size() + kBlockSize);
  int len = 0;
  int total = 0;
  if (!input.empty() &&
      EVP_CipherUpdate(ctx.get(), out.data(), &len, input.data(),
                       static_cast<int>(input.size())) != 1) {
    throw std::runtime_error("cipher update failed");
  }
  total = len;
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + total, &len) != 1) {
    throw std::runtime_error("cipher final failed");
  }
  total += len;
  out.resize(static_cast<std::size_t>(total));
  return out;
}

void require_block_multiple(ByteView data) {
  if (data.size() % kBlockSize != 0) {
    throw Error(ErrorCode::kMalformedInput,
                "length is not a multiple of the cipher block size");
  }
}

}  // namespace

Digest Digest::from_bytes(ByteView data) {
  if (data.size() != kDigestSize) {
    throw Error(ErrorCode::kMalformedInput, "digest must be 64 bytes");
  }
  Digest d;
  std::copy(data.begin(), data.end(), d.bytes.begin());
  return d;
}

Digest operator^(const Digest& a, const Digest& b) {
  Digest out;
  for (std::size_t i = 0; i < kDigestSize; ++i) {
    out.bytes[i] = a.bytes[i] ^ b.bytes[i];
  }
  return out;
}

SymmetricKey SymmetricKey::from_bytes(ByteView data) {
  if (data.size() != kKeySize) {
    throw Error(ErrorCode::kMalformedInput, "symmetric key must be 32 bytes");
  }
  SymmetricKey k;
  std::copy(data.begin(), data.end(), k.bytes.begin());
  return k;
}

SymmetricKey SymmetricKey::from_digest(const Digest& d) {
  return from_bytes(ByteView(d.bytes).first(kKeySize));
}

Signature Signature::from_bytes(ByteView data) {
  if (data.size() != kSignatureSize) {
    throw Error(ErrorCode::kMalformedInput, "signature must be 64 bytes");
  }
  Signature s;
  std::copy(data.begin(), data.end(), s.bytes.begin());
  return s;
}

Bytes DeterministicRng::bytes(std::size_t n) {
  Bytes out;
  out.reserve(n + 8);
  while (out.size() < n) {
    const std::uint64_t w = engine_();
    for (int i = 0; i < 8; ++i) {
      out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
    }
  }
  out.resize(n);
  return out;
}

Scalar DeterministicRng::scalar() {
  for (;;) {
    // 64 bytes reduced mod a 256-bit q: bias is negligible.
    Scalar s = Scalar::reduce(bytes(64));
    if (!s.is_zero()) return s;
  }
}

SymmetricKey DeterministicRng::key() {
  return SymmetricKey::from_bytes(bytes(kKeySize));
}

DeterministicRng DeterministicRng::fork() { return DeterministicRng(engine_()); }

Digest hash(ByteView data) {
  Digest d;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha512(),
                 nullptr) != 1 ||
      len != kDigestSize) {
    throw std::runtime_error("SHA-512 failed");
  }
  return d;
}

Digest keyed_hash(const SymmetricKey& key, ByteView data) {
  Digest d;
  unsigned int len = 0;
  static const std::uint8_t kEmpty = 0;
  const std::uint8_t* in = data.empty() ? &kEmpty : data.data();
  if (HMAC(EVP_sha512(), key.bytes.data(), static_cast<int>(kKeySize), in,
           data.size(), d.bytes.data(), &len) == nullptr ||
      len != kDigestSize) {
    throw std::runtime_error("HMAC-SHA-512 failed");
  }
  return d;
}

Bytes hash_chain(ByteView seed, std::uint64_t i) {
  if (i == 0) return to_bytes(seed);
  Digest d = hash(seed);
  for (std::uint64_t k = 1; k < i; ++k) d = hash(d.view());
  return d.to_vector();
}

Bytes xor_mask(const Digest& mask_source, ByteView data) {
  Bytes out(data.begin(), data.end());
  std::size_t pos = 0;
  std::uint32_t counter = 0;
  while (pos < out.size()) {
    Digest block = mask_source;
    if (counter > 0) {
      block = hash(concat(mask_source.view(), encode_be(counter, 4)));
    }
    const std::size_t take = std::min(kDigestSize, out.size() - pos);
    for (std::size_t i = 0; i < take; ++i) out[pos + i] ^= block.bytes[i];
    pos += take;
    ++counter;
  }
  return out;
}

Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext) {
  require_block_multiple(plaintext);
  return run_cipher(EVP_aes_256_ecb(), key, nullptr, plaintext, true);
}

Bytes sym_decrypt(const SymmetricKey& key, ByteView ciphertext) {
  require_block_multiple(ciphertext);
  return run_cipher(EVP_aes_256_ecb(), key, nullptr, ciphertext, false);
}

Bytes stream_xcrypt(const SymmetricKey& key, ByteView nonce, ByteView data) {
  if (nonce.size() > kBlockSize) {
    throw Error(ErrorCode::kInvalidArgument, "nonce longer than 16 bytes");
  }
  FixedBytes<kBlockSize> iv{};
  std::copy(nonce.begin(), nonce.end(), iv.begin());
  return run_cipher(EVP_aes_256_ctr(), key, iv.data(), data, true);
}

}  // namespace olev
