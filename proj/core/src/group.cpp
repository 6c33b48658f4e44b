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

// Prime-order group (P-256) and scalar field arithmetic on OpenSSL BIGNUM,
// plus the two schemes built directly on them: ElGamal and Schnorr.

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <algorithm>
#include <memory>

#include "olev/crypto.hpp"
#include "olev/error.hpp"

namespace olev {

namespace {

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct BnCtxDeleter {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct GroupDeleter {
  void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};

using Bn = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtx = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using Point = std::unique_ptr<EC_POINT, PointDeleter>;

void check(int rc, const char* what) {
  if (rc != 1) throw std::runtime_error(what);
}

Bn new_bn() {
  Bn b(BN_new());
  if (!b) throw std::bad_alloc();
  return b;
}

BnCtx new_ctx() {
  BnCtx c(BN_CTX_new());
  if (!c) throw std::bad_alloc();
  return c;
}

const EC_GROUP* curve() {
  static const std::unique_ptr<EC_GROUP, GroupDeleter> group(
      EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1));
  return group.get();
}

const BIGNUM* order() { return EC_GROUP_get0_order(curve()); }

Bn bn_from(ByteView be) {
  Bn b(BN_bin2bn(be.data(), static_cast<int>(be.size()), nullptr));
  if (!b) throw std::bad_alloc();
  return b;
}

FixedBytes<kScalarSize> bn_to_fixed(const BIGNUM* b) {
  FixedBytes<kScalarSize> out{};
  check(BN_bn2binpad(b, out.data(), kScalarSize) == kScalarSize ? 1 : 0,
        "scalar encoding failed");
  return out;
}

Point new_point() {
  Point p(EC_POINT_new(curve()));
  if (!p) throw std::bad_alloc();
  return p;
}

Point decode_point(ByteView enc, BN_CTX* ctx) {
  Point p = new_point();
  if (std::all_of(enc.begin(), enc.end(), [](std::uint8_t b) { return b == 0; })) {
    check(EC_POINT_set_to_infinity(curve(), p.get()), "set infinity failed");
    return p;
  }
  if (EC_POINT_oct2point(curve(), p.get(), enc.data(), enc.size(), ctx) != 1) {
    throw Error(ErrorCode::kMalformedInput, "not a valid group element");
  }
  return p;
}

FixedBytes<kPointSize> encode_point(const EC_POINT* p, BN_CTX* ctx) {
  FixedBytes<kPointSize> out{};
  if (EC_POINT_is_at_infinity(curve(), p) == 1) return out;
  const std::size_t n = EC_POINT_point2oct(
      curve(), p, POINT_CONVERSION_COMPRESSED, out.data(), out.size(), ctx);
  check(n == kPointSize ? 1 : 0, "point encoding failed");
  return out;
}

}  // namespace

// Scalar -----------------------------------------------------------------

Scalar Scalar::from_u64(std::uint64_t v) {
  return reduce(encode_be(v, 8));
}

Scalar Scalar::from_bytes(ByteView be32) {
  if (be32.size() != kScalarSize) {
    throw Error(ErrorCode::kMalformedInput, "scalar must be 32 bytes");
  }
  Bn b = bn_from(be32);
  if (BN_cmp(b.get(), order()) >= 0) {
    throw Error(ErrorCode::kMalformedInput, "scalar not reduced modulo q");
  }
  Scalar s;
  std::copy(be32.begin(), be32.end(), s.bytes_.begin());
  return s;
}

Scalar Scalar::reduce(ByteView data) {
  BnCtx ctx = new_ctx();
  Bn b = bn_from(data);
  Bn r = new_bn();
  check(BN_nnmod(r.get(), b.get(), order(), ctx.get()), "mod failed");
  Scalar s;
  s.bytes_ = bn_to_fixed(r.get());
  return s;
}

bool Scalar::is_zero() const {
  return std::all_of(bytes_.begin(), bytes_.end(),
                     [](std::uint8_t b) { return b == 0; });
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  BnCtx ctx = new_ctx();
  Bn x = bn_from(a.bytes_), y = bn_from(b.bytes_), r = new_bn();
  check(BN_mod_add(r.get(), x.get(), y.get(), order(), ctx.get()), "add");
  Scalar s;
  s.bytes_ = bn_to_fixed(r.get());
  return s;
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  BnCtx ctx = new_ctx();
  Bn x = bn_from(a.bytes_), y = bn_from(b.bytes_), r = new_bn();
  check(BN_mod_sub(r.get(), x.get(), y.get(), order(), ctx.get()), "sub");
  Scalar s;
  s.bytes_ = bn_to_fixed(r.get());
  return s;
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  BnCtx ctx = new_ctx();
  Bn x = bn_from(a.bytes_), y = bn_from(b.bytes_), r = new_bn();
  check(BN_mod_mul(r.get(), x.get(), y.get(), order(), ctx.get()), "mul");
  Scalar s;
  s.bytes_ = bn_to_fixed(r.get());
  return s;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw Error(ErrorCode::kZeroScalar, "zero has no inverse");
  BnCtx ctx = new_ctx();
  Bn x = bn_from(bytes_);
  Bn r(BN_mod_inverse(nullptr, x.get(), order(), ctx.get()));
  if (!r) throw std::runtime_error("inverse failed");
  Scalar s;
  s.bytes_ = bn_to_fixed(r.get());
  return s;
}

// GroupElement ----------------------------------------------------------

GroupElement GroupElement::generator() {
  BnCtx ctx = new_ctx();
  GroupElement g;
  g.bytes_ = encode_point(EC_GROUP_get0_generator(curve()), ctx.get());
  return g;
}

GroupElement GroupElement::from_bytes(ByteView encoded) {
  if (encoded.size() != kPointSize) {
    throw Error(ErrorCode::kMalformedInput, "group element must be 33 bytes");
  }
  BnCtx ctx = new_ctx();
  Point p = decode_point(encoded, ctx.get());
  GroupElement e;
  e.bytes_ = encode_point(p.get(), ctx.get());
  return e;
}

bool GroupElement::is_identity() const {
  return std::all_of(bytes_.begin(), bytes_.end(),
                     [](std::uint8_t b) { return b == 0; });
}

GroupElement operator+(const GroupElement& a, const GroupElement& b) {
  BnCtx ctx = new_ctx();
  Point pa = decode_point(a.bytes_, ctx.get());
  Point pb = decode_point(b.bytes_, ctx.get());
  Point r = new_point();
  check(EC_POINT_add(curve(), r.get(), pa.get(), pb.get(), ctx.get()),
        "point add failed");
  GroupElement e;
  e.bytes_ = encode_point(r.get(), ctx.get());
  return e;
}

GroupElement operator*(const Scalar& k, const GroupElement& p) {
  BnCtx ctx = new_ctx();
  Point pp = decode_point(p.bytes_, ctx.get());
  Bn kk = bn_from(k.view());
  Point r = new_point();
  check(EC_POINT_mul(curve(), r.get(), nullptr, pp.get(), kk.get(), ctx.get()),
        "point mul failed");
  GroupElement e;
  e.bytes_ = encode_point(r.get(), ctx.get());
  return e;
}

GroupElement mul_base(const Scalar& k) {
  BnCtx ctx = new_ctx();
  Bn kk = bn_from(k.view());
  Point r = new_point();
  check(EC_POINT_mul(curve(), r.get(), kk.get(), nullptr, nullptr, ctx.get()),
        "base mul failed");
  return GroupElement::from_bytes(encode_point(r.get(), ctx.get()));
}

SigningKeypair SigningKeypair::from_secret(const Scalar& sk) {
  if (sk.is_zero()) throw Error(ErrorCode::kZeroScalar, "zero secret key");
  return SigningKeypair{sk, mul_base(sk)};
}

// ElGamal ---------------------------------------------------------------

Digest hash_point(const GroupElement& p) { return hash(p.view()); }

ElGamalCiphertext elgamal_encrypt(const GroupElement& pk, ByteView plaintext,
                                  const Scalar& r) {
  if (r.is_zero()) throw Error(ErrorCode::kZeroScalar, "zero ElGamal nonce");
  const GroupElement shared = r * pk;
  return ElGamalCiphertext{mul_base(r), xor_mask(hash_point(shared), plaintext)};
}

Bytes elgamal_decrypt(const Scalar& sk, const ElGamalCiphertext& ct) {
  if (sk.is_zero()) throw Error(ErrorCode::kZeroScalar, "zero secret key");
  if (ct.ephemeral.is_identity()) {
    throw Error(ErrorCode::kMalformedInput, "ephemeral key is the identity");
  }
  const GroupElement shared = sk * ct.ephemeral;
  return xor_mask(hash_point(shared), ct.masked);
}

// Schnorr ---------------------------------------------------------------

namespace {

Scalar challenge(const GroupElement& commitment, const GroupElement& pk,
                 ByteView msg) {
  const Digest m = hash(msg);
  return Scalar::reduce(hash(concat(commitment.view(), pk.view(), m.view())).view());
}

}  // namespace

Signature sign(const Scalar& sk, ByteView msg) {
  if (sk.is_zero()) throw Error(ErrorCode::kZeroScalar, "zero signing key");
  const GroupElement pk = mul_base(sk);
  Scalar k = Scalar::reduce(hash(concat(sk.view(), hash(msg).view())).view());
  if (k.is_zero()) k = Scalar::from_u64(1);
  const GroupElement commitment = mul_base(k);
  const Scalar e = challenge(commitment, pk, msg);
  const Scalar s = k + e * sk;
  Signature sig;
  std::copy(e.view().begin(), e.view().end(), sig.bytes.begin());
  std::copy(s.view().begin(), s.view().end(), sig.bytes.begin() + kScalarSize);
  return sig;
}

bool verify(const GroupElement& pk, ByteView msg, const Signature& sig) {
  if (pk.is_identity()) return false;
  Scalar e, s;
  try {
    e = Scalar::from_bytes(ByteView(sig.bytes).first(kScalarSize));
    s = Scalar::from_bytes(ByteView(sig.bytes).last(kScalarSize));
  } catch (const Error&) {
    return false;
  }
  // R' = sP - eX
  const GroupElement neg_e_pk = (Scalar() - e) * pk;
  const GroupElement commitment = mul_base(s) + neg_e_pk;
  if (commitment.is_identity()) return false;
  return challenge(commitment, pk, msg) == e;
}

}  // namespace olev
