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
#include <vector>

#include "doctest.h"
#include <nlohmann/json.hpp>
#include "fixtures.hpp"
#include "olev/cspa.hpp"
#include "olev/error.hpp"
#include "olev/obu.hpp"

namespace olev {
namespace {

using testing::kHour;

TEST_CASE("init_msk: MSK_i = h^i(s)") {
  const Bytes s = to_bytes("cspa secret seed");
  const auto one = init_msk(s, 1, kHour);
  REQUIRE(one.size() == 1);
  CHECK(one[0].msk == hash(s));

  const auto three = init_msk(s, 3, kHour);
  CHECK(three[2].msk.to_vector() == hash_chain(s, 3));
  for (std::uint64_t i = 1; i <= 3; ++i) {
    CHECK(three[i - 1].index == i);
    CHECK(three[i - 1].msk.to_vector() == hash_chain(s, i));
  }
  CHECK_THROWS_AS(init_msk(s, 0, kHour), Error);
}

TEST_CASE("epoch lookup follows the validity windows") {
  const auto e = init_msk(to_bytes("seed"), 4, SimTime(1000));
  // Interval oracle: epoch i covers [1000(i-1), 1000 i).
  for (std::int64_t t = 0; t < 4000; t += 37) {
    const auto got = epoch_at(e, SimTime(t));
    REQUIRE(got.has_value());
    CHECK(got->index == static_cast<std::uint64_t>(t / 1000 + 1));
  }
  CHECK(epoch_at(e, SimTime(1000))->index == 2);
  CHECK_FALSE(epoch_at(e, SimTime(4000)).has_value());
  CHECK_FALSE(epoch_at(e, SimTime(-1)).has_value());
}

TEST_CASE("register_dma: H2 = h(H1), H3 ^ MSK = H1, idempotent per epoch") {
  testing::DmaBench b(40);
  ObuAgent& obu = b.add_vehicle();
  const DmaRegistration* reg = b.cspa->dma_registration(obu.x_obu());
  REQUIRE(reg != nullptr);
  CHECK(reg->h2 == hash(reg->h1.view()));
  CHECK((reg->h3 ^ b.cspa->epochs()[0].msk) == reg->h1);

  const auto again = b.cspa->register_dma(obu.trm().password(), obu.x_obu(), 1);
  CHECK(again.h2 == reg->h2);
  CHECK(again.h3 == reg->h3);

  const auto next = b.cspa->register_dma(obu.trm().password(), obu.x_obu(), 2);
  CHECK((next.h3 ^ b.cspa->epochs()[1].msk) == b.cspa->dma_registration(obu.x_obu())->h1);
  CHECK(next.h2 == reg->h2);
}

TEST_CASE("register_dma gates on enrollment, password and epoch") {
  testing::DmaBench b(41);
  ObuAgent& obu = b.add_vehicle();
  Bytes wrong = to_bytes(obu.trm().password());
  wrong[0] ^= 1;
  try {
    (void)b.cspa->register_dma(wrong, obu.x_obu(), 1);
    FAIL("bad password accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadPassword);
  }
  Digest unknown;
  unknown.bytes[0] = 1;
  CHECK_THROWS_AS(b.cspa->register_dma(obu.trm().password(), unknown, 1), Error);
  CHECK_THROWS_AS(b.cspa->register_dma(obu.trm().password(), obu.x_obu(), 0), Error);
  CHECK_THROWS_AS(b.cspa->register_dma(obu.trm().password(), obu.x_obu(), 99), Error);
}

TEST_CASE("distinct X_OBU values give distinct H1 over 10^3 registrations") {
  DeterministicRng rng(42);
  Cspa cspa(rng.bytes(32), 1, kHour, 1, GroupElement::generator());
  const Bytes pwd = rng.bytes(16);
  std::set<Digest> h1s;
  for (int i = 0; i < 1000; ++i) {
    const Digest x = Digest::from_bytes(rng.bytes(64));
    cspa.enroll(Enrollment{x, hash(pwd)});
    (void)cspa.register_dma(pwd, x, 1);
    h1s.insert(cspa.dma_registration(x)->h1);
  }
  CHECK(h1s.size() == 1000);
  CHECK(cspa.roster().size() == 1000);
}

struct ChainBench {
  testing::DmaBench b;
  ObuAgent* obu;
  Pseudonym seed;

  explicit ChainBench(std::uint64_t s) : b(s) {
    obu = &b.add_vehicle();
    seed = *obu->rotate_pseudonym();
  }
};

TEST_CASE("register_chain: n uses down to h^1; n=1 and bad heads rejected") {
  ChainBench c(43);
  const auto& cert = c.obu->trm().certificate();
  const Digest head = c.obu->start_chain(c.seed, 4);
  CHECK(head.to_vector() == hash_chain(c.seed.encode(), 4));
  const auto& reg = c.b.cspa->register_chain(c.obu->x_obu(), head.view(), cert, 4);
  CHECK(reg.remaining == 3);
  CHECK(reg.head == head);

  CHECK_THROWS_AS(c.b.cspa->register_chain(c.obu->x_obu(), head.view(), cert, 1), Error);
  const Bytes short_head(63, 0x11);
  CHECK_THROWS_AS(c.b.cspa->register_chain(c.obu->x_obu(), short_head, cert, 4), Error);

  ObuCertificate bad = cert;
  bad.signature.bytes[10] ^= 1;
  try {
    (void)c.b.cspa->register_chain(c.obu->x_obu(), head.view(), bad, 4);
    FAIL("bad certificate accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidCertificate);
  }
}

TEST_CASE("verify_and_rotate: chain monotonicity, replay and exhaustion") {
  for (std::uint64_t n : {2u, 5u, 8u, 64u}) {
    CAPTURE(n);
    ChainBench c(44 + n);
    const Bytes seed = c.seed.encode();
    const Digest head = c.obu->start_chain(c.seed, n);
    (void)c.b.cspa->register_chain(c.obu->x_obu(), head.view(),
                                   c.obu->trm().certificate(), n);
    std::vector<Digest> used;
    for (std::uint64_t k = 1; k < n; ++k) {
      const Digest member = Digest::from_bytes(hash_chain(seed, n - k));
      auto r = c.b.cspa->verify_and_rotate(c.obu->x_obu(), member, SimTime(k), c.b.rng);
      REQUIRE(r.ok());
      CHECK(c.b.cspa->chain(c.obu->x_obu())->head.to_vector() == hash_chain(seed, n - k));
      CHECK(c.b.cspa->chain(c.obu->x_obu())->remaining == n - 1 - k);
      used.push_back(member);
    }
    for (const auto& m : used) {
      auto r = c.b.cspa->verify_and_rotate(c.obu->x_obu(), m, SimTime(n), c.b.rng);
      REQUIRE_FALSE(r.ok());
      CHECK(r.failure() == AuthFailure::kReplay);
    }
    auto head_replay = c.b.cspa->verify_and_rotate(c.obu->x_obu(), head, SimTime(n), c.b.rng);
    CHECK(head_replay.failure() == AuthFailure::kReplay);
    // Past h^1 only the seed pseudonym itself would hash onward.
    auto done = c.b.cspa->verify_and_rotate(c.obu->x_obu(), hash(Bytes{1}), SimTime(n), c.b.rng);
    CHECK(done.failure() == AuthFailure::kChainExhausted);
  }
}

TEST_CASE("verify_and_rotate: 10^3 random members, 0 accepts") {
  ChainBench c(45);
  const Digest head = c.obu->start_chain(c.seed, 8);
  (void)c.b.cspa->register_chain(c.obu->x_obu(), head.view(),
                                 c.obu->trm().certificate(), 8);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const Digest m = Digest::from_bytes(c.b.rng.bytes(64));
    if (c.b.cspa->verify_and_rotate(c.obu->x_obu(), m, SimTime(i), c.b.rng).ok()) ++accepted;
  }
  CHECK(accepted == 0);
  CHECK(c.b.cspa->chain(c.obu->x_obu())->remaining == 7);
}

TEST_CASE("verify_and_rotate: one session key per chain, sealed to K_OBU+") {
  ChainBench c(46);
  const Digest head = c.obu->start_chain(c.seed, 4);
  (void)c.b.cspa->register_chain(c.obu->x_obu(), head.view(),
                                 c.obu->trm().certificate(), 4);
  std::vector<SymmetricKey> keys;
  for (int k = 0; k < 3; ++k) {
    auto member = c.obu->next_chain_member();
    REQUIRE(member.ok());
    auto sealed = c.b.cspa->verify_and_rotate(c.obu->x_obu(), member.value(), SimTime(k), c.b.rng);
    REQUIRE(sealed.ok());
    c.obu->confirm_chain_member();
    auto sk = c.obu->accept_pha_session(sealed.value());
    REQUIRE(sk.ok());
    keys.push_back(sk.value());
  }
  CHECK(keys[0] == keys[1]);
  CHECK(keys[1] == keys[2]);
  CHECK(c.b.cspa->session_keys().size() == 1);
  CHECK(c.obu->next_chain_member().failure() == AuthFailure::kChainExhausted);
}

TEST_CASE("verify_and_rotate without a chain is not registered") {
  testing::DmaBench b(47);
  ObuAgent& obu = b.add_vehicle();
  auto r = b.cspa->verify_and_rotate(obu.x_obu(), hash(Bytes{}), SimTime(0), b.rng);
  CHECK(r.failure() == AuthFailure::kNotRegistered);
}

TEST_CASE("ledger: 12 unit bills total 12; totals are a fold of entries") {
  DeterministicRng rng(48);
  Cspa cspa(rng.bytes(32), 1, kHour, 1, GroupElement::generator());
  const Digest a = Digest::from_bytes(rng.bytes(64));
  const Digest b = Digest::from_bytes(rng.bytes(64));
  for (int i = 0; i < 12; ++i) {
    CHECK(cspa.record_bill(BillingEntry{SimTime(i), a, std::nullopt, 1, 1}) ==
          BillStatus::kRecorded);
    CHECK(cspa.ledger().totals() == cspa.ledger().recompute_totals());
  }
  CHECK(cspa.ledger().total(a) == 12);
  for (int i = 0; i < 50; ++i) {
    const Digest& x = (rng.next_u64() & 1) ? a : b;
    (void)cspa.record_bill(BillingEntry{SimTime(100 + i), x, std::nullopt,
                                        static_cast<std::uint32_t>(i % 7), 1});
    CHECK(cspa.ledger().totals() == cspa.ledger().recompute_totals());
  }
  CHECK(cspa.ledger().total(a) + cspa.ledger().total(b) == 62);
  CHECK(cspa.flags().empty());
}

TEST_CASE("record_bill rejects a non-unit cost and flags the plate") {
  DeterministicRng rng(49);
  Cspa cspa(rng.bytes(32), 1, kHour, 1, GroupElement::generator());
  const Digest x = Digest::from_bytes(rng.bytes(64));
  CHECK(cspa.record_bill(BillingEntry{SimTime(5), x, std::nullopt, 3, 2}) ==
        BillStatus::kRejectedNonUnitCost);
  CHECK(cspa.ledger().entries().empty());
  CHECK(cspa.ledger().total(x) == 0);
  REQUIRE(cspa.flags().size() == 1);
  CHECK(cspa.flags()[0].party == "plate");
  CHECK(cspa.flags()[0].plate == 3);
  CHECK(cspa.flags()[0].reason == "non_unit_cost");
}

TEST_CASE("ledger JSON lines carry ts, x_obu_hex, ps_hex, plate, cost") {
  testing::DmaBench b(50);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym ps = *obu.rotate_pseudonym();
  const std::vector<BillingEntry> entries{
      BillingEntry{SimTime(7), obu.x_obu(), ps, 2, 1},
      BillingEntry{SimTime(8), obu.x_obu(), std::nullopt, 3, 1}};
  const std::string lines = to_json_lines(entries);
  const auto nl = lines.find('\n');
  REQUIRE(nl != std::string::npos);
  const auto first = nlohmann::json::parse(lines.substr(0, nl));
  CHECK(first["ts"] == 7);
  CHECK(first["x_obu_hex"] == obu.x_obu().hex());
  CHECK(first["ps_hex"] == to_hex(ps.encode()));
  CHECK(first["plate"] == 2);
  CHECK(first["cost"] == 1);
  const auto second = nlohmann::json::parse(lines.substr(nl + 1));
  CHECK_FALSE(second.contains("ps_hex"));
}

TEST_CASE("scan_pseudonym_reuse flags a pseudonym billed in two sections") {
  testing::DmaBench b(51);
  ObuAgent& obu = b.add_vehicle();
  const Pseudonym p1 = *obu.rotate_pseudonym();
  const Pseudonym p2 = *obu.rotate_pseudonym();
  auto bill = [&](const Pseudonym& p, std::uint32_t plate) {
    (void)b.cspa->record_bill(BillingEntry{SimTime(plate), obu.x_obu(), p, plate, 1});
  };
  bill(p1, 0);
  bill(p1, 1);
  bill(p2, 2);
  bill(p2, 3);
  auto section = [](std::uint32_t plate) { return plate / 2; };
  CHECK(b.cspa->scan_pseudonym_reuse(section).empty());
  bill(p1, 4);
  const auto reused = b.cspa->scan_pseudonym_reuse(section);
  REQUIRE(reused.size() == 1);
  CHECK(reused[0] == p1);
}

}  // namespace
}  // namespace olev
