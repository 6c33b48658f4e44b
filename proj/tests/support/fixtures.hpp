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

#ifndef OLEV_TESTS_FIXTURES_HPP_
#define OLEV_TESTS_FIXTURES_HPP_

#include <chrono>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "olev/cspa.hpp"
#include "olev/dmv.hpp"
#include "olev/obu.hpp"
#include "olev/plate.hpp"
#include "olev/revocation.hpp"

namespace olev::testing {

inline constexpr SimTime kHour = std::chrono::duration_cast<SimTime>(std::chrono::hours(1));

// A DMV, CSPA and one plate with the current MSK installed; vehicles are
// added on demand and DMA-registered for epoch 1.
struct DmaBench {
  static constexpr std::size_t kMaxVehicles = 2048;

  DeterministicRng rng;
  std::unique_ptr<Dmv> dmv;
  std::vector<SecretShare> shares;
  std::unique_ptr<Cspa> cspa;
  std::unique_ptr<ChargingPlate> plate;
  std::vector<ObuAgent> obus;

  explicit DmaBench(std::uint64_t seed, std::uint64_t epochs = 4) : rng(seed) {
    obus.reserve(kMaxVehicles);
    auto [d, s] = Dmv::init_system(5, 3, rng);
    dmv = std::make_unique<Dmv>(std::move(d));
    shares = std::move(s);
    cspa = std::make_unique<Cspa>(rng.bytes(32), epochs, kHour, 1,
                                  dmv->params().dmv_public);
    PlateConfig pc;
    pc.id = 7;
    pc.dmv_public = dmv->params().dmv_public;
    pc.charge_time = SimTime(50'000);
    pc.freshness_window = SimTime(400'000);
    plate = std::make_unique<ChargingPlate>(pc);
    plate->install_msk(cspa->epochs()[0].msk);
  }

  // References stay valid because the fleet never outgrows its reservation.
  ObuAgent& add_vehicle(std::size_t pool = 4, std::uint64_t epoch = 1) {
    if (obus.size() == kMaxVehicles) throw std::length_error("bench is full");
    const VehicleId id = vehicle_id_from_u64(rng.next_u64());
    Trm trm = dmv->provision_trm(id, pool, rng);
    cspa->enroll(dmv->enrollment(trm));
    obus.emplace_back(id, std::move(trm), 1, BatteryPolicy{});
    ObuAgent& obu = obus.back();
    obu.install_dma_credentials(
        cspa->register_dma(obu.trm().password(), obu.x_obu(), epoch));
    plate->update_roster(cspa->roster());
    return obu;
  }
};

}  // namespace olev::testing

#endif  // OLEV_TESTS_FIXTURES_HPP_
