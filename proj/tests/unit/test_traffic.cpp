#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "rbtwin/traffic/waiting.hpp"

using namespace rbtwin;
using namespace rbtwin::traffic;
using test::make;

TEST_CASE("hv_volume") {
  CHECK(hv_volume(1000.0, 0.4) == doctest::Approx(600.0));
  CHECK(hv_volume(0.0, 0.5) == 0.0);
  CHECK(hv_volume(1000.0, 1.0) == 0.0);
  CHECK_THROWS_AS(hv_volume(1000.0, 1.2), DomainError);
  CHECK_THROWS_AS(hv_volume(1000.0, -0.1), DomainError);
  for (double vol : {0.0, 1.0, 999.0, 2500.0})
    for (double r : {0.0, 0.1, 0.37, 0.9, 1.0}) CHECK(hv_volume(vol, r) + vol * r == doctest::Approx(vol));
}

TEST_CASE("spawn_demand: no volume, no vehicles") {
  DemandConfig c;
  c.vol_total = 0.0;
  Rng rng(1);
  VehicleId next = 1;
  for (int i = 0; i < 1000; ++i) CHECK(spawn_demand(c, i * 0.5, 0.5, rng, next).empty());
}

TEST_CASE("spawn_demand: full penetration yields only AVs") {
  DemandConfig c;
  c.r_av = 1.0;
  Rng rng(2);
  VehicleId next = 1;
  std::size_t n = 0;
  for (int i = 0; i < 7200; ++i)
    for (const auto& v : spawn_demand(c, i * 0.5, 0.5, rng, next)) {
      CHECK(v.cls == VehicleClass::AV);
      ++n;
    }
  CHECK(n > 0);
}

TEST_CASE("spawn_demand: counts, class share and routes are within 3 sigma") {
  DemandConfig c;
  c.vol_total = 1000.0;
  c.r_av = 0.4;
  Rng rng(11);
  VehicleId next = 1;
  const double dt = 0.5, hours = 10.0;
  std::array<double, 4> per_approach{};
  std::array<double, 4> north_exits{};
  double total = 0, avs = 0;
  for (int i = 0; i < static_cast<int>(hours * 3600 / dt); ++i)
    for (const auto& v : spawn_demand(c, i * dt, dt, rng, next)) {
      ++per_approach[index_of(v.entry)];
      ++total;
      avs += v.cls == VehicleClass::AV;
      if (v.entry == Approach::North) ++north_exits[index_of(v.exit)];
      CHECK(v.lane == inbound_lane(v.entry));
    }
  const double expect_total = c.vol_total * hours;
  CHECK(std::abs(total - expect_total) < 3 * std::sqrt(expect_total));
  for (double n : per_approach) CHECK(std::abs(n - expect_total / 4) < 3 * std::sqrt(expect_total / 4));
  CHECK(std::abs(avs - total * c.r_av) < 3 * std::sqrt(total * c.r_av * (1 - c.r_av)));
  const auto& row = c.turning[0];
  for (std::size_t j = 0; j < 4; ++j) {
    const double p = row[j], n = per_approach[0];
    CHECK(std::abs(north_exits[j] - n * p) <= 3 * std::sqrt(n * p * (1 - p)) + 1e-9);
  }
}

TEST_CASE("demand config validation") {
  DemandConfig c;
  c.r_av = 1.5;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.vol_total = -1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.turning[2][1] += 0.1;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("empty world just advances the clock") {
  World w(test::quiet_config());
  for (int i = 0; i < 10; ++i) w.step();
  CHECK(w.clock() == doctest::Approx(5.0));
  CHECK(w.vehicles().empty());
  CHECK(w.total_inbound_count() == 0.0);
  WaitingSample s = w.last_sample();
  CHECK(avg_waiting(std::span(&s, 1)).no_traffic);
}

TEST_CASE("a lone free vehicle enters the ring without waiting") {
  World w(test::quiet_config());
  const auto id = w.place(make(VehicleClass::HV, LaneId::NorthIn, 140.0, 5.0));
  bool entered = false;
  for (int i = 0; i < 20 && !entered; ++i) {
    w.step();
    entered = w.find(id)->lane == LaneId::Ring;
  }
  CHECK(entered);
  CHECK(w.find(id)->waiting_time == 0.0);
}

TEST_CASE("a wait-controlled AV never enters the ring") {
  World w(test::quiet_config());
  const auto id = w.place(make(VehicleClass::AV, LaneId::EastIn, 120.0, 8.0));
  w.apply_control(id, Signal::Wait);
  double last_wt = 0.0;
  for (int i = 0; i < 400; ++i) {
    w.step();
    const Vehicle* v = w.find(id);
    REQUIRE(v != nullptr);
    CHECK(v->lane == LaneId::EastIn);
    CHECK(v->offset <= w.config().geometry.inbound_length);
    CHECK(v->waiting_time >= last_wt);
    last_wt = v->waiting_time;
  }
  CHECK(last_wt > 150.0);
  w.apply_control(id, Signal::Yield);
  w.run_for(30.0);
  CHECK((!w.find(id) || w.find(id)->lane != LaneId::EastIn));
}

TEST_CASE("signals are rejected for human drivers and unknown ids") {
  World w(test::quiet_config());
  const auto hv = w.place(make(VehicleClass::HV, LaneId::NorthIn, 50.0));
  CHECK_THROWS_AS(apply_control(w, hv, Signal::Yield), ControlError);
  CHECK_THROWS_AS(apply_control(w, 999, Signal::Wait), ControlError);
  CHECK(w.find(hv)->control == Control::Free);
}

TEST_CASE("lane_wt examples") {
  World w(test::quiet_config());
  CHECK(lane_wt(w, LaneId::NorthIn) == 0.0);
  auto a = make(VehicleClass::HV, LaneId::NorthIn, 30.0);
  a.waiting_time = 5.0;
  auto b = make(VehicleClass::HV, LaneId::NorthIn, 60.0);
  b.waiting_time = 7.0;
  auto c = make(VehicleClass::HV, LaneId::SouthIn, 60.0);
  c.waiting_time = 100.0;
  w.place(a);
  w.place(b);
  w.place(c);
  CHECK(lane_wt(w, LaneId::NorthIn) == doctest::Approx(12.0));
  CHECK(lane_wt(w, LaneId::SouthIn) == doctest::Approx(100.0));
  CHECK(lane_wt(w, LaneId::WestIn) == 0.0);
  CHECK_THROWS_AS(lane_wt(w, LaneId::Ring), DomainError);
}

TEST_CASE("lane_wt of a fully blocked lane grows by n * dt per tick") {
  World w(test::quiet_config());
  const double len = w.config().geometry.inbound_length;
  const double spacing = 5.0 + w.config().av.min_gap;
  const int n = 3, k = 20;
  for (int i = 0; i < n; ++i) {
    const auto id = w.place(make(VehicleClass::AV, LaneId::WestIn, len - i * spacing));
    w.apply_control(id, Signal::Wait);
  }
  for (int i = 0; i < k; ++i) w.step();
  CHECK(lane_wt(w, LaneId::WestIn) == doctest::Approx(n * k * w.config().dt));
}

TEST_CASE("place rejects bad poses") {
  World w(test::quiet_config());
  CHECK_THROWS_AS(w.place(make(VehicleClass::HV, LaneId::NorthIn, 200.0)), DomainError);
  auto v = make(VehicleClass::HV, LaneId::NorthIn, 10.0);
  v.id = 5;
  w.place(v);
  CHECK_THROWS_AS(w.place(v), DomainError);
}

TEST_CASE("world config validation") {
  WorldConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(World{c}, DomainError);
  c = {};
  c.gap_accept = 2.0;
  CHECK_THROWS_AS(World{c}, DomainError);
  c = {};
  c.traversal_zone = 500.0;
  CHECK_THROWS_AS(World{c}, DomainError);
}

namespace {

// Steps a busy world while toggling AV signals at random and checks the
// per-tick invariants.
void run_invariants(std::uint64_t seed) {
  World w(test::busy_config(1500.0, 0.5, seed));
  Rng pick(seed * 31 + 7);
  std::map<VehicleId, double> last_wt;
  for (int tick = 0; tick < 1200; ++tick) {
    if (tick % 20 == 0)
      for (const auto& v : w.vehicles())
        if (v.connected() && is_inbound(v.lane))
          w.apply_control(v.id, pick.bernoulli(0.5) ? Signal::Wait : Signal::Yield);
    std::map<VehicleId, bool> waiting_inbound;
    for (const auto& v : w.vehicles()) waiting_inbound[v.id] = v.control == Control::Wait && is_inbound(v.lane);

    w.step();

    REQUIRE(w.spawned_total() == w.exited_total() + w.vehicles().size());
    REQUIRE(w.min_bumper_gap() >= -1e-9);
    for (const auto& v : w.vehicles()) {
      if (auto it = last_wt.find(v.id); it != last_wt.end()) REQUIRE(v.waiting_time >= it->second);
      last_wt[v.id] = v.waiting_time;
      if (auto it = waiting_inbound.find(v.id); it != waiting_inbound.end() && it->second)
        REQUIRE(is_inbound(v.lane));
      if (!v.connected()) REQUIRE(v.control == Control::Free);
    }
  }
  CHECK(w.exited_total() > 0);
}

}  // namespace

TEST_CASE("property: conservation, no collisions, monotone waiting, wait never enters") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    CAPTURE(seed);
    run_invariants(seed);
  }
}

TEST_CASE("property: same seed, same trajectory") {
  for (std::uint64_t seed : {3, 17, 101}) {
    World a(test::busy_config(1200.0, 0.3, seed)), b(test::busy_config(1200.0, 0.3, seed));
    for (int i = 0; i < 600; ++i) {
      a.step();
      b.step();
      REQUIRE(a.checksum() == b.checksum());
    }
    CHECK(a.vehicles() == b.vehicles());
  }
  World a(test::busy_config(1200.0, 0.3, 1)), b(test::busy_config(1200.0, 0.3, 2));
  a.run_for(300.0);
  b.run_for(300.0);
  CHECK(a.checksum() != b.checksum());
}

TEST_CASE("property: a copied world is isolated from its source") {
  World a(test::busy_config(1200.0, 0.5, 9));
  a.run_for(200.0);
  const auto before = a.checksum();
  World fork = a;
  CHECK(fork.checksum() == before);
  fork.run_for(100.0);
  for (const auto& v : fork.vehicles())
    if (v.connected() && is_inbound(v.lane)) fork.apply_control(v.id, Signal::Wait);
  fork.reseed(1234);
  fork.run_for(50.0);
  CHECK(a.checksum() == before);
}
