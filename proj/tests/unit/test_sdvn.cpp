#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "rbtwin/sdvn/flow_table.hpp"
#include "rbtwin/sdvn/metrics.hpp"
#include "rbtwin/sdvn/network_sim.hpp"

using namespace rbtwin;
using namespace rbtwin::sdvn;
using traffic::LaneId;

namespace {
BsmEvent at(double t, std::uint64_t cv, double offset = 120.0, LaneId lane = LaneId::NorthIn) {
  return {t, cv, lane, offset};
}
const TauFn kTau12 = [](double) { return 12.0; };
}  // namespace

TEST_CASE("proposed policy installs near the ring and drops far away") {
  FlowTable t(0, 250, EvictionPolicy::proposed(50.0));
  // d = 150 - 120 = 30 <= 50.
  CHECK(t.on_packet_in(at(100.0, 1, 120.0), 0, kTau12) == Action::Installed);
  CHECK(t.live_count() == 2);
  for (const auto& e : t.live_entries()) {
    CHECK(e.hard_timeout == 12.0);
    CHECK_FALSE(e.idle_timeout.has_value());
    CHECK(e.install_time == 100.0);
  }
  // d = 80 > 50.
  CHECK(t.on_packet_in(at(100.0, 2, 70.0), 0, kTau12) == Action::Dropped);
  CHECK(t.on_packet_in(at(100.0, 3, 10.0, LaneId::Ring), 0, kTau12) == Action::Dropped);
  CHECK(t.counters().dropped == 2);
  CHECK(t.live_count() == 2);
}

TEST_CASE("no-timeout table overflows at capacity") {
  FlowTable t(0, 4, EvictionPolicy::no_timeout());
  CHECK(t.on_packet_in(at(0, 1), 0) == Action::Installed);
  CHECK(t.on_packet_in(at(0, 2), 0) == Action::Installed);
  CHECK(t.on_packet_in(at(0, 3), 0) == Action::PacketOut);
  CHECK(t.counters().overflow_events == 1);
  CHECK(t.counters().packet_outs == 1);
  CHECK(t.live_count() == 4);
  CHECK(t.tick(1e6).empty());
}

TEST_CASE("packet_in errors") {
  FlowTable t(3, 10, EvictionPolicy::no_timeout());
  CHECK_THROWS_AS(t.on_packet_in(at(0, 1), 4), ConfigError);
  CHECK_THROWS_AS(t.handle(at(0, 1), 4), ConfigError);
  t.on_packet_in(at(0, 1), 3);
  CHECK_THROWS_AS(t.on_packet_in(at(1, 1), 3), DomainError);
  FlowTable p(0, 10, EvictionPolicy::proposed());
  CHECK_THROWS_AS(p.on_packet_in(at(0, 1), 0), DomainError);
  CHECK_THROWS_AS(FlowTable(0, 0, EvictionPolicy::no_timeout()), DomainError);
}

TEST_CASE("hard timeout removes the pair at install + timeout") {
  FlowTable t(0, 10, EvictionPolicy::proposed());
  t.on_packet_in(at(100.0, 1), 0, kTau12);
  CHECK(t.tick(111.5).empty());
  const auto gone = t.tick(112.0);
  CHECK(gone.size() == 2);
  CHECK(t.live_count() == 0);
  CHECK(t.removed().at(1) == 112.0);
}

TEST_CASE("idle timeout is checked on sample boundaries") {
  FlowTable t(0, 10, EvictionPolicy::idle(30.0, 5.0));
  t.on_packet_in(at(40.0, 1), 0);
  CHECK(t.handle(at(50.0, 1), 0) == Action::Matched);
  CHECK(t.tick(75.0).empty());
  CHECK(t.tick(79.5).empty());
  CHECK(t.tick(80.0).size() == 2);
  // Off-boundary ticks never evict.
  FlowTable u(0, 10, EvictionPolicy::idle(30.0, 5.0));
  u.on_packet_in(at(0.0, 1), 0);
  CHECK(u.tick(31.0).empty());
  CHECK(u.tick(35.0).size() == 2);
}

TEST_CASE("random hard timeouts lie in [lo, hi] and depend on the seed only") {
  FlowTable a(0, 1000, EvictionPolicy::random_hard(10, 300), 150.0, 5);
  FlowTable b(0, 1000, EvictionPolicy::random_hard(10, 300), 150.0, 5);
  for (std::uint64_t i = 1; i <= 100; ++i) {
    a.on_packet_in(at(0, i), 0);
    b.on_packet_in(at(0, i), 0);
  }
  CHECK(a.live_entries() == b.live_entries());
  for (const auto& e : a.live_entries()) {
    CHECK(*e.hard_timeout >= 10.0);
    CHECK(*e.hard_timeout <= 300.0);
  }
}

TEST_CASE("reinstalls are counted for returning CVs") {
  FlowTable t(0, 10, EvictionPolicy::proposed());
  t.on_packet_in(at(0, 1), 0, kTau12);
  t.tick(12.0);
  CHECK(t.handle(at(13.0, 1), 0, kTau12) == Action::Installed);
  CHECK(t.counters().reinstalls == 1);
  CHECK(t.counters().installs == 2);
  CHECK(t.counters().removals == 1);
}

TEST_CASE("policy names and validation") {
  CHECK(to_string(PolicyKind::Proposed) == "proposed");
  CHECK(parse_policy_kind("idle_timeout") == PolicyKind::IdleTimeout);
  CHECK_FALSE(parse_policy_kind("lru").has_value());
  CHECK(all_policies().size() == 4);
  CHECK_THROWS_AS(EvictionPolicy::random_hard(50, 10).validate(), DomainError);
  CHECK_THROWS_AS(EvictionPolicy::idle(0).validate(), DomainError);
  CHECK_THROWS_AS(EvictionPolicy::proposed(-1).validate(), DomainError);
}

TEST_CASE("metric examples") {
  CHECK(n_of(100, 250) == 0);
  CHECK(n_of(150, 250) == 50);
  CHECK(n_of_raw(100, 250) == -50);
  CHECK(n_of(0, 1) == 0);
  const std::vector<FlowKey> inst{{1, Direction::ToApp}, {1, Direction::ToCv}, {2, Direction::ToApp}};
  const std::vector<FlowKey> rem{{1, Direction::ToApp}, {1, Direction::ToApp}, {3, Direction::ToCv}};
  CHECK(n_re(inst, rem) == 1);
  CHECK(n_re({}, rem) == 0);
  const std::vector<std::size_t> occ{0, 10, 125, 40};
  CHECK(r_oc(occ, 250) == doctest::Approx(0.5));
  CHECK(r_oc({}, 250) == 0.0);
  CHECK(objective_y(0.1, 0.2, 0.5) == doctest::Approx(0.8));
  CHECK(objective_y(0, 0, 0) == 0.0);
  CHECK_THROWS_AS(objective_y(1.2, 0, 0), DomainError);
  CHECK_THROWS_AS(objective_y(0, -0.1, 0), DomainError);
  const auto p = estimate_probabilities({10, 8, 2, 4, 0, 2, 0, 0, 16});
  CHECK(p.p_of == doctest::Approx(0.2));
  CHECK(p.p_re == doctest::Approx(0.5));
  CHECK(estimate_probabilities({}).no_traffic);
}

TEST_CASE("property: table metrics against direct computation") {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto cv = static_cast<std::uint64_t>(rng.uniform(0, 400));
    const auto fmax = 1 + static_cast<std::uint64_t>(rng.uniform(0, 600));
    const auto raw = static_cast<std::int64_t>(2 * cv) - static_cast<std::int64_t>(fmax);
    CHECK(n_of_raw(cv, fmax) == raw);
    CHECK(n_of(cv, fmax) == static_cast<std::uint64_t>(std::max<std::int64_t>(0, raw)));
    std::set<FlowKey> a, b;
    std::vector<FlowKey> va, vb;
    for (int k = 0; k < 30; ++k) {
      const FlowKey ka{static_cast<std::uint64_t>(rng.uniform(0, 20)), rng.bernoulli(0.5) ? Direction::ToApp : Direction::ToCv};
      const FlowKey kb{static_cast<std::uint64_t>(rng.uniform(0, 20)), rng.bernoulli(0.5) ? Direction::ToApp : Direction::ToCv};
      a.insert(ka);
      b.insert(kb);
      va.push_back(ka);
      vb.push_back(kb);
    }
    std::size_t common = 0;
    for (const auto& k : a) common += b.count(k);
    CHECK(n_re(va, vb) == common);
    std::vector<std::size_t> occ(20);
    std::size_t peak = 0;
    for (auto& o : occ) peak = std::max(peak, o = static_cast<std::size_t>(rng.uniform(0, static_cast<double>(fmax))));
    CHECK(r_oc(occ, fmax) == doctest::Approx(static_cast<double>(peak) / static_cast<double>(fmax)));
    const double x = rng.uniform(), y = rng.uniform(), z = rng.uniform();
    CHECK(objective_y(x, y, z) == doctest::Approx(x + y + z));
  }
}

TEST_CASE("property: capacity and pairing hold under random streams") {
  for (const auto& policy : all_policies()) {
    for (std::size_t f_max : {6u, 25u, 50u}) {
      FlowTable t(0, f_max, policy, 150.0, 3);
      Rng rng(f_max);
      std::uint64_t no_timeout_removals = 0;
      for (int step = 0; step < 2000; ++step) {
        const double now = step * 0.5;
        t.tick(now);
        for (int k = 0; k < 3; ++k)
          t.handle(at(now, static_cast<std::uint64_t>(rng.uniform(1, 60)), rng.uniform(0, 150)), 0, kTau12);
        REQUIRE(t.live_count() <= f_max);
        REQUIRE(t.live_count() % 2 == 0);
        const auto keys = t.live_keys();
        std::map<std::uint64_t, int> per_cv;
        for (const auto& k : keys) ++per_cv[k.cv_id];
        for (const auto& [cv, n] : per_cv) REQUIRE(n == 2);
        no_timeout_removals += policy.kind == PolicyKind::NoTimeout ? t.counters().removals : 0;
      }
      if (policy.kind == PolicyKind::NoTimeout) {
        CHECK(no_timeout_removals == 0);
        CHECK(t.counters().reinstalls == 0);
        CHECK(estimate_probabilities(t.counters()).p_re == 0.0);
      }
      CHECK(t.counters().high_water <= f_max);
    }
  }
}

TEST_CASE("bsm_events emits rate * dt messages per connected vehicle") {
  traffic::World w(test::quiet_config());
  w.place(test::make(traffic::VehicleClass::AV, LaneId::NorthIn, 10.0));
  w.place(test::make(traffic::VehicleClass::HV, LaneId::SouthIn, 10.0));
  w.place(test::make(traffic::VehicleClass::AV, LaneId::EastIn, 20.0));
  const auto ev = bsm_events(w, 4.0, 0.5, 10.0);
  CHECK(ev.size() == 10);
  CHECK(ev.front().timestamp == 4.0);
  CHECK(ev.back().timestamp == doctest::Approx(4.4));
  CHECK(std::is_sorted(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));
  CHECK_THROWS_AS(bsm_events(w, 0.0, 0.5, 3.0), DomainError);
}

TEST_CASE("network simulator: every table sees the same events and zero CVs gives zeros") {
  const auto specs = table_specs(all_policies(), std::vector<std::size_t>{125, 250},
                                 std::vector<std::uint32_t>{0});
  CHECK(specs.size() == 8);
  NetworkSimulator idle(specs, 150.0, dt::TauSource(50.0), 1);
  for (int i = 0; i < 100; ++i) {
    idle.tick(i * 0.5);
    idle.process({}, 0);
  }
  for (const auto& s : idle.summaries(0.0)) {
    CHECK(s.no_traffic);
    CHECK(s.r_oc == 0.0);
    CHECK(s.y == 0.0);
    CHECK(s.n_of_events == 0);
  }

  traffic::World w(test::busy_config(1500.0, 1.0, 2));
  NetworkSimulator net(specs, 150.0, dt::TauSource(50.0), 9);
  std::uint64_t events = 0;
  for (int i = 0; i < 1200; ++i) {
    net.tick(w.clock());
    const auto ev = bsm_events(w, w.clock(), 0.5, 10.0);
    events += ev.size();
    net.process(ev, w.vehicles().size());
    w.step();
    net.observe(w.take_traversals());
  }
  for (const auto& t : net.tables()) {
    const auto& c = t.counters();
    // Each event is either a hit or a packet_in with exactly one outcome.
    CHECK(c.matched + c.dropped + c.installs + c.packet_outs == events);
  }
}

TEST_CASE("a table's behaviour does not depend on the other tables present") {
  traffic::World w(test::busy_config(1500.0, 1.0, 5));
  const auto all = table_specs(all_policies(), std::vector<std::size_t>{125, 250},
                               std::vector<std::uint32_t>{0});
  const std::vector<TableSpec> one{all[5]};
  NetworkSimulator a(all, 150.0, dt::TauSource(50.0), 3), b(one, 150.0, dt::TauSource(50.0), 3);
  for (int i = 0; i < 1200; ++i) {
    a.tick(w.clock());
    b.tick(w.clock());
    const auto ev = bsm_events(w, w.clock(), 0.5, 10.0);
    a.process(ev, 0);
    b.process(ev, 0);
    w.step();
    const auto tr = w.take_traversals();
    a.observe(tr);
    b.observe(tr);
  }
  CHECK(a.tables()[5].counters() == b.tables()[0].counters());
  CHECK(a.tables()[5].live_entries() == b.tables()[0].live_entries());
}
