#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "helpers.hpp"
#include "rbtwin/dt/detection.hpp"
#include "rbtwin/dt/fidelity.hpp"
#include "rbtwin/dt/mirror.hpp"
#include "rbtwin/dt/tau.hpp"

using namespace rbtwin;
using namespace rbtwin::dt;
using traffic::LaneId;

namespace {

// Reference type-7 quantile written out longhand.
double reference_quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(h);
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace

TEST_CASE("quantile matches a longhand reference") {
  CHECK(quantile({5, 8, 30}, 0.95) == doctest::Approx(27.8));
  CHECK(quantile({4}, 0.95) == 4.0);
  CHECK(quantile({1, 2, 3, 4}, 0.0) == 1.0);
  CHECK(quantile({1, 2, 3, 4}, 1.0) == 4.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(quantile({}, 0.5), DomainError);
  CHECK_THROWS_AS(quantile({1.0}, 1.5), DomainError);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(1 + static_cast<std::size_t>(rng.uniform(0, 40)));
    for (double& v : x) v = rng.uniform(0, 60);
    const double q = rng.uniform();
    CHECK(quantile(x, q) == doctest::Approx(reference_quantile(x, q)));
  }
}

TEST_CASE("estimate_tau examples") {
  const TauConfig cfg;
  const double fallback = 50.0 / 13.89 + 5.0;
  CHECK(tau_fallback(50.0, cfg) == doctest::Approx(fallback));
  CHECK(estimate_tau(std::span<const double>{}, 50.0, cfg) == doctest::Approx(fallback));
  // Every vehicle crossing D = 50 m at 10 m/s.
  const std::vector<double> uniform(20, 5.0);
  CHECK(estimate_tau(uniform, 50.0, cfg) == doctest::Approx(5.0));
  // Three samples are below the default minimum and fall back.
  const std::vector<double> three{5, 8, 30};
  CHECK(estimate_tau(three, 50.0, cfg) == doctest::Approx(fallback));
  TauConfig small = cfg;
  small.n_min = 3;
  CHECK(estimate_tau(three, 50.0, small) == doctest::Approx(reference_quantile(three, 0.95)));
}

TEST_CASE("property: adding delay never lowers tau") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(5 + static_cast<std::size_t>(rng.uniform(0, 30)));
    for (double& v : x) v = rng.uniform(3, 40);
    const double before = estimate_tau(x, 50.0);
    for (double& v : x)
      if (rng.bernoulli(0.3)) v += rng.uniform(0, 20);
    CHECK(estimate_tau(x, 50.0) >= before);
  }
}

TEST_CASE("estimate_tau from a repository window") {
  Repository repo;
  std::vector<traffic::TraversalSample> s;
  for (int i = 0; i < 10; ++i) s.push_back({10.0 * i, 5.0 + i, static_cast<traffic::VehicleId>(i + 1)});
  record_traversals(repo, s);
  TauConfig cfg;
  cfg.window = 45.0;
  // (45, 90]: t = 50..90, durations 10..14.
  CHECK(estimate_tau(repo, 90.0, 50.0, cfg) == doctest::Approx(reference_quantile({10, 11, 12, 13, 14}, 0.95)));
}

TEST_CASE("TauSource holds its value between refreshes") {
  TauConfig cfg;
  cfg.refresh = 10.0;
  TauSource src(50.0, cfg);
  CHECK(src.tau(0.0) == doctest::Approx(tau_fallback(50.0, cfg)));
  for (int i = 0; i < 6; ++i) src.observe({1.0 + i, 7.0, static_cast<traffic::VehicleId>(i + 1)});
  CHECK(src.tau(5.0) == doctest::Approx(tau_fallback(50.0, cfg)));
  CHECK(src.tau(10.0) == doctest::Approx(7.0));
}

TEST_CASE("tau config validation") {
  TauConfig c;
  c.quantile = 1.5;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.window = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("trace CSV round-trips and requires a header") {
  const std::vector<Detection> d{{0.5, 3, Category::Car, LaneId::NorthIn, 12.25, 8.0},
                                 {1.0, 4, Category::Bus, LaneId::Ring, 99.5, 4.75},
                                 {1.0, 5, Category::Unknown, LaneId::WestOut, 0.1, 1.0 / 3.0}};
  std::stringstream ss;
  write_trace(ss, d);
  CHECK(ss.str().substr(0, kTraceHeader.size()) == kTraceHeader);
  CHECK(read_trace(ss) == d);
  std::stringstream no_header("0.5,3,car,N_in,1,1\n");
  CHECK_THROWS_AS(read_trace(no_header), TraceError);
  std::stringstream bad(std::string(kTraceHeader) + "\n0.5,3,plane,N_in,1,1\n");
  CHECK_THROWS_AS(read_trace(bad), TraceError);
}

TEST_CASE("fidelity examples") {
  std::vector<Detection> pt;
  for (int t = 0; t < 300; ++t) pt.push_back({static_cast<double>(t), 1, Category::Car, LaneId::NorthIn, 10, 5.0 + t % 7});
  CHECK(compute_fidelity(pt, pt).rmse == 0.0);
  auto shifted = pt;
  for (auto& d : shifted) d.speed += 1.0;
  CHECK(compute_fidelity(pt, shifted).rmse == doctest::Approx(1.0));
  CHECK(compute_fidelity({}, {}).bins.empty());
  CHECK_THROWS_AS(compute_fidelity(pt, pt, 0.0), DomainError);
}

TEST_CASE("fidelity: five-bin worked example") {
  // Per-bin means PT = 10, 12, 8, 6, 9 and DT = 11, 12, 6, 6, 10.
  // Squared differences 1, 0, 4, 0, 1: RMSE = sqrt(6 / 5).
  const std::array<std::array<double, 2>, 5> pt_pairs{{{9, 11}, {12, 12}, {7, 9}, {5, 7}, {9, 9}}};
  const std::array<double, 5> dt_means{11, 12, 6, 6, 10};
  std::vector<Detection> pt, dt;
  for (int b = 0; b < 5; ++b) {
    pt.push_back({60.0 * b + 1, 1, Category::Car, LaneId::NorthIn, 1, pt_pairs[b][0]});
    pt.push_back({60.0 * b + 30, 2, Category::Car, LaneId::NorthIn, 1, pt_pairs[b][1]});
    dt.push_back({60.0 * b + 1, 1, Category::Car, LaneId::NorthIn, 1, dt_means[b]});
  }
  const auto r = compute_fidelity(pt, dt);
  CHECK(r.bins.size() == 5);
  CHECK(r.bins_used == 5);
  CHECK(r.rmse == doctest::Approx(std::sqrt(6.0 / 5.0)));
}

TEST_CASE("fidelity skips bins that one side lacks") {
  std::vector<Detection> pt{{0, 1, Category::Car, LaneId::NorthIn, 1, 5}, {100, 1, Category::Car, LaneId::NorthIn, 1, 5}};
  std::vector<Detection> dt{{0, 1, Category::Car, LaneId::NorthIn, 1, 7}};
  const auto r = compute_fidelity(pt, dt);
  CHECK(r.bins_used == 1);
  CHECK(r.bins_empty == 1);
  CHECK(r.rmse == doctest::Approx(2.0));
}

TEST_CASE("mirror: empty stream, creation and pose") {
  Mirror m(test::quiet_config());
  m.ingest(std::span<const Detection>{});
  CHECK(m.objects().empty());
  CHECK(m.world().vehicles().empty());
  const Detection d{2.0, 42, Category::Car, LaneId::SouthIn, 60.0, 7.5};
  ingest(std::span(&d, 1), m);
  REQUIRE(m.objects().size() == 1);
  const auto* vo = m.by_track(42);
  REQUIRE(vo != nullptr);
  const auto* v = m.world().find(vo->vehicle);
  CHECK(v->lane == LaneId::SouthIn);
  CHECK(v->offset == 60.0);
  CHECK(v->speed == 7.5);
  CHECK(m.world().clock() == 2.0);
  CHECK(m.stats().created == 1);
}

TEST_CASE("mirror: out-of-order and invalid detections are counted, not applied") {
  Mirror m(test::quiet_config());
  const std::vector<Detection> d{{2.0, 1, Category::Car, LaneId::NorthIn, 60.0, 5.0},
                                 {1.5, 1, Category::Car, LaneId::NorthIn, 10.0, 5.0},
                                 {2.5, 2, Category::Car, LaneId::NorthIn, 400.0, 5.0}};
  m.ingest(d);
  CHECK(m.stats().out_of_order == 1);
  CHECK(m.stats().invalid == 1);
  CHECK(m.world().find(m.by_track(1)->vehicle)->offset == 60.0);
}

TEST_CASE("mirror: silent tracks expire after the expiry time") {
  Mirror m(test::quiet_config());
  const Detection d{0.0, 1, Category::Car, LaneId::NorthIn, 60.0, 5.0};
  m.ingest(std::span(&d, 1));
  m.advance_to(3.0);
  CHECK(m.objects().size() == 1);
  m.advance_to(3.5);
  CHECK(m.objects().empty());
  CHECK(m.world().vehicles().empty());
  CHECK(m.stats().expired == 1);
}

TEST_CASE("mirror: CAV matching") {
  Mirror m(test::quiet_config());
  const std::vector<Detection> d{{0.0, 10, Category::Car, LaneId::NorthIn, 45.0, 5.0},
                                 {1.0, 11, Category::Car, LaneId::NorthIn, 60.0, 5.0},
                                 {1.0, 12, Category::Car, LaneId::EastIn, 50.0, 5.0}};
  m.ingest(d);
  // Nearest same-lane object within tolerance.
  auto r = m.match_cav({100, LaneId::NorthIn, 51.0, 1.0});
  CHECK(r.status == MatchStatus::Unmatched);
  r = m.match_cav({100, LaneId::NorthIn, 47.0, 1.0});
  REQUIRE(r.status == MatchStatus::Bound);
  CHECK(r.vo_id == m.by_track(10)->vo_id);
  CHECK(m.world().find(*r.vehicle)->cls == traffic::VehicleClass::AV);
  // Re-registration returns the existing binding.
  CHECK(m.match_cav({100, LaneId::SouthIn, 0.0, 1.0}).vo_id == r.vo_id);
  CHECK(m.match_cav({101, LaneId::WestIn, 50.0, 1.0}).status == MatchStatus::Unmatched);
  CHECK(m.match_cav({102, LaneId::EastIn, 50.0, 20.0}).status == MatchStatus::Stale);
}

TEST_CASE("mirror: equidistant candidates go to the older track") {
  Mirror m(test::quiet_config());
  const std::vector<Detection> d{{0.0, 7, Category::Car, LaneId::NorthIn, 45.0, 5.0},
                                 {1.0, 3, Category::Car, LaneId::NorthIn, 55.0, 5.0}};
  m.ingest(d);
  CHECK(m.match_cav({1, LaneId::NorthIn, 50.0, 1.0}).vo_id == m.by_track(7)->vo_id);
}

TEST_CASE("mirror reproduces a simulated trace exactly when fed every tick") {
  traffic::World pt(test::busy_config(1200.0, 0.3, 6));
  Mirror m(test::quiet_config());
  std::vector<Detection> pt_trace, dt_trace;
  for (int i = 0; i < 1200; ++i) {
    pt.step();
    const auto obs = observe(pt);
    m.ingest(obs);
    const auto mirrored = m.observe();
    CHECK(mirrored.size() == obs.size());
    pt_trace.insert(pt_trace.end(), obs.begin(), obs.end());
    dt_trace.insert(dt_trace.end(), mirrored.begin(), mirrored.end());
  }
  CHECK(compute_fidelity(pt_trace, dt_trace).rmse == 0.0);
}
