#include "rbtwin/sdvn/network_sim.hpp"

#include <cmath>

namespace rbtwin::sdvn {

std::vector<BsmEvent> bsm_events(const traffic::World& world, double t, double dt, double rate) {
  if (!(rate > 0.0) || !(dt > 0.0)) throw DomainError("bsm: rate and dt must be positive");
  const double per_tick = rate * dt;
  const auto k = static_cast<std::size_t>(std::llround(per_tick));
  if (k == 0 || std::abs(per_tick - static_cast<double>(k)) > 1e-9)
    throw DomainError("bsm: rate * dt must be a positive whole number");
  std::vector<BsmEvent> out;
  for (std::size_t i = 0; i < k; ++i) {
    const double ts = t + static_cast<double>(i) / rate;
    for (const auto& v : world.vehicles())
      if (v.connected()) out.push_back({ts, v.id, v.lane, v.offset});
  }
  return out;
}

NetworkSimulator::NetworkSimulator(std::vector<TableSpec> specs, double inbound_length, dt::TauSource tau,
                                   std::uint64_t seed)
    : specs_(std::move(specs)), tau_(std::move(tau)) {
  tables_.reserve(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    // Seeded by the table's identity so a table behaves the same in any set.
    const std::uint64_t id = (static_cast<std::uint64_t>(s.policy.kind) << 48) ^
                             (static_cast<std::uint64_t>(s.f_max) << 16) ^ s.app_id;
    tables_.emplace_back(s.app_id, s.f_max, s.policy, inbound_length, mix_seed(seed, id));
  }
}

void NetworkSimulator::tick(double t) {
  for (auto& table : tables_) table.tick(t);
}

void NetworkSimulator::observe(std::span<const traffic::TraversalSample> samples) { tau_.observe(samples); }

void NetworkSimulator::process(std::span<const BsmEvent> events, std::size_t connected_now) {
  peak_cv_ = std::max<std::uint64_t>(peak_cv_, connected_now);
  const TauFn tau = [this](double t) { return tau_.tau(t); };
  // Events outermost so every table sees τ evolve identically.
  for (const auto& e : events)
    for (auto& table : tables_) table.handle(e, table.app_id(), tau);
}

void NetworkSimulator::record(Repository& repo, double t) const {
  for (const auto& table : tables_) {
    const auto& c = table.counters();
    repo.append(RecordKind::Network, t, std::string(table.policy().name()),
                {{"app", static_cast<double>(table.app_id())},
                 {"f_max", static_cast<double>(table.f_max())},
                 {"occupancy", static_cast<double>(table.live_count())},
                 {"overflow_events_cum", static_cast<double>(c.overflow_events)},
                 {"reinstalls_cum", static_cast<double>(c.reinstalls)}});
  }
}

std::vector<NetworkSummary> NetworkSimulator::summaries(double penetration) const {
  std::vector<NetworkSummary> out;
  for (const auto& table : tables_) {
    const auto& c = table.counters();
    const auto probs = estimate_probabilities(c);
    NetworkSummary s;
    s.policy = std::string(table.policy().name());
    s.f_max = table.f_max();
    s.app_id = table.app_id();
    s.penetration = penetration;
    s.n_of_events = c.overflow_events;
    s.n_re = c.reinstalls;
    const std::size_t hw = c.high_water;
    s.r_oc = r_oc(std::span(&hw, 1), table.f_max());
    s.p_of = probs.p_of;
    s.p_re = probs.p_re;
    s.y = objective_y(s.p_of, s.p_re, s.r_oc);
    s.peak_cv = peak_cv_;
    s.n_of_formula = n_of(peak_cv_, table.f_max());
    s.n_of_formula_raw = n_of_raw(peak_cv_, table.f_max());
    s.no_traffic = probs.no_traffic;
    s.counters = c;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TableSpec> table_specs(std::span<const EvictionPolicy> policies, std::span<const std::size_t> f_max,
                                   std::span<const std::uint32_t> apps) {
  std::vector<TableSpec> out;
  for (const auto& p : policies)
    for (auto f : f_max)
      for (auto a : apps) out.push_back({p, f, a});
  return out;
}

}  // namespace rbtwin::sdvn
