#include "rbtwin/sdvn/flow_table.hpp"

#include <array>
#include <cmath>

namespace rbtwin::sdvn {

namespace {
constexpr std::array<std::string_view, 4> kPolicyNames{"no_timeout", "idle_timeout", "random_hard", "proposed"};
constexpr std::array<std::string_view, 4> kActionNames{"matched", "installed", "dropped", "packet_out"};

bool on_boundary(double t, double period) {
  const double q = t / period;
  return std::abs(q - std::round(q)) < 1e-9;
}
}  // namespace

std::string_view to_string(PolicyKind k) noexcept { return kPolicyNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(Action a) noexcept { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<PolicyKind> parse_policy_kind(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i)
    if (kPolicyNames[i] == s) return static_cast<PolicyKind>(i);
  return std::nullopt;
}

EvictionPolicy EvictionPolicy::idle(double t_idle, double sample_period) {
  EvictionPolicy p;
  p.kind = PolicyKind::IdleTimeout;
  p.t_idle = t_idle;
  p.sample_period = sample_period;
  return p;
}

EvictionPolicy EvictionPolicy::random_hard(double lo, double hi) {
  EvictionPolicy p;
  p.kind = PolicyKind::RandomHard;
  p.hard_lo = lo;
  p.hard_hi = hi;
  return p;
}

EvictionPolicy EvictionPolicy::proposed(double D) {
  EvictionPolicy p;
  p.kind = PolicyKind::Proposed;
  p.D = D;
  return p;
}

void EvictionPolicy::validate() const {
  switch (kind) {
    case PolicyKind::NoTimeout:
      break;
    case PolicyKind::IdleTimeout:
      if (!(t_idle > 0.0) || !(sample_period > 0.0))
        throw DomainError("idle_timeout: t_idle and sample_period must be positive");
      break;
    case PolicyKind::RandomHard:
      if (!(hard_lo > 0.0) || !(hard_hi >= hard_lo)) throw DomainError("random_hard: need 0 < lo <= hi");
      break;
    case PolicyKind::Proposed:
      if (!(D > 0.0)) throw DomainError("proposed: D must be positive");
      break;
  }
}

std::vector<EvictionPolicy> all_policies(double D) {
  return {EvictionPolicy::no_timeout(), EvictionPolicy::idle(), EvictionPolicy::random_hard(),
          EvictionPolicy::proposed(D)};
}

FlowTable::FlowTable(std::uint32_t app_id, std::size_t f_max, EvictionPolicy policy, double inbound_length,
                     std::uint64_t seed)
    : app_id_(app_id), f_max_(f_max), policy_(policy), inbound_length_(inbound_length), rng_(seed) {
  if (f_max == 0) throw DomainError("flow table: f_max must be positive");
  policy_.validate();
}

Action FlowTable::handle(const BsmEvent& event, std::uint32_t app_id, const TauFn& tau) {
  if (app_id != app_id_) throw ConfigError("network.apps", "unknown app id " + std::to_string(app_id));
  if (auto it = live_.find(event.cv_id); it != live_.end()) {
    it->second.to_app.last_hit = event.timestamp;
    it->second.to_cv.last_hit = event.timestamp;
    ++counters_.matched;
    return Action::Matched;
  }
  return on_packet_in(event, app_id, tau);
}

Action FlowTable::on_packet_in(const BsmEvent& event, std::uint32_t app_id, const TauFn& tau) {
  if (app_id != app_id_) throw ConfigError("network.apps", "unknown app id " + std::to_string(app_id));
  if (live_.count(event.cv_id)) throw DomainError("packet_in for a CV with live entries");
  const double t = event.timestamp;
  std::optional<double> idle, hard;
  switch (policy_.kind) {
    case PolicyKind::NoTimeout:
      break;
    case PolicyKind::IdleTimeout:
      idle = policy_.t_idle;
      break;
    case PolicyKind::RandomHard:
      hard = rng_.uniform(policy_.hard_lo, policy_.hard_hi);
      break;
    case PolicyKind::Proposed: {
      // Only CVs approaching the roundabout within D are served by rules.
      if (!traffic::is_inbound(event.lane) || inbound_length_ - event.offset > policy_.D) {
        ++counters_.dropped;
        return Action::Dropped;
      }
      if (!tau) throw DomainError("proposed policy needs a tau source");
      hard = tau(t);
      break;
    }
  }
  ++counters_.install_attempts;
  if (live_count() + 2 > f_max_) {
    ++counters_.overflow_events;
    ++counters_.packet_outs;
    return Action::PacketOut;
  }
  const FlowEntry base{{event.cv_id, Direction::ToApp}, app_id_, t, t, idle, hard};
  FlowEntry back = base;
  back.key.direction = Direction::ToCv;
  live_.emplace(event.cv_id, Pair{base, back});
  ++counters_.installs;
  if (removed_.count(event.cv_id)) ++counters_.reinstalls;
  counters_.high_water = std::max(counters_.high_water, live_count());
  return Action::Installed;
}

std::vector<FlowEntry> FlowTable::tick(double t) {
  std::vector<FlowEntry> expired;
  if (policy_.kind == PolicyKind::NoTimeout) return expired;
  const bool sample = policy_.kind == PolicyKind::IdleTimeout && on_boundary(t, policy_.sample_period);
  for (auto it = live_.begin(); it != live_.end();) {
    const FlowEntry& e = it->second.to_app;
    const bool hard_out = e.hard_timeout && t >= e.install_time + *e.hard_timeout;
    const bool idle_out = sample && e.idle_timeout && t - e.last_hit >= *e.idle_timeout;
    if (!hard_out && !idle_out) {
      ++it;
      continue;
    }
    expired.push_back(it->second.to_app);
    expired.push_back(it->second.to_cv);
    removed_[it->first] = t;
    ++counters_.removals;
    it = live_.erase(it);
  }
  return expired;
}

std::vector<FlowEntry> FlowTable::live_entries() const {
  std::vector<FlowEntry> out;
  out.reserve(live_count());
  for (const auto& [id, p] : live_) {
    out.push_back(p.to_app);
    out.push_back(p.to_cv);
  }
  return out;
}

std::vector<FlowKey> FlowTable::live_keys() const {
  std::vector<FlowKey> out;
  for (const auto& [id, p] : live_) {
    out.push_back(p.to_app.key);
    out.push_back(p.to_cv.key);
  }
  return out;
}

std::vector<FlowKey> FlowTable::removed_keys() const {
  std::vector<FlowKey> out;
  for (const auto& [id, t] : removed_) {
    out.push_back({id, Direction::ToApp});
    out.push_back({id, Direction::ToCv});
  }
  return out;
}

}  // namespace rbtwin::sdvn
