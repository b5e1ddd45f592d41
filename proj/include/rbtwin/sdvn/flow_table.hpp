#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "rbtwin/common.hpp"
#include "rbtwin/traffic/network.hpp"

namespace rbtwin::sdvn {

enum class Direction : std::uint8_t { ToApp, ToCv };

struct FlowKey {
  std::uint64_t cv_id = 0;
  Direction direction = Direction::ToApp;

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

struct FlowEntry {
  FlowKey key;
  std::uint32_t app_id = 0;
  double install_time = 0.0;
  double last_hit = 0.0;
  std::optional<double> idle_timeout;
  std::optional<double> hard_timeout;

  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

enum class PolicyKind : std::uint8_t { NoTimeout, IdleTimeout, RandomHard, Proposed };

std::string_view to_string(PolicyKind k) noexcept;
std::optional<PolicyKind> parse_policy_kind(std::string_view s) noexcept;

/// Flow-entry lifespan strategy. Only the parameters of `kind` are used.
struct EvictionPolicy {
  PolicyKind kind = PolicyKind::NoTimeout;
  double t_idle = 30.0;
  double sample_period = 5.0;
  double hard_lo = 10.0;
  double hard_hi = 300.0;
  /// Operating distance of the proposed policy (meters).
  double D = 50.0;

  static EvictionPolicy no_timeout() { return {}; }
  static EvictionPolicy idle(double t_idle = 30.0, double sample_period = 5.0);
  static EvictionPolicy random_hard(double lo = 10.0, double hi = 300.0);
  static EvictionPolicy proposed(double D = 50.0);

  std::string_view name() const noexcept { return to_string(kind); }
  void validate() const;

  friend bool operator==(const EvictionPolicy&, const EvictionPolicy&) = default;
};

/// The four policies with default parameters, in declaration order.
std::vector<EvictionPolicy> all_policies(double D = 50.0);

/// A basic safety message sent by a connected vehicle towards the edge
/// application.
struct BsmEvent {
  double timestamp = 0.0;
  std::uint64_t cv_id = 0;
  traffic::LaneId lane = traffic::LaneId::NorthIn;
  double offset = 0.0;

  friend bool operator==(const BsmEvent&, const BsmEvent&) = default;
};

enum class Action : std::uint8_t { Matched, Installed, Dropped, PacketOut };

std::string_view to_string(Action a) noexcept;

struct TableCounters {
  /// packet_in events that reached an installation attempt.
  std::uint64_t install_attempts = 0;
  /// Successful pair installations.
  std::uint64_t installs = 0;
  std::uint64_t overflow_events = 0;
  std::uint64_t reinstalls = 0;
  /// packet_in events filtered by the proposed policy.
  std::uint64_t dropped = 0;
  std::uint64_t packet_outs = 0;
  std::uint64_t matched = 0;
  /// Pairs removed by timeouts.
  std::uint64_t removals = 0;
  std::size_t high_water = 0;

  friend bool operator==(const TableCounters&, const TableCounters&) = default;
};

/// Supplies τ on demand for the proposed policy.
using TauFn = std::function<double(double t)>;

/// Capacity-bounded flow table of one edge application. Entries come in
/// to_app/to_cv pairs that are installed and removed together.
class FlowTable {
 public:
  /// `inbound_length` locates the ring entry for the proposed policy's
  /// distance check. `seed` drives the random hard timeouts.
  FlowTable(std::uint32_t app_id, std::size_t f_max, EvictionPolicy policy, double inbound_length = 150.0,
            std::uint64_t seed = 0);

  std::uint32_t app_id() const noexcept { return app_id_; }
  std::size_t f_max() const noexcept { return f_max_; }
  const EvictionPolicy& policy() const noexcept { return policy_; }

  /// Routes a packet: a live pair is hit, otherwise a packet_in is raised.
  Action handle(const BsmEvent& event, std::uint32_t app_id, const TauFn& tau = {});
  /// Controller-side handling of a table miss. Throws ConfigError for a
  /// foreign app id and DomainError when the CV already has live entries.
  Action on_packet_in(const BsmEvent& event, std::uint32_t app_id, const TauFn& tau = {});
  /// Removes timed-out pairs. Returns the removed entries.
  std::vector<FlowEntry> tick(double t);

  std::size_t live_count() const noexcept { return live_.size() * 2; }
  bool has_live(std::uint64_t cv_id) const noexcept { return live_.count(cv_id) > 0; }
  std::vector<FlowEntry> live_entries() const;
  std::vector<FlowKey> live_keys() const;
  /// Every key removed so far, with the time of its latest removal.
  const std::map<std::uint64_t, double>& removed() const noexcept { return removed_; }
  std::vector<FlowKey> removed_keys() const;
  const TableCounters& counters() const noexcept { return counters_; }

 private:
  struct Pair {
    FlowEntry to_app;
    FlowEntry to_cv;
  };

  std::uint32_t app_id_;
  std::size_t f_max_;
  EvictionPolicy policy_;
  double inbound_length_;
  Rng rng_;
  std::map<std::uint64_t, Pair> live_;
  std::map<std::uint64_t, double> removed_;
  TableCounters counters_;
};

}  // namespace rbtwin::sdvn
