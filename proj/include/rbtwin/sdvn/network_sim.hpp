#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rbtwin/dt/tau.hpp"
#include "rbtwin/repository.hpp"
#include "rbtwin/sdvn/flow_table.hpp"
#include "rbtwin/sdvn/metrics.hpp"
#include "rbtwin/traffic/world.hpp"

namespace rbtwin::sdvn {

/// One independent table: a policy at a capacity serving one application.
struct TableSpec {
  EvictionPolicy policy;
  std::size_t f_max = 250;
  std::uint32_t app_id = 0;

  friend bool operator==(const TableSpec&, const TableSpec&) = default;
};

/// BSMs of every connected vehicle for the interval [t, t + dt), sent at
/// `rate` Hz from the poses held at time t. rate * dt must be a whole number.
std::vector<BsmEvent> bsm_events(const traffic::World& world, double t, double dt, double rate);

struct NetworkSummary {
  std::string policy;
  std::size_t f_max = 0;
  std::uint32_t app_id = 0;
  double penetration = 0.0;
  std::uint64_t n_of_events = 0;
  std::uint64_t n_re = 0;
  double r_oc = 0.0;
  double p_of = 0.0;
  double p_re = 0.0;
  double y = 0.0;
  /// Peak number of connected vehicles seen at once, and the demanded-entry
  /// excess evaluated on it.
  std::uint64_t peak_cv = 0;
  std::uint64_t n_of_formula = 0;
  std::int64_t n_of_formula_raw = 0;
  bool no_traffic = true;
  TableCounters counters;
};

/// Replays one BSM stream through a set of independent flow tables.
class NetworkSimulator {
 public:
  NetworkSimulator(std::vector<TableSpec> specs, double inbound_length, dt::TauSource tau, std::uint64_t seed);

  /// Expires timed-out entries in every table.
  void tick(double t);
  /// Feeds completed traversals to the τ estimator.
  void observe(std::span<const traffic::TraversalSample> samples);
  /// Every table consumes the same events in order.
  void process(std::span<const BsmEvent> events, std::size_t connected_now);
  /// One network record per table: occupancy and cumulative counters.
  void record(Repository& repo, double t) const;

  const std::vector<FlowTable>& tables() const noexcept { return tables_; }
  const std::vector<TableSpec>& specs() const noexcept { return specs_; }
  double current_tau(double t) { return tau_.tau(t); }
  std::vector<NetworkSummary> summaries(double penetration) const;

 private:
  std::vector<TableSpec> specs_;
  std::vector<FlowTable> tables_;
  dt::TauSource tau_;
  std::uint64_t peak_cv_ = 0;
};

/// Cross product of policies, capacities and applications, in that nesting.
std::vector<TableSpec> table_specs(std::span<const EvictionPolicy> policies, std::span<const std::size_t> f_max,
                                   std::span<const std::uint32_t> apps);

}  // namespace rbtwin::sdvn
