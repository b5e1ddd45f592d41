#pragma once

#include <cstdint>

#include "rbtwin/decision/strategy.hpp"
#include "rbtwin/repository.hpp"
#include "rbtwin/traffic/world.hpp"

namespace rbtwin::dt {

/// Identifies a what-if instance: the decision cycle that spawned it and the
/// candidate slot within that cycle.
struct InstanceId {
  std::uint64_t cycle = 0;
  std::uint32_t slot = 0;

  friend bool operator==(const InstanceId&, const InstanceId&) = default;
};

/// Seed of a forked world. Depends on the parent seed and the cycle only, so
/// every candidate of one cycle sees the same future arrivals.
std::uint64_t child_seed(std::uint64_t parent_seed, InstanceId id) noexcept;

struct DTInstance {
  InstanceId id;
  traffic::World world;
  decision::Strategy strategy;
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

/// Deep-copies `source`, applies the strategy to the copy's inbound AVs (yield
/// on strategy lanes, wait elsewhere) and reseeds it.
DTInstance fork_instance(const traffic::World& source, const decision::Strategy& strategy, double horizon,
                         InstanceId id);

struct InstanceResult {
  InstanceId id;
  decision::StrategyKind strategy = decision::StrategyKind::AllLanes;
  double fork_time = 0.0;
  double sim_wt = 0.0;
  bool no_traffic = true;

  Payload payload() const;
};

/// Steps the instance for its horizon with the strategy held fixed and returns
/// the average waiting time over the horizon.
InstanceResult run_instance(DTInstance& instance);
/// As above, and appends a decision record describing the outcome.
InstanceResult run_instance(DTInstance& instance, Repository& repo);

}  // namespace rbtwin::dt
