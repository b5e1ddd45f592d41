#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "rbtwin/decision/strategy.hpp"
#include "rbtwin/dt/instance.hpp"
#include "rbtwin/repository.hpp"
#include "rbtwin/traffic/world.hpp"

namespace rbtwin::decision {

struct ControllerConfig {
  bool enabled = true;
  /// Decision period s (seconds).
  double period = 10.0;
  /// What-if horizon p (seconds).
  double horizon = 60.0;
  /// Evaluate candidates on worker threads.
  bool parallel = false;

  void validate(double dt) const;

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

/// Candidate order used throughout: H, y2, y3.
using Candidates = std::array<Strategy, 3>;

Candidates build_candidates(const LaneWaits& wts);
LaneWaits lane_waits(const traffic::World& world);

struct Selection {
  Strategy chosen;
  std::array<dt::InstanceResult, 3> results;
};

/// Forks one what-if instance per candidate, runs all of them for `horizon`
/// and returns the candidate with the least simulated waiting time. Exact ties
/// prefer H, then y3, then y2.
Selection select_strategy(const Candidates& candidates, const traffic::World& source, double horizon,
                          std::uint64_t cycle = 0, bool parallel = false);

using SignalMap = std::map<traffic::VehicleId, traffic::Signal>;

/// Yield to connected vehicles on the chosen inbound lanes, wait to those on
/// the other inbound lanes. Vehicles on the ring or outbound lanes are left
/// alone.
SignalMap dispatch_signals(const Strategy& chosen, traffic::World& world);

struct DecisionCycle {
  std::uint64_t index = 0;
  double t = 0.0;
  LaneWaits lane_wts{};
  Candidates candidates;
  std::array<double, 3> sim_wt{};
  Strategy chosen;
  SignalMap signals;

  std::size_t count(traffic::Signal s) const;
  Payload payload() const;
};

/// Periodic decision loop. Call `maybe_run` after every world tick.
class Controller {
 public:
  Controller(ControllerConfig config, double dt);

  const ControllerConfig& config() const noexcept { return config_; }
  bool due(const traffic::World& world) const;
  /// Runs one full cycle now and appends the cycle (and its instances) to
  /// `repo` when given.
  DecisionCycle run_cycle(traffic::World& world, Repository* repo = nullptr);
  std::optional<DecisionCycle> maybe_run(traffic::World& world, Repository* repo = nullptr);

  std::uint64_t cycles() const noexcept { return cycles_; }

 private:
  ControllerConfig config_;
  std::uint64_t cycles_ = 0;
};

/// Steps `world` for `duration` seconds, running a decision cycle at every
/// multiple of the period. Returns the cycles executed.
std::vector<DecisionCycle> run_controller(traffic::World& world, const ControllerConfig& config, double duration,
                                          Repository& repo);

}  // namespace rbtwin::decision
