#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "rbtwin/common.hpp"
#include "rbtwin/traffic/car_following.hpp"
#include "rbtwin/traffic/demand.hpp"
#include "rbtwin/traffic/network.hpp"
#include "rbtwin/traffic/vehicle.hpp"

namespace rbtwin::traffic {

struct WorldConfig {
  Geometry geometry;
  CarFollowingParams hv = default_hv_params();
  CarFollowingParams av = default_av_params();
  DemandConfig demand;
  double dt = 0.5;
  /// Speed below which a vehicle counts as stationary.
  double v_stat = 0.1;
  /// Clear ring distance required upstream of an entry point.
  double gap_accept = 15.0;
  /// The front vehicle starts checking for a gap this far from the stop line.
  double decision_distance = 10.0;
  /// Length of the final inbound stretch whose traversal times are recorded.
  double traversal_zone = 50.0;

  void validate() const;

  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

/// Yield/wait instruction addressed to a connected vehicle.
enum class Signal : std::uint8_t { Yield, Wait };

class ControlError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Waiting-average terms of one sampled tick: waiting time summed over inbound vehicles
/// and their count.
struct WaitingSample {
  double t = 0.0;
  double wt_sum = 0.0;
  std::size_t n_inbound = 0;
};

/// One completed traversal of the final zone of an inbound lane.
struct TraversalSample {
  double t_complete = 0.0;
  double duration = 0.0;
  VehicleId vehicle = 0;
};

/// Full mutable state of one roundabout simulation. Self-contained and
/// copyable: a copy is an isolated fork that evolves independently.
class World {
 public:
  explicit World(WorldConfig config);

  const WorldConfig& config() const noexcept { return config_; }
  const RoundaboutNetwork& network() const noexcept { return network_; }
  const CarFollowingParams& params(VehicleClass c) const noexcept {
    return c == VehicleClass::AV ? config_.av : config_.hv;
  }

  double clock() const noexcept { return clock_; }
  std::uint64_t ticks() const noexcept { return ticks_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<Vehicle>& vehicles() const noexcept { return vehicles_; }
  const Vehicle* find(VehicleId id) const noexcept;
  Vehicle* find(VehicleId id) noexcept;

  /// Advances one tick: admits new demand, moves every vehicle, accumulates
  /// waiting times and advances the clock by dt.
  void step();
  void run_for(double seconds);

  /// Inserts a vehicle at an explicit pose. Assigns a fresh id when `v.id` is 0.
  VehicleId place(Vehicle v);
  bool remove(VehicleId id);
  /// Moves the clock without simulating (used when mirroring external data).
  void set_clock(double t);
  /// Replaces the seed of every random stream owned by the world.
  void reseed(std::uint64_t seed);
  void set_demand(const DemandConfig& demand);

  void apply_control(VehicleId id, Signal signal);

  std::uint64_t spawned_total() const noexcept { return spawned_total_; }
  std::uint64_t exited_total() const noexcept { return exited_total_; }
  std::size_t pending(Approach a) const noexcept { return pending_[index_of(a)].size(); }
  std::size_t pending_total() const noexcept;

  const WaitingSample& last_sample() const noexcept { return last_sample_; }
  /// Waiting-average numerator and denominator accumulated over every tick so far.
  double total_wt_sum() const noexcept { return total_wt_sum_; }
  double total_inbound_count() const noexcept { return total_inbound_; }

  std::vector<TraversalSample> take_traversals();

  /// Smallest bumper gap between consecutive vehicles sharing a lane or the
  /// ring. +inf when no such pair exists.
  double min_bumper_gap() const;

  /// Hash of the complete state, including pending demand and random streams.
  std::uint64_t checksum() const;

 private:
  void admit_pending();
  void advance();
  double noise(VehicleId id) const noexcept;

  WorldConfig config_;
  RoundaboutNetwork network_;
  std::uint64_t seed_;
  Rng demand_rng_;
  double clock_origin_ = 0.0;
  double clock_ = 0.0;
  std::uint64_t ticks_ = 0;
  VehicleId next_id_ = 1;
  std::vector<Vehicle> vehicles_;
  std::array<std::deque<Vehicle>, 4> pending_;
  std::uint64_t spawned_total_ = 0;
  std::uint64_t exited_total_ = 0;
  WaitingSample last_sample_{};
  double total_wt_sum_ = 0.0;
  double total_inbound_ = 0.0;
  std::vector<TraversalSample> traversals_;
};

/// Sum of waiting times over the vehicles currently on an inbound lane.
double lane_wt(const World& world, LaneId lane);

/// Sends a yield/wait signal to a connected vehicle. Throws ControlError for
/// unknown ids and for human-driven (unconnected) vehicles.
void apply_control(World& world, VehicleId id, Signal signal);

}  // namespace rbtwin::traffic
