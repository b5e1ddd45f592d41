#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rbtwin/common.hpp"
#include "rbtwin/traffic/vehicle.hpp"

namespace rbtwin::traffic {

/// Row-stochastic exit distribution per entry approach, indexed [entry][exit]
/// in N, S, E, W order.
using TurningMatrix = std::array<std::array<double, 4>, 4>;

TurningMatrix default_turning_matrix();

struct DemandConfig {
  /// Total arrivals per hour over all four approaches.
  double vol_total = 1000.0;
  /// Share of arrivals that are connected AVs.
  double r_av = 0.0;
  TurningMatrix turning = default_turning_matrix();
  std::uint64_t seed = 1;

  /// Throws DomainError on a negative volume, r_av outside [0, 1], or a turning
  /// row that does not sum to one.
  void validate() const;

  friend bool operator==(const DemandConfig&, const DemandConfig&) = default;
};

/// Human-driven share of a demand volume: vol_total - vol_total * r_av.
double hv_volume(double vol_total, double r_av);

/// Draws the arrivals of one interval [t, t + dt). Each approach receives a
/// Poisson stream at vol_total / 4 per hour. Returned vehicles sit at the
/// upstream end of their inbound lane with ids taken from `next_id`.
std::vector<Vehicle> spawn_demand(const DemandConfig& config, double t, double dt, Rng& rng, VehicleId& next_id);

}  // namespace rbtwin::traffic
