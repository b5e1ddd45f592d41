#include "rbtwin/traffic/demand.hpp"

#include <cmath>
#include <numeric>

namespace rbtwin::traffic {

TurningMatrix default_turning_matrix() {
  // Rows: N, S, E, W entries. Columns: N, S, E, W exits. No U-turns.
  // Every leg: 10% right, 40% through, 50% left.
  return {{
      {0.00, 0.40, 0.50, 0.10},
      {0.40, 0.00, 0.10, 0.50},
      {0.10, 0.50, 0.00, 0.40},
      {0.50, 0.10, 0.40, 0.00},
  }};
}

void DemandConfig::validate() const {
  if (!(vol_total >= 0.0) || !std::isfinite(vol_total)) throw DomainError("demand: vol_total must be >= 0");
  if (!(r_av >= 0.0 && r_av <= 1.0)) throw DomainError("demand: r_av must lie in [0, 1]");
  for (const auto& row : turning) {
    for (double p : row)
      if (!(p >= 0.0)) throw DomainError("demand: turning probabilities must be non-negative");
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("demand: turning probabilities must sum to 1 per approach");
  }
}

double hv_volume(double vol_total, double r_av) {
  if (!(r_av >= 0.0 && r_av <= 1.0)) throw DomainError("hv_volume: r_av must lie in [0, 1]");
  if (!(vol_total >= 0.0)) throw DomainError("hv_volume: vol_total must be >= 0");
  return vol_total - vol_total * r_av;
}

std::vector<Vehicle> spawn_demand(const DemandConfig& config, double t, double dt, Rng& rng, VehicleId& next_id) {
  if (!(dt > 0.0)) throw DomainError("spawn_demand: dt must be positive");
  std::vector<Vehicle> out;
  const double mean = config.vol_total / 4.0 / 3600.0 * dt;
  for (Approach a : kApproaches) {
    const int n = rng.poisson(mean);
    for (int k = 0; k < n; ++k) {
      Vehicle v;
      v.id = next_id++;
      v.cls = rng.bernoulli(config.r_av) ? VehicleClass::AV : VehicleClass::HV;
      v.entry = a;
      v.exit = kApproaches[rng.categorical(config.turning[index_of(a)])];
      v.lane = inbound_lane(a);
      v.spawn_time = t;
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace rbtwin::traffic
