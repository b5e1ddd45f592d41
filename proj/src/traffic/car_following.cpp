#include "rbtwin/traffic/car_following.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rbtwin/common.hpp"

namespace rbtwin::traffic {

namespace {
// Adaptive cruise control gains (free-speed, spacing and relative-speed terms).
constexpr double kSpeedGain = 0.4;
constexpr double kSpaceGain = 0.23;
constexpr double kClosingGain = 0.8;

double effective_gap(const CarFollowingParams& p, const Leader& l) {
  return l.is_vehicle ? l.gap - p.min_gap : l.gap;
}
}  // namespace

void CarFollowingParams::validate() const {
  if (!(v_max > 0) || !(accel > 0) || !(decel > 0) || !(min_gap > 0) || !(headway > 0) || !(reaction > 0))
    throw DomainError("car-following parameters must be strictly positive");
  if (decel < accel) throw DomainError("car-following parameters: decel must be >= accel");
  if (imperfection < 0.0 || imperfection > 1.0) throw DomainError("car-following imperfection must lie in [0, 1]");
}

CarFollowingParams default_hv_params() {
  CarFollowingParams p;
  p.headway = 1.0;
  p.reaction = 1.0;
  p.imperfection = 0.5;
  return p;
}

CarFollowingParams default_av_params() {
  CarFollowingParams p;
  p.headway = 0.9;
  p.reaction = 0.5;
  p.imperfection = 0.0;
  return p;
}

double hv_next_speed(const CarFollowingParams& p, double speed, double desired, const std::optional<Leader>& leader,
                     double dt, double noise) {
  double v = std::min(speed + p.accel * dt, desired);
  if (leader) {
    const double g = effective_gap(p, *leader);
    const double vl = leader->speed;
    const double tau = p.reaction;
    const double v_safe = vl + (g - vl * tau) / ((speed + vl) / (2.0 * p.decel) + tau);
    v = std::min(v, std::max(0.0, v_safe));
  }
  v -= p.imperfection * p.accel * dt * noise;
  return std::max(0.0, v);
}

double av_next_speed(const CarFollowingParams& p, double speed, double desired, const std::optional<Leader>& leader,
                     double dt) {
  double a = kSpeedGain * (desired - speed);
  if (leader) {
    const double g = effective_gap(p, *leader);
    const double a_gap = kSpaceGain * (g - p.headway * speed) + kClosingGain * (leader->speed - speed);
    a = std::min(a, a_gap);
  }
  a = std::clamp(a, -p.decel, p.accel);
  return std::clamp(speed + a * dt, 0.0, std::max(0.0, desired));
}

double collision_free_cap(const std::optional<Leader>& leader, double dt) {
  if (!leader) return std::numeric_limits<double>::infinity();
  return std::max(0.0, leader->gap) / dt;
}

}  // namespace rbtwin::traffic
