#pragma once

#include <optional>

namespace rbtwin::traffic {

struct CarFollowingParams {
  double v_max = 13.89;
  double accel = 2.6;
  double decel = 4.5;
  double min_gap = 2.5;
  /// Desired time gap of the constant-time-gap follower (AV).
  double headway = 0.9;
  /// Driver reaction time of the bounded-acceleration follower (HV).
  double reaction = 1.0;
  /// Random speed reduction factor in [0, 1] (HV driver imperfection).
  double imperfection = 0.0;

  /// Throws DomainError unless all fields are positive and decel >= accel.
  void validate() const;

  friend bool operator==(const CarFollowingParams&, const CarFollowingParams&) = default;
};

CarFollowingParams default_hv_params();
CarFollowingParams default_av_params();

/// What lies ahead of a vehicle. `gap` is measured from the front bumper to
/// the leader's rear bumper (or to a stop line when `is_vehicle` is false).
struct Leader {
  double gap = 0.0;
  double speed = 0.0;
  bool is_vehicle = true;
};

/// Bounded-acceleration safe-speed follower with reaction delay (Krauss
/// family). `noise` in [0, 1) scales the imperfection slowdown.
double hv_next_speed(const CarFollowingParams& p, double speed, double desired, const std::optional<Leader>& leader,
                     double dt, double noise);

/// Constant-time-gap follower standing in for adaptive cruise control.
double av_next_speed(const CarFollowingParams& p, double speed, double desired, const std::optional<Leader>& leader,
                     double dt);

/// Upper bound on the next speed that keeps the bumper gap non-negative when
/// every leader holds or advances its position.
double collision_free_cap(const std::optional<Leader>& leader, double dt);

}  // namespace rbtwin::traffic
