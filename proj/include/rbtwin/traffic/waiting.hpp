#pragma once

#include <limits>
#include <span>

#include "rbtwin/repository.hpp"
#include "rbtwin/traffic/world.hpp"

namespace rbtwin::traffic {

/// Average accumulated waiting time of inbound vehicles over sampled ticks:
/// the per-tick waiting sums divided by the per-tick vehicle counts, each
/// summed over the window. `no_traffic` is set (and value is 0) when the
/// window holds no inbound vehicle observation.
struct WaitingAverage {
  double value = 0.0;
  bool no_traffic = true;
};

WaitingAverage avg_waiting(std::span<const WaitingSample> window);

/// Same quantity computed from the "tick" traffic records of a repository
/// whose timestamps lie in (t_from, t_to].
WaitingAverage avg_waiting(const Repository& repo, double t_from = -std::numeric_limits<double>::infinity(),
                           double t_to = std::numeric_limits<double>::infinity());

/// Payload written for each simulated tick; `avg_waiting` reads it back.
Payload tick_payload(const World& world);

}  // namespace rbtwin::traffic
