#pragma once

#include "rbtwin/traffic/world.hpp"

namespace test {

using namespace rbtwin::traffic;

inline WorldConfig quiet_config() {
  WorldConfig c;
  c.demand.vol_total = 0.0;
  return c;
}

inline WorldConfig busy_config(double vol, double r_av, std::uint64_t seed) {
  WorldConfig c;
  c.demand.vol_total = vol;
  c.demand.r_av = r_av;
  c.demand.seed = seed;
  return c;
}

inline Vehicle make(VehicleClass cls, LaneId lane, double offset, double speed = 0.0, Approach exit = Approach::South) {
  Vehicle v;
  v.cls = cls;
  v.lane = lane;
  v.entry = approach_of(lane);
  v.exit = exit;
  v.offset = offset;
  v.speed = speed;
  return v;
}

}  // namespace test
