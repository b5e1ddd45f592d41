#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "rbtwin/traffic/network.hpp"

namespace rbtwin::traffic {

enum class VehicleClass : std::uint8_t { HV, AV };

/// Entry permission state. Only connected vehicles (AVs) leave Free.
enum class Control : std::uint8_t { Free, Yield, Wait };

std::string_view to_string(VehicleClass c) noexcept;
std::string_view to_string(Control c) noexcept;

using VehicleId = std::uint64_t;

struct Vehicle {
  VehicleId id = 0;
  VehicleClass cls = VehicleClass::HV;
  Approach entry = Approach::North;
  Approach exit = Approach::North;
  LaneId lane = LaneId::NorthIn;
  /// Front-bumper position along the current lane (ring: position on the ring).
  double offset = 0.0;
  double speed = 0.0;
  /// Cumulative time spent below the stationary threshold.
  double waiting_time = 0.0;
  Control control = Control::Free;
  double spawn_time = 0.0;
  double length = 5.0;
  /// Ring distance left before the exit point (meaningful on the ring only).
  double ring_remaining = 0.0;
  /// Time the front crossed into the final traversal zone of the inbound lane.
  std::optional<double> zone_entry_time;
  /// How long a stopped human driver has been free to move off without doing so.
  double start_delay = 0.0;

  bool connected() const noexcept { return cls == VehicleClass::AV; }
  double rear() const noexcept { return offset - length; }

  friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

}  // namespace rbtwin::traffic
