#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rbtwin::traffic {

enum class Approach : std::uint8_t { North = 0, South = 1, East = 2, West = 3 };

/// Fixed approach order. Also the tie-break order for lane rankings.
inline constexpr std::array<Approach, 4> kApproaches{Approach::North, Approach::South, Approach::East,
                                                     Approach::West};

enum class LaneId : std::uint8_t {
  NorthIn,
  SouthIn,
  EastIn,
  WestIn,
  NorthOut,
  SouthOut,
  EastOut,
  WestOut,
  Ring,
};

/// The four inbound lanes, in tie-break order.
inline constexpr std::array<LaneId, 4> kInboundLanes{LaneId::NorthIn, LaneId::SouthIn, LaneId::EastIn,
                                                     LaneId::WestIn};

constexpr std::size_t index_of(Approach a) noexcept { return static_cast<std::size_t>(a); }
constexpr LaneId inbound_lane(Approach a) noexcept { return static_cast<LaneId>(index_of(a)); }
constexpr LaneId outbound_lane(Approach a) noexcept { return static_cast<LaneId>(index_of(a) + 4); }
constexpr bool is_inbound(LaneId l) noexcept { return static_cast<std::uint8_t>(l) < 4; }
constexpr bool is_outbound(LaneId l) noexcept {
  return static_cast<std::uint8_t>(l) >= 4 && l != LaneId::Ring;
}
/// Approach owning an inbound or outbound lane. Undefined for the ring.
constexpr Approach approach_of(LaneId l) noexcept {
  return static_cast<Approach>(static_cast<std::uint8_t>(l) % 4);
}

std::string_view to_string(Approach a) noexcept;
std::string_view to_string(LaneId l) noexcept;
std::optional<Approach> parse_approach(std::string_view s) noexcept;
std::optional<LaneId> parse_lane(std::string_view s) noexcept;

struct ApproachLanes {
  Approach id;
  LaneId inbound;
  LaneId outbound;
};

struct Geometry {
  double inbound_length = 150.0;
  double ring_circumference = 100.0;
  double outbound_length = 100.0;
  /// Speed limit on the circulating lane (m/s).
  double ring_speed = 4.75;

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Single-lane four-leg roundabout. Ring positions increase in the direction of
/// circulation (N -> W -> S -> E for right-hand traffic) and wrap modulo the
/// circumference. An approach's exit point coincides with its entry point.
class RoundaboutNetwork {
 public:
  explicit RoundaboutNetwork(Geometry g = {});

  const Geometry& geometry() const noexcept { return geometry_; }
  const std::array<ApproachLanes, 4>& approaches() const noexcept { return approaches_; }

  double circumference() const noexcept { return geometry_.ring_circumference; }
  double entry_position(Approach a) const noexcept { return entry_[index_of(a)]; }
  double exit_position(Approach a) const noexcept { return entry_[index_of(a)]; }

  /// Forward distance along the ring from `from` to `to`, in [0, C).
  double ring_distance(double from, double to) const noexcept;
  /// Ring distance driven from entering at `entry` to leaving at `exit`; a
  /// U-turn covers the full circle.
  double ring_travel(Approach entry, Approach exit) const noexcept;
  double lane_length(LaneId lane) const noexcept;
  double wrap(double pos) const noexcept;

 private:
  Geometry geometry_;
  std::array<ApproachLanes, 4> approaches_{};
  std::array<double, 4> entry_{};
};

}  // namespace rbtwin::traffic
