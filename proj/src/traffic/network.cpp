#include "rbtwin/traffic/network.hpp"

#include <cmath>

#include "rbtwin/common.hpp"

namespace rbtwin::traffic {

namespace {
constexpr std::array<std::string_view, 4> kApproachNames{"N", "S", "E", "W"};
constexpr std::array<std::string_view, 9> kLaneNames{"N_in",  "S_in",  "E_in",  "W_in", "N_out",
                                                     "S_out", "E_out", "W_out", "ring"};
// Position of each entry as a fraction of the circumference, indexed N,S,E,W.
constexpr std::array<double, 4> kEntryFraction{0.0, 0.5, 0.75, 0.25};
}  // namespace

std::string_view to_string(Approach a) noexcept { return kApproachNames[index_of(a)]; }
std::string_view to_string(LaneId l) noexcept { return kLaneNames[static_cast<std::size_t>(l)]; }

std::optional<Approach> parse_approach(std::string_view s) noexcept {
  for (Approach a : kApproaches)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

std::optional<LaneId> parse_lane(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kLaneNames.size(); ++i)
    if (kLaneNames[i] == s) return static_cast<LaneId>(i);
  return std::nullopt;
}

RoundaboutNetwork::RoundaboutNetwork(Geometry g) : geometry_(g) {
  if (!(g.inbound_length > 0.0) || !(g.ring_circumference > 0.0) || !(g.outbound_length > 0.0) ||
      !(g.ring_speed > 0.0))
    throw DomainError("roundabout geometry: all lengths and the ring speed must be positive");
  for (Approach a : kApproaches) {
    approaches_[index_of(a)] = {a, inbound_lane(a), outbound_lane(a)};
    entry_[index_of(a)] = kEntryFraction[index_of(a)] * g.ring_circumference;
  }
}

double RoundaboutNetwork::wrap(double pos) const noexcept {
  const double c = geometry_.ring_circumference;
  double r = std::fmod(pos, c);
  if (r < 0.0) r += c;
  return r >= c ? 0.0 : r;
}

double RoundaboutNetwork::ring_distance(double from, double to) const noexcept { return wrap(to - from); }

double RoundaboutNetwork::ring_travel(Approach entry, Approach exit) const noexcept {
  const double d = ring_distance(entry_position(entry), exit_position(exit));
  return d > 0.0 ? d : geometry_.ring_circumference;
}

double RoundaboutNetwork::lane_length(LaneId lane) const noexcept {
  if (lane == LaneId::Ring) return geometry_.ring_circumference;
  return is_inbound(lane) ? geometry_.inbound_length : geometry_.outbound_length;
}

}  // namespace rbtwin::traffic
