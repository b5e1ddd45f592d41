#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rbtwin/traffic/network.hpp"

namespace rbtwin::decision {

using traffic::LaneId;

enum class StrategyKind : std::uint8_t { AllLanes, OpposingPair, ExcludeLeast };

std::string_view to_string(StrategyKind k) noexcept;
std::optional<StrategyKind> parse_strategy_kind(std::string_view s) noexcept;

/// Set of inbound lanes whose connected vehicles may enter the ring.
class Strategy {
 public:
  Strategy(StrategyKind kind, std::array<bool, 4> lanes) : kind_(kind), lanes_(lanes) {}

  StrategyKind kind() const noexcept { return kind_; }
  bool contains(LaneId lane) const noexcept {
    return traffic::is_inbound(lane) && lanes_[static_cast<std::size_t>(lane)];
  }
  std::vector<LaneId> lanes() const;
  std::size_t size() const noexcept;

  friend bool operator==(const Strategy&, const Strategy&) = default;

 private:
  StrategyKind kind_;
  std::array<bool, 4> lanes_;
};

/// Accumulated waiting time per inbound lane, indexed N, S, E, W.
using LaneWaits = std::array<double, 4>;

/// H: every inbound lane.
Strategy all_lanes();
/// Lane with the largest waiting time; ties resolve to the earliest of N, S, E, W.
LaneId compute_y1(const LaneWaits& wts);
/// The y1 lane and its opposite: {N_in, S_in} or {E_in, W_in}.
Strategy build_y2(LaneId y1);
/// H without the lane of least waiting time (same tie order).
Strategy build_y3(const LaneWaits& wts);

}  // namespace rbtwin::decision
