#include "rbtwin/decision/strategy.hpp"

#include "rbtwin/common.hpp"

namespace rbtwin::decision {

namespace {
constexpr std::array<std::string_view, 3> kKindNames{"H", "y2", "y3"};
}

std::string_view to_string(StrategyKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<StrategyKind> parse_strategy_kind(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<StrategyKind>(i);
  return std::nullopt;
}

std::vector<LaneId> Strategy::lanes() const {
  std::vector<LaneId> out;
  for (LaneId l : traffic::kInboundLanes)
    if (contains(l)) out.push_back(l);
  return out;
}

std::size_t Strategy::size() const noexcept {
  std::size_t n = 0;
  for (bool b : lanes_) n += b ? 1 : 0;
  return n;
}

Strategy all_lanes() { return Strategy(StrategyKind::AllLanes, {true, true, true, true}); }

LaneId compute_y1(const LaneWaits& wts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < wts.size(); ++i)
    if (wts[i] > wts[best]) best = i;
  return traffic::kInboundLanes[best];
}

Strategy build_y2(LaneId y1) {
  if (!traffic::is_inbound(y1)) throw DomainError("build_y2: y1 must be an inbound lane");
  if (y1 == LaneId::NorthIn || y1 == LaneId::SouthIn)
    return Strategy(StrategyKind::OpposingPair, {true, true, false, false});
  return Strategy(StrategyKind::OpposingPair, {false, false, true, true});
}

Strategy build_y3(const LaneWaits& wts) {
  std::size_t least = 0;
  for (std::size_t i = 1; i < wts.size(); ++i)
    if (wts[i] < wts[least]) least = i;
  std::array<bool, 4> lanes{true, true, true, true};
  lanes[least] = false;
  return Strategy(StrategyKind::ExcludeLeast, lanes);
}

}  // namespace rbtwin::decision
