#include "rbtwin/dt/mirror.hpp"

#include <algorithm>
#include <cmath>

namespace rbtwin::dt {

using traffic::LaneId;

void MirrorConfig::validate() const {
  if (!(expiry > 0.0)) throw DomainError("mirror: expiry must be positive");
  if (!(match_tolerance >= 0.0)) throw DomainError("mirror: match_tolerance must be >= 0");
}

Mirror::Mirror(traffic::WorldConfig world_config, MirrorConfig config)
    : config_(config), world_([&] {
        // The mirror only reflects what it is told.
        world_config.demand.vol_total = 0.0;
        return world_config;
      }()) {
  config_.validate();
}

const VirtualObject* Mirror::by_track(std::uint64_t track_id) const noexcept {
  for (const auto& vo : objects_)
    if (vo.bound_track == track_id) return &vo;
  return nullptr;
}

traffic::Vehicle Mirror::make_vehicle(const Detection& d) const {
  // Observed tracks carry no route. Draw one from the turning matrix with a
  // hash of the track id so the mirror stays deterministic.
  const auto& turning = world_.config().demand.turning;
  const std::uint64_t h = splitmix64(d.track_id);
  traffic::Vehicle v;
  v.lane = d.lane;
  v.offset = d.offset;
  v.speed = d.speed;
  v.spawn_time = d.timestamp;
  if (traffic::is_outbound(d.lane)) {
    v.exit = traffic::approach_of(d.lane);
    v.entry = traffic::kApproaches[(traffic::index_of(v.exit) + 1 + h % 3) % 4];
    return v;
  }
  v.entry = traffic::is_inbound(d.lane) ? traffic::approach_of(d.lane) : traffic::kApproaches[h % 4];
  const auto& row = turning[traffic::index_of(v.entry)];
  double u = unit_from_bits(splitmix64(h));
  std::size_t exit = 3;
  for (std::size_t j = 0; j < 4; ++j) {
    if (u < row[j]) {
      exit = j;
      break;
    }
    u -= row[j];
  }
  v.exit = traffic::kApproaches[exit];
  if (d.lane == LaneId::Ring) {
    const auto& net = world_.network();
    v.ring_remaining = net.ring_distance(net.wrap(d.offset), net.exit_position(v.exit));
  }
  return v;
}

void Mirror::apply(const Detection& d) {
  if (d.offset < 0.0 || (d.lane != LaneId::Ring && d.offset > world_.network().lane_length(d.lane)) ||
      !std::isfinite(d.offset) || !(d.speed >= 0.0)) {
    ++stats_.invalid;
    return;
  }
  auto it = std::find_if(objects_.begin(), objects_.end(), [&](const auto& vo) { return vo.bound_track == d.track_id; });
  if (it != objects_.end() && d.timestamp <= it->last_update) {
    ++stats_.out_of_order;
    return;
  }
  if (d.timestamp > world_.clock()) world_.set_clock(d.timestamp);
  ++stats_.accepted;
  if (it == objects_.end()) {
    const auto id = world_.place(make_vehicle(d));
    objects_.push_back({next_vo_++, d.track_id, id, std::nullopt, d.timestamp, d.timestamp});
    ++stats_.created;
    return;
  }
  it->last_update = d.timestamp;
  auto* v = world_.find(it->vehicle);
  const auto& net = world_.network();
  if (d.lane != v->lane) {
    if (traffic::is_outbound(d.lane)) v->exit = traffic::approach_of(d.lane);
    if (d.lane == LaneId::Ring) v->ring_remaining = net.ring_distance(net.wrap(d.offset), net.exit_position(v->exit));
    v->lane = d.lane;
  }
  v->offset = d.lane == LaneId::Ring ? net.wrap(d.offset) : d.offset;
  v->speed = d.speed;
}

void Mirror::expire() {
  const double now = world_.clock();
  std::erase_if(objects_, [&](const VirtualObject& vo) {
    if (now - vo.last_update <= config_.expiry) return false;
    world_.remove(vo.vehicle);
    ++stats_.expired;
    return true;
  });
}

void Mirror::ingest(std::span<const Detection> detections) {
  for (const auto& d : detections) apply(d);
  expire();
}

void Mirror::advance_to(double t) {
  if (t > world_.clock()) world_.set_clock(t);
  expire();
}

MatchResult Mirror::match_cav(const CavRegistration& r) {
  for (const auto& vo : objects_)
    if (vo.cav_binding == r.cav_id) return {MatchStatus::Bound, vo.vo_id, vo.vehicle};
  if (std::abs(r.timestamp - world_.clock()) > config_.expiry) return {MatchStatus::Stale, {}, {}};
  VirtualObject* best = nullptr;
  double best_dist = 0.0;
  for (auto& vo : objects_) {
    if (vo.cav_binding) continue;
    const auto* v = world_.find(vo.vehicle);
    if (!v || v->lane != r.lane) continue;
    const double dist = std::abs(v->offset - r.offset);
    if (dist > config_.match_tolerance) continue;
    const bool better = !best || dist < best_dist ||
                        (dist == best_dist && (vo.first_seen < best->first_seen ||
                                               (vo.first_seen == best->first_seen && vo.bound_track < best->bound_track)));
    if (better) {
      best = &vo;
      best_dist = dist;
    }
  }
  if (!best) return {MatchStatus::Unmatched, {}, {}};
  best->cav_binding = r.cav_id;
  world_.find(best->vehicle)->cls = traffic::VehicleClass::AV;
  return {MatchStatus::Bound, best->vo_id, best->vehicle};
}

std::vector<Detection> Mirror::observe() const {
  std::vector<Detection> out;
  for (const auto& vo : objects_) {
    if (vo.last_update != world_.clock()) continue;
    const auto* v = world_.find(vo.vehicle);
    out.push_back({vo.last_update, vo.bound_track, Category::Car, v->lane, v->offset, v->speed});
  }
  return out;
}

Mirror& ingest(std::span<const Detection> detections, Mirror& mirror) {
  mirror.ingest(detections);
  return mirror;
}

}  // namespace rbtwin::dt
