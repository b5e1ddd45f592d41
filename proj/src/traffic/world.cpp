#include "rbtwin/traffic/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rbtwin::traffic {

std::string_view to_string(VehicleClass c) noexcept { return c == VehicleClass::AV ? "AV" : "HV"; }

std::string_view to_string(Control c) noexcept {
  switch (c) {
    case Control::Free: return "free";
    case Control::Yield: return "yield";
    case Control::Wait: return "wait";
  }
  return "?";
}

void WorldConfig::validate() const {
  RoundaboutNetwork check(geometry);
  hv.validate();
  av.validate();
  demand.validate();
  if (!(dt > 0.0)) throw DomainError("world: dt must be positive");
  if (!(v_stat > 0.0)) throw DomainError("world: v_stat must be positive");
  if (!(decision_distance > 0.0)) throw DomainError("world: decision_distance must be positive");
  if (!(traversal_zone > 0.0) || traversal_zone > geometry.inbound_length)
    throw DomainError("world: traversal_zone must lie in (0, inbound_length]");
  // A vehicle merging behind a ring vehicle that just cleared the accepted gap
  // must not overlap it after one tick.
  constexpr double kVehicleLength = 5.0;
  if (!(gap_accept >= geometry.ring_speed * dt + kVehicleLength))
    throw DomainError("world: gap_accept must be >= ring_speed * dt + vehicle length");
}

World::World(WorldConfig config)
    : config_(std::move(config)), network_(config_.geometry), seed_(config_.demand.seed), demand_rng_(seed_) {
  config_.validate();
}

const Vehicle* World::find(VehicleId id) const noexcept {
  auto it = std::find_if(vehicles_.begin(), vehicles_.end(), [id](const Vehicle& v) { return v.id == id; });
  return it == vehicles_.end() ? nullptr : &*it;
}

Vehicle* World::find(VehicleId id) noexcept {
  return const_cast<Vehicle*>(static_cast<const World&>(*this).find(id));
}

std::size_t World::pending_total() const noexcept {
  std::size_t n = 0;
  for (const auto& q : pending_) n += q.size();
  return n;
}

VehicleId World::place(Vehicle v) {
  if (v.id == 0) v.id = next_id_++;
  else next_id_ = std::max(next_id_, v.id + 1);
  if (find(v.id)) throw DomainError("world: duplicate vehicle id");
  if (v.lane == LaneId::Ring) {
    v.offset = network_.wrap(v.offset);
  } else if (v.offset < 0.0 || v.offset > network_.lane_length(v.lane)) {
    throw DomainError("world: offset outside lane");
  }
  const auto& p = params(v.cls);
  v.speed = std::clamp(v.speed, 0.0, p.v_max);
  if (v.cls == VehicleClass::HV) v.control = Control::Free;
  if (is_inbound(v.lane) && !v.zone_entry_time && v.offset >= config_.geometry.inbound_length - config_.traversal_zone)
    v.zone_entry_time = clock_;
  vehicles_.push_back(v);
  return v.id;
}

bool World::remove(VehicleId id) {
  auto n = std::erase_if(vehicles_, [id](const Vehicle& v) { return v.id == id; });
  return n > 0;
}

void World::set_clock(double t) {
  clock_origin_ = t;
  clock_ = t;
  ticks_ = 0;
}

void World::reseed(std::uint64_t seed) {
  seed_ = seed;
  demand_rng_ = Rng(seed);
  config_.demand.seed = seed;
}

void World::set_demand(const DemandConfig& demand) {
  demand.validate();
  config_.demand = demand;
  reseed(demand.seed);
}

void World::apply_control(VehicleId id, Signal signal) {
  Vehicle* v = find(id);
  if (!v) throw ControlError("apply_control: unknown vehicle id " + std::to_string(id));
  if (!v->connected()) throw ControlError("apply_control: vehicle " + std::to_string(id) + " is not connected");
  v->control = signal == Signal::Wait ? Control::Wait : Control::Yield;
}

void World::run_for(double seconds) {
  const auto n = static_cast<std::uint64_t>(std::llround(seconds / config_.dt));
  for (std::uint64_t i = 0; i < n; ++i) step();
}

std::vector<TraversalSample> World::take_traversals() {
  std::vector<TraversalSample> out;
  out.swap(traversals_);
  return out;
}

double World::noise(VehicleId id) const noexcept {
  return unit_from_bits(mix_seed(mix_seed(seed_, id), ticks_));
}

void World::step() {
  if (config_.demand.vol_total > 0.0) {
    for (Vehicle& v : spawn_demand(config_.demand, clock_, config_.dt, demand_rng_, next_id_))
      pending_[index_of(v.entry)].push_back(v);
  }
  admit_pending();
  advance();
  ++ticks_;
  clock_ = clock_origin_ + static_cast<double>(ticks_) * config_.dt;

  WaitingSample s{clock_, 0.0, 0};
  for (const Vehicle& v : vehicles_) {
    if (!is_inbound(v.lane)) continue;
    s.wt_sum += v.waiting_time;
    ++s.n_inbound;
  }
  last_sample_ = s;
  total_wt_sum_ += s.wt_sum;
  total_inbound_ += static_cast<double>(s.n_inbound);
}

void World::admit_pending() {
  for (Approach a : kApproaches) {
    auto& queue = pending_[index_of(a)];
    if (queue.empty()) continue;
    const LaneId lane = inbound_lane(a);
    const Vehicle* last = nullptr;
    for (const Vehicle& v : vehicles_)
      if (v.lane == lane && (!last || v.offset < last->offset)) last = &v;

    Vehicle v = queue.front();
    const auto& p = params(v.cls);
    v.offset = v.length;
    if (last && last->rear() - v.offset < p.min_gap) continue;
    v.speed = last ? std::min(p.v_max, last->speed) : p.v_max;
    v.spawn_time = clock_;
    queue.pop_front();
    ++spawned_total_;
    if (v.offset >= config_.geometry.inbound_length - config_.traversal_zone) v.zone_entry_time = clock_;
    vehicles_.push_back(v);
  }
}

void World::advance() {
  const double dt = config_.dt;
  const Geometry& g = config_.geometry;
  const std::size_t n = vehicles_.size();

  std::array<std::vector<std::size_t>, 9> by_lane;
  for (std::size_t i = 0; i < n; ++i) by_lane[static_cast<std::size_t>(vehicles_[i].lane)].push_back(i);
  for (auto& idx : by_lane)
    std::sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
      return vehicles_[a].offset > vehicles_[b].offset ||
             (vehicles_[a].offset == vehicles_[b].offset && vehicles_[a].id < vehicles_[b].id);
    });
  // Ring in ascending position so that the vehicle ahead is the next index.
  auto& ring = by_lane[static_cast<std::size_t>(LaneId::Ring)];
  std::reverse(ring.begin(), ring.end());

  auto ring_clear_upstream = [&](double entry) {
    for (std::size_t i : ring)
      if (network_.ring_distance(vehicles_[i].offset, entry) <= config_.gap_accept) return false;
    return true;
  };
  auto ring_leader_downstream = [&](double entry, double extra) -> std::optional<Leader> {
    std::optional<Leader> best;
    for (std::size_t i : ring) {
      const Vehicle& r = vehicles_[i];
      const double gap = extra + network_.ring_distance(entry, r.offset) - r.length;
      if (!best || gap < best->gap) best = Leader{gap, r.speed, true};
    }
    return best;
  };
  auto last_on = [&](LaneId lane) -> const Vehicle* {
    const auto& idx = by_lane[static_cast<std::size_t>(lane)];
    return idx.empty() ? nullptr : &vehicles_[idx.back()];
  };

  std::vector<double> next(n, 0.0);
  std::vector<double> start_delay(n, 0.0);
  auto follow = [&](std::size_t i, double desired, const std::optional<Leader>& leader) {
    const Vehicle& v = vehicles_[i];
    const auto& p = params(v.cls);
    double s = v.cls == VehicleClass::AV ? av_next_speed(p, v.speed, desired, leader, dt)
                                         : hv_next_speed(p, v.speed, desired, leader, dt, noise(v.id));
    next[i] = std::min(s, collision_free_cap(leader, dt));
    // A stopped human driver moves off only after being free to do so for the
    // reaction time.
    if (v.cls == VehicleClass::HV && v.speed < config_.v_stat && next[i] > 0.0 &&
        v.start_delay < p.reaction - 1e-9) {
      next[i] = 0.0;
      start_delay[i] = v.start_delay + dt;
    }
  };

  for (Approach a : kApproaches) {
    const auto& idx = by_lane[static_cast<std::size_t>(inbound_lane(a))];
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const Vehicle& v = vehicles_[idx[r]];
      const auto& p = params(v.cls);
      const double to_line = g.inbound_length - v.offset;
      const double approach_limit = std::sqrt(g.ring_speed * g.ring_speed + p.decel * std::max(0.0, to_line));
      const double desired = std::min(p.v_max, approach_limit);
      std::optional<Leader> leader;
      if (r > 0) {
        const Vehicle& ahead = vehicles_[idx[r - 1]];
        leader = Leader{ahead.rear() - v.offset, ahead.speed, true};
      } else {
        const double entry = network_.entry_position(a);
        const bool may_enter = v.control != Control::Wait && to_line <= config_.decision_distance &&
                               ring_clear_upstream(entry);
        leader = may_enter ? ring_leader_downstream(entry, to_line) : Leader{to_line, 0.0, false};
      }
      follow(idx[r], desired, leader);
    }
  }

  for (std::size_t r = 0; r < ring.size(); ++r) {
    const Vehicle& v = vehicles_[ring[r]];
    std::optional<Leader> leader;
    if (ring.size() > 1) {
      const Vehicle& ahead = vehicles_[ring[(r + 1) % ring.size()]];
      const double gap = network_.ring_distance(v.offset, ahead.offset) - ahead.length;
      if (gap < v.ring_remaining) leader = Leader{gap, ahead.speed, true};
    }
    if (const Vehicle* out = last_on(outbound_lane(v.exit))) {
      const double gap = v.ring_remaining + out->rear();
      if (!leader || gap < leader->gap) leader = Leader{gap, out->speed, true};
    }
    follow(ring[r], std::min(params(v.cls).v_max, g.ring_speed), leader);
  }

  for (Approach a : kApproaches) {
    const auto& idx = by_lane[static_cast<std::size_t>(outbound_lane(a))];
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const Vehicle& v = vehicles_[idx[r]];
      std::optional<Leader> leader;
      if (r > 0) leader = Leader{vehicles_[idx[r - 1]].rear() - v.offset, vehicles_[idx[r - 1]].speed, true};
      follow(idx[r], params(v.cls).v_max, leader);
    }
  }

  const double zone_start = g.inbound_length - config_.traversal_zone;
  std::vector<VehicleId> exited;
  for (std::size_t i = 0; i < n; ++i) {
    Vehicle& v = vehicles_[i];
    const double speed = next[i];
    const double disp = speed * dt;
    v.speed = speed;
    v.start_delay = start_delay[i];
    if (speed < config_.v_stat) v.waiting_time += dt;

    if (is_inbound(v.lane)) {
      const double from = v.offset;
      const double to = from + disp;
      auto crossing_time = [&](double mark) {
        const double frac = disp > 0.0 ? std::clamp((mark - from) / disp, 0.0, 1.0) : 0.0;
        return clock_ + frac * dt;
      };
      if (!v.zone_entry_time && to >= zone_start) v.zone_entry_time = crossing_time(zone_start);
      if (to > g.inbound_length) {
        const double t_line = crossing_time(g.inbound_length);
        traversals_.push_back({t_line, t_line - v.zone_entry_time.value_or(t_line), v.id});
        const double overshoot = to - g.inbound_length;
        v.lane = LaneId::Ring;
        v.offset = network_.wrap(network_.entry_position(v.entry) + overshoot);
        v.ring_remaining = network_.ring_travel(v.entry, v.exit) - overshoot;
      } else {
        v.offset = to;
        continue;
      }
      if (v.ring_remaining > 0.0) continue;
      v.lane = outbound_lane(v.exit);
      v.offset = -v.ring_remaining;
    } else if (v.lane == LaneId::Ring) {
      v.ring_remaining -= disp;
      v.offset = network_.wrap(v.offset + disp);
      if (v.ring_remaining > 0.0) continue;
      v.lane = outbound_lane(v.exit);
      v.offset = -v.ring_remaining;
    } else {
      v.offset += disp;
    }
    if (v.offset >= g.outbound_length) exited.push_back(v.id);
  }
  if (!exited.empty()) {
    std::erase_if(vehicles_, [&](const Vehicle& v) {
      return is_outbound(v.lane) && v.offset >= g.outbound_length;
    });
    exited_total_ += exited.size();
  }
}

double World::min_bumper_gap() const {
  double best = std::numeric_limits<double>::infinity();
  std::array<std::vector<const Vehicle*>, 9> by_lane;
  for (const Vehicle& v : vehicles_) by_lane[static_cast<std::size_t>(v.lane)].push_back(&v);
  for (std::size_t l = 0; l < by_lane.size(); ++l) {
    auto& vs = by_lane[l];
    std::sort(vs.begin(), vs.end(), [](const Vehicle* a, const Vehicle* b) { return a->offset < b->offset; });
    if (static_cast<LaneId>(l) == LaneId::Ring) {
      for (std::size_t i = 0; vs.size() > 1 && i < vs.size(); ++i) {
        const Vehicle* ahead = vs[(i + 1) % vs.size()];
        best = std::min(best, network_.ring_distance(vs[i]->offset, ahead->offset) - ahead->length);
      }
    } else {
      for (std::size_t i = 0; i + 1 < vs.size(); ++i) best = std::min(best, vs[i + 1]->rear() - vs[i]->offset);
    }
  }
  return best;
}

std::uint64_t World::checksum() const {
  Fnv1a h;
  h.value(clock_);
  h.value(clock_origin_);
  h.value(ticks_);
  h.value(seed_);
  h.value(next_id_);
  h.value(spawned_total_);
  h.value(exited_total_);
  h.value(total_wt_sum_);
  h.value(total_inbound_);
  std::ostringstream rng_state;
  rng_state << demand_rng_.engine();
  h.text(rng_state.str());
  auto hash_vehicle = [&h](const Vehicle& v) {
    h.value(v.id);
    h.value(v.cls);
    h.value(v.entry);
    h.value(v.exit);
    h.value(v.lane);
    h.value(v.offset);
    h.value(v.speed);
    h.value(v.waiting_time);
    h.value(v.control);
    h.value(v.spawn_time);
    h.value(v.ring_remaining);
    h.value(v.zone_entry_time.value_or(-1.0));
    h.value(v.start_delay);
  };
  for (const Vehicle& v : vehicles_) hash_vehicle(v);
  for (const auto& q : pending_) {
    h.value(q.size());
    for (const Vehicle& v : q) hash_vehicle(v);
  }
  return h.digest();
}

double lane_wt(const World& world, LaneId lane) {
  if (!is_inbound(lane)) throw DomainError("lane_wt: lane must be an inbound lane");
  double sum = 0.0;
  for (const Vehicle& v : world.vehicles())
    if (v.lane == lane) sum += v.waiting_time;
  return sum;
}

void apply_control(World& world, VehicleId id, Signal signal) { world.apply_control(id, signal); }

}  // namespace rbtwin::traffic
