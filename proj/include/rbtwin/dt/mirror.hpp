#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rbtwin/dt/detection.hpp"
#include "rbtwin/traffic/world.hpp"

namespace rbtwin::dt {

struct MirrorConfig {
  /// Tracks without a detection for longer than this are dropped (seconds).
  double expiry = 3.0;
  /// Largest distance at which a CAV registration binds to a virtual object.
  double match_tolerance = 5.0;

  void validate() const;
};

struct VirtualObject {
  std::uint64_t vo_id = 0;
  std::uint64_t bound_track = 0;
  traffic::VehicleId vehicle = 0;
  std::optional<std::uint64_t> cav_binding;
  double first_seen = 0.0;
  double last_update = 0.0;
};

struct IngestStats {
  std::uint64_t accepted = 0;
  std::uint64_t created = 0;
  std::uint64_t expired = 0;
  /// Detections older than (or as old as) the last accepted one of their track.
  std::uint64_t out_of_order = 0;
  /// Detections whose offset lies outside their lane.
  std::uint64_t invalid = 0;
};

struct CavRegistration {
  std::uint64_t cav_id = 0;
  traffic::LaneId lane = traffic::LaneId::NorthIn;
  double offset = 0.0;
  double timestamp = 0.0;
};

enum class MatchStatus : std::uint8_t { Bound, Unmatched, Stale };

struct MatchResult {
  MatchStatus status = MatchStatus::Unmatched;
  std::optional<std::uint64_t> vo_id;
  std::optional<traffic::VehicleId> vehicle;
};

/// Digital-twin mirror of an observed roundabout. Detections create and update
/// virtual objects, each backed by a vehicle in the mirror world.
class Mirror {
 public:
  explicit Mirror(traffic::WorldConfig world_config, MirrorConfig config = {});

  /// Applies a timestamp-ordered batch of detections, then expires silent tracks.
  void ingest(std::span<const Detection> detections);
  /// Moves the mirror clock forward and expires silent tracks.
  void advance_to(double t);

  /// Binds a connected vehicle's registration to the nearest unbound virtual
  /// object on the same lane. Equidistant candidates go to the older track.
  MatchResult match_cav(const CavRegistration& registration);

  /// Detections of the virtual objects refreshed at the current clock, keyed
  /// by their bound track.
  std::vector<Detection> observe() const;

  const traffic::World& world() const noexcept { return world_; }
  traffic::World& world() noexcept { return world_; }
  const std::vector<VirtualObject>& objects() const noexcept { return objects_; }
  const VirtualObject* by_track(std::uint64_t track_id) const noexcept;
  const IngestStats& stats() const noexcept { return stats_; }
  const MirrorConfig& config() const noexcept { return config_; }

 private:
  void apply(const Detection& d);
  void expire();
  traffic::Vehicle make_vehicle(const Detection& d) const;

  MirrorConfig config_;
  traffic::World world_;
  std::vector<VirtualObject> objects_;
  std::uint64_t next_vo_ = 1;
  IngestStats stats_;
};

/// Free-function form: ingests into `mirror` and returns it.
Mirror& ingest(std::span<const Detection> detections, Mirror& mirror);

}  // namespace rbtwin::dt
