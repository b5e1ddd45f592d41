#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rbtwin/decision/controller.hpp"
#include "rbtwin/dt/tau.hpp"
#include "rbtwin/sdvn/flow_table.hpp"
#include "rbtwin/traffic/world.hpp"

namespace rbtwin::scenario {

struct NetworkConfig {
  std::vector<std::size_t> f_max{250};
  std::vector<sdvn::EvictionPolicy> policies = sdvn::all_policies();
  /// BSMs per second per connected vehicle.
  double bsm_rate = 10.0;
  /// Operating distance of the proposed policy (meters).
  double D = 50.0;
  std::vector<std::uint32_t> apps{0};
  dt::TauConfig tau;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct SweepConfig {
  std::vector<double> r_av;
  std::vector<std::size_t> f_max;
  std::vector<sdvn::PolicyKind> policies;
  std::vector<std::uint64_t> seeds;
  /// Cells evaluated at once.
  std::size_t workers = 1;

  bool empty() const noexcept { return r_av.empty() && f_max.empty() && policies.empty() && seeds.empty(); }

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct ScenarioConfig {
  /// Traffic section. `world.demand.seed` is the base seed.
  traffic::WorldConfig world;
  double duration = 3600.0;
  decision::ControllerConfig controller;
  std::string log_level = "info";
  NetworkConfig network;
  SweepConfig sweep;
  std::string output_dir = "out";

  std::uint64_t seed() const noexcept { return world.demand.seed; }

  /// Throws ConfigError naming the first offending key.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Defaults mirroring the reference experiment: 1000 veh/h for one hour,
/// controller on, all four policies at f_max = 250.
ScenarioConfig default_config();

/// Parses JSON text. Unknown keys and type mismatches raise ConfigError with
/// the dotted key path; omitted keys keep their defaults. The result is
/// validated.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Complete JSON form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& config);

}  // namespace rbtwin::scenario
