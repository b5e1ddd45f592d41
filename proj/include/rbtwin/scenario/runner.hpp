#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbtwin/decision/controller.hpp"
#include "rbtwin/dt/detection.hpp"
#include "rbtwin/repository.hpp"
#include "rbtwin/scenario/config.hpp"
#include "rbtwin/sdvn/network_sim.hpp"

namespace rbtwin::scenario {

struct RunSummary {
  std::string scenario_id;
  std::uint64_t seed = 0;
  double r_av = 0.0;
  double duration = 0.0;
  double avg_waiting = 0.0;
  bool no_traffic = true;
  std::uint64_t spawned = 0;
  std::uint64_t exited = 0;
  std::uint64_t cycles = 0;
  std::vector<sdvn::NetworkSummary> network;
  /// Not written to any file so that outputs stay byte-identical.
  double wall_seconds = 0.0;
};

struct ScenarioResult {
  RunSummary summary;
  Repository repository;
  /// Filled only when traces are requested: the ground-truth detections and
  /// what the mirror reproduced from them.
  std::vector<dt::Detection> pt_trace;
  std::vector<dt::Detection> dt_trace;
};

/// Stable identifier of a configuration (hash of its serialized form).
std::string scenario_id(const ScenarioConfig& config);

/// Runs a scenario in memory with `seed` replacing the configured one.
ScenarioResult simulate(const ScenarioConfig& config, std::uint64_t seed, bool with_traces = false);

class OutputExists : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs a scenario and writes its artifacts into `out`: traffic.csv,
/// decisions.csv, network.csv, summary.csv, run_summary.csv and
/// repository.tsv, plus pt_trace.csv and dt_trace.csv with traces on.
/// Refuses a non-empty `out` unless `overwrite` is set.
RunSummary run_scenario(const ScenarioConfig& config, std::uint64_t seed, const std::filesystem::path& out,
                        bool overwrite = false, bool with_traces = false);

inline constexpr std::string_view kTrafficHeader =
    "t,wt_sum,n_inbound,n_vehicles,avg_speed,queue_N,queue_S,queue_E,queue_W,spawned_total,exited_total,pending";
inline constexpr std::string_view kDecisionsHeader =
    "cycle,t,wt_N,wt_S,wt_E,wt_W,sim_H,sim_y2,sim_y3,chosen,n_yield,n_wait";
inline constexpr std::string_view kNetworkHeader =
    "t,policy,app,occupancy,overflow_events_cum,reinstalls_cum,f_max";
inline constexpr std::string_view kSummaryHeader =
    "policy,f_max,penetration,N_of_events,N_re,R_oc,p_of,p_re,y,app,peak_cv,N_of_formula,N_of_formula_raw";
inline constexpr std::string_view kRunSummaryHeader =
    "scenario_id,seed,r_av,duration,avg_waiting,no_traffic,spawned,exited,cycles";
inline constexpr std::string_view kSweepHeader =
    "r_av,f_max,policy,seed,cell_seed,avg_waiting,N_of_events,N_re,R_oc,p_of,p_re,y";
inline constexpr std::string_view kSweepSummaryHeader =
    "r_av,f_max,policy,n_seeds,avg_waiting_mean,avg_waiting_std,N_of_events_mean,N_of_events_std,N_re_mean,N_re_std,"
    "R_oc_mean,R_oc_std,p_of_mean,p_of_std,p_re_mean,p_re_std,y_mean,y_std";

/// CSV bodies, each starting with its header row.
std::string traffic_csv(const Repository& repo);
std::string decisions_csv(const Repository& repo);
std::string network_csv(const Repository& repo);
std::string summary_csv(const RunSummary& summary);
std::string run_summary_csv(const RunSummary& summary);

struct SweepRow {
  double r_av = 0.0;
  std::size_t f_max = 0;
  sdvn::PolicyKind policy = sdvn::PolicyKind::NoTimeout;
  std::uint64_t seed = 0;
  std::uint64_t cell_seed = 0;
  double avg_waiting = 0.0;
  sdvn::NetworkSummary network;
};

struct SweepAggregate {
  double r_av = 0.0;
  std::size_t f_max = 0;
  sdvn::PolicyKind policy = sdvn::PolicyKind::NoTimeout;
  std::size_t n = 0;
  /// Mean and sample standard deviation per metric, in kSweepSummaryHeader order.
  std::vector<std::pair<double, double>> stats;
};

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seed of a sweep cell. Depends on the base seed, the penetration index and
/// the listed seed only, so every policy and capacity sees the same traffic.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t r_av_index, std::uint64_t seed);

/// Configuration of one sweep cell, runnable on its own.
ScenarioConfig cell_config(const ScenarioConfig& config, double r_av, std::size_t f_max, sdvn::PolicyKind policy);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;
};

/// Runs the r_av x f_max x policy x seed cross product. Empty sweep lists fall
/// back to the scenario's own value.
SweepResult sweep(const ScenarioConfig& config);
std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_summary_csv(const std::vector<SweepAggregate>& aggregates);

/// Runs the sweep and writes sweep.csv and sweep_summary.csv into `out`.
SweepResult run_sweep(const ScenarioConfig& config, const std::filesystem::path& out, bool overwrite = false);

}  // namespace rbtwin::scenario
