#include "rbtwin/decision/controller.hpp"

#include "rbtwin/traffic/waiting.hpp"

#include <cmath>
#include <future>

namespace rbtwin::decision {

using traffic::Signal;
using traffic::World;

namespace {
bool is_multiple(double value, double step) {
  const double q = value / step;
  return std::abs(q - std::round(q)) < 1e-9;
}
}  // namespace

void ControllerConfig::validate(double dt) const {
  if (!(period > 0.0)) throw DomainError("controller: period must be positive");
  if (!(horizon > 0.0)) throw DomainError("controller: horizon must be positive");
  if (!is_multiple(period, dt)) throw DomainError("controller: period must be a multiple of dt");
  if (!is_multiple(horizon, dt)) throw DomainError("controller: horizon must be a multiple of dt");
}

Candidates build_candidates(const LaneWaits& wts) {
  return {all_lanes(), build_y2(compute_y1(wts)), build_y3(wts)};
}

LaneWaits lane_waits(const World& world) {
  LaneWaits out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = traffic::lane_wt(world, traffic::kInboundLanes[i]);
  return out;
}

Selection select_strategy(const Candidates& candidates, const World& source, double horizon, std::uint64_t cycle,
                          bool parallel) {
  std::array<dt::InstanceResult, 3> results;
  auto evaluate = [&](std::uint32_t slot) {
    auto inst = dt::fork_instance(source, candidates[slot], horizon, {cycle, slot});
    return dt::run_instance(inst);
  };
  if (parallel) {
    std::array<std::future<dt::InstanceResult>, 3> futures;
    for (std::uint32_t s = 0; s < 3; ++s) futures[s] = std::async(std::launch::async, evaluate, s);
    for (std::uint32_t s = 0; s < 3; ++s) results[s] = futures[s].get();
  } else {
    for (std::uint32_t s = 0; s < 3; ++s) results[s] = evaluate(s);
  }
  // Preference order for exact ties: H (slot 0), y3 (slot 2), y2 (slot 1).
  constexpr std::array<std::size_t, 3> kPreference{0, 2, 1};
  std::size_t best = kPreference[0];
  for (std::size_t k = 1; k < 3; ++k)
    if (results[kPreference[k]].sim_wt < results[best].sim_wt) best = kPreference[k];
  return {candidates[best], results};
}

SignalMap dispatch_signals(const Strategy& chosen, World& world) {
  SignalMap signals;
  for (const auto& v : world.vehicles()) {
    if (!v.connected() || !traffic::is_inbound(v.lane)) continue;
    signals.emplace(v.id, chosen.contains(v.lane) ? Signal::Yield : Signal::Wait);
  }
  for (const auto& [id, s] : signals) world.apply_control(id, s);
  return signals;
}

std::size_t DecisionCycle::count(Signal s) const {
  std::size_t n = 0;
  for (const auto& [id, sig] : signals) n += sig == s ? 1 : 0;
  return n;
}

Payload DecisionCycle::payload() const {
  return {
      {"cycle", static_cast<double>(index)},
      {"wt_N", lane_wts[0]},
      {"wt_S", lane_wts[1]},
      {"wt_E", lane_wts[2]},
      {"wt_W", lane_wts[3]},
      {"sim_H", sim_wt[0]},
      {"sim_y2", sim_wt[1]},
      {"sim_y3", sim_wt[2]},
      {"chosen", static_cast<double>(chosen.kind())},
      {"n_yield", static_cast<double>(count(Signal::Yield))},
      {"n_wait", static_cast<double>(count(Signal::Wait))},
  };
}

Controller::Controller(ControllerConfig config, double dt) : config_(config) { config_.validate(dt); }

bool Controller::due(const World& world) const {
  return config_.enabled && world.clock() > 0.0 && is_multiple(world.clock(), config_.period);
}

DecisionCycle Controller::run_cycle(World& world, Repository* repo) {
  DecisionCycle cycle{cycles_++, world.clock(), lane_waits(world), build_candidates(lane_waits(world)), {},
                      all_lanes(), {}};
  auto selection = select_strategy(cycle.candidates, world, config_.horizon, cycle.index, config_.parallel);
  for (std::size_t s = 0; s < 3; ++s) cycle.sim_wt[s] = selection.results[s].sim_wt;
  cycle.chosen = selection.chosen;
  cycle.signals = dispatch_signals(cycle.chosen, world);
  if (repo) {
    for (const auto& r : selection.results)
      repo->append(RecordKind::Decision, cycle.t, "instance_" + std::string(to_string(r.strategy)), r.payload());
    repo->append(RecordKind::Decision, cycle.t, "cycle", cycle.payload());
  }
  return cycle;
}

std::optional<DecisionCycle> Controller::maybe_run(World& world, Repository* repo) {
  if (!due(world)) return std::nullopt;
  return run_cycle(world, repo);
}

std::vector<DecisionCycle> run_controller(World& world, const ControllerConfig& config, double duration,
                                          Repository& repo) {
  if (config.enabled && !(duration >= config.period))
    throw DomainError("run_controller: duration must be at least one period");
  Controller controller(config, world.config().dt);
  std::vector<DecisionCycle> cycles;
  const auto ticks = static_cast<std::uint64_t>(std::llround(duration / world.config().dt));
  for (std::uint64_t i = 0; i < ticks; ++i) {
    world.step();
    repo.append(RecordKind::Traffic, world.clock(), "tick", traffic::tick_payload(world));
    if (auto c = controller.maybe_run(world, &repo)) cycles.push_back(std::move(*c));
  }
  return cycles;
}

}  // namespace rbtwin::decision
