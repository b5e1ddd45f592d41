#include "rbtwin/traffic/waiting.hpp"

#include <array>

namespace rbtwin::traffic {

namespace {
WaitingAverage finish(double num, double den) {
  if (den <= 0.0) return {0.0, true};
  return {num / den, false};
}
}  // namespace

WaitingAverage avg_waiting(std::span<const WaitingSample> window) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : window) {
    num += s.wt_sum;
    den += static_cast<double>(s.n_inbound);
  }
  return finish(num, den);
}

WaitingAverage avg_waiting(const Repository& repo, double t_from, double t_to) {
  double num = 0.0;
  double den = 0.0;
  repo.for_each([&](const MetricsRecord& r) {
    if (r.kind != RecordKind::Traffic || r.label != "tick") return;
    if (!(r.timestamp > t_from && r.timestamp <= t_to)) return;
    num += r.get("wt_sum").value_or(0.0);
    den += r.get("n_inbound").value_or(0.0);
  });
  return finish(num, den);
}

Payload tick_payload(const World& world) {
  const auto& s = world.last_sample();
  std::array<double, 4> queue{};
  double speed_sum = 0.0;
  for (const Vehicle& v : world.vehicles()) {
    speed_sum += v.speed;
    if (is_inbound(v.lane) && v.speed < world.config().v_stat) queue[index_of(approach_of(v.lane))] += 1.0;
  }
  const auto n = static_cast<double>(world.vehicles().size());
  return {
      {"wt_sum", s.wt_sum},
      {"n_inbound", static_cast<double>(s.n_inbound)},
      {"n_vehicles", n},
      {"avg_speed", n > 0 ? speed_sum / n : 0.0},
      {"queue_N", queue[0]},
      {"queue_S", queue[1]},
      {"queue_E", queue[2]},
      {"queue_W", queue[3]},
      {"spawned_total", static_cast<double>(world.spawned_total())},
      {"exited_total", static_cast<double>(world.exited_total())},
      {"pending", static_cast<double>(world.pending_total())},
  };
}

}  // namespace rbtwin::traffic
