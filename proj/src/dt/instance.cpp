#include "rbtwin/dt/instance.hpp"

#include <cmath>

#include "rbtwin/traffic/waiting.hpp"

namespace rbtwin::dt {

std::uint64_t child_seed(std::uint64_t parent_seed, InstanceId id) noexcept {
  return mix_seed(parent_seed ^ 0x5d7f3a1c00000000ULL, id.cycle);
}

DTInstance fork_instance(const traffic::World& source, const decision::Strategy& strategy, double horizon,
                         InstanceId id) {
  if (!(horizon > 0.0)) throw DomainError("fork_instance: horizon must be positive");
  DTInstance inst{id, source, strategy, horizon, child_seed(source.seed(), id)};
  inst.world.reseed(inst.seed);
  for (const auto& v : source.vehicles()) {
    if (!v.connected() || !traffic::is_inbound(v.lane)) continue;
    inst.world.apply_control(v.id, strategy.contains(v.lane) ? traffic::Signal::Yield : traffic::Signal::Wait);
  }
  return inst;
}

Payload InstanceResult::payload() const {
  return {
      {"cycle", static_cast<double>(id.cycle)},
      {"slot", static_cast<double>(id.slot)},
      {"sim_wt", sim_wt},
      {"no_traffic", no_traffic ? 1.0 : 0.0},
  };
}

InstanceResult run_instance(DTInstance& instance) {
  const double start = instance.world.clock();
  const double wt0 = instance.world.total_wt_sum();
  const double n0 = instance.world.total_inbound_count();
  instance.world.run_for(instance.horizon);
  const traffic::WaitingSample horizon_total{instance.world.clock(), instance.world.total_wt_sum() - wt0,
                                             static_cast<std::size_t>(
                                                 std::llround(instance.world.total_inbound_count() - n0))};
  const auto avg = traffic::avg_waiting(std::span(&horizon_total, 1));
  return {instance.id, instance.strategy.kind(), start, avg.value, avg.no_traffic};
}

InstanceResult run_instance(DTInstance& instance, Repository& repo) {
  auto result = run_instance(instance);
  repo.append(RecordKind::Decision, result.fork_time, std::string("instance_") + std::string(to_string(result.strategy)),
              result.payload());
  return result;
}

}  // namespace rbtwin::dt
