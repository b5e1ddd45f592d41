#include "rbtwin/sdvn/metrics.hpp"

#include <algorithm>
#include <set>

namespace rbtwin::sdvn {

std::int64_t n_of_raw(std::uint64_t num_cv, std::uint64_t f_max) {
  if (f_max == 0) throw DomainError("n_of: f_max must be positive");
  return 2 * static_cast<std::int64_t>(num_cv) - static_cast<std::int64_t>(f_max);
}

std::uint64_t n_of(std::uint64_t num_cv, std::uint64_t f_max) {
  return static_cast<std::uint64_t>(std::max<std::int64_t>(0, n_of_raw(num_cv, f_max)));
}

std::uint64_t n_re(std::span<const FlowKey> installed, std::span<const FlowKey> removed) {
  const std::set<FlowKey> r(removed.begin(), removed.end());
  const std::set<FlowKey> f(installed.begin(), installed.end());
  std::uint64_t n = 0;
  for (const auto& k : f) n += r.count(k);
  return n;
}

double r_oc(std::span<const std::size_t> occupancy, std::size_t f_max) {
  if (f_max == 0) throw DomainError("r_oc: f_max must be positive");
  if (occupancy.empty()) return 0.0;
  return static_cast<double>(*std::max_element(occupancy.begin(), occupancy.end())) / static_cast<double>(f_max);
}

double objective_y(double p_of, double p_re, double r_oc) {
  for (double v : {p_of, p_re, r_oc})
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("objective_y: arguments must lie in [0, 1]");
  return p_of + p_re + r_oc;
}

Probabilities estimate_probabilities(const TableCounters& c) {
  if (c.install_attempts == 0) return {};
  Probabilities p;
  p.no_traffic = false;
  p.p_of = static_cast<double>(c.overflow_events) / static_cast<double>(c.install_attempts);
  if (c.installs > 0) p.p_re = static_cast<double>(c.reinstalls) / static_cast<double>(c.installs);
  return p;
}

}  // namespace rbtwin::sdvn
