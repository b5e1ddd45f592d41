#pragma once

#include <cstdint>
#include <span>

#include "rbtwin/sdvn/flow_table.hpp"

namespace rbtwin::sdvn {

/// 2 * num_cv - f_max without clamping; negative when capacity suffices.
std::int64_t n_of_raw(std::uint64_t num_cv, std::uint64_t f_max);
/// Demanded-entry excess max(0, 2 * num_cv - f_max).
std::uint64_t n_of(std::uint64_t num_cv, std::uint64_t f_max);

/// |installed ∩ removed|. Duplicate keys count once.
std::uint64_t n_re(std::span<const FlowKey> installed, std::span<const FlowKey> removed);

/// Peak occupancy ratio max_t |F_t| / f_max; 0 for an empty history.
double r_oc(std::span<const std::size_t> occupancy, std::size_t f_max);

/// P(of) + P(re) + R_oc. Each term must lie in [0, 1].
double objective_y(double p_of, double p_re, double r_oc);

struct Probabilities {
  double p_of = 0.0;
  double p_re = 0.0;
  bool no_traffic = true;
};

/// p_of = overflow events per install attempt, p_re = reinstalls per
/// successful install.
Probabilities estimate_probabilities(const TableCounters& counters);

}  // namespace rbtwin::sdvn
