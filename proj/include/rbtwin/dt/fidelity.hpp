#pragma once

#include <span>
#include <vector>

#include "rbtwin/dt/detection.hpp"

namespace rbtwin::dt {

struct FidelityBin {
  double t_start = 0.0;
  double pt_mean = 0.0;
  double dt_mean = 0.0;
  std::size_t pt_count = 0;
  std::size_t dt_count = 0;
  /// False when either trace has no sample in the bin; such bins are left out
  /// of the RMSE.
  bool valid = false;
};

struct FidelityResult {
  double bin_width = 60.0;
  std::vector<FidelityBin> bins;
  std::size_t bins_used = 0;
  std::size_t bins_empty = 0;
  /// Root-mean-square difference of the per-bin mean speeds (m/s).
  double rmse = 0.0;
};

/// Bins both traces into fixed intervals starting at the earliest timestamp,
/// averages speed per bin and compares the two series.
FidelityResult compute_fidelity(std::span<const Detection> pt_trace, std::span<const Detection> dt_trace,
                                double bin_width = 60.0);

}  // namespace rbtwin::dt
