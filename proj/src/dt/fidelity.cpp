#include "rbtwin/dt/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbtwin::dt {

FidelityResult compute_fidelity(std::span<const Detection> pt_trace, std::span<const Detection> dt_trace,
                                double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("fidelity: bin width must be positive");
  FidelityResult out;
  out.bin_width = bin_width;
  if (pt_trace.empty() && dt_trace.empty()) return out;

  double t0 = std::numeric_limits<double>::infinity();
  double t1 = -t0;
  for (auto trace : {pt_trace, dt_trace})
    for (const auto& d : trace) {
      t0 = std::min(t0, d.timestamp);
      t1 = std::max(t1, d.timestamp);
    }
  const auto n_bins = static_cast<std::size_t>(std::floor((t1 - t0) / bin_width)) + 1;
  std::vector<double> pt_sum(n_bins), dt_sum(n_bins);
  out.bins.resize(n_bins);
  auto bin_of = [&](double t) { return std::min(n_bins - 1, static_cast<std::size_t>(std::floor((t - t0) / bin_width))); };
  for (const auto& d : pt_trace) {
    const auto b = bin_of(d.timestamp);
    pt_sum[b] += d.speed;
    ++out.bins[b].pt_count;
  }
  for (const auto& d : dt_trace) {
    const auto b = bin_of(d.timestamp);
    dt_sum[b] += d.speed;
    ++out.bins[b].dt_count;
  }
  double sq = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& bin = out.bins[b];
    bin.t_start = t0 + static_cast<double>(b) * bin_width;
    if (bin.pt_count) bin.pt_mean = pt_sum[b] / static_cast<double>(bin.pt_count);
    if (bin.dt_count) bin.dt_mean = dt_sum[b] / static_cast<double>(bin.dt_count);
    bin.valid = bin.pt_count > 0 && bin.dt_count > 0;
    if (!bin.valid) {
      ++out.bins_empty;
      continue;
    }
    const double diff = bin.dt_mean - bin.pt_mean;
    sq += diff * diff;
    ++out.bins_used;
  }
  if (out.bins_used) out.rmse = std::sqrt(sq / static_cast<double>(out.bins_used));
  return out;
}

}  // namespace rbtwin::dt
