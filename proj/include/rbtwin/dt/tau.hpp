#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "rbtwin/repository.hpp"
#include "rbtwin/traffic/world.hpp"

namespace rbtwin::dt {

struct TauConfig {
  double quantile = 0.95;
  /// Only traversals completed within this many seconds count (seconds).
  double window = 600.0;
  double refresh = 10.0;
  std::size_t n_min = 5;
  double slack = 5.0;
  /// Free-flow speed of the cold-start fallback (m/s).
  double v_free = 13.89;

  void validate() const;

  friend bool operator==(const TauConfig&, const TauConfig&) = default;
};

/// Sample quantile with linear interpolation between order statistics
/// (h = (n - 1) q). Throws DomainError on an empty sample or q outside [0, 1].
double quantile(std::vector<double> samples, double q);

/// D / v_free + slack.
double tau_fallback(double D, const TauConfig& config);

/// Quantile of `durations`, or the fallback when there are fewer than n_min.
double estimate_tau(std::span<const double> durations, double D, const TauConfig& config = {});

/// Reads "traversal" traffic records (key "duration") completed in
/// (t_now - window, t_now] from the repository.
double estimate_tau(const Repository& repo, double t_now, double D, const TauConfig& config = {});

/// Appends one traffic record per traversal, labelled "traversal".
void record_traversals(Repository& repo, std::span<const traffic::TraversalSample> samples);

/// Rolling τ estimate fed with traversal samples. The value is recomputed at
/// most once per refresh interval and held in between.
class TauSource {
 public:
  TauSource(double D, TauConfig config = {});

  void observe(const traffic::TraversalSample& sample);
  void observe(std::span<const traffic::TraversalSample> samples);
  double tau(double t);

  double D() const noexcept { return D_; }
  const TauConfig& config() const noexcept { return config_; }
  std::size_t window_size() const noexcept { return samples_.size(); }

 private:
  double D_;
  TauConfig config_;
  std::deque<traffic::TraversalSample> samples_;
  std::optional<double> computed_at_;
  double value_;
};

}  // namespace rbtwin::dt
