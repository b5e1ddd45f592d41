#include "rbtwin/dt/tau.hpp"

#include <algorithm>
#include <cmath>

namespace rbtwin::dt {

void TauConfig::validate() const {
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw DomainError("tau: quantile must lie in [0, 1]");
  if (!(window > 0.0)) throw DomainError("tau: window must be positive");
  if (!(refresh > 0.0)) throw DomainError("tau: refresh must be positive");
  if (n_min == 0) throw DomainError("tau: n_min must be positive");
  if (!(slack >= 0.0)) throw DomainError("tau: slack must be >= 0");
  if (!(v_free > 0.0)) throw DomainError("tau: v_free must be positive");
}

double quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q must lie in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double h = static_cast<double>(samples.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

double tau_fallback(double D, const TauConfig& config) {
  if (!(D > 0.0)) throw DomainError("tau: D must be positive");
  return D / config.v_free + config.slack;
}

double estimate_tau(std::span<const double> durations, double D, const TauConfig& config) {
  config.validate();
  if (durations.size() < config.n_min) return tau_fallback(D, config);
  if (!(D > 0.0)) throw DomainError("tau: D must be positive");
  return quantile({durations.begin(), durations.end()}, config.quantile);
}

double estimate_tau(const Repository& repo, double t_now, double D, const TauConfig& config) {
  std::vector<double> durations;
  repo.for_each([&](const MetricsRecord& r) {
    if (r.kind != RecordKind::Traffic || r.label != "traversal") return;
    if (r.timestamp > t_now || r.timestamp <= t_now - config.window) return;
    if (auto d = r.get("duration")) durations.push_back(*d);
  });
  return estimate_tau(durations, D, config);
}

void record_traversals(Repository& repo, std::span<const traffic::TraversalSample> samples) {
  for (const auto& s : samples)
    repo.append(RecordKind::Traffic, s.t_complete, "traversal",
                {{"duration", s.duration}, {"vehicle", static_cast<double>(s.vehicle)}});
}

TauSource::TauSource(double D, TauConfig config) : D_(D), config_(config), value_(tau_fallback(D, config)) {
  config_.validate();
}

void TauSource::observe(const traffic::TraversalSample& sample) { samples_.push_back(sample); }

void TauSource::observe(std::span<const traffic::TraversalSample> samples) {
  for (const auto& s : samples) observe(s);
}

double TauSource::tau(double t) {
  if (computed_at_ && t < *computed_at_ + config_.refresh) return value_;
  while (!samples_.empty() && samples_.front().t_complete <= t - config_.window) samples_.pop_front();
  std::vector<double> durations;
  durations.reserve(samples_.size());
  for (const auto& s : samples_)
    if (s.t_complete <= t && s.t_complete > t - config_.window) durations.push_back(s.duration);
  value_ = estimate_tau(durations, D_, config_);
  computed_at_ = t;
  return value_;
}

}  // namespace rbtwin::dt
