#include "rbtwin/scenario/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rbtwin::scenario {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Walks one JSON object, remembering which keys were consumed so that the
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    out = convert<T>(j_.at(key), join(path_, key));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Reader child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, join(path_, key));
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
  }

  template <typename T>
  static T convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
        throw ConfigError(path, "expected a non-negative integer");
      return v.get<T>();
    } else {
      if (!v.is_array()) throw ConfigError(path, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_params(Reader r, traffic::CarFollowingParams& p) {
  r.get("v_max", p.v_max);
  r.get("accel", p.accel);
  r.get("decel", p.decel);
  r.get("min_gap", p.min_gap);
  r.get("headway", p.headway);
  r.get("reaction", p.reaction);
  r.get("imperfection", p.imperfection);
  r.finish();
}

json write_params(const traffic::CarFollowingParams& p) {
  return {{"v_max", p.v_max},     {"accel", p.accel},       {"decel", p.decel},
          {"min_gap", p.min_gap}, {"headway", p.headway},   {"reaction", p.reaction},
          {"imperfection", p.imperfection}};
}

void read_traffic(Reader r, ScenarioConfig& c) {
  auto& w = c.world;
  r.get("vol_total", w.demand.vol_total);
  r.get("r_av", w.demand.r_av);
  r.get("seed", w.demand.seed);
  r.get("dt", w.dt);
  r.get("duration", c.duration);
  r.get("v_stat", w.v_stat);
  r.get("gap_accept", w.gap_accept);
  r.get("decision_distance", w.decision_distance);
  if (const json* t = r.raw("turning")) {
    const std::string path = join(r.path(), "turning");
    if (!t->is_array() || t->size() != 4) throw ConfigError(path, "expected 4 rows (N, S, E, W)");
    for (std::size_t i = 0; i < 4; ++i) {
      const auto row = Reader::convert<std::vector<double>>((*t)[i], path + "[" + std::to_string(i) + "]");
      if (row.size() != 4) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected 4 columns");
      std::copy(row.begin(), row.end(), w.demand.turning[i].begin());
    }
  }
  {
    auto g = r.child("geometry");
    g.get("inbound_length", w.geometry.inbound_length);
    g.get("ring_circumference", w.geometry.ring_circumference);
    g.get("outbound_length", w.geometry.outbound_length);
    g.get("ring_speed", w.geometry.ring_speed);
    g.finish();
  }
  read_params(r.child("hv"), w.hv);
  read_params(r.child("av"), w.av);
  r.finish();
}

sdvn::EvictionPolicy read_policy(const json& v, const std::string& path, double D) {
  sdvn::EvictionPolicy p;
  std::string kind;
  if (v.is_string()) {
    kind = v.get<std::string>();
  } else {
    Reader r(v, path);
    r.get("kind", kind);
    auto k = sdvn::parse_policy_kind(kind);
    if (!k) throw ConfigError(join(path, "kind"), "unknown policy '" + kind + "'");
    p.kind = *k;
    p.D = D;
    r.get("t_idle", p.t_idle);
    r.get("sample_period", p.sample_period);
    r.get("hard_lo", p.hard_lo);
    r.get("hard_hi", p.hard_hi);
    r.finish();
    return p;
  }
  auto k = sdvn::parse_policy_kind(kind);
  if (!k) throw ConfigError(path, "unknown policy '" + kind + "'");
  p.kind = *k;
  p.D = D;
  return p;
}

json write_policy(const sdvn::EvictionPolicy& p) {
  json j = {{"kind", std::string(p.name())}};
  switch (p.kind) {
    case sdvn::PolicyKind::IdleTimeout:
      j["t_idle"] = p.t_idle;
      j["sample_period"] = p.sample_period;
      break;
    case sdvn::PolicyKind::RandomHard:
      j["hard_lo"] = p.hard_lo;
      j["hard_hi"] = p.hard_hi;
      break;
    default:
      break;
  }
  return j;
}

void read_network(Reader r, NetworkConfig& n) {
  r.get("bsm_rate", n.bsm_rate);
  r.get("D", n.D);
  r.get("apps", n.apps);
  if (const json* f = r.raw("f_max")) {
    const std::string path = join(r.path(), "f_max");
    n.f_max = f->is_array() ? Reader::convert<std::vector<std::size_t>>(*f, path)
                            : std::vector<std::size_t>{Reader::convert<std::size_t>(*f, path)};
  }
  if (const json* ps = r.raw("policies")) {
    const std::string path = join(r.path(), "policies");
    if (!ps->is_array()) throw ConfigError(path, "expected an array");
    n.policies.clear();
    for (std::size_t i = 0; i < ps->size(); ++i)
      n.policies.push_back(read_policy((*ps)[i], path + "[" + std::to_string(i) + "]", n.D));
  } else {
    for (auto& p : n.policies) p.D = n.D;
  }
  auto t = r.child("tau");
  t.get("quantile", n.tau.quantile);
  t.get("window", n.tau.window);
  t.get("refresh", n.tau.refresh);
  t.get("n_min", n.tau.n_min);
  t.get("slack", n.tau.slack);
  t.get("v_free", n.tau.v_free);
  t.finish();
  r.finish();
}

void read_sweep(Reader r, SweepConfig& s) {
  r.get("r_av", s.r_av);
  r.get("f_max", s.f_max);
  r.get("seeds", s.seeds);
  r.get("workers", s.workers);
  std::vector<std::string> names;
  r.get("policies", names);
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto k = sdvn::parse_policy_kind(names[i]);
    if (!k) throw ConfigError(join(r.path(), "policies[" + std::to_string(i) + "]"), "unknown policy '" + names[i] + "'");
    s.policies.push_back(*k);
  }
  r.finish();
}

template <typename Fn>
void wrap_domain(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  const auto& d = world.demand;
  if (!(d.vol_total >= 0.0) || !std::isfinite(d.vol_total)) throw ConfigError("traffic.vol_total", "must be >= 0");
  if (!(d.r_av >= 0.0 && d.r_av <= 1.0)) throw ConfigError("traffic.r_av", "must lie in [0, 1]");
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (double p : d.turning[i]) {
      if (!(p >= 0.0)) throw ConfigError("traffic.turning[" + std::to_string(i) + "]", "probabilities must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("traffic.turning[" + std::to_string(i) + "]", "row must sum to 1");
  }
  if (!(world.dt > 0.0)) throw ConfigError("traffic.dt", "must be positive");
  if (!(world.v_stat > 0.0)) throw ConfigError("traffic.v_stat", "must be positive");
  if (!(world.decision_distance > 0.0)) throw ConfigError("traffic.decision_distance", "must be positive");
  wrap_domain("traffic.geometry", [&] { traffic::RoundaboutNetwork check(world.geometry); });
  wrap_domain("traffic.hv", [&] { world.hv.validate(); });
  wrap_domain("traffic.av", [&] { world.av.validate(); });
  if (!(network.D > 0.0)) throw ConfigError("network.D", "must be positive");
  if (world.traversal_zone != network.D) throw ConfigError("network.D", "traffic traversal zone must equal D");
  if (network.D > world.geometry.inbound_length) throw ConfigError("network.D", "must not exceed inbound_length");
  wrap_domain("traffic.gap_accept", [&] { world.validate(); });
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("traffic.duration", "must be >= 0");
  const double q = duration / world.dt;
  if (std::abs(q - std::round(q)) > 1e-9) throw ConfigError("traffic.duration", "must be a multiple of dt");
  if (!(controller.period > 0.0)) throw ConfigError("controller.period", "must be positive");
  if (!(controller.horizon > 0.0)) throw ConfigError("controller.horizon", "must be positive");
  auto on_grid = [&](double v) { return std::abs(v / world.dt - std::round(v / world.dt)) <= 1e-9; };
  if (!on_grid(controller.period)) throw ConfigError("controller.period", "must be a multiple of dt");
  if (!on_grid(controller.horizon)) throw ConfigError("controller.horizon", "must be a multiple of dt");
  static const std::set<std::string> levels{"trace", "debug", "info", "warn", "error", "off"};
  if (!levels.count(log_level)) throw ConfigError("controller.log_level", "unknown level '" + log_level + "'");
  if (network.f_max.empty()) throw ConfigError("network.f_max", "must list at least one capacity");
  for (auto f : network.f_max)
    if (f == 0) throw ConfigError("network.f_max", "capacities must be positive");
  if (network.policies.empty()) throw ConfigError("network.policies", "must list at least one policy");
  for (std::size_t i = 0; i < network.policies.size(); ++i) {
    const std::string key = "network.policies[" + std::to_string(i) + "]";
    wrap_domain(key, [&] { network.policies[i].validate(); });
    if (network.policies[i].D != network.D) throw ConfigError(key + ".D", "must equal network.D");
  }
  if (network.apps.empty()) throw ConfigError("network.apps", "must list at least one application");
  if (std::set<std::uint32_t>(network.apps.begin(), network.apps.end()).size() != network.apps.size())
    throw ConfigError("network.apps", "duplicate application id");
  const double per_tick = network.bsm_rate * world.dt;
  if (!(network.bsm_rate > 0.0) || std::abs(per_tick - std::round(per_tick)) > 1e-9 || per_tick < 0.5)
    throw ConfigError("network.bsm_rate", "bsm_rate * dt must be a positive whole number");
  wrap_domain("network.tau", [&] { network.tau.validate(); });
  for (double r : sweep.r_av)
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("sweep.r_av", "values must lie in [0, 1]");
  for (auto f : sweep.f_max)
    if (f == 0) throw ConfigError("sweep.f_max", "capacities must be positive");
  for (auto k : sweep.policies)
    if (std::none_of(network.policies.begin(), network.policies.end(), [k](const auto& p) { return p.kind == k; }))
      throw ConfigError("sweep.policies", "policy '" + std::string(sdvn::to_string(k)) + "' is not configured in network.policies");
  if (sweep.workers == 0) throw ConfigError("sweep.workers", "must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

ScenarioConfig default_config() { return ScenarioConfig{}; }

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  ScenarioConfig c;
  Reader r(root, "");
  read_traffic(r.child("traffic"), c);
  {
    auto ctl = r.child("controller");
    ctl.get("enabled", c.controller.enabled);
    ctl.get("period", c.controller.period);
    ctl.get("horizon", c.controller.horizon);
    ctl.get("parallel", c.controller.parallel);
    ctl.get("log_level", c.log_level);
    ctl.finish();
  }
  read_network(r.child("network"), c.network);
  c.world.traversal_zone = c.network.D;
  read_sweep(r.child("sweep"), c.sweep);
  r.get("output_dir", c.output_dir);
  r.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  const auto& w = c.world;
  json turning = json::array();
  for (const auto& row : w.demand.turning) turning.push_back(row);
  json policies = json::array();
  for (const auto& p : c.network.policies) policies.push_back(write_policy(p));
  json sweep_policies = json::array();
  for (auto k : c.sweep.policies) sweep_policies.push_back(std::string(sdvn::to_string(k)));
  const auto& t = c.network.tau;
  json root = {
      {"traffic",
       {{"vol_total", w.demand.vol_total},
        {"r_av", w.demand.r_av},
        {"turning", turning},
        {"seed", w.demand.seed},
        {"dt", w.dt},
        {"duration", c.duration},
        {"v_stat", w.v_stat},
        {"gap_accept", w.gap_accept},
        {"decision_distance", w.decision_distance},
        {"geometry",
         {{"inbound_length", w.geometry.inbound_length},
          {"ring_circumference", w.geometry.ring_circumference},
          {"outbound_length", w.geometry.outbound_length},
          {"ring_speed", w.geometry.ring_speed}}},
        {"hv", write_params(w.hv)},
        {"av", write_params(w.av)}}},
      {"controller",
       {{"enabled", c.controller.enabled},
        {"period", c.controller.period},
        {"horizon", c.controller.horizon},
        {"parallel", c.controller.parallel},
        {"log_level", c.log_level}}},
      {"network",
       {{"f_max", c.network.f_max},
        {"policies", policies},
        {"bsm_rate", c.network.bsm_rate},
        {"D", c.network.D},
        {"apps", c.network.apps},
        {"tau",
         {{"quantile", t.quantile},
          {"window", t.window},
          {"refresh", t.refresh},
          {"n_min", t.n_min},
          {"slack", t.slack},
          {"v_free", t.v_free}}}}},
      {"sweep",
       {{"r_av", c.sweep.r_av},
        {"f_max", c.sweep.f_max},
        {"policies", sweep_policies},
        {"seeds", c.sweep.seeds},
        {"workers", c.sweep.workers}}},
      {"output_dir", c.output_dir},
  };
  return root.dump(2) + "\n";
}

}  // namespace rbtwin::scenario
