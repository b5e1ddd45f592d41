#include "rbtwin/scenario/runner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include "rbtwin/dt/mirror.hpp"
#include "rbtwin/traffic/waiting.hpp"

namespace rbtwin::scenario {

namespace fs = std::filesystem;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string num(double v) { return format_double(v); }

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

void prepare_dir(const fs::path& out, bool overwrite) {
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw OutputExists(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out) && !overwrite)
      throw OutputExists(out.string() + " is not empty (pass --overwrite to replace its contents)");
  }
  fs::create_directories(out);
}

std::string row_from(const MetricsRecord& r, std::span<const std::string_view> keys) {
  std::string line = num(r.timestamp);
  for (auto k : keys) {
    line += ',';
    line += num(r.get(k).value_or(0.0));
  }
  return line;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string scenario_id(const ScenarioConfig& config) {
  Fnv1a h;
  h.text(serialize_config(config));
  return hex64(h.digest());
}

ScenarioResult simulate(const ScenarioConfig& config, std::uint64_t seed, bool with_traces) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  ScenarioResult result;
  auto& repo = result.repository;

  auto wcfg = config.world;
  wcfg.demand.seed = seed;
  traffic::World world(wcfg);
  decision::Controller controller(config.controller, wcfg.dt);
  sdvn::NetworkSimulator net(sdvn::table_specs(config.network.policies, config.network.f_max, config.network.apps),
                             wcfg.geometry.inbound_length, dt::TauSource(config.network.D, config.network.tau), seed);
  std::optional<dt::Mirror> mirror;
  std::set<traffic::VehicleId> bound;
  if (with_traces) mirror.emplace(wcfg);

  const auto ticks = static_cast<std::uint64_t>(std::llround(config.duration / wcfg.dt));
  for (std::uint64_t i = 0; i < ticks; ++i) {
    const double t = world.clock();
    net.tick(t);
    std::size_t connected = 0;
    for (const auto& v : world.vehicles()) connected += v.connected() ? 1 : 0;
    net.process(sdvn::bsm_events(world, t, wcfg.dt, config.network.bsm_rate), connected);
    net.record(repo, t);

    if (mirror) {
      auto seen = dt::observe(world);
      mirror->ingest(seen);
      for (const auto& v : world.vehicles()) {
        if (!v.connected() || bound.count(v.id)) continue;
        if (mirror->match_cav({v.id, v.lane, v.offset, t}).status == dt::MatchStatus::Bound) bound.insert(v.id);
      }
      result.pt_trace.insert(result.pt_trace.end(), seen.begin(), seen.end());
      auto mirrored = mirror->observe();
      result.dt_trace.insert(result.dt_trace.end(), mirrored.begin(), mirrored.end());
    }

    world.step();
    auto traversals = world.take_traversals();
    std::sort(traversals.begin(), traversals.end(),
              [](const auto& a, const auto& b) { return a.t_complete < b.t_complete; });
    dt::record_traversals(repo, traversals);
    net.observe(traversals);
    repo.append(RecordKind::Traffic, world.clock(), "tick", traffic::tick_payload(world));
    controller.maybe_run(world, &repo);
  }

  auto& s = result.summary;
  s.scenario_id = scenario_id(config);
  s.seed = seed;
  s.r_av = wcfg.demand.r_av;
  s.duration = config.duration;
  const auto avg = traffic::avg_waiting(repo);
  s.avg_waiting = avg.value;
  s.no_traffic = avg.no_traffic;
  s.spawned = world.spawned_total();
  s.exited = world.exited_total();
  s.cycles = controller.cycles();
  s.network = net.summaries(wcfg.demand.r_av);
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string traffic_csv(const Repository& repo) {
  static constexpr std::array<std::string_view, 11> keys{"wt_sum",  "n_inbound", "n_vehicles",    "avg_speed",
                                                         "queue_N", "queue_S",   "queue_E",       "queue_W",
                                                         "spawned_total", "exited_total", "pending"};
  std::string out(kTrafficHeader);
  out += '\n';
  repo.for_each([&](const MetricsRecord& r) {
    if (r.kind != RecordKind::Traffic || r.label != "tick") return;
    out += row_from(r, keys);
    out += '\n';
  });
  return out;
}

std::string decisions_csv(const Repository& repo) {
  std::string out(kDecisionsHeader);
  out += '\n';
  repo.for_each([&](const MetricsRecord& r) {
    if (r.kind != RecordKind::Decision || r.label != "cycle") return;
    auto g = [&](std::string_view k) { return num(r.get(k).value_or(0.0)); };
    const auto chosen = static_cast<decision::StrategyKind>(static_cast<int>(r.get("chosen").value_or(0.0)));
    out += g("cycle") + ',' + num(r.timestamp) + ',' + g("wt_N") + ',' + g("wt_S") + ',' + g("wt_E") + ',' +
           g("wt_W") + ',' + g("sim_H") + ',' + g("sim_y2") + ',' + g("sim_y3") + ',' +
           std::string(decision::to_string(chosen)) + ',' + g("n_yield") + ',' + g("n_wait") + '\n';
  });
  return out;
}

std::string network_csv(const Repository& repo) {
  std::string out(kNetworkHeader);
  out += '\n';
  repo.for_each([&](const MetricsRecord& r) {
    if (r.kind != RecordKind::Network) return;
    auto g = [&](std::string_view k) { return num(r.get(k).value_or(0.0)); };
    out += num(r.timestamp) + ',' + r.label + ',' + g("app") + ',' + g("occupancy") + ',' + g("overflow_events_cum") +
           ',' + g("reinstalls_cum") + ',' + g("f_max") + '\n';
  });
  return out;
}

std::string summary_csv(const RunSummary& summary) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& n : summary.network) {
    std::ostringstream line;
    line << n.policy << ',' << n.f_max << ',' << num(n.penetration) << ',' << n.n_of_events << ',' << n.n_re << ','
         << num(n.r_oc) << ',' << num(n.p_of) << ',' << num(n.p_re) << ',' << num(n.y) << ',' << n.app_id << ','
         << n.peak_cv << ',' << n.n_of_formula << ',' << n.n_of_formula_raw << '\n';
    out += line.str();
  }
  return out;
}

std::string run_summary_csv(const RunSummary& s) {
  std::ostringstream out;
  out << kRunSummaryHeader << '\n'
      << s.scenario_id << ',' << s.seed << ',' << num(s.r_av) << ',' << num(s.duration) << ',' << num(s.avg_waiting)
      << ',' << (s.no_traffic ? 1 : 0) << ',' << s.spawned << ',' << s.exited << ',' << s.cycles << '\n';
  return out.str();
}

RunSummary run_scenario(const ScenarioConfig& config, std::uint64_t seed, const fs::path& out, bool overwrite,
                        bool with_traces) {
  config.validate();
  prepare_dir(out, overwrite);
  auto result = simulate(config, seed, with_traces);
  write_file(out / "traffic.csv", traffic_csv(result.repository));
  write_file(out / "decisions.csv", decisions_csv(result.repository));
  write_file(out / "network.csv", network_csv(result.repository));
  write_file(out / "summary.csv", summary_csv(result.summary));
  write_file(out / "run_summary.csv", run_summary_csv(result.summary));
  write_file(out / "repository.tsv", result.repository.export_text());
  if (with_traces) {
    dt::save_trace(out / "pt_trace.csv", result.pt_trace);
    dt::save_trace(out / "dt_trace.csv", result.dt_trace);
  }
  return result.summary;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t r_av_index, std::uint64_t seed) {
  return mix_seed(mix_seed(base_seed, r_av_index), seed);
}

ScenarioConfig cell_config(const ScenarioConfig& config, double r_av, std::size_t f_max, sdvn::PolicyKind policy) {
  ScenarioConfig c = config;
  c.world.demand.r_av = r_av;
  c.network.f_max = {f_max};
  c.network.policies.clear();
  for (const auto& p : config.network.policies)
    if (p.kind == policy) c.network.policies.push_back(p);
  c.sweep = {};
  return c;
}

SweepResult sweep(const ScenarioConfig& config) {
  config.validate();
  if (config.sweep.empty()) throw ConfigError("sweep", "sweep section is empty");
  SweepConfig s = config.sweep;
  if (s.r_av.empty()) s.r_av = {config.world.demand.r_av};
  if (s.f_max.empty()) s.f_max = config.network.f_max;
  if (s.policies.empty())
    for (const auto& p : config.network.policies) s.policies.push_back(p.kind);
  if (s.seeds.empty()) s.seeds = {config.seed()};

  // Policy and capacity do not influence traffic, so one simulation per
  // (r_av, seed) serves every table of that pair.
  ScenarioConfig base = config;
  base.network.f_max = s.f_max;
  base.network.policies.clear();
  for (auto k : s.policies)
    for (const auto& p : config.network.policies)
      if (p.kind == k) base.network.policies.push_back(p);
  base.sweep = {};

  struct Job {
    std::size_t r_index;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < s.r_av.size(); ++r)
    for (auto seed : s.seeds) jobs.push_back({r, seed});

  std::vector<std::vector<SweepRow>> per_job(jobs.size());
  auto run_job = [&](std::size_t j) {
    const auto& job = jobs[j];
    const double r_av = s.r_av[job.r_index];
    const auto cs = cell_seed(config.seed(), job.r_index, job.seed);
    try {
      ScenarioConfig c = base;
      c.world.demand.r_av = r_av;
      const auto result = simulate(c, cs);
      for (const auto& n : result.summary.network) {
        SweepRow row{r_av, n.f_max, *sdvn::parse_policy_kind(n.policy), job.seed, cs, result.summary.avg_waiting, n};
        per_job[j].push_back(row);
      }
    } catch (const std::exception& e) {
      throw SweepError("sweep cell r_av=" + format_double(r_av) + " seed=" + std::to_string(job.seed) + ": " +
                       e.what());
    }
  };

  const std::size_t workers = std::min(s.workers, std::max<std::size_t>(jobs.size(), 1));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.push_back(std::async(std::launch::async, [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) run_job(j);
      }));
    for (auto& f : pool) f.get();
  }

  // Rows in r_av, f_max, policy, seed order.
  SweepResult out;
  for (std::size_t r = 0; r < s.r_av.size(); ++r)
    for (auto f : s.f_max)
      for (auto k : s.policies)
        for (std::size_t j = 0; j < jobs.size(); ++j) {
          if (jobs[j].r_index != r) continue;
          for (const auto& row : per_job[j])
            if (row.f_max == f && row.policy == k) out.rows.push_back(row);
        }
  out.aggregates = aggregate(out.rows);
  return out;
}

std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows) {
  std::vector<SweepAggregate> out;
  std::map<std::tuple<std::size_t, std::size_t, int>, std::size_t> index;
  std::vector<std::array<std::vector<double>, 7>> values;
  std::vector<std::tuple<double, std::size_t, sdvn::PolicyKind>> keys;
  std::vector<double> r_values;
  for (const auto& row : rows) {
    auto rit = std::find(r_values.begin(), r_values.end(), row.r_av);
    if (rit == r_values.end()) rit = r_values.insert(r_values.end(), row.r_av);
    const auto key = std::make_tuple(static_cast<std::size_t>(rit - r_values.begin()), row.f_max,
                                     static_cast<int>(row.policy));
    auto [it, inserted] = index.emplace(key, values.size());
    if (inserted) {
      values.emplace_back();
      keys.emplace_back(row.r_av, row.f_max, row.policy);
    }
    auto& v = values[it->second];
    const auto& n = row.network;
    const double metrics[7] = {row.avg_waiting, static_cast<double>(n.n_of_events), static_cast<double>(n.n_re),
                               n.r_oc, n.p_of, n.p_re, n.y};
    for (std::size_t m = 0; m < 7; ++m) v[m].push_back(metrics[m]);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepAggregate a;
    std::tie(a.r_av, a.f_max, a.policy) = keys[i];
    a.n = values[i][0].size();
    for (const auto& m : values[i]) a.stats.emplace_back(mean_of(m), sample_std(m));
    out.push_back(std::move(a));
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    const auto& n = r.network;
    out << num(r.r_av) << ',' << r.f_max << ',' << sdvn::to_string(r.policy) << ',' << r.seed << ',' << r.cell_seed
        << ',' << num(r.avg_waiting) << ',' << n.n_of_events << ',' << n.n_re << ',' << num(n.r_oc) << ','
        << num(n.p_of) << ',' << num(n.p_re) << ',' << num(n.y) << '\n';
  }
  return out.str();
}

std::string sweep_summary_csv(const std::vector<SweepAggregate>& aggregates) {
  std::ostringstream out;
  out << kSweepSummaryHeader << '\n';
  for (const auto& a : aggregates) {
    out << num(a.r_av) << ',' << a.f_max << ',' << sdvn::to_string(a.policy) << ',' << a.n;
    for (const auto& [m, sd] : a.stats) out << ',' << num(m) << ',' << num(sd);
    out << '\n';
  }
  return out.str();
}

SweepResult run_sweep(const ScenarioConfig& config, const fs::path& out, bool overwrite) {
  config.validate();
  prepare_dir(out, overwrite);
  auto result = sweep(config);
  write_file(out / "sweep.csv", sweep_csv(result.rows));
  write_file(out / "sweep_summary.csv", sweep_summary_csv(result.aggregates));
  return result;
}

}  // namespace rbtwin::scenario
