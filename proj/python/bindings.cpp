#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rbtwin/decision/strategy.hpp"
#include "rbtwin/dt/fidelity.hpp"
#include "rbtwin/dt/tau.hpp"
#include "rbtwin/scenario/runner.hpp"
#include "rbtwin/sdvn/metrics.hpp"
#include "rbtwin/traffic/demand.hpp"
#include "rbtwin/traffic/waiting.hpp"

namespace py = pybind11;
using namespace rbtwin;

namespace {

traffic::LaneId lane_from(const std::string& name) {
  auto lane = traffic::parse_lane(name);
  if (!lane) throw py::value_error("unknown lane '" + name + "'");
  return *lane;
}

decision::LaneWaits waits_from(const std::map<std::string, double>& m) {
  decision::LaneWaits w{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto name = std::string(traffic::to_string(traffic::kInboundLanes[i]));
    auto it = m.find(name);
    if (it == m.end()) throw py::value_error("missing lane '" + name + "'");
    w[i] = it->second;
  }
  return w;
}

std::vector<std::string> lane_names(const decision::Strategy& s) {
  std::vector<std::string> out;
  for (auto l : s.lanes()) out.emplace_back(traffic::to_string(l));
  return out;
}

py::dict network_dict(const sdvn::NetworkSummary& n) {
  py::dict d;
  d["policy"] = n.policy;
  d["f_max"] = n.f_max;
  d["app"] = n.app_id;
  d["penetration"] = n.penetration;
  d["N_of_events"] = n.n_of_events;
  d["N_re"] = n.n_re;
  d["R_oc"] = n.r_oc;
  d["p_of"] = n.p_of;
  d["p_re"] = n.p_re;
  d["y"] = n.y;
  d["peak_cv"] = n.peak_cv;
  return d;
}

py::dict summary_dict(const scenario::RunSummary& s) {
  py::dict d;
  d["scenario_id"] = s.scenario_id;
  d["seed"] = s.seed;
  d["r_av"] = s.r_av;
  d["duration"] = s.duration;
  d["avg_waiting"] = s.avg_waiting;
  d["no_traffic"] = s.no_traffic;
  d["spawned"] = s.spawned;
  d["exited"] = s.exited;
  d["cycles"] = s.cycles;
  py::list net;
  for (const auto& n : s.network) net.append(network_dict(n));
  d["network"] = net;
  return d;
}

std::vector<dt::Detection> detections_from(const std::vector<std::tuple<double, double>>& samples) {
  std::vector<dt::Detection> out;
  std::uint64_t id = 0;
  for (const auto& [t, v] : samples) out.push_back({t, ++id, dt::Category::Car, traffic::LaneId::NorthIn, 0.0, v});
  return out;
}

}  // namespace

PYBIND11_MODULE(_rbtwin, m) {
  m.doc() = "Roundabout digital-twin co-simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("hv_volume", &traffic::hv_volume, py::arg("vol_total"), py::arg("r_av"));

  m.def(
      "compute_y1", [](const std::map<std::string, double>& w) {
        return std::string(traffic::to_string(decision::compute_y1(waits_from(w))));
      },
      py::arg("lane_wts"), "Inbound lane with the largest accumulated waiting time.");
  m.def(
      "build_y2", [](const std::string& y1) { return lane_names(decision::build_y2(lane_from(y1))); },
      py::arg("y1"));
  m.def(
      "build_y3", [](const std::map<std::string, double>& w) { return lane_names(decision::build_y3(waits_from(w))); },
      py::arg("lane_wts"));

  m.def("n_of", &sdvn::n_of, py::arg("num_cv"), py::arg("f_max"));
  m.def("n_of_raw", &sdvn::n_of_raw, py::arg("num_cv"), py::arg("f_max"));
  m.def(
      "n_re",
      [](const std::vector<std::uint64_t>& installed, const std::vector<std::uint64_t>& removed) {
        std::vector<sdvn::FlowKey> f, r;
        for (auto id : installed) f.push_back({id, sdvn::Direction::ToApp});
        for (auto id : removed) r.push_back({id, sdvn::Direction::ToApp});
        return sdvn::n_re(f, r);
      },
      py::arg("installed"), py::arg("removed"), "|installed ∩ removed| over flow keys given as integers.");
  m.def(
      "r_oc", [](const std::vector<std::size_t>& history, std::size_t f_max) { return sdvn::r_oc(history, f_max); },
      py::arg("occupancy"), py::arg("f_max"));
  m.def("objective_y", &sdvn::objective_y, py::arg("p_of"), py::arg("p_re"), py::arg("r_oc"));

  m.def("quantile", &dt::quantile, py::arg("samples"), py::arg("q"));
  m.def(
      "estimate_tau",
      [](const std::vector<double>& durations, double D, std::size_t n_min) {
        dt::TauConfig c;
        c.n_min = n_min;
        return dt::estimate_tau(durations, D, c);
      },
      py::arg("durations"), py::arg("D") = 50.0, py::arg("n_min") = 5);
  m.def(
      "fidelity_rmse",
      [](const std::vector<std::tuple<double, double>>& pt, const std::vector<std::tuple<double, double>>& dt_,
         double bin) { return dt::compute_fidelity(detections_from(pt), detections_from(dt_), bin).rmse; },
      py::arg("pt"), py::arg("dt"), py::arg("bin_width") = 60.0, "RMSE of binned mean speeds of (t, speed) samples.");
  m.def(
      "fidelity_files",
      [](const std::filesystem::path& pt, const std::filesystem::path& dt_, double bin) {
        return dt::compute_fidelity(dt::load_trace(pt), dt::load_trace(dt_), bin).rmse;
      },
      py::arg("pt_trace"), py::arg("dt_trace"), py::arg("bin_width") = 60.0);

  m.def(
      "normalize_config", [](const std::string& text) { return scenario::serialize_config(scenario::parse_config(text)); },
      py::arg("config_json"), "Validates a JSON scenario config and returns it with every default filled in.");
  m.def(
      "simulate",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        const auto config = scenario::parse_config(text);
        scenario::ScenarioResult result;
        {
          py::gil_scoped_release release;
          result = scenario::simulate(config, seed.value_or(config.seed()));
        }
        return summary_dict(result.summary);
      },
      py::arg("config_json"), py::arg("seed") = py::none(), "Runs a scenario in memory and returns its summary.");
  m.def(
      "run_scenario",
      [](const std::string& text, const std::filesystem::path& out, std::optional<std::uint64_t> seed, bool overwrite,
         bool trace) {
        const auto config = scenario::parse_config(text);
        py::gil_scoped_release release;
        auto s = scenario::run_scenario(config, seed.value_or(config.seed()), out, overwrite, trace);
        py::gil_scoped_acquire acquire;
        return summary_dict(s);
      },
      py::arg("config_json"), py::arg("out"), py::arg("seed") = py::none(), py::arg("overwrite") = false,
      py::arg("trace") = false);
  m.def(
      "run_sweep",
      [](const std::string& text, const std::filesystem::path& out, bool overwrite) {
        const auto config = scenario::parse_config(text);
        py::gil_scoped_release release;
        return scenario::run_sweep(config, out, overwrite).rows.size();
      },
      py::arg("config_json"), py::arg("out"), py::arg("overwrite") = false, "Returns the number of sweep rows.");

  py::class_<traffic::World>(m, "World")
      .def(py::init([](const std::string& text, std::optional<std::uint64_t> seed) {
             auto config = scenario::parse_config(text);
             auto w = config.world;
             if (seed) w.demand.seed = *seed;
             return traffic::World(w);
           }),
           py::arg("config_json") = "{}", py::arg("seed") = py::none())
      .def("step", &traffic::World::step)
      .def("run_for", &traffic::World::run_for, py::arg("seconds"))
      .def_property_readonly("clock", &traffic::World::clock)
      .def_property_readonly("vehicle_count", [](const traffic::World& w) { return w.vehicles().size(); })
      .def_property_readonly("spawned_total", &traffic::World::spawned_total)
      .def_property_readonly("exited_total", &traffic::World::exited_total)
      .def("lane_wt", [](const traffic::World& w, const std::string& lane) { return traffic::lane_wt(w, lane_from(lane)); })
      .def("avg_waiting",
           [](const traffic::World& w) {
             return w.total_inbound_count() > 0 ? w.total_wt_sum() / w.total_inbound_count() : 0.0;
           })
      .def("min_bumper_gap", &traffic::World::min_bumper_gap)
      .def("checksum", &traffic::World::checksum)
      .def("copy", [](const traffic::World& w) { return traffic::World(w); });
}
