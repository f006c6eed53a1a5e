#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "higvf/engine.hpp"
#include "higvf/safety_qp.hpp"
#include "higvf/world.hpp"

namespace py = pybind11;
using namespace higvf;

namespace {

using Pair = std::tuple<double, double>;

Pair pair(const Vec2& v) { return {v.x, v.y}; }

py::dict robotDict(const RobotRecord& r) {
  py::dict d;
  d["position"] = pair(r.position);
  d["target"] = pair(r.target);
  d["shared"] = pair(r.shared);
  d["human"] = pair(r.human);
  d["safe"] = pair(r.safe);
  d["lambda"] = r.lambda;
  d["target_id"] = r.target_id;
  d["influenced"] = r.influenced;
  return d;
}

py::dict tickDict(const TickRecord& t) {
  py::list robots;
  for (const auto& r : t.robots) robots.append(robotDict(r));
  py::dict d;
  d["tick"] = t.tick;
  d["clock"] = t.clock;
  d["robots"] = robots;
  d["fire_radii"] = t.fire_radii;
  d["consensus_error"] = t.consensus_error;
  return d;
}

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg) : engine_(std::make_unique<Engine>(buildWorld(cfg))) {}

  static Simulation fromJson(const std::string& text) { return Simulation(parseScenario(text)); }
  static Simulation fromFile(const std::string& path) { return Simulation(readScenarioFile(path)); }

  void setScript(const std::string& text) { engine_->setScript(scriptFromJson(nlohmann::json::parse(text))); }

  long submit(const std::string& command) {
    return engine_->submit({commandFromJson(nlohmann::json::parse(command)), engine_->world().clock});
  }

  py::dict tick() { return tickDict(engine_->tick()); }
  void run(double duration) { engine_->run(duration); }

  double clock() const { return engine_->world().clock; }
  long ticks() const { return engine_->world().tick; }
  std::vector<Pair> positions() const {
    std::vector<Pair> out;
    for (const auto& r : engine_->world().robots) out.push_back(pair(r.position));
    return out;
  }
  std::tuple<std::vector<double>, double> loss() const {
    const LossReport l = lossReport(engine_->world());
    return {l.areas, l.total};
  }
  std::string trajectory() const { return trajectoryCsv(engine_->records()); }
  std::string events() const { return eventsCsv(engine_->events()); }
  py::dict safety() const {
    const SafetySummary s = safetySummary(engine_->world(), engine_->records());
    py::dict d;
    d["min_robot_distance"] = s.min_robot_distance;
    d["min_obstacle_clearance"] = s.min_obstacle_clearance;
    return d;
  }

 private:
  std::unique_ptr<Engine> engine_;
};

std::tuple<Pair, bool> solveQp(Pair desired, const std::vector<std::tuple<double, double, double>>& constraints) {
  std::vector<LinearConstraint> cs;
  for (const auto& [ax, ay, b] : constraints) cs.push_back({{ax, ay}, b});
  const QpResult r = solveQp2d({std::get<0>(desired), std::get<1>(desired)}, cs);
  return {pair(r.velocity), r.feasible};
}

}  // namespace

PYBIND11_MODULE(_higvf, m) {
  m.doc() = "Shared-control guiding vector field simulator";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<CommandError>(m, "CommandError", PyExc_ValueError);

  py::class_<Simulation>(m, "Simulation")
      .def_static("from_json", &Simulation::fromJson, py::arg("text"))
      .def_static("from_file", &Simulation::fromFile, py::arg("path"))
      .def("set_script", &Simulation::setScript, py::arg("script_json"),
           "Replace the timed command script (JSON list of {t, command}).")
      .def("submit", &Simulation::submit, py::arg("command_json"),
           "Queue a command; returns the tick that applies it.")
      .def("tick", &Simulation::tick)
      .def("run", &Simulation::run, py::arg("duration"))
      .def_property_readonly("clock", &Simulation::clock)
      .def_property_readonly("ticks", &Simulation::ticks)
      .def("positions", &Simulation::positions)
      .def("loss", &Simulation::loss, "(per-fire areas, total)")
      .def("trajectory_csv", &Simulation::trajectory)
      .def("events_csv", &Simulation::events)
      .def("safety", &Simulation::safety);

  m.def("solve_qp", &solveQp, py::arg("desired"), py::arg("constraints"),
        "min |v - desired|^2 s.t. a.v <= b for each (ax, ay, b); returns ((vx, vy), feasible).");
  m.def(
      "validate_scenario", [](const std::string& text) { buildWorld(parseScenario(text)); }, py::arg("text"),
      "Raises ScenarioError naming the offending entity.");
}
