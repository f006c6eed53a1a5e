// higvf: headless driver for scenarios, scripted interventions, exports,
// probes, validation and field rasters.

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "higvf/engine.hpp"
#include "higvf/world.hpp"

#ifdef HIGVF_WITH_GATEWAY
#include "higvf/gateway.hpp"
#endif

namespace fs = std::filesystem;
using namespace higvf;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kLoadFailure = 3,
  kProbeViolation = 4,
  kSafetyViolation = 5,
  kGoldenMismatch = 6,
  kIoFailure = 7,
};

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<ScriptEntry> loadScript(const std::string& path) {
  return scriptFromJson(nlohmann::json::parse(readFile(path)));
}

std::atomic<bool> g_stop{false};

struct RunOptions {
  std::string scenario;
  double duration{120.0};
  double dt{0.0};
  std::string out{"out"};
  std::string script;  // "" = scenario's own, "none" = no script
  std::string golden;
  bool strict{false};
  int serve{-1};
  double rate{1.0};
};

int cmdRun(const RunOptions& o) {
  ScenarioConfig cfg;
  World world;
  try {
    cfg = readScenarioFile(o.scenario);
    if (o.dt > 0.0) cfg.params.dt = o.dt;
    if (!o.script.empty()) cfg.human_script = o.script == "none" ? std::vector<ScriptEntry>{} : loadScript(o.script);
    world = buildWorld(cfg);
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kLoadFailure;
  } catch (const std::exception& e) {
    std::cerr << "cannot load: " << e.what() << "\n";
    return kLoadFailure;
  }
  if (!(o.duration > 0.0)) {
    std::cerr << "--duration must be > 0\n";
    return kUsage;
  }

  Engine engine(std::move(world));

#ifdef HIGVF_WITH_GATEWAY
  std::unique_ptr<Gateway> gateway;
  if (o.serve >= 0) {
    gateway = std::make_unique<Gateway>(engine.queue(), GatewayOptions{"0.0.0.0", static_cast<unsigned short>(o.serve)});
    engine.setObserver([&](const World& w, const TickRecord& r) {
      gateway->publish(std::make_shared<const World>(w), r);
    });
    gateway->publish(std::make_shared<const World>(engine.world()), engine.lastRecord());
    try {
      gateway->start();
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kIoFailure;
    }
    std::cerr << "serving on port " << gateway->port() << "\n";
    std::signal(SIGINT, [](int) { g_stop = true; });
    std::signal(SIGTERM, [](int) { g_stop = true; });
  }
#else
  if (o.serve >= 0) {
    std::cerr << "this build has no gateway support (--serve)\n";
    return kUsage;
  }
#endif

  const long ticks = std::lround(o.duration / engine.world().params.dt);
  const auto step = std::chrono::duration<double>(engine.world().params.dt / std::max(o.rate, 1e-6));
  auto next = std::chrono::steady_clock::now();
  for (long k = 0; k < ticks && !g_stop; ++k) {
    engine.tick();
    if (o.serve >= 0) {
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(step);
      std::this_thread::sleep_until(next);
    }
  }
#ifdef HIGVF_WITH_GATEWAY
  if (gateway) gateway->stop();
#endif

  const std::string traj = trajectoryCsv(engine.records());
  const LossReport loss = lossReport(engine.world());
  const StabilityReport probe = stabilityProbe(engine.records(), cfg.weights);
  const SafetySummary safety = safetySummary(engine.world(), engine.records());
  try {
    fs::create_directories(o.out);
    writeFile(fs::path(o.out) / "trajectory.csv", traj);
    writeFile(fs::path(o.out) / "loss.csv", formatLossTable({{cfg.name.empty() ? "run" : cfg.name, loss}}));
    char buf[256];
    std::snprintf(buf, sizeof buf, "min_robot_distance,%.17g\nmin_obstacle_clearance,%.17g\nmax_speed,%.17g\n",
                  safety.min_robot_distance, safety.min_obstacle_clearance, safety.max_speed);
    writeFile(fs::path(o.out) / "probe.csv", formatStabilityReport(probe) + buf);
    writeFile(fs::path(o.out) / "events.csv", eventsCsv(engine.events()));
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kIoFailure;
  }

  std::printf("ticks %zu, loss total %.6f, iss ratio %.4f, min robot distance %.4f, min obstacle clearance %.4f\n",
              engine.records().size(), loss.total, probe.ratio, safety.min_robot_distance,
              safety.min_obstacle_clearance);

  if (!o.golden.empty()) {
    std::string ref;
    try {
      ref = readFile(o.golden);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kIoFailure;
    }
    if (ref != traj) {
      std::cerr << "trajectory differs from golden record " << o.golden << "\n";
      return kGoldenMismatch;
    }
    std::printf("golden record matches\n");
  }
  if (o.strict) {
    if (!safety.ok(cfg.safety, cfg.weights.speed)) {
      std::cerr << "safety violation\n";
      return kSafetyViolation;
    }
    if (!probe.ok()) {
      std::cerr << "stability probe violation\n";
      return kProbeViolation;
    }
  }
  return kOk;
}

int cmdValidate(const std::string& path) {
  try {
    const World w = buildWorld(readScenarioFile(path));
    std::printf("valid: %zu robots, %zu fires, %zu obstacles, %zu edges\n", w.robots.size(), w.fires.size(),
                w.obstacles.size(), w.edges.size());
    return kOk;
  } catch (const ScenarioError& e) {
    std::cerr << "invalid: " << e.entity() << ": " << e.invariant() << "\n";
    return kLoadFailure;
  } catch (const std::exception& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kLoadFailure;
  }
}

struct DumpOptions {
  std::string scenario;
  int nx{50};
  int ny{50};
  std::vector<double> bounds;  // xmin ymin xmax ymax
  std::string out;
};

int cmdFieldDump(const DumpOptions& o) {
  World w;
  try {
    w = buildWorld(readScenarioFile(o.scenario));
  } catch (const std::exception& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kLoadFailure;
  }
  if (o.nx < 1 || o.ny < 1) {
    std::cerr << "grid must be at least 1x1\n";
    return kUsage;
  }
  double x0, y0, x1, y1;
  if (o.bounds.size() == 4) {
    x0 = o.bounds[0], y0 = o.bounds[1], x1 = o.bounds[2], y1 = o.bounds[3];
  } else {
    x0 = y0 = 1e300;
    x1 = y1 = -1e300;
    const auto grow = [&](const Vec2& p, double r) {
      x0 = std::min(x0, p.x - r), y0 = std::min(y0, p.y - r);
      x1 = std::max(x1, p.x + r), y1 = std::max(y1, p.y + r);
    };
    for (const RobotState& r : w.robots) grow(r.position, 50.0);
    for (const FireSource& f : w.fires) grow(f.position, f.radius + 50.0);
    for (const ObstacleField& ob : w.obstacles) grow(ob.center(), std::max(ob.reactiveSemiAxisA(), ob.reactiveSemiAxisB()) + 50.0);
    if (w.human_path && w.human_path->isCircle()) {
      const auto& c = std::get<CirclePath>(w.human_path->shape);
      grow(c.center, c.radius + 50.0);
    }
  }

  std::string out = "x,y,phi,fx,fy,zero_in";
  for (std::size_t k = 0; k < w.obstacles.size(); ++k) out += ",zero_in_" + std::to_string(k);
  out += '\n';
  std::vector<int> circ(w.obstacles.size(), 1);
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  };
  for (int j = 0; j < o.ny; ++j) {
    for (int i = 0; i < o.nx; ++i) {
      const Vec2 xi{o.nx == 1 ? x0 : x0 + (x1 - x0) * i / (o.nx - 1), o.ny == 1 ? y0 : y0 + (y1 - y0) * j / (o.ny - 1)};
      double phi = 0.0;
      Vec2 field;
      if (w.human_path) {
        phi = evaluate(*w.human_path, xi).value;
        const Vec2 heading = pathField(*w.human_path, xi);
        for (std::size_t k = 0; k < w.obstacles.size(); ++k) circ[k] = latchObstacleDirection(w.obstacles[k], xi, heading);
        field = compositeField(*w.human_path, w.obstacles, xi, circ);
      }
      num(xi.x);
      out += ',';
      num(xi.y);
      out += ',';
      num(phi);
      out += ',';
      num(field.x);
      out += ',';
      num(field.y);
      out += ',';
      num(zeroInProduct(w.obstacles, xi));
      for (const ObstacleField& ob : w.obstacles) {
        out += ',';
        num(bumpZeroIn(ob, xi));
      }
      out += '\n';
    }
  }
  try {
    if (o.out.empty() || o.out == "-") {
      std::fwrite(out.data(), 1, out.size(), stdout);
    } else {
      writeFile(o.out, out);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kIoFailure;
  }
  return kOk;
}

struct CompareOptions {
  std::string scenario;
  double duration{120.0};
  std::vector<std::string> variants;  // name=script
};

int cmdCompare(const CompareOptions& o) {
  std::vector<std::pair<std::string, LossReport>> columns;
  for (const std::string& v : o.variants) {
    const auto eq = v.find('=');
    if (eq == std::string::npos) {
      std::cerr << "variant must be name=script (script may be 'none')\n";
      return kUsage;
    }
    const std::string name = v.substr(0, eq);
    const std::string script = v.substr(eq + 1);
    try {
      ScenarioConfig cfg = readScenarioFile(o.scenario);
      cfg.human_script = script == "none" ? std::vector<ScriptEntry>{} : loadScript(script);
      Engine e(buildWorld(cfg));
      e.setRecording(false);
      e.run(o.duration);
      columns.emplace_back(name, lossReport(e.world()));
    } catch (const std::exception& e) {
      std::cerr << name << ": " << e.what() << "\n";
      return kLoadFailure;
    }
  }
  std::fputs(formatLossTable(columns).c_str(), stdout);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-influenced guiding vector field multi-robot simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trajectory, loss and probe reports");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--duration", run.duration, "Simulated seconds")->capture_default_str();
  run_cmd->add_option("--dt", run.dt, "Override the scenario time step");
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--script", run.script, "Human script file, or 'none'");
  run_cmd->add_option("--golden", run.golden, "Compare the trajectory byte-for-byte with this file");
  run_cmd->add_flag("--strict", run.strict, "Nonzero exit on probe or safety violations");
  run_cmd->add_option("--serve", run.serve, "Serve the operator gateway on this port (real-time pacing)");
  run_cmd->add_option("--rate", run.rate, "Simulated seconds per wall second when serving")->capture_default_str();

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "Check a scenario without simulating");
  val_cmd->add_option("scenario", validate_path, "Scenario file")->required();

  DumpOptions dump;
  auto* dump_cmd = app.add_subcommand("field-dump", "Raster of the composite field and zero-in bumps");
  dump_cmd->add_option("--scenario", dump.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  dump_cmd->add_option("--nx", dump.nx, "Grid columns")->capture_default_str();
  dump_cmd->add_option("--ny", dump.ny, "Grid rows")->capture_default_str();
  dump_cmd->add_option("--bounds", dump.bounds, "xmin ymin xmax ymax")->expected(4);
  dump_cmd->add_option("--out", dump.out, "Output file ('-' for stdout)");

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Loss table over script variants of one scenario");
  cmp_cmd->add_option("--scenario", cmp.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--duration", cmp.duration, "Simulated seconds")->capture_default_str();
  cmp_cmd->add_option("--variant", cmp.variants, "name=script (script may be 'none')")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*run_cmd) return cmdRun(run);
  if (*val_cmd) return cmdValidate(validate_path);
  if (*dump_cmd) return cmdFieldDump(dump);
  if (*cmp_cmd) return cmdCompare(cmp);
  return kUsage;
}
