// One line per acceptance criterion: "PASS <n> <summary>" or "FAIL <n> <summary>".
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "higvf/engine.hpp"

using namespace higvf;

#ifndef HIGVF_SCENARIO_DIR
#define HIGVF_SCENARIO_DIR "scenarios"
#endif

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kBand = 0.02;
constexpr double kTol = 1e-3;

std::string path(const std::string& name) { return std::string(HIGVF_SCENARIO_DIR) + "/" + name; }

struct Run {
  World initial;
  World final;
  std::vector<TickRecord> records;
  std::vector<EngineEvent> events;
  double seconds{0.0};
};

Run simulate(const std::string& scenario, double duration, const std::string& script = "") {
  ScenarioConfig cfg = readScenarioFile(path(scenario));
  if (!script.empty()) {
    std::FILE* f = std::fopen(path(script).c_str(), "rb");
    std::string text;
    char buf[4096];
    for (std::size_t n; f && (n = std::fread(buf, 1, sizeof buf, f)) > 0;) text.append(buf, n);
    if (f) std::fclose(f);
    cfg.human_script = scriptFromJson(nlohmann::json::parse(text));
  }
  const auto t0 = Clock::now();
  Run r{buildWorld(cfg), buildWorld(cfg), {}, {}, 0.0};
  Engine e(r.initial);
  e.run(duration);
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  r.final = e.world();
  r.records = e.records();
  r.events = e.events();
  return r;
}

// |phi| / (2R) against the scenario circle.
double bandError(const World& w, Vec2 p) {
  const auto& spec = *w.config.human_path;
  return std::abs((p - spec.center).squaredNorm() - spec.radius * spec.radius) / (2.0 * spec.radius);
}

struct BandResult {
  double first_in{-1.0};  ///< first time in band after `from`
  double last_out{-1.0};  ///< last time out of band after first_in
  double settled{-1.0};   ///< first in-band tick with no later exit
};

BandResult bandFor(const Run& run, int robot, double from, double to) {
  BandResult b;
  for (const TickRecord& t : run.records) {
    if (t.clock <= from || t.clock > to) continue;
    const bool in = bandError(run.initial, t.robots[robot].position) < kBand;
    if (in && b.first_in < 0) b.first_in = t.clock;
    if (!in && b.first_in >= 0) b.last_out = t.clock;
    if (!in) b.settled = -1.0;
    else if (b.settled < 0) b.settled = t.clock;
  }
  return b;
}

struct Safety {
  double robot{std::numeric_limits<double>::infinity()};
  double obstacle{std::numeric_limits<double>::infinity()};  ///< spine distance
  double repulsive_margin{std::numeric_limits<double>::infinity()};  ///< min phi - c
  int violation_events{0};
};

Safety safetyOf(const Run& run) {
  Safety s;
  const auto& obs = run.initial.obstacles;
  for (const TickRecord& t : run.records) {
    for (std::size_t i = 0; i < t.robots.size(); ++i) {
      const Vec2 p = t.robots[i].position;
      for (std::size_t j = i + 1; j < t.robots.size(); ++j) s.robot = std::min(s.robot, distance(p, t.robots[j].position));
      for (const ObstacleField& o : obs) {
        s.obstacle = std::min(s.obstacle, distance(p, o.spinePoint(p)));
        s.repulsive_margin = std::min(s.repulsive_margin, o.evaluate(p).value - o.repulsiveLevel());
      }
    }
  }
  for (const EngineEvent& e : run.events) {
    if (e.kind == EngineEvent::Kind::kRobotViolation || e.kind == EngineEvent::Kind::kObstacleViolation) {
      ++s.violation_events;
    }
  }
  return s;
}

bool safe(const Run& run, const Safety& s) {
  return s.robot >= run.initial.safety.robot_distance - kTol && s.obstacle >= run.initial.safety.obstacle_distance - kTol &&
         s.violation_events == 0;
}

int failures = 0;

void report(int id, bool ok, const std::string& summary) {
  std::printf("%s %d %s\n", ok ? "PASS" : "FAIL", id, summary.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

void pathFollowing() {
  bool ok = true;
  std::string detail;
  for (const char* s : {"case1_inside.scn", "case1_outside.scn"}) {
    const Run r = simulate(s, 120.0);
    const int k = r.initial.influencedRobot();
    const BandResult b = bandFor(r, k, 0.0, 120.0);
    const bool pass = b.settled >= 0 && b.settled <= 30.0 && r.seconds < 5.0;
    ok = ok && pass;
    detail += fmt("%s: first in band %.2fs, in band for good from %.2fs, %.2fs wall; ", s, b.first_in, b.settled,
                  r.seconds);
  }
  report(1, ok, "path following: " + detail);
}

void robotSwitch() {
  const Run r = simulate("case2_switch.scn", 120.0);
  double t_switch = -1;
  int to = -1;
  for (const auto& e : r.initial.config.human_script) {
    if (const auto* s = std::get_if<SelectRobot>(&e.command.payload)) {
      t_switch = e.time;
      to = s->robot;
    }
  }
  const int from = r.initial.influencedRobot();
  const BandResult before = bandFor(r, from, 0.0, t_switch);
  const BandResult after = bandFor(r, to, t_switch, 120.0);
  const BandResult old_after = bandFor(r, from, t_switch + 30.0, 120.0);
  int max_psi = 0;
  for (const TickRecord& t : r.records) {
    int n = 0;
    for (const auto& rr : t.robots) n += rr.influenced ? 1 : 0;
    max_psi = std::max(max_psi, n);
  }
  const Safety s = safetyOf(r);
  const bool old_left = old_after.first_in < 0 || old_after.last_out >= 0;
  const bool ok = before.first_in >= 0 && before.first_in <= 30.0 && before.last_out < 0 && after.first_in >= 0 &&
                  after.first_in - t_switch <= 30.0 && after.last_out < 0 && old_left && max_psi == 1 && safe(r, s) &&
                  r.seconds < 5.0;
  report(2, ok,
         fmt("robot switch %d->%d at %.0fs: new robot in band %.2fs after, old robot %s band, max influenced per "
             "tick %d, min robot distance %.3f, %.2fs wall",
             from, to, t_switch, after.first_in - t_switch, old_left ? "leaves" : "stays in", max_psi, s.robot,
             r.seconds));
}

void obstacleTraversal() {
  const Run r = simulate("case3_obstacles.scn", 120.0);
  const Safety s = safetyOf(r);
  const int k = r.initial.influencedRobot();
  // Reactive-area exits of the influenced robot, then time until back in band.
  std::vector<double> exits;
  bool inside = false;
  for (const TickRecord& t : r.records) {
    bool now = false;
    for (const ObstacleField& o : r.initial.obstacles) now = now || o.evaluate(t.robots[k].position).value <= 0.0;
    if (inside && !now) exits.push_back(t.clock);
    inside = now;
  }
  double worst = 0.0;
  for (double e : exits) {
    const BandResult b = bandFor(r, k, e - 1e-9, 120.0);
    const double back = b.first_in < 0 ? std::numeric_limits<double>::infinity() : b.first_in - e;
    if (e + 15.0 <= 120.0 || b.first_in >= 0) worst = std::max(worst, back);
  }
  const bool ok = s.repulsive_margin > 0.0 && s.obstacle >= r.initial.safety.obstacle_distance - kTol && !exits.empty() &&
                  worst <= 15.0 && r.seconds < 5.0;
  report(3, ok,
         fmt("obstacle traversal: %zu reactive exits, worst re-entry %.2fs, min spine clearance %.3f (Ro %.0f), "
             "min phi - c %.4f, %.2fs wall",
             exits.size(), worst, s.obstacle, r.initial.safety.obstacle_distance, s.repulsive_margin, r.seconds));
}

struct Shipped {
  std::string scenario;
  std::string script;
  double duration;
};

const std::vector<Shipped> kShipped{
    {"case1_inside.scn", "", 120.0},    {"case1_outside.scn", "", 120.0},
    {"case1_center.scn", "", 120.0},    {"case2_switch.scn", "", 120.0},
    {"case3_obstacles.scn", "", 120.0}, {"table1.scn", "", 300.0},
    {"table1.scn", "change_priority.script", 300.0}, {"table1.scn", "find_undetected.script", 300.0},
};

void safetyInvariants() {
  bool ok = true;
  double wall = 0, min_r = INFINITY, min_o = INFINITY;
  for (const Shipped& s : kShipped) {
    const Run r = simulate(s.scenario, s.duration, s.script);
    const Safety sf = safetyOf(r);
    ok = ok && safe(r, sf);
    wall += r.seconds;
    min_r = std::min(min_r, sf.robot);
    min_o = std::min(min_o, sf.obstacle);
  }
  ok = ok && wall < 20.0;
  report(4, ok,
         fmt("safety over %zu shipped runs: min robot distance %.3f, min obstacle clearance %.3f, %.2fs wall",
             kShipped.size(), min_r, min_o, wall));
}

// Grid-search oracle. A feasible desired velocity is its own answer; otherwise
// the minimizer lies on some constraint line, so each line is sampled on a 1-D
// grid (step 1e-3, then 1e-6 around the best sample) keeping feasible points.
Vec2 gridOracle(Vec2 desired, const std::vector<LinearConstraint>& cs) {
  const auto feasible = [&](Vec2 v) {
    for (const auto& c : cs) {
      if (c.a.dot(v) > c.b + 1e-12) return false;
    }
    return true;
  };
  if (feasible(desired)) return desired;
  Vec2 best;
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& c : cs) {
    const double n = c.a.norm();
    if (n == 0.0) continue;
    const Vec2 base = c.a * (c.b / (n * n));
    const Vec2 dir{-c.a.y / n, c.a.x / n};
    double center = 0.0, step = 1e-3, half = 20.0;
    for (int round = 0; round < 2; ++round) {
      const long count = static_cast<long>(2 * half / step);
      double round_best = std::numeric_limits<double>::infinity(), round_t = center;
      for (long i = 0; i <= count; ++i) {
        const double t = center - half + i * step;
        const Vec2 v = base + dir * t;
        const double f = (v - desired).squaredNorm();
        if (f < round_best && feasible(v)) {
          round_best = f;
          round_t = t;
        }
      }
      if (round_best == std::numeric_limits<double>::infinity()) break;
      center = round_t;
      half = 2 * step;
      step = 1e-6;
      if (round_best < best_f) {
        best_f = round_best;
        best = base + dir * center;
      }
    }
  }
  return best;
}

void qpCorrectness() {
  std::mt19937 rng(20240501);
  std::uniform_real_distribution<double> u(-1, 1), pos(0.05, 1.0);
  std::uniform_int_distribution<int> count(1, 8);
  double worst = 0;
  int exact = 0, feasible_inputs = 0, infeasible_solutions = 0;
  for (int inst = 0; inst < 200; ++inst) {
    std::vector<LinearConstraint> cs;
    const int m = count(rng);
    for (int k = 0; k < m; ++k) {
      const double ang = M_PI * u(rng);
      cs.push_back({{std::cos(ang), std::sin(ang)}, pos(rng)});
    }
    const Vec2 d{3 * u(rng), 3 * u(rng)};
    const QpResult res = solveQp2d(d, cs);
    if (!res.feasible) ++infeasible_solutions;
    bool desired_ok = true;
    for (const auto& c : cs) desired_ok = desired_ok && c.satisfiedBy(d);
    if (desired_ok) {
      ++feasible_inputs;
      if (res.velocity == d) ++exact;
    }
    worst = std::max(worst, (gridOracle(d, cs) - res.velocity).norm());
  }
  const bool ok = worst <= 2e-3 && exact == feasible_inputs && infeasible_solutions == 0;
  report(5, ok,
         fmt("QP: 200 instances, max deviation from grid oracle %.2e, %d/%d feasible inputs returned unchanged", worst,
             exact, feasible_inputs));
}

void bumpMath() {
  std::mt19937 rng(77);
  // S + Z in the mixed region
  double sz = 0;
  std::uniform_real_distribution<double> lv(-0.95, -0.05), frac(1e-6, 1.0 - 1e-6), gain(0.1, 4.0);
  for (int i = 0; i < 10000; ++i) {
    const double c = lv(rng), phi = c * frac(rng);
    const BumpPair b = bumps(phi, c, gain(rng), gain(rng));
    sz = std::max(sz, std::abs(b.zero_in + b.zero_out - 1.0));
  }
  // sum form vs branch form, two obstacles with disjoint reactive areas
  const auto path = ImplicitPath::circle({250, 300}, 250, 1, 0.002);
  const std::vector<ObstacleField> obs{ObstacleField(DiskBody{{250, 570}, 20}),
                                       ObstacleField(BarBody{{250, 25}, 40, 8, 0.3})};
  std::uniform_real_distribution<double> ux(150, 350), side(0, 1);
  std::uniform_int_distribution<int> sign(0, 1);
  double eq = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec2 xi{ux(rng), side(rng) < 0.5 ? 470 + 200 * side(rng) : -75 + 200 * side(rng)};
    const std::vector<int> circ{sign(rng) ? 1 : -1, sign(rng) ? 1 : -1};
    const Vec2 a = compositeField(path, obs, xi, circ), b = compositeFieldBranches(path, obs, xi, circ);
    eq = std::max({eq, std::abs(a.x - b.x), std::abs(a.y - b.y)});
  }
  // gradients against central differences, step 1e-3
  const double h = 1e-3;
  std::uniform_real_distribution<double> w(-400, 800);
  const auto spline = pathFromPolyline(std::vector<Vec2>{{0, 0}, {100, 50}, {200, 0}, {300, 80}}, 5.0);
  double circle_err = 0, obstacle_err = 0, spline_err = 0;
  const auto rel = [&](auto f, Vec2 xi, Vec2 g) {
    const Vec2 n{(f(Vec2{xi.x + h, xi.y}) - f(Vec2{xi.x - h, xi.y})) / (2 * h),
                 (f(Vec2{xi.x, xi.y + h}) - f(Vec2{xi.x, xi.y - h})) / (2 * h)};
    return (g - n).norm() / std::max(1e-12, n.norm());
  };
  int spline_samples = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 xi{w(rng), w(rng)};
    circle_err = std::max(circle_err, rel([&](Vec2 p) { return evaluate(path, p).value; }, xi, evaluate(path, xi).gradient));
    for (const auto& o : obs) {
      obstacle_err = std::max(obstacle_err, rel([&](Vec2 p) { return o.evaluate(p).value; }, xi, o.evaluate(xi).gradient));
    }
    const Vec2 xs{ux(rng) - 150 + 50 * side(rng), 25 + 60 * (side(rng) - 0.5)};
    spline_err = std::max(spline_err,
                          rel([&](Vec2 p) { return evaluate(spline, p).value; }, xs, evaluate(spline, xs).gradient));
    ++spline_samples;
  }
  const bool ok = sz <= 1e-12 && eq <= 1e-12 && circle_err < 1e-4 && obstacle_err < 1e-4 && spline_err < 1e-2;
  report(6, ok,
         fmt("bump/composite: max |S+Z-1| %.1e, sum vs branch %.1e over 1e4 points, gradient rel. error circle "
             "%.1e obstacle %.1e spline %.1e",
             sz, eq, circle_err, obstacle_err, spline_err));
}

void issProbe() {
  bool ok = true;
  double worst = 0;
  std::set<std::string> seen;
  for (const Shipped& s : kShipped) {
    if (!s.script.empty() || !seen.insert(s.scenario).second) continue;
    const Run r = simulate(s.scenario, s.duration);
    const StabilityReport rep = stabilityProbe(r.records, r.initial.weights);
    ok = ok && rep.ratio <= 1.05;
    worst = std::max(worst, rep.ratio);
  }
  report(7, ok, fmt("ISS bound over %zu unscripted scenarios: worst tail ratio %.4f (limit 1.05)", seen.size(), worst));
}

std::map<int, double> extinguished(const Run& r) {
  std::map<int, double> out;
  for (const auto& e : r.events) {
    if (e.kind == EngineEvent::Kind::kFireExtinguished) out[e.subject] = e.clock;
  }
  return out;
}

double firstTargeted(const Run& r, int fire) {
  for (const TickRecord& t : r.records) {
    for (const auto& rr : t.robots) {
      if (rr.target_id == fire) return t.clock;
    }
  }
  return INFINITY;
}

void interventionBenefit() {
  const auto t0 = Clock::now();
  const Run none = simulate("table1.scn", 300.0);
  const Run cp = simulate("table1.scn", 300.0, "change_priority.script");
  const Run fu = simulate("table1.scn", 300.0, "find_undetected.script");
  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
  const double l0 = lossReport(none.final).total, l1 = lossReport(cp.final).total, l2 = lossReport(fu.final).total;
  const auto ext = extinguished(none);
  const bool order = firstTargeted(none, 1) < firstTargeted(none, 2) && ext.count(1) && ext.count(2) &&
                     ext.at(1) < ext.at(2);
  const bool ok = l1 < l0 && l2 < l0 && order && wall < 30.0;
  report(8, ok,
         fmt("human benefit: loss without %.1f, change-priority %.1f, find-undetected %.1f; fire 2 %s fire 3 "
             "(targeted %.1fs vs %.1fs); %.2fs wall",
             l0, l1, l2, order ? "before" : "NOT before", firstTargeted(none, 1), firstTargeted(none, 2), wall));
}

void determinism() {
  bool ok = true;
  for (const Shipped& s : kShipped) {
    const Run a = simulate(s.scenario, s.duration, s.script), b = simulate(s.scenario, s.duration, s.script);
    ok = ok && trajectoryCsv(a.records) == trajectoryCsv(b.records) && eventsCsv(a.events) == eventsCsv(b.events);
  }
  report(9, ok, fmt("determinism: %zu scenario/script pairs exported byte-identical twice", kShipped.size()));
}

void targetConsensus() {
  const Run r = simulate("table1.scn", 300.0);
  // Epoch: a tick where any robot's target differs from the previous tick.
  std::vector<std::size_t> epochs;
  for (std::size_t k = 1; k < r.records.size(); ++k) {
    for (std::size_t i = 0; i < r.records[k].robots.size(); ++i) {
      if (r.records[k].robots[i].target_id != r.records[k - 1].robots[i].target_id) {
        epochs.push_back(k);
        break;
      }
    }
  }
  double worst = 0;
  bool ok = !epochs.empty();
  for (std::size_t e : epochs) {
    double agreed = INFINITY;
    for (std::size_t k = e; k < r.records.size(); ++k) {
      const auto& rs = r.records[k].robots;
      const bool same = std::all_of(rs.begin(), rs.end(), [&](const RobotRecord& x) { return x.target_id == rs[0].target_id; });
      if (same) {
        agreed = r.records[k].clock - r.records[e].clock;
        break;
      }
    }
    worst = std::max(worst, agreed);
    ok = ok && agreed <= 10.0;
  }
  report(10, ok, fmt("target consensus: %zu selection epochs, worst time to agreement %.2fs", epochs.size(), worst));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks{pathFollowing, robotSwitch,        obstacleTraversal, safetyInvariants,
                                                  qpCorrectness, bumpMath,           issProbe,          interventionBenefit,
                                                  determinism,   targetConsensus};
  for (const auto& c : checks) {
    try {
      c();
    } catch (const std::exception& e) {
      report(static_cast<int>(&c - checks.data()) + 1, false, std::string("exception: ") + e.what());
    }
  }
  return failures;
}
