#include <doctest.h>

#include <cmath>
#include <string>
#include <thread>

#include "higvf/engine.hpp"

using namespace higvf;

#ifndef HIGVF_SCENARIO_DIR
#define HIGVF_SCENARIO_DIR "scenarios"
#endif

namespace {

World scenario(const char* name) {
  return buildWorld(readScenarioFile(std::string(HIGVF_SCENARIO_DIR) + "/" + name));
}

double circleResidual(Vec2 p) { return std::abs((p - Vec2{250, 300}).squaredNorm() - 250.0 * 250.0); }

}  // namespace

TEST_CASE("consensus error of a single stretched edge") {
  const std::vector<Vec2> pos{{0, 0}, {11, 0}};
  const std::vector<Edge> edges{{0, 1, 10}};
  CHECK(consensusError(pos, edges) == doctest::Approx(1.0));
  const std::vector<Vec2> ok{{0, 0}, {0, 10}};
  CHECK(consensusError(ok, edges) == doctest::Approx(0.0));
}

TEST_CASE("queued commands become visible on the promised tick") {
  Engine e(scenario("case1_inside.scn"));
  e.tick();
  e.tick();
  const long promised = e.submit(OperatorCommand{SelectRobot{2}, 0.0});
  CHECK(promised == 3);
  const TickRecord& r = e.tick();
  CHECK(r.tick == promised);
  CHECK(r.robots[2].influenced);
  CHECK_FALSE(r.robots[1].influenced);
}

TEST_CASE("pause freezes robots and advances the clock") {
  Engine e(scenario("case1_inside.scn"));
  e.run(1.0);
  const Vec2 before = e.world().robots[0].position;
  const double clock = e.world().clock;
  e.submit(OperatorCommand{Pause{}, clock});
  e.run(1.0);
  CHECK(e.world().robots[0].position == before);
  CHECK(e.world().clock == doctest::Approx(clock + 1.0));
  e.submit(OperatorCommand{Resume{}, e.world().clock});
  e.run(0.2);
  CHECK_FALSE(e.world().robots[0].position == before);
}

TEST_CASE("invalid commands are rejected without effect") {
  Engine e(scenario("case1_inside.scn"));
  CHECK(checkCommand(e.world(), SelectRobot{7}).has_value());
  CHECK(checkCommand(e.world(), SetWeight{"w9", 1.0}).has_value());
  CHECK(checkCommand(e.world(), SetWeight{"w2", 0.9}).has_value());  // breaks contraction
  CHECK_FALSE(checkCommand(e.world(), SelectRobot{0}).has_value());
  e.submit(OperatorCommand{SelectRobot{7}, 0.0});
  e.tick();
  CHECK(e.world().influencedRobot() == 1);
  bool rejected = false;
  for (const auto& ev : e.events()) rejected = rejected || ev.kind == EngineEvent::Kind::kCommandRejected;
  CHECK(rejected);
}

TEST_CASE("influenced robot approaches the circle") {
  Engine e(scenario("case1_inside.scn"));
  const double start = circleResidual(e.world().robots[1].position);
  e.run(10.0);
  CHECK(circleResidual(e.world().robots[1].position) < start);
}

TEST_CASE("identical runs export identical trajectories") {
  Engine a(scenario("table1.scn")), b(scenario("table1.scn"));
  a.run(20.0);
  b.run(20.0);
  CHECK(trajectoryCsv(a.records()) == trajectoryCsv(b.records()));
}

TEST_CASE("head-on robots stay apart") {
  World w = loadScenario(R"({"robots": [[0,0],[200,0]],
      "human_path": {"polyline": [[0,0],[400,0]]}, "influenced": 0})");
  Engine e(std::move(w));
  e.run(20.0);
  const auto s = safetySummary(e.world(), e.records());
  CHECK(s.min_robot_distance >= e.world().safety.robot_distance - 1e-3);
}

TEST_CASE("robot driven at a disk keeps its clearance") {
  World w = loadScenario(R"({"robots": [[0,0]], "obstacles": [{"kind": "disk", "pos": [150, 0], "size": 20}],
      "human_path": {"polyline": [[0,0],[300,0]]}, "influenced": 0})");
  Engine e(std::move(w));
  e.run(20.0);
  const auto s = safetySummary(e.world(), e.records());
  CHECK(s.min_obstacle_clearance >= e.world().safety.obstacle_distance - 1e-3);
  CHECK(s.max_speed <= e.world().weights.speed + 1e-9);
}

TEST_CASE("stability probe on a shipped scenario") {
  Engine e(scenario("case1_outside.scn"));
  e.run(60.0);
  const auto rep = stabilityProbe(e.records(), e.world().weights);
  CHECK(rep.gamma_h == doctest::Approx(0.5 * std::sqrt(e.world().weights.w3 / e.world().weights.w0)));
  CHECK(rep.iss_holds);
  CHECK(rep.consensus_bounded);
}

TEST_CASE("commands can be pushed from other threads") {
  Engine e(scenario("case1_inside.scn"));
  std::thread t([&] {
    for (int i = 0; i < 50; ++i) e.submit(OperatorCommand{SelectRobot{i % 3}, 0.0});
  });
  for (int i = 0; i < 100; ++i) e.tick();
  t.join();
  e.tick();
  CHECK(e.queue().size() == 0);
  int influenced = 0;
  for (const auto& r : e.lastRecord().robots) influenced += r.influenced ? 1 : 0;
  CHECK(influenced == 1);
}
