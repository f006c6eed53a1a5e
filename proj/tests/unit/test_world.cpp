#include <doctest.h>

#include <cmath>
#include <string>

#include "higvf/world.hpp"

using namespace higvf;

#ifndef HIGVF_SCENARIO_DIR
#define HIGVF_SCENARIO_DIR "scenarios"
#endif

namespace {

std::string scenarioPath(const char* name) { return std::string(HIGVF_SCENARIO_DIR) + "/" + name; }

std::string entityOf(const std::string& text) {
  try {
    loadScenario(text);
  } catch (const ScenarioError& e) {
    return e.entity();
  }
  return "";
}

}  // namespace

TEST_CASE("table1 document loads") {
  const World w = buildWorld(readScenarioFile(scenarioPath("table1.scn")));
  CHECK(w.robots.size() == 3);
  CHECK(w.fires.size() == 5);
  CHECK(w.obstacles.size() == 5);
  CHECK(w.fires[2].position == Vec2{170, 120});
  CHECK(w.fires[2].radius == 50.0);
  CHECK(w.edges.size() == 3);  // complete graph by default
  CHECK(w.edges[0].desired_distance == doctest::Approx(std::hypot(30.0, 50.0)));
}

TEST_CASE("scenario round trip through the document format") {
  const ScenarioConfig a = readScenarioFile(scenarioPath("case3_obstacles.scn"));
  const ScenarioConfig b = parseScenario(serializeScenario(a));
  CHECK(serializeScenario(a) == serializeScenario(b));
  CHECK(b.obstacles[1].kind == "bar");
}

TEST_CASE("invalid documents name the offending entity") {
  CHECK(entityOf("{") == "document");
  CHECK(entityOf(R"({"robots": [[0,0],[0,0]]})") != "");
  CHECK(entityOf(R"({"robots": [[0,0],[100,0]], "fires": [{"pos": [50, 50], "size": -1}]})") == "fire[0]");
  CHECK(entityOf(R"({"robots": [[0,0],[100,0],[200,0]], "topology": [[0,1]]})").find("robot") != std::string::npos);
  CHECK(entityOf(R"({"robots": [[0,0],[100,0]], "topology": [[0,0]]})") == "edge[0]");
  CHECK(entityOf(R"({"robots": [[0,0]], "obstacles": [{"kind": "disk", "pos": [200,0], "size": 20},
                                                      {"kind": "disk", "pos": [260,0], "size": 20}]})")
            .find("obstacle[0]") != std::string::npos);
  CHECK(entityOf(R"({"robots": [[0,0],[100,0]], "weights": {"w2": 0.5}})") == "weights");
  CHECK(entityOf(R"({"robots": [[0,0]], "influenced": 3})") == "influenced");
}

TEST_CASE("single robot without fires loads") {
  World w = loadScenario(R"({"robots": [[0,0]]})");
  CHECK(w.edges.empty());
  CHECK(w.maxDegree() == 0);
}

TEST_CASE("topology from a communication radius") {
  World w = loadScenario(R"({"robots": [[0,0],[100,0],[200,0]], "topology": {"radius": 150}})");
  CHECK(w.edges.size() == 2);
  CHECK_THROWS_AS(loadScenario(R"({"robots": [[0,0],[100,0],[300,0]], "topology": {"radius": 150}})"),
                  ScenarioError);
}

TEST_CASE("explicit desired distances override initial spacing") {
  World w = loadScenario(R"({"robots": [[0,0],[100,0]], "desired_distances": [{"i": 0, "j": 1, "d": 60}]})");
  CHECK(w.edges[0].desired_distance == 60.0);
}

TEST_CASE("fire growth and extinguishing") {
  FireModel m;
  std::vector<FireSource> fs(1);
  fs[0].radius = 10;
  fs[0].peak_radius = 10;
  stepFires(fs, {}, m, 1.0, 1.0);
  CHECK(fs[0].radius == 11.0);
  CHECK(fs[0].peak_radius == 11.0);

  // one robot inside the participation ring with rho = g: constant radius
  m.extinguish_rate = 1.0;
  stepFires(fs, {{20, 0}}, m, 1.0, 2.0);
  CHECK(fs[0].radius == 11.0);

  fs[0].radius = 0.1;
  m.extinguish_rate = 2.0;
  const auto ev = stepFires(fs, {{5, 0}}, m, 1.0, 3.0);
  CHECK(fs[0].radius == 0.0);
  CHECK(fs[0].extinguished);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].fire == 0);
}

TEST_CASE("loss table aggregation") {
  LossReport r;
  r.areas = {3512.61, 7026.29, 16203.8, 4646.9, 20157.5};
  for (double a : r.areas) r.total += a;
  const std::string t = formatLossTable({{"Without human", r}});
  CHECK(t.find("loss_area,Without human") == 0);
  CHECK(t.find("a(s_5),20157.5") != std::string::npos);
  CHECK(t.find("Sum,51547.1\n") != std::string::npos);

  std::vector<FireSource> fs(2);
  fs[0].peak_radius = 1;
  fs[1].peak_radius = 2;
  const LossReport l = lossReport(fs);
  CHECK(l.areas[1] == doctest::Approx(4 * M_PI));
  CHECK(l.total == doctest::Approx(5 * M_PI));
}

TEST_CASE("every shipped scenario validates") {
  for (const char* f : {"case1_inside.scn", "case1_outside.scn", "case1_center.scn", "case2_switch.scn",
                        "case3_obstacles.scn", "table1.scn"}) {
    CAPTURE(f);
    CHECK_NOTHROW(buildWorld(readScenarioFile(scenarioPath(f))));
  }
}
