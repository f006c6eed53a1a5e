#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "higvf/local_controller.hpp"

using namespace higvf;

namespace {

// Angular sampling oracle: fraction of rays toward the fire disk whose first
// hit is the fire rather than an obstacle disk.
double rayOracle(Vec2 robot, Vec2 fire, double radius, const std::vector<std::pair<Vec2, double>>& blockers,
                 int rays) {
  const Vec2 d = fire - robot;
  const double dist = d.norm();
  const double half = std::asin(std::min(1.0, radius / dist));
  const double base = std::atan2(d.y, d.x);
  const auto entry = [](Vec2 o, Vec2 dir, Vec2 c, double r) {
    const Vec2 oc = o - c;
    const double b = oc.dot(dir);
    const double disc = b * b - (oc.squaredNorm() - r * r);
    if (disc < 0) return std::numeric_limits<double>::infinity();
    const double t = -b - std::sqrt(disc);
    return t >= 0 ? t : std::numeric_limits<double>::infinity();
  };
  int visible = 0;
  for (int k = 0; k < rays; ++k) {
    const double a = base - half + (k + 0.5) * (2 * half / rays);
    const Vec2 dir{std::cos(a), std::sin(a)};
    const double tf = entry(robot, dir, fire, radius);
    bool blocked = false;
    for (const auto& [c, r] : blockers) blocked = blocked || entry(robot, dir, c, r) < tf;
    visible += blocked ? 0 : 1;
  }
  return 2 * half * visible / rays;
}

FireSource fire(int id, Vec2 p, double r) {
  FireSource f;
  f.id = id;
  f.position = p;
  f.radius = r;
  f.peak_radius = r;
  return f;
}

}  // namespace

TEST_CASE("observed fire value without obstacles is the view angle") {
  const auto f = fire(0, {4, 0}, 2);
  CHECK(observedFireValue({0, 0}, f, {}) == doctest::Approx(M_PI / 3));
  CHECK(observedFireValue({4.5, 0}, f, {}) == doctest::Approx(2 * M_PI));
  auto out = f;
  out.extinguished = true;
  out.radius = 0;
  CHECK(observedFireValue({0, 0}, out, {}) == 0.0);
}

TEST_CASE("observed fire value with partial occlusion matches ray casting") {
  const auto f = fire(0, {10, 0}, 2);
  const std::vector<ObstacleField> obs{ObstacleField(DiskBody{{5, 1}, 1})};
  const double want = rayOracle({0, 0}, {10, 0}, 2, {{{5, 1}, 1}}, 100000);
  CHECK(std::abs(observedFireValue({0, 0}, f, obs) - want) < 1e-3);
}

TEST_CASE("fully hidden fire and obstacles behind the fire") {
  const auto f = fire(0, {10, 0}, 1);
  const std::vector<ObstacleField> front{ObstacleField(DiskBody{{5, 0}, 3})};
  CHECK(observedFireValue({0, 0}, f, front) == 0.0);
  const std::vector<ObstacleField> behind{ObstacleField(DiskBody{{20, 0}, 5})};
  CHECK(observedFireValue({0, 0}, f, behind) == doctest::Approx(2 * std::asin(0.1)));
}

TEST_CASE("robot inside an obstacle body is a perception failure") {
  const auto f = fire(0, {10, 0}, 1);
  const std::vector<ObstacleField> obs{ObstacleField(DiskBody{{0, 0}, 3})};
  CHECK_THROWS_AS(observedFireValue({0, 0}, f, obs), PerceptionError);
}

TEST_CASE("target selection is an argmax with lowest-id ties") {
  std::vector<FireSource> fs{fire(0, {10, 0}, 1), fire(1, {-10, 0}, 1), fire(2, {0, 30}, 2)};
  auto c = selectTarget({0, 0}, fs, {});
  CHECK(c.fire_id == 0);
  fs[1].radius = 3;
  CHECK(selectTarget({0, 0}, fs, {}).fire_id == 1);
  for (auto& f : fs) {
    f.extinguished = true;
    f.radius = 0;
  }
  c = selectTarget({0, 0}, fs, {});
  CHECK_FALSE(c.hasTarget());
  CHECK(c.value == 0.0);
}

TEST_CASE("fire-field target from the first robot matches ray casting") {
  const std::vector<std::pair<Vec2, double>> fires{
      {{500, 250}, 20}, {{300, 450}, 30}, {{170, 120}, 50}, {{650, 600}, 10}, {{1100, 300}, 40}};
  const std::vector<std::pair<Vec2, double>> disks{
      {{300, 200}, 20}, {{670, 450}, 20}, {{480, 400}, 20}, {{150, 450}, 20}, {{650, 140}, 20}};
  std::vector<FireSource> fs;
  for (std::size_t i = 0; i < fires.size(); ++i) fs.push_back(fire(int(i), fires[i].first, fires[i].second));
  std::vector<ObstacleField> obs;
  for (const auto& [c, r] : disks) obs.emplace_back(DiskBody{c, r});
  const Vec2 robot{700, 300};
  int best = -1;
  double best_v = 0;
  for (std::size_t i = 0; i < fires.size(); ++i) {
    const double v = rayOracle(robot, fires[i].first, fires[i].second, disks, 20000);
    CHECK(std::abs(v - observedFireValue(robot, fs[i], obs)) < 2e-3);
    if (v > best_v) {
      best_v = v;
      best = int(i);
    }
  }
  CHECK(selectTarget(robot, fs, obs).fire_id == best);
}

TEST_CASE("target field points to the fire") {
  std::vector<FireSource> fs{fire(0, {4, 0}, 1)};
  const Vec2 v = targetField({0, 0}, {0, 1.0}, fs, {});
  CHECK(v.x == doctest::Approx(120.0));
  CHECK(v.y == doctest::Approx(0.0));
  CHECK(targetField({3, 0}, {0, 1.0}, fs, {}) == Vec2{0, 0});
  CHECK(targetField({0, 0}, {}, fs, {}) == Vec2{0, 0});
}

TEST_CASE("formation field") {
  const std::vector<FormationNeighbor> far{{{20, 0}, 10}};
  const Vec2 v = formationField({0, 0}, far, {});
  CHECK(v.x == doctest::Approx(10.0));
  CHECK(v.y == doctest::Approx(0.0));
  const std::vector<FormationNeighbor> near{{{5, 0}, 10}};
  CHECK(formationField({0, 0}, near, {}).x == doctest::Approx(-5.0));
  const std::vector<FormationNeighbor> exact{{{0, 10}, 10}};
  CHECK(formationField({0, 0}, exact, {}).norm() == doctest::Approx(0.0));
  const std::vector<FormationNeighbor> same{{{0, 0}, 10}};
  CHECK(formationField({0, 0}, same, {}) == Vec2{0, 0});
  const std::vector<ObstacleField> obs{ObstacleField(DiskBody{{0, 0}, 10})};
  CHECK(formationField({12, 0}, far, obs) == Vec2{0, 0});
}
