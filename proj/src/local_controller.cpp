#include "higvf/local_controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace higvf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrapAngle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  return a <= -M_PI ? a + 2.0 * M_PI : a;
}

Vec2 direction(double angle) { return {std::cos(angle), std::sin(angle)}; }

struct Interval {
  double lo;
  double hi;
};

// Silhouette of the obstacle body as an angular interval, relative to `ref`.
// The upper end may exceed pi; callers test the +-2pi shifts.
Interval silhouette(const Vec2& robot, const ObstacleField& ob, double ref) {
  if (ob.bodyDistance(robot) <= 0.0) {
    throw PerceptionError("robot position lies inside an obstacle body");
  }
  if (const auto* d = std::get_if<DiskBody>(&ob.body())) {
    const Vec2 r = d->center - robot;
    const double delta = wrapAngle(std::atan2(r.y, r.x) - ref);
    const double half = std::asin(std::clamp(d->radius / r.norm(), 0.0, 1.0));
    return {delta - half, delta + half};
  }
  const Vec2 rc = ob.center() - robot;
  const double center_angle = std::atan2(rc.y, rc.x);
  double lo = kInf;
  double hi = -kInf;
  for (const Vec2& c : ob.corners()) {
    const Vec2 r = c - robot;
    const double a = wrapAngle(std::atan2(r.y, r.x) - center_angle);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  const double delta = wrapAngle(center_angle - ref);
  return {delta + lo, delta + hi};
}

double unionMeasure(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  double total = 0.0;
  double cur_lo = 0.0;
  double cur_hi = -kInf;
  for (const Interval& iv : intervals) {
    if (iv.lo > cur_hi) {
      if (cur_hi > cur_lo) total += cur_hi - cur_lo;
      cur_lo = iv.lo;
      cur_hi = iv.hi;
    } else {
      cur_hi = std::max(cur_hi, iv.hi);
    }
  }
  if (cur_hi > cur_lo) total += cur_hi - cur_lo;
  return total;
}

}  // namespace

double rayDiskEntry(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius) {
  const Vec2 oc = center - origin;
  const double b = oc.dot(dir);
  const double c = oc.squaredNorm() - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return kInf;
  const double root = std::sqrt(disc);
  if (b - root >= 0.0) return b - root;
  if (b + root >= 0.0) return 0.0;
  return kInf;
}

double rayBodyEntry(const Vec2& origin, const Vec2& dir, const ObstacleField& obstacle) {
  if (const auto* d = std::get_if<DiskBody>(&obstacle.body())) {
    return rayDiskEntry(origin, dir, d->center, d->radius);
  }
  const auto& bar = std::get<BarBody>(obstacle.body());
  const Vec2 o = obstacle.toBodyFrame(origin);
  const Vec2 u = obstacle.toBodyFrame(origin + dir) - o;
  double tmin = -kInf;
  double tmax = kInf;
  const std::pair<double, double> axes[2] = {{o.x, u.x}, {o.y, u.y}};
  const double half[2] = {bar.half_length, bar.half_width};
  for (int k = 0; k < 2; ++k) {
    const auto [pos, step] = axes[k];
    if (std::abs(step) < 1e-15) {
      if (std::abs(pos) > half[k]) return kInf;
      continue;
    }
    const double t1 = (-half[k] - pos) / step;
    const double t2 = (half[k] - pos) / step;
    tmin = std::max(tmin, std::min(t1, t2));
    tmax = std::min(tmax, std::max(t1, t2));
  }
  if (tmax < std::max(tmin, 0.0)) return kInf;
  return std::max(tmin, 0.0);
}

double observedFireValue(const Vec2& robot, const FireSource& fire,
                         std::span<const ObstacleField> obstacles) {
  if (fire.extinguished || fire.radius <= 0.0) return 0.0;
  const Vec2 to_fire = fire.position - robot;
  const double d = to_fire.norm();
  if (d <= fire.radius) return 2.0 * M_PI;

  const double half = std::asin(std::clamp(fire.radius / d, 0.0, 1.0));
  const double beta = 2.0 * half;
  const double ref = std::atan2(to_fire.y, to_fire.x);

  std::vector<Interval> blocked;
  for (const ObstacleField& ob : obstacles) {
    const Interval sil = silhouette(robot, ob, ref);
    // Order along each ray decides occlusion. Disjoint convex bodies keep one
    // order over their common rays; overlapping ones are sampled and bisected.
    const auto in_front = [&](double rel) {
      const Vec2 u = direction(ref + rel);
      return rayBodyEntry(robot, u, ob) < rayDiskEntry(robot, u, fire.position, fire.radius);
    };
    const bool overlapping = ob.bodyDistance(fire.position) < fire.radius;
    for (double shift : {-2.0 * M_PI, 0.0, 2.0 * M_PI}) {
      const double lo = std::max(sil.lo + shift, -half);
      const double hi = std::min(sil.hi + shift, half);
      if (!(hi > lo)) continue;
      if (!overlapping) {
        if (in_front(0.5 * (lo + hi))) blocked.push_back({lo, hi});
        continue;
      }
      constexpr int kPieces = 64;
      const double w = (hi - lo) / kPieces;
      double run_lo = lo;
      bool run_in = in_front(lo + 0.5 * w);
      for (int k = 1; k <= kPieces; ++k) {
        const bool next_in = k < kPieces && in_front(lo + (k + 0.5) * w);
        if (k < kPieces && next_in == run_in) continue;
        double edge = lo + k * w;
        if (k < kPieces) {
          double a = lo + (k - 0.5) * w;
          double b = lo + (k + 0.5) * w;
          for (int it = 0; it < 50; ++it) {
            const double m = 0.5 * (a + b);
            (in_front(m) == run_in ? a : b) = m;
          }
          edge = 0.5 * (a + b);
        }
        if (run_in) blocked.push_back({run_lo, edge});
        run_lo = edge;
        run_in = next_in;
      }
    }
  }
  return std::max(0.0, beta - unionMeasure(std::move(blocked)));
}

TargetChoice selectTarget(const Vec2& robot, std::span<const FireSource> fires,
                          std::span<const ObstacleField> obstacles) {
  TargetChoice best;
  for (const FireSource& f : fires) {
    if (f.extinguished) continue;
    const double v = observedFireValue(robot, f, obstacles);
    if (v > best.value || (v == best.value && v > 0.0 && f.id < best.fire_id)) {
      best = {f.id, v};
    }
  }
  return best;
}

Vec2 targetField(const Vec2& robot, const TargetChoice& choice, std::span<const FireSource> fires,
                 std::span<const ObstacleField> obstacles) {
  if (!choice.hasTarget()) return {};
  const auto it = std::find_if(fires.begin(), fires.end(),
                               [&](const FireSource& f) { return f.id == choice.fire_id; });
  if (it == fires.end()) return {};
  const Vec2 r = robot - it->position;
  const double phi = r.squaredNorm() - it->radius * it->radius;
  const Vec2 raw = -choice.value * phi * (2.0 * r);
  const double gate = zeroInProduct(obstacles, robot);
  return gate == 0.0 ? Vec2{} : gate * raw;
}

Vec2 formationField(const Vec2& robot, std::span<const FormationNeighbor> neighbors,
                    std::span<const ObstacleField> obstacles) {
  Vec2 sum;
  for (const FormationNeighbor& n : neighbors) {
    const Vec2 r = robot - n.position;
    const double dist = r.norm();
    if (dist == 0.0) continue;
    sum -= (dist - n.desired_distance) * (r / dist);
  }
  if (sum == Vec2{}) return {};
  const double gate = zeroInProduct(obstacles, robot);
  return gate == 0.0 ? Vec2{} : gate * sum;
}

}  // namespace higvf
