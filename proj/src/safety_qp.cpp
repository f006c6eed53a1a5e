#include "higvf/safety_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace higvf {

namespace {

bool nearlyFeasible(const LinearConstraint& c, const Vec2& v) {
  const double lhs = c.a.dot(v);
  const double tol = 1e-9 * std::max({1.0, std::abs(c.b), std::abs(lhs)});
  return lhs <= c.b + tol;
}

bool feasibleForAll(std::span<const LinearConstraint> cs, const Vec2& v) {
  for (const auto& c : cs) {
    if (!nearlyFeasible(c, v)) return false;
  }
  return true;
}

BarrierConstraint barrier(const Vec2& self, const Vec2& other, double radius, double coeff) {
  const Vec2 diff = self - other;
  BarrierConstraint out;
  out.h = diff.squaredNorm() - radius * radius;
  out.constraint.a = -diff;
  if (out.h <= 0.0) {
    out.violated = true;
    out.constraint.b = 0.0;
  } else {
    out.constraint.b = coeff * out.h * out.h * out.h;
  }
  return out;
}

}  // namespace

void SafetyParams::validate() const {
  if (!(robot_distance > 0.0) || !(obstacle_distance > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("safety parameters Rr, Ro, alpha, beta must be > 0");
  }
}

BarrierConstraint robotPairConstraint(const Vec2& self, const Vec2& other, const SafetyParams& params) {
  return barrier(self, other, params.robot_distance, params.alpha / 4.0);
}

BarrierConstraint obstacleConstraint(const Vec2& self, const Vec2& obstacle_point,
                                     const SafetyParams& params) {
  return barrier(self, obstacle_point, params.obstacle_distance, params.beta / 2.0);
}

QpResult solveQp2d(const Vec2& desired, std::span<const LinearConstraint> constraints) {
  bool exact = true;
  for (const auto& c : constraints) {
    if (!c.satisfiedBy(desired)) {
      exact = false;
      break;
    }
  }
  if (exact) return {desired, true};

  bool found = false;
  Vec2 best;
  double best_d = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Vec2& v) {
    if (!v.isFinite() || !feasibleForAll(constraints, v)) return;
    const double d = (v - desired).squaredNorm();
    const double tie = 1e-12 * std::max(d, best_d == std::numeric_limits<double>::infinity() ? d : best_d);
    if (!found || d < best_d - tie ||
        (std::abs(d - best_d) <= tie && (v.x < best.x || (v.x == best.x && v.y < best.y)))) {
      found = true;
      best = v;
      best_d = d;
    }
  };

  for (const auto& c : constraints) {
    const double nn = c.a.squaredNorm();
    if (nn == 0.0 || c.satisfiedBy(desired)) continue;
    consider(desired - ((c.a.dot(desired) - c.b) / nn) * c.a);
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    for (std::size_t j = i + 1; j < constraints.size(); ++j) {
      const auto& ci = constraints[i];
      const auto& cj = constraints[j];
      const double det = ci.a.cross(cj.a);
      const double scale = ci.a.norm() * cj.a.norm();
      if (scale == 0.0 || std::abs(det) <= 1e-14 * scale) continue;
      // Cramer's rule on a_i . v = b_i, a_j . v = b_j.
      const Vec2 v{(ci.b * cj.a.y - cj.b * ci.a.y) / det, (ci.a.x * cj.b - cj.a.x * ci.b) / det};
      consider(v);
    }
  }
  if (!found) return {{}, false};
  return {best, true};
}

std::vector<Vec2> filterVelocities(std::span<const Vec2> positions,
                                   const std::vector<std::vector<int>>& neighbors,
                                   std::span<const ObstacleField> obstacles,
                                   std::span<const Vec2> desired, const SafetyParams& params,
                                   std::vector<SafetyEvent>* events) {
  std::vector<Vec2> out(positions.size());
  std::vector<LinearConstraint> cs;
  const double sensing = params.sensingRadius();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    cs.clear();
    const Vec2& p = positions[i];
    if (i < neighbors.size()) {
      for (int j : neighbors[i]) {
        const auto bc = robotPairConstraint(p, positions[static_cast<std::size_t>(j)], params);
        if (bc.violated && events) {
          events->push_back({SafetyEvent::Kind::kRobotViolation, static_cast<int>(i), j});
        }
        cs.push_back(bc.constraint);
      }
    }
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      const ObstacleField& ob = obstacles[k];
      if (ob.bodyDistance(p) > sensing) continue;
      const auto bc = obstacleConstraint(p, ob.spinePoint(p), params);
      if (bc.violated && events) {
        events->push_back({SafetyEvent::Kind::kObstacleViolation, static_cast<int>(i), static_cast<int>(k)});
      }
      cs.push_back(bc.constraint);
    }
    const QpResult r = solveQp2d(desired[i], cs);
    if (!r.feasible && events) {
      events->push_back({SafetyEvent::Kind::kInfeasible, static_cast<int>(i), -1});
    }
    out[i] = r.velocity;
  }
  return out;
}

}  // namespace higvf
