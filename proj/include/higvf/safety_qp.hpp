#pragma once

// Safety barrier certificates as per-robot half-plane velocity constraints,
// filtered through an exact two-variable QP.

#include <span>
#include <vector>

#include "higvf/field_core.hpp"
#include "higvf/vec2.hpp"

namespace higvf {

/// a . v <= b. A zero normal with b >= 0 is vacuous.
struct LinearConstraint {
  Vec2 a;
  double b{0.0};

  bool satisfiedBy(const Vec2& v) const { return a.dot(v) <= b; }
};

struct SafetyParams {
  double robot_distance{20.0};     ///< R_r
  double obstacle_distance{30.0};  ///< R_o
  double alpha{1e-4};
  double beta{1e-4};
  /// Obstacles whose body is closer than this are constrained; <= 0 means 4 * R_o.
  double sensing_radius{0.0};

  double sensingRadius() const { return sensing_radius > 0.0 ? sensing_radius : 4.0 * obstacle_distance; }
  void validate() const;
};

struct BarrierConstraint {
  LinearConstraint constraint;
  double h{0.0};          ///< barrier value |p_i - p_j|^2 - R^2
  bool violated{false};   ///< h <= 0: hard stop toward the other body
};

/// -(p_i - p_j) . v <= (alpha / 4) h^3 with h = |p_i - p_j|^2 - R_r^2.
BarrierConstraint robotPairConstraint(const Vec2& self, const Vec2& other, const SafetyParams& params);

/// -(p_i - p_o) . v <= (beta / 2) h^3 with h = |p_i - p_o|^2 - R_o^2.
BarrierConstraint obstacleConstraint(const Vec2& self, const Vec2& obstacle_point,
                                     const SafetyParams& params);

struct QpResult {
  Vec2 velocity;
  bool feasible{true};
};

/// Exact minimizer of |v - desired|^2 subject to every constraint, by
/// enumerating the unconstrained point, single-constraint projections and
/// pairwise vertices. Returns `desired` bit-for-bit when it is feasible.
/// Equidistant candidates resolve to the lexicographically smallest (x, y).
QpResult solveQp2d(const Vec2& desired, std::span<const LinearConstraint> constraints);

struct SafetyEvent {
  enum class Kind { kRobotViolation, kObstacleViolation, kInfeasible };
  Kind kind{Kind::kInfeasible};
  int robot{0};
  int other{-1};  ///< robot index or obstacle index; -1 for infeasibility
};

/// Per-robot filtering: pair constraints against topology neighbors plus
/// obstacle constraints for sensed obstacles, solved independently for each
/// robot from the same position snapshot.
std::vector<Vec2> filterVelocities(std::span<const Vec2> positions,
                                   const std::vector<std::vector<int>>& neighbors,
                                   std::span<const ObstacleField> obstacles,
                                   std::span<const Vec2> desired, const SafetyParams& params,
                                   std::vector<SafetyEvent>* events = nullptr);

}  // namespace higvf
