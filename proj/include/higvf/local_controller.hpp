#pragma once

#include <span>
#include <stdexcept>

#include "higvf/field_core.hpp"
#include "higvf/vec2.hpp"

namespace higvf {

struct FireSource {
  int id{0};
  Vec2 position;
  double radius{0.0};
  double growth{1.0};  ///< units / s
  bool extinguished{false};
  double peak_radius{0.0};
};

/// Prioritized fire of one robot. fire_id < 0 means no visible fire.
struct TargetChoice {
  int fire_id{-1};
  double value{0.0};

  bool hasTarget() const { return fire_id >= 0; }
  bool operator==(const TargetChoice&) const = default;
};

/// Robot position inside an obstacle body.
class PerceptionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Entry distance of the ray origin + t * dir (|dir| = 1, t >= 0) into a disk,
/// or +inf on a miss.
double rayDiskEntry(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius);
/// Entry distance into an obstacle body, or +inf on a miss.
double rayBodyEntry(const Vec2& origin, const Vec2& dir, const ObstacleField& obstacle);

/// Angular width of the fire disk seen from the robot minus the part of it
/// hidden by obstacle bodies in front of the fire. 2*pi when the robot is
/// inside the fire disk; 0 for extinguished fires.
double observedFireValue(const Vec2& robot, const FireSource& fire,
                         std::span<const ObstacleField> obstacles);

/// Argmax of the observed value over unextinguished fires, lowest id on ties.
TargetChoice selectTarget(const Vec2& robot, std::span<const FireSource> fires,
                          std::span<const ObstacleField> obstacles);

/// Robot intention v_t: -theta * phi_s * grad(phi_s), gated by the zero-in
/// bumps of all obstacles. Zero when no target is chosen.
Vec2 targetField(const Vec2& robot, const TargetChoice& choice, std::span<const FireSource> fires,
                 std::span<const ObstacleField> obstacles);

struct FormationNeighbor {
  Vec2 position;
  double desired_distance{0.0};
};

/// Distance-based formation field v_f: each neighbor contributes its distance
/// residual along the unit vector toward it (attracting when too far,
/// repelling when too close), gated by the zero-in bumps. Coincident
/// neighbors contribute nothing.
Vec2 formationField(const Vec2& robot, std::span<const FormationNeighbor> neighbors,
                    std::span<const ObstacleField> obstacles);

}  // namespace higvf
