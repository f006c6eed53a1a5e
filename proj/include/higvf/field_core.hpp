#pragma once

// Implicit scalar fields, guiding vector fields, bump functions and the
// composite / human-intention fields built from them.
//
// Every field here is a scalar function phi with a zero level set. A guiding
// vector field over phi is  gamma * E * grad(phi) - k * phi * grad(phi)  with E
// the fixed 90 degree rotation. Obstacles carry a normalized field that is 0 on
// the reactive boundary and c (c < 0) on the repulsive boundary; the bump
// functions blend the path field and the obstacle field across the band in
// between.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "higvf/vec2.hpp"

namespace higvf {

struct FieldSample {
  double value{0.0};
  Vec2 gradient;
};

/// Rejection raised by field constructors (degenerate geometry, bad gains).
class FieldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Desired paths

/// phi = |xi - c|^2 - R^2. Positive outside; gamma = +1 circulates counter-clockwise.
struct CirclePath {
  Vec2 center;
  double radius{1.0};
};

/// Open C1 curve through ordered control points (uniform Catmull-Rom), extended
/// past both ends by rays along the end tangents. phi is the signed distance to
/// the extended curve, positive on the left of the travel direction.
class SplinePath {
 public:
  SplinePath(std::vector<Vec2> control_points, double gradient_step = 1e-3);

  const std::vector<Vec2>& controlPoints() const { return points_; }
  double gradientStep() const { return step_; }

  /// Signed distance only.
  double signedDistance(const Vec2& xi) const;
  /// Value plus central-difference gradient.
  FieldSample evaluate(const Vec2& xi) const;

  /// Curve point and first derivative at global parameter u in [0, n-1].
  Vec2 pointAt(double u) const;
  Vec2 tangentAt(double u) const;

  /// Parameter of the nearest point on the extended curve. Values below 0 or
  /// above n-1 lie on the end rays. Ties resolve to the lowest parameter.
  double nearestParameter(const Vec2& xi) const;

 private:
  std::vector<Vec2> points_;
  double step_;
};

struct ImplicitPath {
  std::variant<CirclePath, SplinePath> shape;
  int direction{1};  ///< gamma_p, +1 or -1
  double gain{1.0};  ///< k_p > 0

  static ImplicitPath circle(Vec2 center, double radius, int direction, double gain);
  static ImplicitPath spline(std::vector<Vec2> points, int direction, double gain,
                             double gradient_step = 1e-3);

  bool isCircle() const { return std::holds_alternative<CirclePath>(shape); }
};

FieldSample evaluate(const ImplicitPath& path, const Vec2& xi);

// ---------------------------------------------------------------------------
// Obstacles

struct DiskBody {
  Vec2 center;
  double radius{0.0};
};

/// Rectangle of the given half extents, long axis rotated by heading (radians).
struct BarBody {
  Vec2 center;
  double half_length{0.0};
  double half_width{0.0};
  double heading{0.0};
};

enum class Circulation { kAuto, kPositive, kNegative };

/// Margins (world units) placing the reactive and repulsive boundaries outside
/// the physical body. Defaults are 3 and 1.5 robot radii.
struct ObstacleMargins {
  double reactive{30.0};
  double repulsive{15.0};

  static ObstacleMargins forRobotRadius(double robot_radius) {
    return {3.0 * robot_radius, 1.5 * robot_radius};
  }
};

struct ObstacleParams {
  ObstacleMargins margins;
  Circulation circulation{Circulation::kAuto};
  double gain{2.0};  ///< k_r
  double l1{1.0};
  double l2{1.0};
  /// Overrides the margin-derived repulsive level when set.
  std::optional<double> repulsive_level;
};

/// Obstacle body plus its normalized reactive field
///   phi(xi) = (u / a)^2 + (w / b)^2 - 1
/// where (u, w) are body-frame coordinates and (a, b) the reactive semi-axes.
/// For a disk a = b = reactive radius, so phi = (|xi-c|^2 - R^2) / R^2.
class ObstacleField {
 public:
  ObstacleField(std::variant<DiskBody, BarBody> body, const ObstacleParams& params = {});

  const std::variant<DiskBody, BarBody>& body() const { return body_; }
  bool isDisk() const { return std::holds_alternative<DiskBody>(body_); }
  Vec2 center() const;
  double heading() const;

  double reactiveSemiAxisA() const { return semi_a_; }
  double reactiveSemiAxisB() const { return semi_b_; }
  double repulsiveLevel() const { return level_; }
  Circulation circulation() const { return circulation_; }
  double gain() const { return gain_; }
  double l1() const { return l1_; }
  double l2() const { return l2_; }

  FieldSample evaluate(const Vec2& xi) const;

  /// Closest point of the body's spine (disk: its center; bar: the long-axis
  /// segment) to xi. Safety constraints are formed against this point.
  Vec2 spinePoint(const Vec2& xi) const;
  /// Signed distance from xi to the body surface (negative inside).
  double bodyDistance(const Vec2& xi) const;
  /// Body-frame coordinates of xi.
  Vec2 toBodyFrame(const Vec2& xi) const;
  /// World coordinates of a body-frame point.
  Vec2 fromBodyFrame(const Vec2& local) const;
  /// Bar corners in counter-clockwise order (empty for disks).
  std::vector<Vec2> corners() const;

  /// Reactive and repulsive boundary points, for rendering and overlap checks.
  std::vector<Vec2> boundaryPolygon(double level, int samples) const;

 private:
  std::variant<DiskBody, BarBody> body_;
  double semi_a_{1.0};
  double semi_b_{1.0};
  double level_{-0.5};
  Circulation circulation_{Circulation::kAuto};
  double gain_{2.0};
  double l1_{1.0};
  double l2_{1.0};
};

// ---------------------------------------------------------------------------
// Guiding vector fields

/// gamma * E * grad - k * value * grad.
Vec2 gvf(const FieldSample& sample, int gamma, double k);
Vec2 gvf(const ImplicitPath& path, const Vec2& xi, int gamma, double k);
Vec2 gvf(const ObstacleField& obstacle, const Vec2& xi, int gamma, double k);

/// Path GVF with the path's own direction and gain.
Vec2 pathField(const ImplicitPath& path, const Vec2& xi);

/// Zero-out bump: 1 inside the repulsive area, 0 outside the reactive area.
double bumpZeroOut(const ObstacleField& obstacle, const Vec2& xi);
/// Zero-in bump: 0 inside the repulsive area, 1 outside the reactive area.
double bumpZeroIn(const ObstacleField& obstacle, const Vec2& xi);

/// Both bumps from an already-evaluated field value.
struct BumpPair {
  double zero_out{0.0};
  double zero_in{1.0};
};
BumpPair bumps(double phi, double level, double l1, double l2);

/// Product of zero-in bumps over all obstacles.
double zeroInProduct(std::span<const ObstacleField> obstacles, const Vec2& xi);

/// (prod zero_in) * normalized path field + sum zero_out * normalized obstacle
/// field. `circulations` holds one +1/-1 per obstacle.
Vec2 compositeField(const ImplicitPath& path, std::span<const ObstacleField> obstacles,
                    const Vec2& xi, std::span<const int> circulations);

/// Branch form: the normalized obstacle field inside a repulsive area, the
/// S/Z blend in a mixed region, the normalized path field elsewhere. Equal to
/// compositeField whenever reactive areas are disjoint.
Vec2 compositeFieldBranches(const ImplicitPath& path, std::span<const ObstacleField> obstacles,
                            const Vec2& xi, std::span<const int> circulations);

/// Zero-in gated normalized path field; zero when no path is active.
Vec2 humanIntention(const ImplicitPath* path, std::span<const ObstacleField> obstacles,
                    const Vec2& xi);

/// Default k_p for drawn paths (signed-distance field; 1 / convergence length).
inline constexpr double kDrawnPathGain = 0.2;

/// Builds a drawn path: drops points closer than min_spacing to the previous
/// kept point, resamples to uniform arc length, and orients travel along the
/// input order. Throws FieldError when fewer than two distinct points remain.
ImplicitPath pathFromPolyline(std::span<const Vec2> points, double min_spacing,
                              double gain = kDrawnPathGain);

/// Circulation picked when a robot enters a reactive area: the obstacle's fixed
/// circulation if set, otherwise the sign of (E grad phi) . velocity, +1 on ties.
int latchObstacleDirection(const ObstacleField& obstacle, const Vec2& xi, const Vec2& velocity);

}  // namespace higvf
