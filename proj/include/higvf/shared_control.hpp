#pragma once

// Two-layer shared control. The upper layer propagates a per-robot shared
// intention v_s from the robot's own target field, its neighbors' intentions
// (through a dead zone) and, on the single influenced robot, the human field.
// The lower layer blends the speed-normalized shared intention with the
// formation field using a weight that grows with |v_s| and shrinks with |v_f|.

#include <span>
#include <stdexcept>

#include "higvf/vec2.hpp"

namespace higvf {

struct IntentionWeights {
  double w0{0.05};  ///< leak
  double w1{0.3};   ///< robot intention
  double w2{0.1};   ///< neighbor intentions
  double w3{0.35};  ///< human intention
  double eps{0.01};  ///< dead zone
  double speed{40.0};  ///< C, desired motion speed
  double ks{3000.0};
  double kf{1.0};

  /// Throws std::invalid_argument on non-positive weights, or when the
  /// discrete update is not contractive: w0 + w1 + w3 + w2 * max_degree < 1.
  void validate(int max_degree) const;

  /// Contraction bound w0 + w1 + w3 + w2 * max_degree.
  double contraction(int max_degree) const { return w0 + w1 + w3 + w2 * max_degree; }
};

struct IntentionState {
  Vec2 shared;  ///< v_s, zero at start
  bool influenced{false};  ///< Psi
};

/// (|x| - eps) x / |x| above the threshold, zero otherwise.
Vec2 deadZone(const Vec2& x, double eps);

/// One synchronous unit step of the shared intention, v_s + r with
///   r = -w0 v_s + w1 (v_t - v_s) + w2 sum_j deadZone(v_s_j - v_s) + w3 Psi (v_h - v_s).
/// With w0 + w1 + w3 + w2 * deg < 1 every coefficient of the map is
/// non-negative and it contracts. `neighbor_shared` holds step-k values.
Vec2 updateIntention(const IntentionState& state, const Vec2& target, const Vec2& human,
                     std::span<const Vec2> neighbor_shared, const IntentionWeights& w);

/// C v_s / |v_s|; zero for v_s = 0.
Vec2 normalizeIntention(const Vec2& shared, double speed);

/// k_s a / (k_s a + k_f b), with 0 when both norms vanish.
double blendWeight(double shared_norm, double formation_norm, double ks, double kf);

/// lambda * normalized intention + (1 - lambda) * formation field.
Vec2 blend(const Vec2& normalized_shared, const Vec2& formation, double shared_norm, double ks,
           double kf);

}  // namespace higvf
