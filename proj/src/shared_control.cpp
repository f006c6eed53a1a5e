#include "higvf/shared_control.hpp"

#include <cmath>
#include <string>

namespace higvf {

void IntentionWeights::validate(int max_degree) const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("weight ") + name + " must be > 0");
    }
  };
  positive(w0, "w0");
  positive(w1, "w1");
  positive(w2, "w2");
  positive(w3, "w3");
  positive(speed, "C");
  positive(ks, "ks");
  positive(kf, "kf");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("weight eps must be >= 0");
  if (contraction(max_degree) >= 1.0) {
    throw std::invalid_argument("intention update not contractive: w0 + w1 + w3 + w2 * deg_max = " +
                                std::to_string(contraction(max_degree)) + " must be < 1");
  }
}

Vec2 deadZone(const Vec2& x, double eps) {
  const double n = x.norm();
  if (n <= eps || n == 0.0) return {};
  return ((n - eps) / n) * x;
}

Vec2 updateIntention(const IntentionState& state, const Vec2& target, const Vec2& human,
                     std::span<const Vec2> neighbor_shared, const IntentionWeights& w) {
  const Vec2& vs = state.shared;
  Vec2 rate = -w.w0 * vs + w.w1 * (target - vs);
  Vec2 social;
  for (const Vec2& vj : neighbor_shared) social += deadZone(vj - vs, w.eps);
  rate += w.w2 * social;
  if (state.influenced) rate += w.w3 * (human - vs);
  // Unit-step Euler: the bracket is the rate of change of v_s.
  return vs + rate;
}

Vec2 normalizeIntention(const Vec2& shared, double speed) {
  const double n = shared.norm();
  if (n == 0.0) return {};
  return (speed / n) * shared;
}

double blendWeight(double shared_norm, double formation_norm, double ks, double kf) {
  const double a = ks * shared_norm;
  const double denom = a + kf * formation_norm;
  if (denom == 0.0) return 0.0;
  return a / denom;
}

Vec2 blend(const Vec2& normalized_shared, const Vec2& formation, double shared_norm, double ks,
           double kf) {
  const double lambda = blendWeight(shared_norm, formation.norm(), ks, kf);
  return lambda * normalized_shared + (1.0 - lambda) * formation;
}

}  // namespace higvf
