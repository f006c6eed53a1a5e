#include "higvf/field_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace higvf {

namespace {

constexpr int kSamplesPerSegment = 16;

Vec2 rotateBy(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

void requireDirection(int direction) {
  if (direction != 1 && direction != -1) throw FieldError("path direction must be +1 or -1");
}

void requireGain(double gain, const char* what) {
  if (!(gain > 0.0) || !std::isfinite(gain)) throw FieldError(std::string(what) + " must be > 0");
}

// Golden-section search for the minimum of f on [lo, hi].
template <typename F>
double goldenMinimum(F&& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // The bracket ends may beat the interior when the minimum sits on the boundary.
  double best = mid;
  double fbest = f(mid);
  for (double cand : {lo, hi}) {
    const double fv = f(cand);
    if (fv < fbest) {
      fbest = fv;
      best = cand;
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// SplinePath

SplinePath::SplinePath(std::vector<Vec2> control_points, double gradient_step)
    : step_(gradient_step) {
  if (!(gradient_step > 0.0)) throw FieldError("spline gradient step must be > 0");
  for (const Vec2& p : control_points) {
    if (!p.isFinite()) throw FieldError("spline control point is not finite");
    if (points_.empty() || !(points_.back() == p)) points_.push_back(p);
  }
  if (points_.size() < 2) throw FieldError("degenerate path: fewer than 2 distinct points");
}

Vec2 SplinePath::pointAt(double u) const {
  const auto n = static_cast<double>(points_.size());
  if (u < 0.0) return points_.front() + u * tangentAt(0.0);
  if (u > n - 1.0) return points_.back() + (u - (n - 1.0)) * tangentAt(n - 1.0);

  const auto last_seg = static_cast<std::size_t>(points_.size() - 2);
  const auto seg = std::min(static_cast<std::size_t>(u), last_seg);
  const double t = u - static_cast<double>(seg);
  const Vec2& p1 = points_[seg];
  const Vec2& p2 = points_[seg + 1];
  const Vec2 p0 = seg == 0 ? 2.0 * p1 - p2 : points_[seg - 1];
  const Vec2 p3 = seg + 2 < points_.size() ? points_[seg + 2] : 2.0 * p2 - p1;
  const Vec2 c1 = -p0 + p2;
  const Vec2 c2 = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
  const Vec2 c3 = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
  return 0.5 * (2.0 * p1 + t * (c1 + t * (c2 + t * c3)));
}

Vec2 SplinePath::tangentAt(double u) const {
  const auto n = static_cast<double>(points_.size());
  const double uc = std::clamp(u, 0.0, n - 1.0);
  const auto last_seg = static_cast<std::size_t>(points_.size() - 2);
  const auto seg = std::min(static_cast<std::size_t>(uc), last_seg);
  const double t = uc - static_cast<double>(seg);
  const Vec2& p1 = points_[seg];
  const Vec2& p2 = points_[seg + 1];
  const Vec2 p0 = seg == 0 ? 2.0 * p1 - p2 : points_[seg - 1];
  const Vec2 p3 = seg + 2 < points_.size() ? points_[seg + 2] : 2.0 * p2 - p1;
  const Vec2 c1 = -p0 + p2;
  const Vec2 c2 = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
  const Vec2 c3 = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
  return 0.5 * (c1 + t * (2.0 * c2 + t * 3.0 * c3));
}

double SplinePath::nearestParameter(const Vec2& xi) const {
  const auto n = static_cast<double>(points_.size());
  const auto dist2 = [&](double u) { return (pointAt(u) - xi).squaredNorm(); };

  const int total = kSamplesPerSegment * static_cast<int>(points_.size() - 1);
  std::vector<double> d(static_cast<std::size_t>(total) + 1);
  for (int j = 0; j <= total; ++j) {
    d[static_cast<std::size_t>(j)] = dist2(static_cast<double>(j) / kSamplesPerSegment);
  }

  std::vector<double> candidates;
  // End rays.
  const Vec2 t0 = tangentAt(0.0);
  const double tau0 = (xi - points_.front()).dot(t0) / t0.squaredNorm();
  if (tau0 < 0.0) candidates.push_back(tau0);
  for (int j = 0; j <= total; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const bool left_ok = j == 0 || d[k] <= d[k - 1];
    const bool right_ok = j == total || d[k] <= d[k + 1];
    if (!(left_ok && right_ok)) continue;
    const double lo = std::max(0.0, static_cast<double>(j - 1) / kSamplesPerSegment);
    const double hi = std::min(n - 1.0, static_cast<double>(j + 1) / kSamplesPerSegment);
    candidates.push_back(goldenMinimum(dist2, lo, hi));
  }
  const Vec2 t1 = tangentAt(n - 1.0);
  const double tau1 = (xi - points_.back()).dot(t1) / t1.squaredNorm();
  if (tau1 > 0.0) candidates.push_back(n - 1.0 + tau1);

  double best_u = candidates.empty() ? 0.0 : candidates.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (double u : candidates) {
    const double du = dist2(u);
    // Candidates arrive in increasing parameter order; near-ties keep the earlier one.
    if (du < best_d * (1.0 - 1e-12)) {
      best_d = du;
      best_u = u;
    }
  }
  return best_u;
}

double SplinePath::signedDistance(const Vec2& xi) const {
  const double u = nearestParameter(xi);
  const Vec2 r = xi - pointAt(u);
  const double side = tangentAt(u).cross(r);
  const double dist = r.norm();
  return side < 0.0 ? -dist : dist;
}

FieldSample SplinePath::evaluate(const Vec2& xi) const {
  const double h = step_;
  FieldSample s;
  s.value = signedDistance(xi);
  s.gradient.x = (signedDistance({xi.x + h, xi.y}) - signedDistance({xi.x - h, xi.y})) / (2.0 * h);
  s.gradient.y = (signedDistance({xi.x, xi.y + h}) - signedDistance({xi.x, xi.y - h})) / (2.0 * h);
  return s;
}

// ---------------------------------------------------------------------------
// ImplicitPath

ImplicitPath ImplicitPath::circle(Vec2 center, double radius, int direction, double gain) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw FieldError("circle radius must be > 0");
  if (!center.isFinite()) throw FieldError("circle center is not finite");
  requireDirection(direction);
  requireGain(gain, "path gain");
  return ImplicitPath{CirclePath{center, radius}, direction, gain};
}

ImplicitPath ImplicitPath::spline(std::vector<Vec2> points, int direction, double gain,
                                  double gradient_step) {
  requireDirection(direction);
  requireGain(gain, "path gain");
  return ImplicitPath{SplinePath(std::move(points), gradient_step), direction, gain};
}

FieldSample evaluate(const ImplicitPath& path, const Vec2& xi) {
  if (const auto* c = std::get_if<CirclePath>(&path.shape)) {
    const Vec2 r = xi - c->center;
    return {r.squaredNorm() - c->radius * c->radius, 2.0 * r};
  }
  return std::get<SplinePath>(path.shape).evaluate(xi);
}

// ---------------------------------------------------------------------------
// ObstacleField

ObstacleField::ObstacleField(std::variant<DiskBody, BarBody> body, const ObstacleParams& params)
    : body_(body),
      circulation_(params.circulation),
      gain_(params.gain),
      l1_(params.l1),
      l2_(params.l2) {
  requireGain(params.gain, "obstacle gain");
  requireGain(params.l1, "bump rate l1");
  requireGain(params.l2, "bump rate l2");
  const ObstacleMargins& m = params.margins;
  if (!(m.repulsive > 0.0) || !(m.reactive > m.repulsive)) {
    throw FieldError("obstacle margins must satisfy 0 < repulsive < reactive");
  }

  double body_half_a = 0.0;
  double body_half_b = 0.0;
  if (const auto* d = std::get_if<DiskBody>(&body_)) {
    if (!(d->radius > 0.0)) throw FieldError("disk obstacle radius must be > 0");
    semi_a_ = semi_b_ = d->radius + m.reactive;
    const double ratio = (d->radius + m.repulsive) / (d->radius + m.reactive);
    level_ = ratio * ratio - 1.0;
    body_half_a = body_half_b = d->radius;
  } else {
    const auto& b = std::get<BarBody>(body_);
    if (!(b.half_length > 0.0) || !(b.half_width > 0.0)) {
      throw FieldError("bar obstacle extents must be > 0");
    }
    // An ellipse with semi-axes sqrt(2) * (half extents) passes through the
    // rectangle corners; the margins grow it outward.
    semi_a_ = std::sqrt(2.0) * (b.half_length + m.reactive);
    semi_b_ = std::sqrt(2.0) * (b.half_width + m.reactive);
    const double ratio = std::max((b.half_length + m.repulsive) / (b.half_length + m.reactive),
                                  (b.half_width + m.repulsive) / (b.half_width + m.reactive));
    level_ = ratio * ratio - 1.0;
    body_half_a = b.half_length;
    body_half_b = b.half_width;
  }

  if (params.repulsive_level) {
    const double c = *params.repulsive_level;
    if (!(c > -1.0 && c < 0.0)) throw FieldError("repulsive level must lie in (-1, 0)");
    level_ = c;
  }
  // The repulsive boundary must strictly enclose the body.
  const double scale = std::sqrt(1.0 + level_);
  const double qa = scale * semi_a_;
  const double qb = scale * semi_b_;
  const bool encloses = isDisk() ? qa > body_half_a
                                 : (body_half_a / qa) * (body_half_a / qa) +
                                           (body_half_b / qb) * (body_half_b / qb) <
                                       1.0;
  if (!encloses) throw FieldError("repulsive boundary does not enclose the obstacle body");
}

Vec2 ObstacleField::center() const {
  return std::visit([](const auto& b) { return b.center; }, body_);
}

double ObstacleField::heading() const {
  if (const auto* b = std::get_if<BarBody>(&body_)) return b->heading;
  return 0.0;
}

Vec2 ObstacleField::toBodyFrame(const Vec2& xi) const {
  return rotateBy(xi - center(), -heading());
}

Vec2 ObstacleField::fromBodyFrame(const Vec2& local) const {
  return center() + rotateBy(local, heading());
}

FieldSample ObstacleField::evaluate(const Vec2& xi) const {
  const Vec2 p = toBodyFrame(xi);
  const double ia = 1.0 / (semi_a_ * semi_a_);
  const double ib = 1.0 / (semi_b_ * semi_b_);
  FieldSample s;
  s.value = p.x * p.x * ia + p.y * p.y * ib - 1.0;
  s.gradient = rotateBy({2.0 * p.x * ia, 2.0 * p.y * ib}, heading());
  return s;
}

Vec2 ObstacleField::spinePoint(const Vec2& xi) const {
  if (const auto* b = std::get_if<BarBody>(&body_)) {
    const Vec2 p = toBodyFrame(xi);
    return fromBodyFrame({std::clamp(p.x, -b->half_length, b->half_length), 0.0});
  }
  return center();
}

double ObstacleField::bodyDistance(const Vec2& xi) const {
  if (const auto* d = std::get_if<DiskBody>(&body_)) return distance(xi, d->center) - d->radius;
  const auto& b = std::get<BarBody>(body_);
  const Vec2 p = toBodyFrame(xi);
  const double qx = std::abs(p.x) - b.half_length;
  const double qy = std::abs(p.y) - b.half_width;
  const double outside = Vec2(std::max(qx, 0.0), std::max(qy, 0.0)).norm();
  return outside + std::min(std::max(qx, qy), 0.0);
}

std::vector<Vec2> ObstacleField::corners() const {
  const auto* b = std::get_if<BarBody>(&body_);
  if (!b) return {};
  const double l = b->half_length;
  const double w = b->half_width;
  return {fromBodyFrame({l, -w}), fromBodyFrame({l, w}), fromBodyFrame({-l, w}),
          fromBodyFrame({-l, -w})};
}

std::vector<Vec2> ObstacleField::boundaryPolygon(double level, int samples) const {
  std::vector<Vec2> out;
  if (level <= -1.0 || samples <= 0) return out;
  const double s = std::sqrt(1.0 + level);
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double t = 2.0 * M_PI * static_cast<double>(i) / samples;
    out.push_back(fromBodyFrame({s * semi_a_ * std::cos(t), s * semi_b_ * std::sin(t)}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector fields

Vec2 gvf(const FieldSample& sample, int gamma, double k) {
  return static_cast<double>(gamma) * rotate90(sample.gradient) -
         k * sample.value * sample.gradient;
}

Vec2 gvf(const ImplicitPath& path, const Vec2& xi, int gamma, double k) {
  return gvf(evaluate(path, xi), gamma, k);
}

Vec2 gvf(const ObstacleField& obstacle, const Vec2& xi, int gamma, double k) {
  return gvf(obstacle.evaluate(xi), gamma, k);
}

Vec2 pathField(const ImplicitPath& path, const Vec2& xi) {
  return gvf(path, xi, path.direction, path.gain);
}

BumpPair bumps(double phi, double level, double l1, double l2) {
  if (phi <= level) return {1.0, 0.0};
  if (phi >= 0.0) return {0.0, 1.0};
  // f1 = exp(a), f2 = exp(b); the ratios are formed from the exponent gap so
  // neither term underflows to 0/0 near the boundaries.
  const double a = l1 / (level - phi);
  const double b = l2 / phi;
  return {1.0 / (1.0 + std::exp(a - b)), 1.0 / (1.0 + std::exp(b - a))};
}

double bumpZeroOut(const ObstacleField& obstacle, const Vec2& xi) {
  return bumps(obstacle.evaluate(xi).value, obstacle.repulsiveLevel(), obstacle.l1(),
               obstacle.l2())
      .zero_out;
}

double bumpZeroIn(const ObstacleField& obstacle, const Vec2& xi) {
  return bumps(obstacle.evaluate(xi).value, obstacle.repulsiveLevel(), obstacle.l1(),
               obstacle.l2())
      .zero_in;
}

double zeroInProduct(std::span<const ObstacleField> obstacles, const Vec2& xi) {
  double prod = 1.0;
  for (const auto& ob : obstacles) prod *= bumpZeroIn(ob, xi);
  return prod;
}

Vec2 compositeField(const ImplicitPath& path, std::span<const ObstacleField> obstacles,
                    const Vec2& xi, std::span<const int> circulations) {
  if (circulations.size() != obstacles.size()) {
    throw std::invalid_argument("one circulation per obstacle required");
  }
  double prod = 1.0;
  Vec2 sum;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const ObstacleField& ob = obstacles[i];
    const FieldSample s = ob.evaluate(xi);
    const BumpPair w = bumps(s.value, ob.repulsiveLevel(), ob.l1(), ob.l2());
    prod *= w.zero_in;
    if (w.zero_out != 0.0) sum += w.zero_out * gvf(s, circulations[i], ob.gain()).normalized();
  }
  return prod * pathField(path, xi).normalized() + sum;
}

Vec2 compositeFieldBranches(const ImplicitPath& path, std::span<const ObstacleField> obstacles,
                            const Vec2& xi, std::span<const int> circulations) {
  if (circulations.size() != obstacles.size()) {
    throw std::invalid_argument("one circulation per obstacle required");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const ObstacleField& ob = obstacles[i];
    const FieldSample s = ob.evaluate(xi);
    if (s.value <= ob.repulsiveLevel()) return gvf(s, circulations[i], ob.gain()).normalized();
    if (s.value < 0.0) {
      const BumpPair w = bumps(s.value, ob.repulsiveLevel(), ob.l1(), ob.l2());
      return w.zero_in * pathField(path, xi).normalized() +
             w.zero_out * gvf(s, circulations[i], ob.gain()).normalized();
    }
  }
  return pathField(path, xi).normalized();
}

Vec2 humanIntention(const ImplicitPath* path, std::span<const ObstacleField> obstacles,
                    const Vec2& xi) {
  if (path == nullptr) return {};
  const double prod = zeroInProduct(obstacles, xi);
  if (prod == 0.0) return {};
  return prod * pathField(*path, xi).normalized();
}

ImplicitPath pathFromPolyline(std::span<const Vec2> points, double min_spacing, double gain) {
  if (!(min_spacing > 0.0)) throw FieldError("min spacing must be > 0");
  std::vector<Vec2> kept;
  for (const Vec2& p : points) {
    if (!p.isFinite()) throw FieldError("path point is not finite");
    if (kept.empty() || distance(p, kept.back()) >= min_spacing) kept.push_back(p);
  }
  if (!points.empty() && !kept.empty() && !(points.back() == kept.back())) {
    // Keep the stroke's end point; it replaces a too-close predecessor.
    if (kept.size() == 1) {
      kept.push_back(points.back());
    } else {
      kept.back() = points.back();
    }
  }
  if (kept.size() < 2) throw FieldError("degenerate path: fewer than 2 distinct points");

  std::vector<double> arc(kept.size(), 0.0);
  for (std::size_t i = 1; i < kept.size(); ++i) arc[i] = arc[i - 1] + distance(kept[i], kept[i - 1]);
  const double length = arc.back();
  const auto segments = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(length / min_spacing)));

  std::vector<Vec2> resampled;
  resampled.reserve(segments + 1);
  std::size_t j = 0;
  for (std::size_t i = 0; i <= segments; ++i) {
    const double s = length * static_cast<double>(i) / static_cast<double>(segments);
    while (j + 2 < kept.size() && arc[j + 1] < s) ++j;
    const double span = arc[j + 1] - arc[j];
    const double t = span > 0.0 ? std::clamp((s - arc[j]) / span, 0.0, 1.0) : 0.0;
    resampled.push_back(kept[j] + t * (kept[j + 1] - kept[j]));
  }
  resampled.back() = kept.back();
  // phi is positive on the left of travel; gamma = -1 makes E grad(phi) point
  // along the input order.
  return ImplicitPath::spline(std::move(resampled), -1, gain);
}

int latchObstacleDirection(const ObstacleField& obstacle, const Vec2& xi, const Vec2& velocity) {
  switch (obstacle.circulation()) {
    case Circulation::kPositive:
      return 1;
    case Circulation::kNegative:
      return -1;
    case Circulation::kAuto:
      break;
  }
  const double s = rotate90(obstacle.evaluate(xi).gradient).dot(velocity);
  return s >= 0.0 ? 1 : -1;
}

}  // namespace higvf
