#pragma once

#include <cmath>

namespace higvf {

/// Planar position / velocity.
struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  friend constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

  Vec2& operator+=(const Vec2& r) {
    x += r.x;
    y += r.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& r) {
    x -= r.x;
    y -= r.y;
    return *this;
  }
  Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
  /// z-component of the 3-D cross product.
  constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
  constexpr double squaredNorm() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }

  /// Unit vector, or exactly zero for the zero vector.
  Vec2 normalized() const {
    const double n = norm();
    if (n == 0.0 || !std::isfinite(n)) return {};
    return {x / n, y / n};
  }

  bool isFinite() const { return std::isfinite(x) && std::isfinite(y); }
};

/// Fixed 90 degree rotation E = [[0,-1],[1,0]].
constexpr Vec2 rotate90(const Vec2& v) { return {-v.y, v.x}; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

}  // namespace higvf
