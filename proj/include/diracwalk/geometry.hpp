#pragma once

#include <cmath>

namespace dqw {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
};

constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Rectangular flat torus [0, width) x [0, height).
struct Torus {
  double width = 0.0;
  double height = 0.0;

  /// Minimum-image displacement b - a. For a rectangular torus reducing each
  /// coordinate independently into [-L/2, L/2] is the global minimum.
  Vec2 delta(Vec2 a, Vec2 b) const {
    return {std::remainder(b.x - a.x, width), std::remainder(b.y - a.y, height)};
  }

  double distance(Vec2 a, Vec2 b) const { return delta(a, b).norm(); }

  Vec2 wrap(Vec2 p) const {
    double x = std::fmod(p.x, width);
    double y = std::fmod(p.y, height);
    if (x < 0) x += width;
    if (y < 0) y += height;
    return {x, y};
  }
};

}  // namespace dqw
