#pragma once

#include <cmath>
#include <numbers>

#include "furst/mat2.hpp"

namespace furst {

inline constexpr double kPi = std::numbers::pi;

/// Reduction to [0, 1); the circle is parametrized with circumference 1.
inline double mod1(double x) {
  const double r = x - std::floor(x);
  return r < 1.0 ? r : 0.0;  // x = -eps rounds r up to 1.0; fold it back
}

/// Signed representative of x mod 1 in (-1/2, 1/2]; for local differences.
inline double wrap_half(double x) {
  const double r = mod1(x);
  return r > 0.5 ? r - 1.0 : r;
}

/// Point of the projective line, stored as its coordinate in the canonical
/// chart: the line spanned by (x, y) sits at 1/2 + arctan(y/x)/pi mod 1 and
/// the vertical line x = 0 sits at 0. Distances below make the total
/// circumference 1 and the diameter 1/2.
struct ProjPoint {
  double theta = 0;
};

/// Chart coordinate of the line through v (v must be nonzero). Independent
/// of the representative: v and -v give the same point.
inline ProjPoint line_through(Vec2 v) {
  if (v.x == 0) return {0.0};
  return {mod1(0.5 + std::atan(v.y / v.x) / kPi)};
}

/// Unit representative of p with first nonzero coordinate positive.
inline Vec2 unit_vector(ProjPoint p) {
  if (p.theta == 0) return {0.0, 1.0};
  const double phi = kPi * (p.theta - 0.5);  // in (-pi/2, pi/2)
  return {std::cos(phi), std::sin(phi)};
}

/// d(p, q) = min(|dtheta|, 1 - |dtheta|), the angle metric scaled by 1/pi.
inline double proj_distance(ProjPoint p, ProjPoint q) {
  const double d = std::abs(p.theta - q.theta);
  return std::min(d, 1.0 - d);
}

/// Unit-speed parametrization of the circle based at the unit vector u.
inline Vec2 gamma(Vec2 u, double theta) {
  return std::cos(kPi * theta) * u + std::sin(kPi * theta) * perp(u);
}

/// Coordinate of the line x in the chart based at the unit vector u:
/// (1/pi) arctan(<x, perp(u)> / <x, u>) mod 1. The base line maps to 0, the
/// orthogonal line to 1/2, and the branch wraps at the base line itself.
/// Depends on u only through its line, and inverts gamma(u, .) mod 1.
inline double angle_coordinate(Vec2 u, Vec2 x) {
  const double den = dot(x, u);
  if (den == 0) return 0.5;
  return mod1(std::atan(dot(x, perp(u)) / den) / kPi);
}

/// Projective action A.p; independent of the matrix and vector
/// representatives, so act(-A, p) = act(A, p) exactly.
inline ProjPoint act(const Mat2& A, ProjPoint p) {
  return line_through(apply(A, unit_vector(p)));
}

}  // namespace furst
