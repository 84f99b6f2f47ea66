#pragma once

#include <cmath>

#include "furst/errors.hpp"

namespace furst {

struct Vec2 {
  double x = 0, y = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator-(Vec2 v) { return {-v.x, -v.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// z-component of a wedge b; vanishes iff a and b are collinear.
inline double wedge(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Rotation of v by +90 degrees.
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  return {v.x / n, v.y / n};
}

/// 2x2 real matrix, row-major [[a, b], [c, d]]. Defaults to the identity.
struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;
};

inline Mat2 operator*(const Mat2& m, const Mat2& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

inline Mat2 operator-(const Mat2& m, const Mat2& n) {
  return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
}

inline Mat2 operator*(double s, const Mat2& m) {
  return {s * m.a, s * m.b, s * m.c, s * m.d};
}

inline Vec2 apply(const Mat2& m, Vec2 v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline Mat2 transpose(const Mat2& m) { return {m.a, m.c, m.b, m.d}; }

inline double det(const Mat2& m) { return m.a * m.d - m.b * m.c; }

inline double frobenius_norm(const Mat2& m) {
  return std::sqrt(m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
}

/// Largest singular value (operator norm for the Euclidean metric).
inline double operator_norm(const Mat2& m) {
  const double p = m.a * m.a + m.c * m.c;
  const double q = m.a * m.b + m.c * m.d;
  const double r = m.b * m.b + m.d * m.d;
  const double disc = std::hypot(p - r, 2 * q);
  return std::sqrt(0.5 * (p + r + disc));
}

/// Distance on the matrix group: the operator norm of the difference.
inline double group_distance(const Mat2& g, const Mat2& h) {
  return operator_norm(g - h);
}

/// Rotation by `angle` radians.
inline Mat2 rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c, -s, s, c};
}

/// Throws DeterminantError unless |det(A) - 1| <= tol. Never normalizes the
/// input; callers that want a unimodular matrix must supply one.
inline void validate_sl2(const Mat2& A, double tol = 1e-9) {
  const double d = det(A);
  if (!(std::abs(d - 1.0) <= tol)) throw DeterminantError(d);
}

}  // namespace furst
