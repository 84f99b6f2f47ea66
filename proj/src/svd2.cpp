#include "furst/svd2.hpp"

#include <cmath>

#include "furst/errors.hpp"

namespace furst {

namespace {

Vec2 sign_fixed(Vec2 v) {
  if (v.x < 0 || (v.x == 0 && v.y < 0)) return -v;
  return v;
}

}  // namespace

SingularDecomposition singular_decomposition(const Mat2& A) {
  SingularDecomposition s;
  // Eigenstructure of A^T A = [[p, q], [q, r]].
  const double p = A.a * A.a + A.c * A.c;
  const double q = A.a * A.b + A.c * A.d;
  const double r = A.b * A.b + A.d * A.d;
  const double disc = std::hypot(p - r, 2 * q);
  const double lp2 = 0.5 * (p + r + disc);
  s.lambda_plus = std::sqrt(lp2);
  // lambda+ * lambda- = |det A| exactly; dividing is far more accurate than
  // subtracting nearly equal quantities in the small eigenvalue.
  s.lambda_minus = std::abs(det(A)) / s.lambda_plus;
  if (!(s.lambda_plus > s.lambda_minus * (1.0 + 1e-9))) {
    s.degenerate = true;
    return s;
  }
  Vec2 u;
  if (q == 0) {
    u = (p >= r) ? Vec2{1, 0} : Vec2{0, 1};
  } else {
    // Rows of (A^T A - lp2 I) each give an eigenvector formula; pick the
    // better conditioned of the two.
    const Vec2 c1{q, lp2 - p};
    const Vec2 c2{lp2 - r, q};
    u = normalized(dot(c1, c1) >= dot(c2, c2) ? c1 : c2);
  }
  const Vec2 up = sign_fixed(u);
  const Vec2 um = sign_fixed(perp(u));
  const Vec2 vp = sign_fixed(normalized(apply(A, up)));
  const Vec2 vm = sign_fixed(normalized(apply(A, um)));
  s.u_plus_vec = up;
  s.u_minus_vec = um;
  s.v_plus_vec = vp;
  s.v_minus_vec = vm;
  s.u_plus = line_through(up);
  s.u_minus = line_through(um);
  s.v_plus = line_through(vp);
  s.v_minus = line_through(vm);
  return s;
}

InducedMap induced_map(const Mat2& A, double theta) {
  const SingularDecomposition s = singular_decomposition(A);
  if (s.degenerate)
    throw DegenerateError(
        "induced circle map undefined: singular values coincide");
  // In the singular charts A maps gamma_{u+}(theta) to the direction
  // lambda+ cos(pi theta) v+ + lambda- sin(pi theta) perp(v+); atan2 keeps
  // the formula finite across theta = 1/2 and lands in [0, 1) after mod1.
  const double c = std::cos(kPi * theta);
  const double sn = std::sin(kPi * theta);
  const double xc = s.lambda_plus * c;
  const double xs = s.lambda_minus * sn;
  InducedMap m;
  m.value = mod1(std::atan2(xs, xc) / kPi);
  m.derivative = (s.lambda_plus * s.lambda_minus) / (xc * xc + xs * xs);
  return m;
}

}  // namespace furst
