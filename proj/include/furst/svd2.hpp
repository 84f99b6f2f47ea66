#pragma once

#include "furst/mat2.hpp"
#include "furst/projective.hpp"

namespace furst {

/// Singular structure of an invertible 2x2 matrix: A maps the orthogonal
/// directions u+/u- to lambda+ v+ / lambda- v-. Vector representatives are
/// unit length with first nonzero coordinate positive. When the singular
/// values coincide within a relative 1e-9 the directions are ill-defined;
/// `degenerate` is set and the direction fields are left default.
struct SingularDecomposition {
  double lambda_plus = 0;
  double lambda_minus = 0;
  ProjPoint u_plus{}, u_minus{}, v_plus{}, v_minus{};
  Vec2 u_plus_vec{}, u_minus_vec{}, v_plus_vec{}, v_minus_vec{};
  bool degenerate = false;
};

SingularDecomposition singular_decomposition(const Mat2& A);

/// Value and derivative of the circle map induced by A between its singular
/// charts: the argument theta is read in the chart based at u+, the value is
/// returned in the chart based at v+. For singular values lambda >= 1/lambda
/// this is theta -> (1/pi) arctan(lambda^-2 tan(pi theta)) with derivative
/// 1 / (lambda^2 cos^2(pi theta) + lambda^-2 sin^2(pi theta)); the derivative
/// ranges over [lambda^-2, lambda^2], attaining the extremes at u+ (theta=0)
/// and u- (theta=1/2). Throws DegenerateError when the charts are undefined.
struct InducedMap {
  double value = 0;
  double derivative = 0;
};

InducedMap induced_map(const Mat2& A, double theta);

}  // namespace furst
