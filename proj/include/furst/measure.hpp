#pragma once

#include <algorithm>
#include <cstddef>
#include <unordered_set>
#include <utility>
#include <vector>

#include "furst/mat2.hpp"
#include "furst/rational.hpp"
#include "furst/rng.hpp"

namespace furst {

// Finitely supported probability measure on the matrix group, kept exact:
// weights are rationals summing to exactly 1 and atoms are pairwise
// distinct. Everything float-valued downstream goes through float_view.
struct AtomicMeasureG {
  std::vector<Mat2Q> atoms;
  std::vector<Rational> weights;
};

inline AtomicMeasureG make_measure(std::vector<Mat2Q> atoms,
                                   std::vector<Rational> weights) {
  if (atoms.empty()) throw DomainError("measure needs at least one atom");
  if (atoms.size() != weights.size())
    throw DomainError("measure atom/weight counts differ");
  Rational total = 0;
  for (const Rational& w : weights) {
    if (w <= 0) throw DomainError("measure weights must be positive");
    total += w;
  }
  if (total != 1) throw DomainError("measure weights must sum to exactly 1");
  std::unordered_set<Mat2Q, Mat2QHash> seen;
  for (const Mat2Q& a : atoms)
    if (!seen.insert(a).second) throw DomainError("measure atoms must be distinct");
  return {std::move(atoms), std::move(weights)};
}

inline AtomicMeasureG uniform_measure(std::vector<Mat2Q> atoms) {
  std::vector<Rational> weights(atoms.size(),
                                Rational(1, static_cast<long>(atoms.size())));
  return make_measure(std::move(atoms), std::move(weights));
}

// Double-precision view used by the samplers. cdf.back() is forced to 1 so
// inverse-cdf lookup with u01() < 1 always lands on a valid index.
struct MeasureF {
  std::vector<Mat2> atoms;
  std::vector<double> weights;
  std::vector<double> cdf;

  std::size_t sample(SplitMix64& rng) const {
    double u = rng.u01();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
  }
};

inline MeasureF float_view(const AtomicMeasureG& mu) {
  MeasureF out;
  out.atoms.reserve(mu.atoms.size());
  out.weights.reserve(mu.atoms.size());
  out.cdf.reserve(mu.atoms.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    out.atoms.push_back(to_mat2(mu.atoms[i]));
    out.weights.push_back(to_double(mu.weights[i]));
    acc += out.weights.back();
    out.cdf.push_back(acc);
  }
  out.cdf.back() = 1.0;
  return out;
}

}  // namespace furst
