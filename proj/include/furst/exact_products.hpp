#pragma once

#include <cstdint>
#include <vector>

#include "furst/measure.hpp"
#include "furst/rational.hpp"

namespace furst {

// One deduplicated length-n product: the matrix, how many words reach it,
// its exact probability under the driving measure, and the first word (in
// enumeration order) that produced it.
struct ProductAtom {
  Mat2Q matrix;
  BigInt count;
  Rational weight;
  std::vector<int> witness;
};

struct FreenessReport {
  int free_up_to = 0;
  bool collision_found = false;
  int collision_length = 0;
  std::vector<int> word_a, word_b;  // distinct words, equal exact products
};

struct SeparationReport {
  int n = 0;
  Rational min_separation_exact;
  double min_separation = 0.0;
  double c_n = 0.0;  // min(1, min_separation)^(1/n), the per-step constant
  std::vector<int> word_a, word_b;
};

// h[k] = H(mu^{*(k+1)})/(k+1) in bits, exact weights underneath; h_n is the
// last entry. No extrapolation: the sequence itself is the deliverable.
struct EntropyRateEstimate {
  std::vector<double> h;
  double h_n = 0.0;
  int maxlen = 0;
};

// Work cap for one enumeration: frontier size times generator count at any
// level may not exceed this.
inline constexpr std::uint64_t kEnumerationBudget = 20'000'000;

std::vector<ProductAtom> exact_products(const std::vector<Mat2Q>& gens, int n,
                                        std::uint64_t budget = kEnumerationBudget);
std::vector<ProductAtom> exact_products(const AtomicMeasureG& mu, int n,
                                        std::uint64_t budget = kEnumerationBudget);

FreenessReport freeness_check(const std::vector<Mat2Q>& gens, int maxlen,
                              std::uint64_t budget = kEnumerationBudget);

EntropyRateEstimate rw_entropy_profile(const AtomicMeasureG& mu, int maxlen,
                                       std::uint64_t budget = kEnumerationBudget);

SeparationReport diophantine_separation(const std::vector<Mat2Q>& gens, int n,
                                        std::uint64_t budget = kEnumerationBudget);

// Shannon entropy in bits of the exact weights; dyadic weights produce an
// exactly representable result (see log2_rational).
double entropy_bits(const std::vector<ProductAtom>& atoms);

}  // namespace furst
