#pragma once

#include <cstdint>
#include <vector>

#include "furst/measure.hpp"
#include "furst/projective.hpp"

namespace furst {

struct LyapunovEstimate {
  double chi_hat = 0.0;     // bits per step: mean of (1/n) log2 ||X1...Xn||
  double lambda_hat = 1.0;  // 2^chi_hat
  double std_err = 0.0;     // sample sd across trials / sqrt(trials)
  int n_steps = 0;
  int n_trials = 0;
  std::uint64_t seed = 0;
};

// Convergence-rate diagnostic for the attracting singular direction of the
// running product Z_n = X1...Xn. Per trial the direction w_n of Z_n is
// compared against its own endpoint w_{n_max} (proxy for the limit; bias
// about lambda^{-2 n_max}), and the slope of log2 distance vs n is fitted
// over the middle half n in [n_max/4, 3 n_max/4]. Distances live far below
// double resolution, so the walk runs in extended precision internally.
struct DecayReport {
  double mean_slope = 0.0;  // fitted bits per step; compare with target
  double slope_std_err = 0.0;
  double chi_hat = 0.0;     // from log2 of the top singular value at n_max
  double target = 0.0;      // -2 * chi_hat
  int trials_fitted = 0;    // trials with at least two nonzero distances
  bool exact_convergence = false;  // every window distance was exactly zero
  int n_max = 0;
  int n_trials = 0;
  std::uint64_t seed = 0;
};

// Concentration probe: how often the pushed-forward start point z lands
// within 2^{-2(chi_hat - eps_n) n} of the attracting direction, eps_n =
// n^{-1/2}. The attracting direction is proxied by extending each walk 64
// extra steps. Distances shrinking beyond the ~700-bit internal resolution
// register as exactly converged, which caps the useful n near 350/chi_hat.
struct AttractorStats {
  double fraction_below = 0.0;
  double chi_hat = 0.0;
  double eps_n = 0.0;
  double threshold_log2 = 0.0;  // -2 (chi_hat - eps_n) n
  int n = 0;
  int n_trials = 0;
  std::uint64_t seed = 0;
};

// i.i.d. atom indices with the weights of mu; pure function of (mu, n, seed).
std::vector<int> sample_word(const AtomicMeasureG& mu, int n,
                             std::uint64_t seed);

LyapunovEstimate lyapunov_estimate(const AtomicMeasureG& mu, int n, int trials,
                                   std::uint64_t seed);

DecayReport oseledets_diagnostic(const AtomicMeasureG& mu, int n_max,
                                 int trials, std::uint64_t seed);

AttractorStats attractor_concentration(const AtomicMeasureG& mu, int n,
                                       int trials, ProjPoint z,
                                       std::uint64_t seed);

}  // namespace furst
