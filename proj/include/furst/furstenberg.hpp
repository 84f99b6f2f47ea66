#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "furst/measure.hpp"
#include "furst/projective.hpp"

namespace furst {

/// Entropy-vs-level fit H(D_k) against k over [k_min, k_max]. `entropy`
/// holds the bias-corrected level entropies used in the fit, `bias` the
/// per-level Miller-Madow corrections that were applied, and `residuals`
/// the per-level fit residuals.
struct EntropyFit {
  double slope = 0;
  double intercept = 0;
  int k_min = 0, k_max = 0;
  std::vector<double> entropy;
  std::vector<double> bias;
  std::vector<double> residuals;
};

/// Local dimension statistics: per-probe least-squares slopes of
/// log2 mass(B_r(x)) against log2 r over a geometric radius grid, summarized
/// by their mean and sample standard deviation.
struct LocalDimProfile {
  double mean = 0;
  double stddev = 0;
  int probes = 0;
  double r_min = 0, r_max = 0;
  int n_radii = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // per-probe fitted slopes, probe order
};

/// Log-log fit of the worst linearization error against the perturbation
/// radius. max_error[i] is the largest deviation between the true action and
/// its affine model at radii[i].
struct LinearizationFit {
  double slope = 0;
  double intercept = 0;
  std::vector<double> radii;
  std::vector<double> max_error;
};

/// One application of an atomic measure to an empirical sample, together
/// with the entropy bookkeeping at matched resolutions: h_in is the sample
/// entropy at `level`, h_out the pushed-forward entropy at level + ell where
/// ell = ceil(2 log2 max ||atom||) is the largest possible cell spread.
/// normalized_gain = (h_out - h_in) / level.
struct ActionConvolution {
  std::vector<ProjPoint> points;
  int level = 0;
  int ell = 0;
  double h_in = 0;
  double h_out = 0;
  double normalized_gain = 0;
};

/// Combined dimension estimate for one stationary sample: the entropy-slope
/// and local-dimension estimators, the formula value min(1, h/(2 chi)), and
/// the provenance needed to reproduce the run.
struct DimensionReport {
  double entropy_slope = 0;
  double local_dim_mean = 0;
  double local_dim_std = 0;
  double formula_value = 0;
  double stationarity_tv = 0;
  int k_min = 0, k_max = 0;
  int n_word = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

/// Draws n_samples approximate stationary points: each is X_1...X_n z for an
/// independent word X_i ~ mu of length n_word applied to the base point z.
/// Deterministic given the seed and independent of the thread count.
std::vector<ProjPoint> sample_stationary(const AtomicMeasureG& mu, int n_word,
                                         int n_samples, ProjPoint z,
                                         std::uint64_t seed);

/// Chart coordinates of a point list, in order.
std::vector<double> thetas(const std::vector<ProjPoint>& points);

/// Total-variation distance at a dyadic level between the sample and the
/// sample pushed forward by one more independent mu-step per point. Small
/// values are evidence that the sample is (empirically) stationary.
double stationarity_distance(const AtomicMeasureG& mu,
                             const std::vector<ProjPoint>& points, int level,
                             std::uint64_t seed);

/// Least-squares slope of the level entropies H(D_k) over k in
/// [k_min, k_max]. Interpreting the slope as a dimension needs every level
/// well sampled, so this requires points.size() >= 100 * 2^k_max and throws
/// UndersampledError otherwise.
EntropyFit entropy_dimension_estimate(const std::vector<double>& points,
                                      int k_min, int k_max);

/// Fits a local dimension at `probes` points drawn from the sample, using
/// ball masses on an n_radii-point geometric grid spanning [r_min, r_max].
/// Distances wrap around the circle. Throws UndersampledError when a probe
/// ball at r_min holds fewer than 50 points.
LocalDimProfile local_dimension_profile(const std::vector<double>& points,
                                        int probes, double r_min, double r_max,
                                        int n_radii, std::uint64_t seed);

/// min(1, h_rw / (2 chi)). Throws DomainError unless chi > 0 and h_rw >= 0.
double dimension_formula(double h_rw, double chi);

/// Measures how well the action of group elements near g0 is approximated by
/// the affine model x -> g x0 + D (x - x0), with D the exact derivative of
/// the g0-action at x0. Samples per radius r: g = g0 (I + E) renormalized to
/// det 1 with entries of E uniform in [-r, r], and x uniform in B_r(x0).
/// Records the worst error per radius and fits its log-log slope (the model
/// is second order, so the slope should sit near 2). Throws DomainError when
/// x0 lies within 0.1 of the repelling direction of g0, where the derivative
/// of the action blows up.
LinearizationFit linearization_probe(const Mat2& g0, ProjPoint x0,
                                     double r_min, double r_max, int n_radii,
                                     int samples_per_radius,
                                     std::uint64_t seed);

/// Pushes each sample point forward by an independent g ~ theta and reports
/// the entropy comparison described on ActionConvolution.
ActionConvolution action_convolution(const AtomicMeasureG& theta,
                                     const std::vector<ProjPoint>& points,
                                     int level, std::uint64_t seed);

/// Runs both dimension estimators on a fresh stationary sample and compares
/// them with the formula value computed from the supplied random-walk
/// entropy and Lyapunov exponent. The entropy fit window is
/// [6, min(20, floor(log2(n_samples / 100)))] and the local-dimension window
/// is [2^-12, 2^-6] with 8 radii and 1000 probes.
DimensionReport measure_dimension(const AtomicMeasureG& mu, double h_rw,
                                  double chi, int n_word, int n_samples,
                                  std::uint64_t seed);

/// Binary point serialization: an 8-byte magic tag, a little-endian uint64
/// count, then count little-endian IEEE doubles. read_points throws
/// ConfigError on a bad tag or a truncated stream.
void write_points(const std::vector<double>& points, std::ostream& out);
std::vector<double> read_points(std::istream& in);

}  // namespace furst
