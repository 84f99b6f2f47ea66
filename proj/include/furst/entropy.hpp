#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace furst {

// Counts over the level-k dyadic partition of [0,1), stored sparsely as
// sorted (cell index, count) pairs with positive counts. Histograms form a
// merge monoid per level, which is how construction parallelizes.
struct DyadicHistogram {
  int level = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> cells;
  std::uint64_t total = 0;
};

// Double-precision points carry ~52 mantissa bits; 40 leaves headroom.
inline constexpr int kLevelCap = 40;

struct PorosityProfile {
  double h = 0.0;
  double delta = 0.0;
  int m = 0;
  int n1 = 0;
  int n2 = 0;
  double fraction = 0.0;  // P((1/m) component entropy <= h + delta)
  int samples = 0;
  int resampled_empty = 0;  // defensive; zero when x is drawn from the points
  double empty_rate = 0.0;
};

DyadicHistogram histogram(const std::vector<double>& points, int level);

// -sum p log2 p in bits, 0 log 0 = 0. Cell weights that reduce to powers of
// two contribute exactly, so uniform and point-mass cases are exact. The
// opt-in correction adds the (occupied-1)/(2 total ln 2) undersampling bias.
double shannon_entropy(const DyadicHistogram& h, bool bias_correct = false);

DyadicHistogram coarsen(const DyadicHistogram& h, int level);
DyadicHistogram merge(const DyadicHistogram& a, const DyadicHistogram& b);

// Total-variation distance (1/2) sum_c |a_c/A - b_c/B| between two
// histograms at the same level.
double tv_distance(const DyadicHistogram& a, const DyadicHistogram& b);

// H(points, level m) - H(points, level n) for n < m, built from one level-m
// histogram and its coarsening.
double conditional_entropy(const std::vector<double>& points, int m, int n);

// Renormalized restriction to the level-i cell containing x: the points of
// that cell rescaled affinely to [0,1) (exact, the scale is a power of two)
// and binned at level m. Entropy of the result is H(eta_{x,i}, D_{i+m}) in
// the component's own coordinates.
DyadicHistogram component(const std::vector<double>& points, double x, int i,
                          int m);

// Exact average of (1/m) component entropy over levels i = 1..n and x from
// the points, via the telescope sum_i (H_{i+m} - H_i) / (n m). This is the
// expectation the multiscale identity compares against (1/n) H_n.
double mean_component_entropy(const std::vector<double>& points, int n, int m);

// Level entropies H(points, D_j) for j = 0..k_max from one histogram build.
std::vector<double> entropy_by_level(const std::vector<double>& points,
                                     int k_max);

PorosityProfile porosity_profile(const std::vector<double>& points, double h,
                                 double delta, int m, int n1, int n2,
                                 int probes, std::uint64_t seed);

// Cyclic convolution at equal levels: out[(i+j) mod 2^L] += a[i] * b[j],
// total_out = total_a * total_b (exact integer counts throughout).
DyadicHistogram circle_convolve(const DyadicHistogram& a,
                                const DyadicHistogram& b);

// Dense CSV: header "level,total", then 2^level count rows. Refuses
// level > 24 (the dense format is the contract; 2^40 rows is not a file).
void write_histogram_csv(const DyadicHistogram& h, std::ostream& out);
DyadicHistogram read_histogram_csv(std::istream& in);

}  // namespace furst
