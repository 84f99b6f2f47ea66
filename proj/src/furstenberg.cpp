#include "furst/furstenberg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <vector>

#include "furst/entropy.hpp"
#include "furst/errors.hpp"
#include "furst/parallel.hpp"
#include "furst/rng.hpp"
#include "furst/svd2.hpp"

namespace furst {

namespace {

struct LineFit {
  double slope = 0, intercept = 0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// Points of the sorted list within circle distance r of x.
std::int64_t count_in_ball(const std::vector<double>& sorted, double x,
                           double r) {
  if (2 * r >= 1.0) return static_cast<std::int64_t>(sorted.size());
  double lo = x - r, hi = x + r;
  if (lo < 0) {
    lo += 1;
    hi += 1;
  }
  const auto begin = sorted.begin(), end = sorted.end();
  if (hi < 1.0)
    return std::upper_bound(begin, end, hi) - std::lower_bound(begin, end, lo);
  return (end - std::lower_bound(begin, end, lo)) +
         (std::upper_bound(begin, end, hi - 1.0) - begin);
}

std::vector<double> geometric_grid(double r_min, double r_max, int n) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    grid[static_cast<std::size_t>(j)] =
        r_max * std::pow(r_min / r_max, j / (n - 1.0));
  return grid;
}

constexpr char kPointMagic[8] = {'F', 'P', 'T', 'S', '0', '1', '\r', '\n'};

}  // namespace

std::vector<ProjPoint> sample_stationary(const AtomicMeasureG& mu, int n_word,
                                         int n_samples, ProjPoint z,
                                         std::uint64_t seed) {
  if (n_word < 1) throw DomainError("sample_stationary needs n_word >= 1");
  if (n_samples < 0) throw DomainError("negative sample count");
  const MeasureF mf = float_view(mu);
  const Vec2 base = unit_vector(z);
  std::vector<ProjPoint> out(static_cast<std::size_t>(n_samples));
  parallel_for(out.size(), [&](std::size_t i) {
    SplitMix64 rng(derive_seed(seed, i));
    Vec2 v = base;
    for (int k = 0; k < n_word; ++k) {
      v = apply(mf.atoms[mf.sample(rng)], v);
      if ((k & 15) == 15) v = normalized(v);  // keep magnitudes in range
    }
    out[i] = line_through(v);
  });
  return out;
}

std::vector<double> thetas(const std::vector<ProjPoint>& points) {
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = points[i].theta;
  return out;
}

double stationarity_distance(const AtomicMeasureG& mu,
                             const std::vector<ProjPoint>& points, int level,
                             std::uint64_t seed) {
  if (points.empty()) throw DomainError("stationarity check needs points");
  const MeasureF mf = float_view(mu);
  std::vector<double> pushed(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    SplitMix64 rng(derive_seed(seed, i));
    pushed[i] = act(mf.atoms[mf.sample(rng)], points[i]).theta;
  });
  return tv_distance(histogram(thetas(points), level),
                     histogram(pushed, level));
}

EntropyFit entropy_dimension_estimate(const std::vector<double>& points,
                                      int k_min, int k_max) {
  if (k_min < 0 || k_min >= k_max)
    throw DomainError("entropy fit needs 0 <= k_min < k_max");
  if (k_max > kLevelCap)
    throw ResolutionError("entropy fit window exceeds the level cap");
  if (points.size() < (std::uint64_t{100} << k_max))
    throw UndersampledError(
        "entropy fit needs at least 100 * 2^k_max sample points");

  EntropyFit fit;
  fit.k_min = k_min;
  fit.k_max = k_max;
  const std::size_t width = static_cast<std::size_t>(k_max - k_min) + 1;
  fit.entropy.assign(width, 0.0);
  fit.bias.assign(width, 0.0);
  fit.residuals.assign(width, 0.0);

  const double n = static_cast<double>(points.size());
  DyadicHistogram cur = histogram(points, k_max);
  for (int k = k_max;; --k) {
    const std::size_t slot = static_cast<std::size_t>(k - k_min);
    fit.bias[slot] = (static_cast<double>(cur.cells.size()) - 1.0) /
                     (2.0 * n * std::numbers::ln2);
    fit.entropy[slot] = shannon_entropy(cur) + fit.bias[slot];
    if (k == k_min) break;
    cur = coarsen(cur, k - 1);
  }

  std::vector<double> ks(width);
  for (std::size_t i = 0; i < width; ++i) ks[i] = static_cast<double>(k_min) + i;
  const LineFit lf = fit_line(ks, fit.entropy);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  for (std::size_t i = 0; i < width; ++i)
    fit.residuals[i] = fit.entropy[i] - (lf.intercept + lf.slope * ks[i]);
  return fit;
}

LocalDimProfile local_dimension_profile(const std::vector<double>& points,
                                        int probes, double r_min, double r_max,
                                        int n_radii, std::uint64_t seed) {
  if (points.empty()) throw DomainError("local dimension needs points");
  if (probes < 100) throw DomainError("local dimension needs >= 100 probes");
  if (!(r_min > 0 && r_min < r_max && r_max <= 0.5))
    throw DomainError("radius window must satisfy 0 < r_min < r_max <= 1/2");
  if (n_radii < 2) throw DomainError("radius grid needs >= 2 points");

  std::vector<double> sorted(points);
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const std::vector<double> radii = geometric_grid(r_min, r_max, n_radii);
  std::vector<double> logr(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j) logr[j] = std::log2(radii[j]);

  std::vector<double> dims(static_cast<std::size_t>(probes));
  parallel_for(dims.size(), [&](std::size_t p) {
    SplitMix64 rng(derive_seed(seed, p));
    const double x = sorted[rng.below(sorted.size())];
    std::vector<double> logmass(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const std::int64_t c = count_in_ball(sorted, x, radii[j]);
      if (c < 50)
        throw UndersampledError(
            "a probe ball holds fewer than 50 points; enlarge r_min or the "
            "sample");
      logmass[j] = std::log2(static_cast<double>(c) / n);
    }
    dims[p] = fit_line(logr, logmass).slope;
  });

  LocalDimProfile profile;
  profile.probes = probes;
  profile.r_min = r_min;
  profile.r_max = r_max;
  profile.n_radii = n_radii;
  profile.seed = seed;
  for (double d : dims) profile.mean += d;
  profile.mean /= static_cast<double>(probes);
  double var = 0;
  for (double d : dims) var += (d - profile.mean) * (d - profile.mean);
  profile.stddev = std::sqrt(var / (static_cast<double>(probes) - 1.0));
  profile.values = std::move(dims);
  return profile;
}

double dimension_formula(double h_rw, double chi) {
  if (!(chi > 0))
    throw DomainError("dimension formula needs a positive exponent");
  if (!(h_rw >= 0)) throw DomainError("dimension formula needs h_rw >= 0");
  return std::min(1.0, h_rw / (2.0 * chi));
}

LinearizationFit linearization_probe(const Mat2& g0, ProjPoint x0,
                                     double r_min, double r_max, int n_radii,
                                     int samples_per_radius,
                                     std::uint64_t seed) {
  validate_sl2(g0);
  if (!(r_min > 0 && r_min < r_max && r_max <= 0.25))
    throw DomainError("radius grid must satisfy 0 < r_min < r_max <= 1/4");
  if (n_radii < 2 || samples_per_radius < 1)
    throw DomainError("linearization probe needs >= 2 radii and >= 1 sample");
  const SingularDecomposition sd = singular_decomposition(g0);
  if (!sd.degenerate && proj_distance(x0, sd.u_minus) <= 0.1)
    throw DomainError(
        "base point too close to the repelling direction of the center");

  const Vec2 gu = apply(g0, unit_vector(x0));
  const double deriv = 1.0 / dot(gu, gu);  // action derivative at x0, det 1

  LinearizationFit fit;
  fit.radii = geometric_grid(r_min, r_max, n_radii);
  fit.max_error.assign(fit.radii.size(), 0.0);
  parallel_for(fit.radii.size(), [&](std::size_t j) {
    SplitMix64 rng(derive_seed(seed, j));
    const double r = fit.radii[j];
    double worst = 0;
    for (int s = 0; s < samples_per_radius; ++s) {
      const Mat2 bump{1 + rng.uniform(-r, r), rng.uniform(-r, r),
                      rng.uniform(-r, r), 1 + rng.uniform(-r, r)};
      Mat2 g = g0 * bump;
      g = (1.0 / std::sqrt(det(g))) * g;  // det(bump) >= 1 - 2r > 0
      const double dx = rng.uniform(-r, r);
      const ProjPoint x{mod1(x0.theta + dx)};
      const double predicted = act(g, x0).theta + deriv * dx;
      const double err = std::abs(wrap_half(act(g, x).theta - predicted));
      worst = std::max(worst, err);
    }
    fit.max_error[j] = worst;
  });

  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < fit.radii.size(); ++j) {
    if (fit.max_error[j] <= 0) continue;
    lx.push_back(std::log2(fit.radii[j]));
    ly.push_back(std::log2(fit.max_error[j]));
  }
  if (lx.size() < 2)
    throw DomainError("linearization error vanished across the radius grid");
  const LineFit lf = fit_line(lx, ly);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  return fit;
}

ActionConvolution action_convolution(const AtomicMeasureG& theta,
                                     const std::vector<ProjPoint>& points,
                                     int level, std::uint64_t seed) {
  if (points.empty()) throw DomainError("action convolution needs points");
  if (level < 1) throw DomainError("action convolution needs level >= 1");
  const MeasureF mf = float_view(theta);
  double max_norm = 1.0;
  for (const Mat2& g : mf.atoms) max_norm = std::max(max_norm, operator_norm(g));

  ActionConvolution out;
  out.level = level;
  out.ell = std::max(0, static_cast<int>(
                            std::ceil(2.0 * std::log2(max_norm) - 1e-9)));
  out.points.resize(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    SplitMix64 rng(derive_seed(seed, i));
    out.points[i] = act(mf.atoms[mf.sample(rng)], points[i]);
  });
  out.h_in = shannon_entropy(histogram(thetas(points), level));
  out.h_out = shannon_entropy(histogram(thetas(out.points), level + out.ell));
  out.normalized_gain = (out.h_out - out.h_in) / static_cast<double>(level);
  return out;
}

DimensionReport measure_dimension(const AtomicMeasureG& mu, double h_rw,
                                  double chi, int n_word, int n_samples,
                                  std::uint64_t seed) {
  DimensionReport report;
  report.formula_value = dimension_formula(h_rw, chi);
  report.n_word = n_word;
  report.n_samples = n_samples;
  report.seed = seed;

  std::vector<double> th;
  {
    std::vector<ProjPoint> pts =
        sample_stationary(mu, n_word, n_samples, ProjPoint{0.25}, seed);
    report.stationarity_tv =
        stationarity_distance(mu, pts, 8, derive_seed(seed, 0x7081));
    th = thetas(pts);
  }

  report.k_min = 6;
  report.k_max = std::min(
      20, static_cast<int>(std::floor(std::log2(n_samples / 100.0))));
  if (report.k_max <= report.k_min)
    throw UndersampledError("too few samples for the default entropy window");
  const EntropyFit ef = entropy_dimension_estimate(th, report.k_min,
                                                   report.k_max);
  report.entropy_slope = ef.slope;

  // Keep the finest radius coarse enough that typical balls stay populated.
  const double r_min = std::max(std::ldexp(1.0, -12),
                                std::ldexp(1.0, -report.k_max));
  const LocalDimProfile lp = local_dimension_profile(
      th, 1000, r_min, std::ldexp(1.0, -6), 8, derive_seed(seed, 0x10c4));
  report.local_dim_mean = lp.mean;
  report.local_dim_std = lp.stddev;
  return report;
}

void write_points(const std::vector<double>& points, std::ostream& out) {
  out.write(kPointMagic, 8);
  unsigned char buf[8];
  const std::uint64_t n = points.size();
  for (int i = 0; i < 8; ++i) buf[i] = (n >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(buf), 8);
  for (double x : points) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) buf[i] = (bits >> (8 * i)) & 0xff;
    out.write(reinterpret_cast<const char*>(buf), 8);
  }
}

std::vector<double> read_points(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kPointMagic, 8) != 0)
    throw ConfigError("not a point file: bad magic tag");
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (in.gcount() != 8) throw ConfigError("truncated point file header");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= std::uint64_t{buf[i]} << (8 * i);
  if (n > (std::uint64_t{1} << 40))
    throw ConfigError("point file count is implausibly large");
  std::vector<double> points(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    in.read(reinterpret_cast<char*>(buf), 8);
    if (in.gcount() != 8) throw ConfigError("truncated point file payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{buf[i]} << (8 * i);
    points[k] = std::bit_cast<double>(bits);
  }
  return points;
}

}  // namespace furst
