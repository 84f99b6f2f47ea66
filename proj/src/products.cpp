#include "furst/products.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <utility>

#include "furst/errors.hpp"
#include "furst/parallel.hpp"
#include "furst/rng.hpp"

namespace furst {
namespace {

// Wide enough for the decay diagnostics: distances shrink like
// 2^{-2 chi n}, which reaches ~2^-450 at the pinned run sizes, while the
// direction vectors stay O(1). 220 decimal digits ~ 730 bits of mantissa.
using BigFloat =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<220>>;

struct BVec {
  BigFloat x, y;
};

struct BMat {
  BigFloat a{1}, b{0}, c{0}, d{1};
};

BMat to_big(const Mat2Q& m) {
  auto conv = [](const Rational& r) {
    return BigFloat(numerator(r)) / BigFloat(denominator(r));
  };
  return {conv(m.a), conv(m.b), conv(m.c), conv(m.d)};
}

BMat mul(const BMat& l, const BMat& r) {
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
          l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

double log2_big(const BigFloat& x) {
  int e = 0;
  BigFloat m = frexp(x, &e);
  return static_cast<double>(e) + std::log2(m.convert_to<double>());
}

// Attracting left-singular direction of Z (top eigenvector of Z Z^T) plus
// the squared top singular value. Same conditioning and sign rules as the
// double-precision decomposition.
struct BigDirection {
  BVec v;
  BigFloat lambda_plus_sq;
};

BigDirection top_left_direction(const BMat& z) {
  const BigFloat p = z.a * z.a + z.b * z.b;
  const BigFloat q = z.a * z.c + z.b * z.d;
  const BigFloat r = z.c * z.c + z.d * z.d;
  const BigFloat disc = sqrt((p - r) * (p - r) + 4 * q * q);
  if (disc <= (p + r) * 1e-9)
    throw DegenerateError("partial product has (nearly) equal singular values");
  const BigFloat lp2 = (p + r + disc) / 2;

  BVec v;
  if (q == 0) {
    v = p >= r ? BVec{1, 0} : BVec{0, 1};
  } else {
    BVec c1{q, lp2 - p}, c2{lp2 - r, q};
    const BigFloat n1 = c1.x * c1.x + c1.y * c1.y;
    const BigFloat n2 = c2.x * c2.x + c2.y * c2.y;
    v = n1 >= n2 ? c1 : c2;
    const BigFloat norm = sqrt(v.x * v.x + v.y * v.y);
    v.x /= norm;
    v.y /= norm;
  }
  if (v.x < 0 || (v.x == 0 && v.y < 0)) {
    v.x = -v.x;
    v.y = -v.y;
  }
  return {v, lp2};
}

// |w x u| for unit vectors: the sine of the projective angle. Dividing by
// pi converts to the same scale as proj_distance for small separations.
BigFloat wedge_abs(const BVec& w, const BVec& u) {
  BigFloat c = w.x * u.y - w.y * u.x;
  return c < 0 ? BigFloat(-c) : c;
}

struct FitResult {
  bool ok = false;
  double slope = 0.0;
};

FitResult fit_slope(const std::vector<std::pair<int, double>>& pts) {
  if (pts.size() < 2) return {};
  double nb = 0, yb = 0;
  for (auto [n, y] : pts) {
    nb += n;
    yb += y;
  }
  nb /= pts.size();
  yb /= pts.size();
  double num = 0, den = 0;
  for (auto [n, y] : pts) {
    num += (n - nb) * (y - yb);
    den += (n - nb) * (n - nb);
  }
  if (den == 0) return {};
  return {true, num / den};
}

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / xs.size();
}

double std_err_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / (xs.size() - 1)) / std::sqrt(double(xs.size()));
}

}  // namespace

std::vector<int> sample_word(const AtomicMeasureG& mu, int n,
                             std::uint64_t seed) {
  if (n < 0) throw DomainError("word length must be nonnegative");
  MeasureF fv = float_view(mu);
  SplitMix64 rng(seed);
  std::vector<int> word;
  word.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    word.push_back(static_cast<int>(fv.sample(rng)));
  return word;
}

LyapunovEstimate lyapunov_estimate(const AtomicMeasureG& mu, int n, int trials,
                                   std::uint64_t seed) {
  if (n < 1) throw DomainError("lyapunov estimate needs n >= 1");
  if (trials < 1) throw DomainError("lyapunov estimate needs trials >= 1");
  MeasureF fv = float_view(mu);
  std::vector<double> chi(static_cast<std::size_t>(trials));
  parallel_for(chi.size(), [&](std::size_t t) {
    SplitMix64 rng(derive_seed(seed, t));
    Mat2 z;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
      z = z * fv.atoms[fv.sample(rng)];
      if (k % 32 == 0) {
        const double s = operator_norm(z);
        acc += std::log2(s);
        z = (1.0 / s) * z;
      }
    }
    chi[t] = (acc + std::log2(operator_norm(z))) / n;
  });
  LyapunovEstimate est;
  est.chi_hat = mean_of(chi);
  est.lambda_hat = std::exp2(est.chi_hat);
  est.std_err = std_err_of(chi, est.chi_hat);
  est.n_steps = n;
  est.n_trials = trials;
  est.seed = seed;
  return est;
}

DecayReport oseledets_diagnostic(const AtomicMeasureG& mu, int n_max,
                                 int trials, std::uint64_t seed) {
  if (n_max < 16) throw DomainError("decay diagnostic needs n_max >= 16");
  if (trials < 1) throw DomainError("decay diagnostic needs trials >= 1");
  MeasureF fv = float_view(mu);
  std::vector<BMat> atoms;
  atoms.reserve(mu.atoms.size());
  for (const Mat2Q& a : mu.atoms) atoms.push_back(to_big(a));

  const int lo = (n_max + 3) / 4;
  const int hi = (3 * n_max) / 4;
  const double log2_pi = std::log2(kPi);

  struct TrialOut {
    FitResult fit;
    double chi = 0.0;
    bool had_nonzero = false;
  };
  std::vector<TrialOut> out(static_cast<std::size_t>(trials));

  parallel_for(out.size(), [&](std::size_t t) {
    SplitMix64 rng(derive_seed(seed, t));
    BMat z;
    std::vector<BVec> window;
    window.reserve(static_cast<std::size_t>(hi - lo + 1));
    BigDirection last{};
    for (int k = 1; k <= n_max; ++k) {
      z = mul(z, atoms[fv.sample(rng)]);
      if (k >= lo && k <= hi) window.push_back(top_left_direction(z).v);
      if (k == n_max) last = top_left_direction(z);
    }
    std::vector<std::pair<int, double>> pts;
    pts.reserve(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
      BigFloat w = wedge_abs(window[i], last.v);
      if (w == 0) continue;
      pts.emplace_back(lo + static_cast<int>(i), log2_big(w) - log2_pi);
    }
    out[t].fit = fit_slope(pts);
    out[t].chi = log2_big(last.lambda_plus_sq) / (2.0 * n_max);
    out[t].had_nonzero = !pts.empty();
  });

  std::vector<double> slopes, chis;
  bool any_nonzero = false;
  for (const TrialOut& o : out) {
    if (o.fit.ok) slopes.push_back(o.fit.slope);
    chis.push_back(o.chi);
    any_nonzero = any_nonzero || o.had_nonzero;
  }
  DecayReport rep;
  rep.trials_fitted = static_cast<int>(slopes.size());
  rep.exact_convergence = !any_nonzero;
  rep.mean_slope = mean_of(slopes);
  rep.slope_std_err = std_err_of(slopes, rep.mean_slope);
  rep.chi_hat = mean_of(chis);
  rep.target = -2.0 * rep.chi_hat;
  rep.n_max = n_max;
  rep.n_trials = trials;
  rep.seed = seed;
  return rep;
}

AttractorStats attractor_concentration(const AtomicMeasureG& mu, int n,
                                       int trials, ProjPoint z,
                                       std::uint64_t seed) {
  if (n < 1) throw DomainError("concentration probe needs n >= 1");
  if (trials < 1) throw DomainError("concentration probe needs trials >= 1");
  const int extension = 64;  // proxy bias ~ lambda^{-2(n+64)}, << threshold
  MeasureF fv = float_view(mu);
  std::vector<BMat> atoms;
  atoms.reserve(mu.atoms.size());
  for (const Mat2Q& a : mu.atoms) atoms.push_back(to_big(a));

  const Vec2 zf = unit_vector(z);
  const double log2_pi = std::log2(kPi);

  struct TrialOut {
    double log2_dist = -std::numeric_limits<double>::infinity();
    double chi = 0.0;
  };
  std::vector<TrialOut> out(static_cast<std::size_t>(trials));

  parallel_for(out.size(), [&](std::size_t t) {
    SplitMix64 rng(derive_seed(seed, t));
    BMat zn;
    BMat prod;
    for (int k = 1; k <= n + extension; ++k) {
      prod = mul(prod, atoms[fv.sample(rng)]);
      if (k == n) zn = prod;
    }
    BigDirection limit = top_left_direction(prod);
    BVec w{zn.a * zf.x + zn.b * zf.y, zn.c * zf.x + zn.d * zf.y};
    const BigFloat norm = sqrt(w.x * w.x + w.y * w.y);
    w.x /= norm;
    w.y /= norm;
    BigFloat d = wedge_abs(w, limit.v);
    if (d != 0) out[t].log2_dist = log2_big(d) - log2_pi;
    out[t].chi = log2_big(limit.lambda_plus_sq) / (2.0 * (n + extension));
  });

  AttractorStats st;
  st.n = n;
  st.n_trials = trials;
  st.seed = seed;
  st.eps_n = 1.0 / std::sqrt(double(n));
  std::vector<double> chis;
  chis.reserve(out.size());
  for (const TrialOut& o : out) chis.push_back(o.chi);
  st.chi_hat = mean_of(chis);
  st.threshold_log2 = -2.0 * (st.chi_hat - st.eps_n) * n;
  int below = 0;
  for (const TrialOut& o : out) below += o.log2_dist < st.threshold_log2;
  st.fraction_below = double(below) / trials;
  return st;
}

}  // namespace furst
