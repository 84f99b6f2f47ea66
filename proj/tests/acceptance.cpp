// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; the binary exits nonzero if any fail. Runs the heavy flagship sizes,
// so expect a few minutes single-threaded.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "furst/entropy.hpp"
#include "furst/exact_products.hpp"
#include "furst/furstenberg.hpp"
#include "furst/measure.hpp"
#include "furst/products.hpp"
#include "furst/rational.hpp"

using namespace furst;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* what, bool ok, const std::string& detail) {
  std::printf("%s %2d  %s  (%s)\n", ok ? "PASS" : "FAIL", id, what,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename Body>
void criterion(int id, const char* what, Body&& body) {
  try {
    auto [ok, detail] = body();
    report(id, what, ok, detail);
  } catch (const std::exception& e) {
    report(id, what, false, std::string("exception: ") + e.what());
  }
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::vector<double> uniform_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> pts(n);
  for (double& x : pts) x = static_cast<double>(rng() >> 11) * 0x1p-53;
  return pts;
}

// Middle-thirds Cantor set: 30 random ternary digits from {0, 2} per point.
std::vector<double> cantor_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> pts(n);
  for (double& x : pts) {
    const std::uint64_t bits = rng();
    double v = 0.0, scale = 1.0;
    for (int i = 0; i < 30; ++i) {
      scale /= 3.0;
      v += scale * (2.0 * static_cast<double>((bits >> i) & 1));
    }
    x = v;
  }
  return pts;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main() {
  const AtomicMeasureG s4 = uniform_measure(shear_pair(Rational(4)));

  criterion(1, "single-matrix products have exact growth rate", [] {
    const AtomicMeasureG one =
        uniform_measure({Mat2Q{2, 0, 0, Rational(1, 2)}});
    const LyapunovEstimate est = lyapunov_estimate(one, 100, 10, 1);
    const double err = std::abs(est.chi_hat - 1.0);
    return std::pair(err <= 1e-12 && est.std_err == 0.0,
                     "|chi-1|=" + num(err) + ", se=" + num(est.std_err));
  });

  criterion(2, "shear-family exponents respect the norm bound", [] {
    bool ok = true;
    double worst = -1e300;
    for (int lam : {2, 3, 4}) {
      const LyapunovEstimate est = lyapunov_estimate(
          uniform_measure(shear_pair(Rational(lam))), 10000, 200, 100 + lam);
      const double slack =
          est.chi_hat - (std::log2(1.0 + lam) + 3.0 * est.std_err);
      ok = ok && slack <= 0.0;
      worst = std::max(worst, slack);
    }
    return std::pair(ok, "worst chi_hat excess " + num(worst));
  });

  criterion(3, "integer shear pairs are free with full entropy", [] {
    bool ok = true;
    for (int lam : {1, 2, 3}) {
      const std::vector<Mat2Q> gens = shear_pair(Rational(lam));
      const FreenessReport fr = freeness_check(gens, 12);
      ok = ok && fr.free_up_to == 12 && !fr.collision_found;
      const EntropyRateEstimate prof =
          rw_entropy_profile(uniform_measure(gens), 12);
      for (double h : prof.h) ok = ok && h == 1.0;
    }
    return std::pair(ok, "lambda 1..3, n <= 12, h_n == 1 exactly");
  });

  criterion(4, "commuting family entropy matches the binomial oracle", [] {
    const AtomicMeasureG mu =
        uniform_measure({Mat2Q{2, 0, 0, Rational(1, 2)},
                         Mat2Q{3, 0, 0, Rational(1, 3)}});
    const EntropyRateEstimate prof = rw_entropy_profile(mu, 60);
    // Pascal row in long double: exact integers up to n = 60.
    std::vector<long double> row{1.0L};
    double worst = 0.0;
    for (int n = 1; n <= 60; ++n) {
      std::vector<long double> next(n + 1, 1.0L);
      for (int a = 1; a < n; ++a) next[a] = row[a - 1] + row[a];
      row = std::move(next);
      long double s = 0.0L;
      for (const long double c : row) s += c * std::log2(c);
      const double oracle =
          static_cast<double>((n - s / std::exp2(static_cast<long double>(n))) / n);
      worst = std::max(worst, std::abs(prof.h[n - 1] - oracle));
    }
    const bool ok = worst <= 1e-9 && prof.h_n <= 0.1;
    return std::pair(ok, "max |h_n - oracle| = " + num(worst) +
                             ", h_60 = " + num(prof.h_n));
  });

  criterion(5, "separation constants for integer and half-integer shears", [] {
    bool ok = true;
    double worst_int = 1.0, worst_half = 1.0;
    const std::vector<Mat2Q> s2 = shear_pair(Rational(2));
    for (int n = 1; n <= 10; ++n) {
      const double c = diophantine_separation(s2, n).c_n;
      ok = ok && c == 1.0;
      worst_int = std::min(worst_int, c);
    }
    const std::vector<Mat2Q> half = shear_pair(Rational(1, 2));
    for (int n = 1; n <= 8; ++n) {
      const double c = diophantine_separation(half, n).c_n;
      ok = ok && c >= 0.5;
      worst_half = std::min(worst_half, c);
    }
    return std::pair(ok, "integer min c_n = " + num(worst_int) +
                             ", half-integer min c_n = " + num(worst_half));
  });

  // Criteria 6 and 7 share one flagship run.
  DimensionReport flagship{};
  bool flagship_ok = false;
  std::string flagship_err;
  try {
    const LyapunovEstimate chi_est = lyapunov_estimate(s4, 10000, 200, 12345);
    flagship = measure_dimension(s4, 1.0, chi_est.chi_hat, 128, 1000000, 777);
    flagship_ok = true;
  } catch (const std::exception& e) {
    flagship_err = std::string("exception: ") + e.what();
  }

  criterion(6, "flagship estimators agree with the formula value", [&] {
    if (!flagship_ok) return std::pair(false, flagship_err);
    const double gap_formula =
        std::abs(flagship.entropy_slope - flagship.formula_value);
    const double gap_local =
        std::abs(flagship.local_dim_mean - flagship.entropy_slope);
    return std::pair(gap_formula <= 0.05 && gap_local <= 0.05,
                     "|slope-formula|=" + num(gap_formula) +
                         ", |local-slope|=" + num(gap_local));
  });

  criterion(7, "flagship sample passes the stationarity check", [&] {
    if (!flagship_ok) return std::pair(false, flagship_err);
    return std::pair(flagship.stationarity_tv <= 0.05,
                     "tv = " + num(flagship.stationarity_tv));
  });

  criterion(8, "local-dimension spread tightens at finer scales", [&] {
    const std::vector<double> th =
        thetas(sample_stationary(s4, 128, 10000000, ProjPoint{0.25}, 901));
    const LocalDimProfile coarse =
        local_dimension_profile(th, 1000, 0x1p-8, 0x1p-6, 5, 31);
    const LocalDimProfile fine =
        local_dimension_profile(th, 1000, 0x1p-12, 0x1p-10, 5, 31);
    const double drop = 1.0 - fine.stddev / coarse.stddev;
    return std::pair(drop >= 0.10, "stddev drop " + num(100.0 * drop) +
                                       "% (coarse " + num(coarse.stddev) +
                                       ", fine " + num(fine.stddev) + ")");
  });

  criterion(9, "projective action linearizes with quadratic error", [] {
    bool ok = true;
    std::string slopes;
    for (const Mat2& g0 : {Mat2{}, Mat2{2, 0, 0, 0.5}, Mat2{8, 0, 0, 0.125}}) {
      const LinearizationFit fit = linearization_probe(
          g0, ProjPoint{0.5}, 0x1p-10, 0x1p-4, 7, 1000, 55);
      ok = ok && fit.slope >= 1.8 && fit.slope <= 2.2;
      slopes += (slopes.empty() ? "slopes " : ", ") + num(fit.slope);
    }
    return std::pair(ok, slopes);
  });

  criterion(10, "dyadic entropy identities hold on three samples", [&] {
    const std::vector<std::vector<double>> sets = {
        uniform_points(200000, 19),
        cantor_points(200000, 23),
        thetas(sample_stationary(s4, 128, 200000, ProjPoint{0.25}, 2026))};
    double worst_cond = 0.0, worst_multi = 0.0;
    for (const std::vector<double>& pts : sets) {
      const double h5 = shannon_entropy(histogram(pts, 5));
      const double h12 = shannon_entropy(histogram(pts, 12));
      worst_cond = std::max(
          worst_cond, std::abs(h5 + conditional_entropy(pts, 12, 5) - h12));
      const double h32 = shannon_entropy(histogram(pts, 32));
      worst_multi = std::max(
          worst_multi,
          std::abs(h32 / 32.0 - mean_component_entropy(pts, 32, 8)));
    }
    const bool ok = worst_cond <= 1e-12 && worst_multi <= 8.0 / 32.0;
    return std::pair(ok, "conditional residual " + num(worst_cond) +
                             ", multiscale residual " + num(worst_multi));
  });

  criterion(11, "singular-gap decay tracks minus twice the exponent", [] {
    const DecayReport d =
        oseledets_diagnostic(uniform_measure(shear_pair(Rational(2))), 200,
                             200, 77);
    const double rel = std::abs(d.mean_slope - d.target) / std::abs(d.target);
    return std::pair(d.target < 0.0 && rel <= 0.15,
                     "slope " + num(d.mean_slope) + " vs target " +
                         num(d.target) + ", rel err " + num(rel));
  });

  criterion(12, "CLI scan output is byte-stable across thread counts", [] {
    const fs::path base = fs::temp_directory_path();
    const fs::path d1 = base / "furst_acc_t1", d2 = base / "furst_acc_t4";
    fs::remove_all(d1);
    fs::remove_all(d2);
    const std::string args =
        " scan-slambda --lambdas 2,3 --seed 6 --samples 100000 --nword 32"
        " --trials 30 --nchi 2000 --maxlen 8 --out ";
    const std::string cli = "\"" FURST_CLI_PATH "\"";
    const int rc1 = std::system(("FURST_THREADS=1 " + cli + args +
                                 d1.string() + " > /dev/null 2>&1")
                                    .c_str());
    const int rc2 = std::system(("FURST_THREADS=4 " + cli + args +
                                 d2.string() + " > /dev/null 2>&1")
                                    .c_str());
    const std::string t1 = slurp(d1 / "table.csv");
    const std::string t2 = slurp(d2 / "table.csv");
    const bool ok = rc1 == 0 && rc2 == 0 && !t1.empty() && t1 == t2 &&
                    t1.rfind("lambda,", 0) == 0;
    return std::pair(ok, "exit " + std::to_string(rc1) + "/" +
                             std::to_string(rc2) + ", " +
                             std::to_string(t1.size()) + " bytes" +
                             (t1 == t2 ? ", identical" : ", DIFFER"));
  });

  std::printf("acceptance: %d/12 passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
