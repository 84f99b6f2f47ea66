#include "furst/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "furst/entropy.hpp"
#include "furst/errors.hpp"
#include "furst/exact_products.hpp"
#include "furst/furstenberg.hpp"
#include "furst/products.hpp"
#include "furst/rng.hpp"

namespace furst {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// DomainError raised by the dimension-formula hypotheses specifically, so
// the report can say FORMULA_DOMAIN instead of the generic DOMAIN.
struct FormulaDomainError : DomainError {
  using DomainError::DomainError;
};

struct IoError : Error {
  using Error::Error;
};

// ---- exact conversions ----------------------------------------------------

// Every finite double is m * 2^e with integer m, so this is lossless.
Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw ConfigError("matrix entries must be finite");
  int exp = 0;
  const double m = std::frexp(v, &exp);
  const auto mantissa = static_cast<long long>(std::ldexp(m, 53));
  Rational r(mantissa);
  const int e = exp - 53;
  if (e > 0)
    r *= Rational(BigInt(1) << e);
  else if (e < 0)
    r /= Rational(BigInt(1) << -e);
  return r;
}

Rational parse_entry(const json& j, const std::string& what) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_unsigned()) return Rational(j.get<unsigned long long>());
    if (j.is_number_float()) return rational_from_double(j.get<double>());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
  throw ConfigError(what + " must be a rational string or a number");
}

// ---- deterministic text output ---------------------------------------------

// Shortest round-trip decimal, the same encoder the JSON report uses, so a
// value prints identically everywhere and reparses to the same bits.
std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  return json(v).dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

// RFC-4180 text: comma-separated, CRLF-terminated, header first.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& row) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += csv_field(row[i]);
      }
      out += "\r\n";
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out;
  }
};

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot move " + tmp.string() + " into place: " +
                  ec.message());
}

// ---- reducibility ----------------------------------------------------------

bool is_scalar(const Mat2Q& m) {
  return m.b == 0 && m.c == 0 && m.a == m.d;
}

bool rational_sqrt(const Rational& r, Rational* root) {
  if (r < 0) return false;
  const BigInt num = numerator(r), den = denominator(r);
  const BigInt sn = sqrt(num), sd = sqrt(den);
  if (sn * sn != num || sd * sd != den) return false;
  *root = Rational(sn, sd);
  return true;
}

// Direction (x : 1) is m-invariant iff c x^2 + (d - a) x - b = 0.
bool fixes_affine(const Mat2Q& m, const Rational& x) {
  return m.c * x * x + (m.d - m.a) * x - m.b == 0;
}

bool fixes_vertical(const Mat2Q& m) { return m.c == 0; }

// The conjugate directions x = (p +- sqrt(D)) / q. Rational matrices commute
// with conjugation, so either both are invariant or neither is; splitting
// the invariance condition into its rational and sqrt(D) parts gives two
// rational equations.
bool fixes_conjugate_pair(const Mat2Q& m, const Rational& p, const Rational& D,
                          const Rational& q) {
  const Rational rat_part =
      m.c * (p * p + D) + (m.d - m.a) * p * q - m.b * q * q;
  const Rational irr_part = 2 * m.c * p + (m.d - m.a) * q;
  return rat_part == 0 && irr_part == 0;
}

// ---- shared estimation steps ------------------------------------------------

double step_entropy(const std::vector<Rational>& weights) {
  double h = 0;
  for (const Rational& w : weights) h -= to_double(w) * log2_rational(w);
  return h;
}

// Everything the exact layer contributes to a dimension run: freeness and
// entropy-rate enumeration, optional separation, and the walk-entropy value
// handed to the formula. When the entries are float-scale the layer is
// skipped and the step entropy stands in as an upper bound.
struct ExactSummary {
  bool feasible = false;
  FreenessReport freeness;
  EntropyRateEstimate profile;
  SeparationReport separation;
  bool has_separation = false;
  double h_rw = 0;
  std::string h_rw_source;
};

ExactSummary exact_summary(const ExperimentConfig& cfg,
                           const AtomicMeasureG& mu, bool want_separation) {
  ExactSummary s;
  s.feasible = exact_layer_feasible(mu.atoms);
  if (!s.feasible) {
    s.h_rw = step_entropy(mu.weights);
    s.h_rw_source = "step entropy upper bound (float-scale entries)";
    return s;
  }
  s.freeness = freeness_check(mu.atoms, cfg.maxlen);
  s.profile = rw_entropy_profile(mu, cfg.maxlen);
  if (want_separation && mu.atoms.size() >= 2) {
    s.separation = diophantine_separation(mu.atoms, std::min(cfg.maxlen, 8));
    s.has_separation = true;
  }
  if (s.freeness.collision_found) {
    s.h_rw = s.profile.h_n;
    s.h_rw_source = "h_n at maxlen (upper bound; products collide)";
  } else {
    s.h_rw = step_entropy(mu.weights);
    s.h_rw_source = "step entropy (no collision up to maxlen)";
  }
  return s;
}

// The formula's hypotheses, checked before any sampling money is spent.
double checked_formula(const std::vector<Mat2Q>& gens, double h_rw,
                       double chi) {
  if (common_invariant_line(gens))
    throw FormulaDomainError(
        "the generators share an invariant line, so there is no unique "
        "stationary measure and the dimension formula does not apply");
  try {
    return dimension_formula(h_rw, chi);
  } catch (const DomainError& e) {
    throw FormulaDomainError(e.what());
  }
}

json words_json(const std::vector<int>& word) {
  json arr = json::array();
  for (int g : word) arr.push_back(g);
  return arr;
}

// ---- experiment runners ------------------------------------------------------

struct Artifacts {
  json estimates;
  std::vector<std::pair<std::string, std::string>> files;  // name -> bytes
};

Artifacts run_lyapunov(const ExperimentConfig& cfg, const AtomicMeasureG& mu) {
  const LyapunovEstimate ly =
      lyapunov_estimate(mu, cfg.n_word, cfg.trials, cfg.seed);
  Artifacts art;
  art.estimates = {{"chi_hat", ly.chi_hat},
                   {"lambda_hat", ly.lambda_hat},
                   {"std_err", ly.std_err},
                   {"n_steps", ly.n_steps},
                   {"n_trials", ly.n_trials}};
  Table t;
  t.header = {"n", "trials", "chi_hat", "lambda_hat", "std_err", "seed"};
  t.rows = {{std::to_string(ly.n_steps), std::to_string(ly.n_trials),
             fmt(ly.chi_hat), fmt(ly.lambda_hat), fmt(ly.std_err),
             std::to_string(cfg.seed)}};
  art.files.emplace_back("table.csv", t.render());
  return art;
}

void require_exact(const ExperimentConfig& cfg) {
  if (!exact_layer_feasible(cfg.generators))
    throw ConfigError(
        "experiment '" + cfg.experiment +
        "' enumerates exact products and needs entries that are small "
        "rationals; give them as \"p/q\" strings");
}

Artifacts run_freeness(const ExperimentConfig& cfg, const AtomicMeasureG& mu) {
  require_exact(cfg);
  const FreenessReport fr = freeness_check(mu.atoms, cfg.maxlen);
  const EntropyRateEstimate prof = rw_entropy_profile(mu, cfg.maxlen);
  Artifacts art;
  art.estimates = {{"free_up_to", fr.free_up_to},
                   {"collision_found", fr.collision_found},
                   {"h_n", prof.h_n},
                   {"h", prof.h},
                   {"maxlen", cfg.maxlen}};
  if (fr.collision_found) {
    art.estimates["collision_length"] = fr.collision_length;
    art.estimates["word_a"] = words_json(fr.word_a);
    art.estimates["word_b"] = words_json(fr.word_b);
  }
  Table t;
  t.header = {"n", "h", "free_up_to", "maxlen"};
  for (std::size_t k = 0; k < prof.h.size(); ++k)
    t.rows.push_back({std::to_string(k + 1), fmt(prof.h[k]),
                      std::to_string(fr.free_up_to),
                      std::to_string(cfg.maxlen)});
  art.files.emplace_back("table.csv", t.render());
  return art;
}

Artifacts run_dioph(const ExperimentConfig& cfg, const AtomicMeasureG& mu) {
  require_exact(cfg);
  if (mu.atoms.size() < 2)
    throw ConfigError("separation needs at least two generators");
  Artifacts art;
  Table t;
  t.header = {"n", "c_n", "min_separation", "maxlen"};
  json rows = json::array();
  for (int n = 1; n <= cfg.maxlen; ++n) {
    const SeparationReport rep = diophantine_separation(mu.atoms, n);
    t.rows.push_back({std::to_string(rep.n), fmt(rep.c_n),
                      fmt(rep.min_separation), std::to_string(cfg.maxlen)});
    json row = {{"n", rep.n},
                {"c_n", rep.c_n},
                {"min_separation", rep.min_separation},
                {"min_separation_exact", rep.min_separation_exact.str()}};
    if (n == cfg.maxlen) {
      row["word_a"] = words_json(rep.word_a);
      row["word_b"] = words_json(rep.word_b);
    }
    rows.push_back(std::move(row));
  }
  art.estimates = {{"rows", std::move(rows)}};
  art.files.emplace_back("table.csv", t.render());
  return art;
}

// Entropy fit window shared with the library's combined report: start at 6,
// stop where cells would average fewer than 100 points.
std::pair<int, int> fit_window(int n_samples) {
  const int k_max =
      std::min(20, static_cast<int>(std::floor(std::log2(n_samples / 100.0))));
  if (k_max <= 6)
    throw UndersampledError("too few samples for the entropy fit window");
  return {6, k_max};
}

// The dimension pipeline, seed-compatible with measure_dimension but with
// the sample kept (for plot files) and the local-dimension estimator allowed
// to fail soft: at some parameters the stationary measure has thin spots
// where no feasible sample keeps every probe ball above the 50-point floor,
// and the entropy slope and formula comparison are still worth reporting.
struct DimPieces {
  std::vector<double> th;
  double stat_tv = 0;
  int k_lo = 0, k_hi = 0;
  EntropyFit fit;
  bool local_ok = false;
  LocalDimProfile local;
  std::string local_error;
};

DimPieces dimension_pieces(const AtomicMeasureG& mu, int n_word, int n_samples,
                           std::uint64_t seed) {
  DimPieces p;
  const std::vector<ProjPoint> pts =
      sample_stationary(mu, n_word, n_samples, ProjPoint{0.25}, seed);
  p.stat_tv = stationarity_distance(mu, pts, 8, derive_seed(seed, 0x7081));
  p.th = thetas(pts);
  std::tie(p.k_lo, p.k_hi) = fit_window(n_samples);
  p.fit = entropy_dimension_estimate(p.th, p.k_lo, p.k_hi);
  const double r_min =
      std::max(std::ldexp(1.0, -12), std::ldexp(1.0, -p.k_hi));
  try {
    p.local = local_dimension_profile(p.th, 1000, r_min,
                                      std::ldexp(1.0, -6), 8,
                                      derive_seed(seed, 0x10c4));
    p.local_ok = true;
  } catch (const UndersampledError& e) {
    p.local_error = e.what();
  }
  return p;
}

const char* kNaUndersampled = "n/a(undersampled)";

Artifacts run_porosity(const ExperimentConfig& cfg, const AtomicMeasureG& mu) {
  const std::vector<double> th = thetas(sample_stationary(
      mu, cfg.n_word, cfg.n_samples, ProjPoint{0.25}, cfg.seed));
  const auto [k_lo, k_hi] = fit_window(cfg.n_samples);
  const EntropyFit fit = entropy_dimension_estimate(th, k_lo, k_hi);
  const PorosityProfile pp =
      porosity_profile(th, fit.slope, 0.1, 8, cfg.k_min, cfg.k_max, 2000,
                       derive_seed(cfg.seed, 2));
  Artifacts art;
  art.estimates = {{"h", pp.h},
                   {"delta", pp.delta},
                   {"m", pp.m},
                   {"n1", pp.n1},
                   {"n2", pp.n2},
                   {"fraction", pp.fraction},
                   {"samples", pp.samples},
                   {"empty_rate", pp.empty_rate},
                   {"entropy_slope", fit.slope}};
  Table t;
  t.header = {"h",      "delta",      "m",
              "n1",     "n2",         "fraction",
              "samples", "empty_rate", "entropy_slope",
              "seed",   "n_word",     "n_samples"};
  t.rows = {{fmt(pp.h), fmt(pp.delta), std::to_string(pp.m),
             std::to_string(pp.n1), std::to_string(pp.n2), fmt(pp.fraction),
             std::to_string(pp.samples), fmt(pp.empty_rate), fmt(fit.slope),
             std::to_string(cfg.seed), std::to_string(cfg.n_word),
             std::to_string(cfg.n_samples)}};
  art.files.emplace_back("table.csv", t.render());
  return art;
}

Artifacts run_dimension(const ExperimentConfig& cfg, const AtomicMeasureG& mu) {
  const ExactSummary ex = exact_summary(cfg, mu, /*want_separation=*/false);
  const LyapunovEstimate ly =
      lyapunov_estimate(mu, cfg.n_chi, cfg.trials, derive_seed(cfg.seed, 1));
  const double formula = checked_formula(mu.atoms, ex.h_rw, ly.chi_hat);

  const DimPieces p =
      dimension_pieces(mu, cfg.n_word, cfg.n_samples, cfg.seed);
  const double gap = std::abs(p.fit.slope - formula);

  const std::string na = "n/a(float)";
  Artifacts art;
  art.estimates = {{"chi_hat", ly.chi_hat},
                   {"chi_stderr", ly.std_err},
                   {"h_rw", ex.h_rw},
                   {"h_rw_source", ex.h_rw_source},
                   {"entropy_slope", p.fit.slope},
                   {"entropy_intercept", p.fit.intercept},
                   {"entropy_levels", p.fit.entropy},
                   {"entropy_bias", p.fit.bias},
                   {"stationarity_tv", p.stat_tv},
                   {"formula_value", formula},
                   {"formula_gap", gap},
                   {"fit_k_min", p.k_lo},
                   {"fit_k_max", p.k_hi}};
  if (p.local_ok) {
    art.estimates["local_dim_mean"] = p.local.mean;
    art.estimates["local_dim_std"] = p.local.stddev;
  } else {
    art.estimates["local_dim_mean"] = kNaUndersampled;
    art.estimates["local_dim_std"] = kNaUndersampled;
    art.estimates["local_dim_error"] = p.local_error;
  }
  if (ex.feasible) {
    art.estimates["h_n"] = ex.profile.h_n;
    art.estimates["free_up_to"] = ex.freeness.free_up_to;
  } else {
    art.estimates["h_n"] = na;
    art.estimates["free_up_to"] = na;
  }

  Table t;
  t.header = {"chi_hat",        "chi_stderr",    "h_n",
              "free_up_to",     "entropy_slope", "local_dim_mean",
              "local_dim_std",  "stationarity_tv", "formula_value",
              "formula_gap",    "seed",          "n_word",
              "n_samples",      "k_min",         "k_max"};
  t.rows = {{fmt(ly.chi_hat), fmt(ly.std_err),
             ex.feasible ? fmt(ex.profile.h_n) : na,
             ex.feasible ? std::to_string(ex.freeness.free_up_to) : na,
             fmt(p.fit.slope),
             p.local_ok ? fmt(p.local.mean) : kNaUndersampled,
             p.local_ok ? fmt(p.local.stddev) : kNaUndersampled,
             fmt(p.stat_tv), fmt(formula), fmt(gap), std::to_string(cfg.seed),
             std::to_string(cfg.n_word), std::to_string(cfg.n_samples),
             std::to_string(p.k_lo), std::to_string(p.k_hi)}};
  art.files.emplace_back("table.csv", t.render());

  Table levels;
  levels.header = {"level", "entropy"};
  const std::vector<double> by_level = entropy_by_level(p.th, cfg.k_max);
  for (std::size_t j = 0; j < by_level.size(); ++j)
    levels.rows.push_back({std::to_string(j), fmt(by_level[j])});
  art.files.emplace_back("entropy_levels.csv", levels.render());

  if (p.local_ok) {
    Table dims;
    dims.header = {"probe", "local_dim"};
    for (std::size_t i = 0; i < p.local.values.size(); ++i)
      dims.rows.push_back({std::to_string(i), fmt(p.local.values[i])});
    art.files.emplace_back("local_dims.csv", dims.render());
  }
  return art;
}

Artifacts run_scan(const ExperimentConfig& cfg, bool transversality) {
  Artifacts art;
  Table t;
  t.header = {"lambda",        "chi_hat",       "chi_stderr",
              "h_n",           "free_up_to",    "c_n",
              "entropy_slope", "local_dim_mean", "local_dim_std",
              "formula_value", "formula_gap",   "seed",
              "n_word",        "n_samples",     "k_min",
              "k_max"};
  json rows = json::array();
  const std::string na = "n/a(float)";

  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    const double lam = cfg.lambda_grid[i];
    const std::uint64_t row_seed = derive_seed(cfg.seed, i);
    const Rational lam_q = rational_from_double(lam);
    const std::vector<Mat2Q> gens =
        transversality ? transversality_family(lam_q) : shear_pair(lam_q);
    for (const Mat2Q& g : gens) validate_sl2(g);
    const AtomicMeasureG mu = uniform_measure(gens);

    const ExactSummary ex = exact_summary(cfg, mu, /*want_separation=*/true);
    const LyapunovEstimate ly =
        lyapunov_estimate(mu, cfg.n_chi, cfg.trials, derive_seed(row_seed, 1));
    const double formula = checked_formula(gens, ex.h_rw, ly.chi_hat);
    const DimPieces p =
        dimension_pieces(mu, cfg.n_word, cfg.n_samples, row_seed);
    const double gap = std::abs(p.fit.slope - formula);

    t.rows.push_back(
        {fmt(lam), fmt(ly.chi_hat), fmt(ly.std_err),
         ex.feasible ? fmt(ex.profile.h_n) : na,
         ex.feasible ? std::to_string(ex.freeness.free_up_to) : na,
         ex.has_separation ? fmt(ex.separation.c_n) : na,
         fmt(p.fit.slope),
         p.local_ok ? fmt(p.local.mean) : kNaUndersampled,
         p.local_ok ? fmt(p.local.stddev) : kNaUndersampled,
         fmt(formula), fmt(gap), std::to_string(row_seed),
         std::to_string(cfg.n_word), std::to_string(cfg.n_samples),
         std::to_string(p.k_lo), std::to_string(p.k_hi)});

    json row = {{"lambda", lam},
                {"seed", row_seed},
                {"chi_hat", ly.chi_hat},
                {"chi_stderr", ly.std_err},
                {"h_rw", ex.h_rw},
                {"h_rw_source", ex.h_rw_source},
                {"entropy_slope", p.fit.slope},
                {"stationarity_tv", p.stat_tv},
                {"formula_value", formula},
                {"formula_gap", gap},
                {"fit_k_min", p.k_lo},
                {"fit_k_max", p.k_hi},
                {"exact_layer", ex.feasible}};
    if (p.local_ok) {
      row["local_dim_mean"] = p.local.mean;
      row["local_dim_std"] = p.local.stddev;
    } else {
      row["local_dim_mean"] = kNaUndersampled;
      row["local_dim_std"] = kNaUndersampled;
      row["local_dim_error"] = p.local_error;
    }
    if (ex.feasible) {
      row["h_n"] = ex.profile.h_n;
      row["free_up_to"] = ex.freeness.free_up_to;
    }
    if (ex.has_separation) row["c_n"] = ex.separation.c_n;
    rows.push_back(std::move(row));
  }

  art.estimates = {
      {"rows", std::move(rows)},
      {"caveats",
       json::array(
           {"h_n and the step entropy bound the walk entropy from above; "
            "finite enumeration cannot certify freeness beyond maxlen",
            "rows with formula_value = 1 rely on freeness hypotheses at that "
            "parameter which this tool does not verify"})}};
  art.files.emplace_back("table.csv", t.render());
  return art;
}

// ---- config plumbing ---------------------------------------------------------

json config_json(const ExperimentConfig& cfg) {
  json gens = json::array();
  for (const Mat2Q& g : cfg.generators)
    gens.push_back({g.a.str(), g.b.str(), g.c.str(), g.d.str()});
  json weights = json::array();
  for (const Rational& w : cfg.weights) weights.push_back(w.str());
  json out = {{"experiment", cfg.experiment},
              {"generators", std::move(gens)},
              {"weights", std::move(weights)},
              {"n_word", cfg.n_word},
              {"n_samples", cfg.n_samples},
              {"k_min", cfg.k_min},
              {"k_max", cfg.k_max},
              {"maxlen", cfg.maxlen},
              {"trials", cfg.trials},
              {"n_chi", cfg.n_chi},
              {"seed", cfg.seed},
              {"output_dir", cfg.output_dir}};
  if (!cfg.lambda_grid.empty()) out["lambda_grid"] = cfg.lambda_grid;
  return out;
}

int get_int(const json& doc, const char* key, int fallback, int lo, int hi) {
  if (!doc.contains(key)) return fallback;
  const json& j = doc.at(key);
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw ConfigError(std::string(key) + " must be an integer");
  const long long v = j.get<long long>();
  if (v < lo || v > hi)
    throw ConfigError(std::string(key) + " must lie in [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

}  // namespace

std::vector<Mat2Q> transversality_family(const Rational& lambda) {
  Mat2Q first{1, 0, 1, 1};
  Mat2Q second{1, lambda, 1, 1 + lambda};
  return {first, second};
}

bool exact_layer_feasible(const std::vector<Mat2Q>& gens) {
  const BigInt cap = 1000000;
  for (const Mat2Q& g : gens)
    for (const Rational* e : {&g.a, &g.b, &g.c, &g.d})
      if (abs(numerator(*e)) > cap || denominator(*e) > cap) return false;
  return true;
}

bool common_invariant_line(const std::vector<Mat2Q>& gens) {
  const Mat2Q* pivot = nullptr;
  for (const Mat2Q& g : gens)
    if (!is_scalar(g)) {
      pivot = &g;
      break;
    }
  if (!pivot) return true;  // scalar family: every line is invariant

  bool vertical = false;
  std::vector<Rational> affine;
  bool conjugate = false;
  Rational cp, cd, cq;

  if (pivot->c == 0) {
    vertical = true;
    if (pivot->a != pivot->d)
      affine.push_back(pivot->b / (pivot->d - pivot->a));
  } else {
    const Rational disc = (pivot->d - pivot->a) * (pivot->d - pivot->a) +
                          4 * pivot->b * pivot->c;
    if (disc < 0) return false;  // the pivot fixes no real line
    Rational s;
    if (rational_sqrt(disc, &s)) {
      affine.push_back((pivot->a - pivot->d + s) / (2 * pivot->c));
      if (s != 0) affine.push_back((pivot->a - pivot->d - s) / (2 * pivot->c));
    } else {
      conjugate = true;
      cp = pivot->a - pivot->d;
      cd = disc;
      cq = 2 * pivot->c;
    }
  }

  if (vertical &&
      std::all_of(gens.begin(), gens.end(),
                  [](const Mat2Q& g) { return fixes_vertical(g); }))
    return true;
  for (const Rational& x : affine)
    if (std::all_of(gens.begin(), gens.end(),
                    [&](const Mat2Q& g) { return fixes_affine(g, x); }))
      return true;
  if (conjugate &&
      std::all_of(gens.begin(), gens.end(), [&](const Mat2Q& g) {
        return fixes_conjugate_pair(g, cp, cd, cq);
      }))
    return true;
  return false;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "experiment", "generators", "weights",     "n_word",
      "n_samples",  "k_min",      "k_max",       "maxlen",
      "trials",     "n_chi",      "seed",        "lambda_grid",
      "output_dir"};
  for (const auto& item : doc.items())
    if (!known.count(item.key()))
      throw ConfigError("unknown config field: " + item.key());

  ExperimentConfig cfg;
  if (!doc.contains("experiment") || !doc.at("experiment").is_string())
    throw ConfigError("config needs an experiment name");
  cfg.experiment = doc.at("experiment").get<std::string>();
  static const std::set<std::string> experiments = {
      "lyapunov", "dimension",    "freeness",
      "dioph",    "porosity",     "scan-slambda",
      "scan-transversality"};
  if (!experiments.count(cfg.experiment))
    throw ConfigError("unknown experiment: " + cfg.experiment);
  const bool scan = cfg.experiment.rfind("scan-", 0) == 0;

  if (doc.contains("generators")) {
    if (scan)
      throw ConfigError(
          "scan experiments build their own generator family; remove the "
          "generators field");
    const json& gs = doc.at("generators");
    if (!gs.is_array() || gs.empty())
      throw ConfigError("generators must be a nonempty array of matrices");
    for (const json& m : gs) {
      if (!m.is_array() || m.size() != 2 || !m[0].is_array() ||
          !m[1].is_array() || m[0].size() != 2 || m[1].size() != 2)
        throw ConfigError("each generator must be [[a, b], [c, d]]");
      cfg.generators.push_back({parse_entry(m[0][0], "matrix entry"),
                                parse_entry(m[0][1], "matrix entry"),
                                parse_entry(m[1][0], "matrix entry"),
                                parse_entry(m[1][1], "matrix entry")});
    }
  } else if (!scan) {
    throw ConfigError("experiment '" + cfg.experiment + "' needs generators");
  }

  if (doc.contains("weights")) {
    if (scan) throw ConfigError("scans use uniform weights; remove the field");
    const json& ws = doc.at("weights");
    if (!ws.is_array())
      throw ConfigError("weights must be an array of rationals");
    for (const json& w : ws) cfg.weights.push_back(parse_entry(w, "weight"));
  } else if (!scan) {
    cfg.weights.assign(cfg.generators.size(),
                       Rational(1, BigInt(cfg.generators.size())));
  }

  cfg.n_word = get_int(doc, "n_word", cfg.n_word, 1, 1 << 24);
  cfg.n_samples = get_int(doc, "n_samples", cfg.n_samples, 1, 1 << 30);
  cfg.k_min = get_int(doc, "k_min", cfg.k_min, 0, 24);
  cfg.k_max = get_int(doc, "k_max", cfg.k_max, 1, 24);
  if (cfg.k_min >= cfg.k_max)
    throw ConfigError("k_min must be smaller than k_max");
  cfg.maxlen = get_int(doc, "maxlen", cfg.maxlen, 1, 32);
  cfg.trials = get_int(doc, "trials", cfg.trials, 1, 1 << 24);
  cfg.n_chi = get_int(doc, "n_chi", cfg.n_chi, 1, 1 << 30);

  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer())
      throw ConfigError("seed must be a non-negative integer");
    if (s.is_number_integer() && s.get<long long>() < 0)
      throw ConfigError("seed must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }

  if (doc.contains("lambda_grid")) {
    if (!scan)
      throw ConfigError("lambda_grid only applies to scan experiments");
    const json& grid = doc.at("lambda_grid");
    if (!grid.is_array() || grid.empty())
      throw ConfigError("lambda_grid must be a nonempty array of numbers");
    for (const json& v : grid) {
      if (!v.is_number())
        throw ConfigError("lambda_grid entries must be numbers");
      const double lam = v.get<double>();
      if (!std::isfinite(lam))
        throw ConfigError("lambda_grid entries must be finite");
      cfg.lambda_grid.push_back(lam);
    }
  } else if (scan) {
    throw ConfigError("scan experiments need a lambda_grid");
  }

  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string())
      throw ConfigError("output_dir must be a string");
    cfg.output_dir = doc.at("output_dir").get<std::string>();
    if (cfg.output_dir.empty()) throw ConfigError("output_dir is empty");
  }

  if (!scan) {
    for (const Mat2Q& g : cfg.generators) validate_sl2(g);
    try {
      make_measure(cfg.generators, cfg.weights);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  json report;
  report["version"] = kVersion;
  report["experiment"] = cfg.experiment;
  report["config"] = config_json(cfg);

  RunOutcome out;
  const fs::path dir(cfg.output_dir);
  auto fail = [&out](int code, const char* tag, const std::exception& e) {
    out.exit_code = code;
    out.error_code = tag;
    out.message = e.what();
  };

  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
      throw IoError("cannot create output dir " + cfg.output_dir + ": " +
                    ec.message());

    Artifacts art;
    if (cfg.experiment == "scan-slambda") {
      art = run_scan(cfg, false);
    } else if (cfg.experiment == "scan-transversality") {
      art = run_scan(cfg, true);
    } else {
      const AtomicMeasureG mu = make_measure(cfg.generators, cfg.weights);
      if (cfg.experiment == "lyapunov")
        art = run_lyapunov(cfg, mu);
      else if (cfg.experiment == "dimension")
        art = run_dimension(cfg, mu);
      else if (cfg.experiment == "freeness")
        art = run_freeness(cfg, mu);
      else if (cfg.experiment == "dioph")
        art = run_dioph(cfg, mu);
      else
        art = run_porosity(cfg, mu);
    }

    report["estimates"] = std::move(art.estimates);
    report["status"] = "ok";
    json names = json::array({"report.json"});
    for (const auto& [name, bytes] : art.files) {
      atomic_write(dir / name, bytes);
      names.push_back(name);
    }
    report["artifacts"] = std::move(names);
  } catch (const ConfigError& e) {
    fail(2, "CONFIG", e);
  } catch (const FormulaDomainError& e) {
    fail(2, "FORMULA_DOMAIN", e);
  } catch (const DeterminantError& e) {
    fail(2, "DETERMINANT", e);
  } catch (const BudgetExceeded& e) {
    fail(3, "BUDGET", e);
  } catch (const UndersampledError& e) {
    fail(3, "UNDERSAMPLED", e);
  } catch (const ResolutionError& e) {
    fail(2, "RESOLUTION", e);
  } catch (const IoError& e) {
    fail(2, "IO", e);
  } catch (const Error& e) {
    fail(2, "DOMAIN", e);
  } catch (const std::exception& e) {
    fail(2, "IO", e);
  }

  if (out.exit_code != 0) {
    report["status"] = "error";
    report["error"] = {{"code", out.error_code}, {"message", out.message}};
  }
  try {
    atomic_write(dir / "report.json", report.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (out.exit_code == 0) {
      out.exit_code = 2;
      out.error_code = "IO";
      out.message = e.what();
    }
  }
  return out;
}

}  // namespace furst
