#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "furst/measure.hpp"

namespace furst {

inline constexpr const char* kVersion = "0.1.0";

// One experiment invocation, as parsed from a JSON config document. Matrix
// entries arrive as rational strings ("p/q", "3", "-0.215") or JSON numbers;
// either way they are held exactly (every double is a dyadic rational).
struct ExperimentConfig {
  std::string experiment;  // lyapunov | dimension | freeness | dioph |
                           // porosity | scan-slambda | scan-transversality
  std::vector<Mat2Q> generators;
  std::vector<Rational> weights;  // same length as generators, sums to 1
  int n_word = 128;      // word length per stationary sample; doubles as the
                         // walk length of the lyapunov experiment
  int n_samples = 1000000;
  int k_min = 6;         // level window for plot data and porosity; the
  int k_max = 13;        // dimension fits use the estimators' own windows
  int maxlen = 12;       // exact-layer enumeration depth
  int trials = 200;
  int n_chi = 10000;     // walk length behind chi_hat in dimension runs/scans
  std::uint64_t seed = 1;
  std::vector<double> lambda_grid;  // scans only
  std::string output_dir = ".";
};

// Parses and validates a config document; throws ConfigError on any schema
// violation, including unknown keys.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Outcome of a run, mirrored into report.json as machine-readable fields.
struct RunOutcome {
  int exit_code = 0;       // 0 ok; 2 config/domain; 3 budget/undersampling
  std::string error_code;  // empty | CONFIG | DETERMINANT | DOMAIN |
                           // FORMULA_DOMAIN | RESOLUTION | BUDGET |
                           // UNDERSAMPLED | IO
  std::string message;
};

// Runs one experiment, writing report.json (always, even on error) and
// table.csv plus any plot CSVs (on success) into config.output_dir. Every
// file is written to a temporary name and renamed, so concurrent readers
// never observe partial output. Identical configs produce byte-identical
// files regardless of FURST_THREADS.
RunOutcome run_experiment(const ExperimentConfig& config);

// {[[1,0],[1,1]], [[1,l],[1,1+l]]}: the det-1 family behind the
// transversality scan.
std::vector<Mat2Q> transversality_family(const Rational& lambda);

// True when every generator entry has numerator and denominator below 10^6,
// the regime where exact enumeration is worth running. Entries imported from
// floats (denominators around 2^50) fail this, and the runner falls back to
// float estimators with h_n, free_up_to and c_n reported as "n/a(float)".
bool exact_layer_feasible(const std::vector<Mat2Q>& gens);

// Exact test for a line fixed by every generator, including lines at
// quadratic-irrational angles. Such a family has no unique stationary
// measure, so dimension runs refuse it with error code FORMULA_DOMAIN.
bool common_invariant_line(const std::vector<Mat2Q>& gens);

}  // namespace furst
