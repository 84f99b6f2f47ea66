#pragma once

#include <stdexcept>
#include <string>

namespace furst {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Matrix failed the unimodularity check; carries the measured determinant.
struct DeterminantError : Error {
  double measured_det;
  explicit DeterminantError(double det)
      : Error("determinant " + std::to_string(det) +
              " differs from 1 beyond tolerance"),
        measured_det(det) {}
};

/// Singular values coincide within tolerance, so the singular directions
/// (and anything built from them) are meaningless.
struct DegenerateError : Error {
  using Error::Error;
};

/// Exact enumeration would exceed the configured product budget.
struct BudgetExceeded : Error {
  using Error::Error;
};

/// Requested dyadic level exceeds the resolution cap, or two histograms have
/// inconsistent levels.
struct ResolutionError : Error {
  using Error::Error;
};

/// A conditioning cell contains no sample points.
struct EmptyComponent : Error {
  using Error::Error;
};

/// Not enough sample mass to support the requested estimate.
struct UndersampledError : Error {
  using Error::Error;
};

/// Estimator input outside its mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

/// Invalid experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// A report would be built from no data (e.g. separation of a single product).
struct EmptyReport : Error {
  using Error::Error;
};

}  // namespace furst
