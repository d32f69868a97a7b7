#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace semiinfo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error taxonomy. Each maps onto one failure class of the CLI contract.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shapes or grids that do not line up.
struct DimensionError : Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// A model component could not be evaluated at an observation.
struct EvaluationError : Error {
  using Error::Error;
};

/// Linear system too ill-conditioned to solve without regularization.
struct IllPosed : Error {
  IllPosed(const std::string& what, double condition)
      : Error(what), condition_estimate(condition) {}
  double condition_estimate;
};

/// Information for the parameter of interest is singular.
struct NotIdentifiable : Error {
  using Error::Error;
};

/// A closed-form reference or engine feature the model does not provide.
struct NotAvailable : Error {
  using Error::Error;
};

/// Malformed run configuration.
struct ConfigError : Error {
  using Error::Error;
};

enum class TangentKind { L2, L2Zero };

inline const char* to_string(TangentKind k) {
  return k == TangentKind::L2 ? "L2" : "L2Zero";
}

}  // namespace semiinfo
