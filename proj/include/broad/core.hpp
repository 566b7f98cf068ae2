#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace broad {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vec = Vector<double>;
using Mat = Eigen::MatrixXd;

/// Raised when an argument lies outside the domain of a function
/// (for example a non-positive coordinate handed to the log-barrier).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The OMD solver could not bracket or converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment or algorithm configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A strict-mode runtime invariant failed. The message carries the round
/// context so the offending replication can be replayed.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace broad
