#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mcf {

/// Argument outside the domain where a quantity is defined (extinction time,
/// injectivity radius, s >= t, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The displaced hypersurface is no longer a valid normal graph, or the height
/// is outside the smallness regime required by the quadratic estimates.
class GraphValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Picard iteration failed. Carries the successive-iterate distances so the
/// caller can inspect the contraction history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> distances)
      : std::runtime_error(what), distances_(std::move(distances)) {}
  const std::vector<double>& distances() const noexcept { return distances_; }

 private:
  std::vector<double> distances_;
};

class BallExitError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace mcf
