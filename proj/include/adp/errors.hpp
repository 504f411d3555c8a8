#pragma once

#include <stdexcept>
#include <string>

namespace adp {

/// Linear system that must be solved is (numerically) singular.
class SingularSystemError : public std::runtime_error {
 public:
  explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative search (bisection, bracketing) failed to locate its target.
class NoConvergenceError : public std::runtime_error {
 public:
  explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Gradient descent loss increased persistently; the step size is too large.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// No linear operator can make the requested point a regularized minimizer:
/// alpha*<v,x> exceeds ||y||^2 / 4.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Supplied vector failed the subdifferential membership test.
class InvalidSubgradientError : public std::invalid_argument {
 public:
  explicit InvalidSubgradientError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace adp
