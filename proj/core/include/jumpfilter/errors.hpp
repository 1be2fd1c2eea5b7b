#pragma once

#include <stdexcept>
#include <string>

namespace jumpfilter {

/// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition or invariant of an operation was violated by the caller.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(what) {}
};

/// An iterative or floating-point procedure failed to produce a usable result.
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Requested exact computation exceeds the configured work budget.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what) : Error(what) {}
};

class UnsupportedDimension : public Error {
 public:
  explicit UnsupportedDimension(const std::string& what) : Error(what) {}
};

/// The filter lost all mass (or produced non-finite weights).
class DegenerateFilter : public Error {
 public:
  explicit DegenerateFilter(const std::string& what) : Error(what) {}
};

/// Configuration file rejected; message carries file:line context.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace jumpfilter
