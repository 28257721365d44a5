#pragma once

#include <stdexcept>
#include <string>

namespace sepfp {

// Bad caller input: dimension mismatches, out-of-range parameters.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The requested set intersection is certifiably empty.
class InfeasibleSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative routine hit its cap; carries the final residual.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_ = 0.0;
};

// A linear solve or factorization produced an untrustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterate magnitude blew past the overflow guard (non-admissible mapping).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The analytic reference cannot represent this instance.
class UnsupportedInstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Projection requested onto an empty solution set.
class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem-file parse failure; message carries the offending field path.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sepfp
