#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "sepfp/errors.hpp"

namespace sepfp {

// Closed-form sequence rule. Admissibility conditions on parameter sequences
// (summability, positive liminf) are decided by rule inspection, never by
// truncating the series numerically.
struct Schedule {
  enum class Rule { constant, harmonic, inverse_square, geometric };

  Rule rule = Rule::constant;
  double a = 0.0;    // amplitude
  double rho = 0.0;  // geometric ratio, used by Rule::geometric only

  static Schedule zero() { return {Rule::constant, 0.0, 0.0}; }
  static Schedule constant(double a) { return {Rule::constant, a, 0.0}; }
  static Schedule harmonic(double a) { return {Rule::harmonic, a, 0.0}; }
  static Schedule inverse_square(double a) { return {Rule::inverse_square, a, 0.0}; }
  static Schedule geometric(double a, double rho) { return {Rule::geometric, a, rho}; }

  double eval(long n) const {
    if (n < 1) throw ArgumentError("Schedule::eval: index must be >= 1");
    switch (rule) {
      case Rule::constant:
        return a;
      case Rule::harmonic:
        return a / static_cast<double>(n);
      case Rule::inverse_square:
        return a / (static_cast<double>(n) * static_cast<double>(n));
      case Rule::geometric:
        return a * std::pow(rho, static_cast<double>(n));
    }
    return 0.0;
  }

  // sum_{n>=1} eval(n) < infinity, decided structurally
  bool summable() const {
    if (a == 0.0) return true;
    switch (rule) {
      case Rule::constant:
        return false;
      case Rule::harmonic:
        return false;
      case Rule::inverse_square:
        return true;
      case Rule::geometric:
        return std::abs(rho) < 1.0;
    }
    return false;
  }

  bool positive_liminf() const {
    switch (rule) {
      case Rule::constant:
        return a > 0.0;
      case Rule::harmonic:
      case Rule::inverse_square:
        return false;
      case Rule::geometric:
        return a > 0.0 && rho >= 1.0;
    }
    return false;
  }

  bool nonnegative() const { return a >= 0.0 && (rule != Rule::geometric || rho >= 0.0); }

  // infimum over n >= 1 (limit values included)
  double inf_value() const {
    switch (rule) {
      case Rule::constant:
        return a;
      case Rule::harmonic:
      case Rule::inverse_square:
        return a >= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
      case Rule::geometric:
        if (a == 0.0) return 0.0;
        if (rho >= 1.0) return a > 0.0 ? a * rho : -std::numeric_limits<double>::infinity();
        return a > 0.0 ? 0.0 : a * rho;
    }
    return 0.0;
  }

  // supremum over n >= 1
  double sup_value() const {
    switch (rule) {
      case Rule::constant:
        return a;
      case Rule::harmonic:
      case Rule::inverse_square:
        return a >= 0.0 ? a : 0.0;
      case Rule::geometric:
        if (a == 0.0) return 0.0;
        if (rho >= 1.0) return a > 0.0 ? std::numeric_limits<double>::infinity() : a * rho;
        return a > 0.0 ? a * rho : 0.0;
    }
    return 0.0;
  }

  std::string describe() const {
    switch (rule) {
      case Rule::constant:
        return "constant(" + std::to_string(a) + ")";
      case Rule::harmonic:
        return std::to_string(a) + "/n";
      case Rule::inverse_square:
        return std::to_string(a) + "/n^2";
      case Rule::geometric:
        return std::to_string(a) + "*" + std::to_string(rho) + "^n";
    }
    return "?";
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

}  // namespace sepfp
