#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "thermoshift/shift.hpp"

namespace thermoshift {

/// Positive weights (lambda_j or rho_j), indexed from 1, with closed-form
/// power sums sum_j w_j^t where available.
class WeightSequence {
 public:
  enum class Kind { geometric, power, list };

  /// w_j = base^{-j}, base > 1.
  static WeightSequence geometric(double base);
  /// w_j = coefficient * j^{-exponent}, exponent > 0, coefficient > 0.
  static WeightSequence power(double exponent, double coefficient = 1.0);
  /// w_1..w_k given explicitly.
  static WeightSequence list(std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return parameter_; }
  /// Power kind only; 1 otherwise.
  double coefficient() const noexcept { return coefficient_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Throws DomainError for j < 1 or beyond a finite list.
  double value(Symbol j) const;
  std::optional<Symbol> size() const noexcept;

  /// sum_j w_j^t, +inf when the series diverges.
  double power_sum(double t) const;
  /// Upper bound on sum_{j>m} w_j^t (exact for geometric and list kinds).
  double power_tail(double t, Symbol m) const;
  /// Partial sum sum_{j<=m} w_j^t.
  double partial_power_sum(double t, Symbol m) const;
  /// t' such that the power sum converges for t > t' and diverges for t < t'.
  double convergence_threshold() const noexcept;

 private:
  WeightSequence(Kind kind, double parameter, std::vector<double> values, double coefficient = 1.0)
      : kind_(kind), parameter_(parameter), coefficient_(coefficient), values_(std::move(values)) {}

  Kind kind_;
  double parameter_;
  double coefficient_;
  std::vector<double> values_;
};

}  // namespace thermoshift
