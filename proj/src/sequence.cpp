#include "thermoshift/sequence.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "thermoshift/error.hpp"
#include "thermoshift/numeric.hpp"

namespace thermoshift {

WeightSequence WeightSequence::geometric(double base) {
  if (!(base > 1.0) || !std::isfinite(base)) throw DomainError("geometric base must be > 1");
  return {Kind::geometric, base, {}};
}

WeightSequence WeightSequence::power(double exponent, double coefficient) {
  if (!(exponent > 0.0) || !std::isfinite(exponent)) {
    throw DomainError("power-law exponent must be > 0");
  }
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) {
    throw DomainError("power-law coefficient must be > 0");
  }
  return {Kind::power, exponent, {}, coefficient};
}

WeightSequence WeightSequence::list(std::vector<double> values) {
  if (values.empty()) throw DomainError("weight list is empty");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("weights must be positive and finite");
  }
  return {Kind::list, 0.0, std::move(values)};
}

double WeightSequence::value(Symbol j) const {
  if (j < 1) throw DomainError("weight index must be >= 1, got " + std::to_string(j));
  switch (kind_) {
    case Kind::geometric:
      return std::pow(parameter_, -static_cast<double>(j));
    case Kind::power:
      return coefficient_ * std::pow(static_cast<double>(j), -parameter_);
    case Kind::list:
      if (j > static_cast<Symbol>(values_.size())) {
        throw DomainError("weight index " + std::to_string(j) + " beyond list of size " +
                          std::to_string(values_.size()));
      }
      return values_[static_cast<std::size_t>(j - 1)];
  }
  return 0.0;
}

std::optional<Symbol> WeightSequence::size() const noexcept {
  if (kind_ == Kind::list) return static_cast<Symbol>(values_.size());
  return std::nullopt;
}

double WeightSequence::convergence_threshold() const noexcept {
  switch (kind_) {
    case Kind::geometric:
      return 0.0;
    case Kind::power:
      return 1.0 / parameter_;
    case Kind::list:
      return kNegInf;
  }
  return 0.0;
}

double WeightSequence::partial_power_sum(double t, Symbol m) const {
  if (auto n = size()) m = std::min(m, *n);
  double sum = 0.0;
  for (Symbol j = 1; j <= m; ++j) sum += std::pow(value(j), t);
  return sum;
}

double WeightSequence::power_sum(double t) const {
  switch (kind_) {
    case Kind::geometric: {
      if (t <= 0.0) return kInf;
      const double x = std::pow(parameter_, -t);
      return x / (1.0 - x);
    }
    case Kind::power: {
      const double s = parameter_ * t;
      if (s <= 1.0) return kInf;
      return std::pow(coefficient_, t) * std::riemann_zeta(s);
    }
    case Kind::list:
      return partial_power_sum(t, static_cast<Symbol>(values_.size()));
  }
  return kInf;
}

double WeightSequence::power_tail(double t, Symbol m) const {
  if (m < 0) m = 0;
  switch (kind_) {
    case Kind::geometric: {
      if (t <= 0.0) return kInf;
      const double x = std::pow(parameter_, -t);
      return std::pow(x, static_cast<double>(m + 1)) / (1.0 - x);
    }
    case Kind::power: {
      const double s = parameter_ * t;
      if (s <= 1.0) return kInf;
      const double scale = std::pow(coefficient_, t);
      if (m == 0) return scale * std::riemann_zeta(s);
      // sum_{j>m} j^{-s} <= int_m^inf x^{-s} dx
      return scale * std::pow(static_cast<double>(m), 1.0 - s) / (s - 1.0);
    }
    case Kind::list: {
      double sum = 0.0;
      for (Symbol j = m + 1; j <= static_cast<Symbol>(values_.size()); ++j) sum += std::pow(value(j), t);
      return sum;
    }
  }
  return kInf;
}

}  // namespace thermoshift
