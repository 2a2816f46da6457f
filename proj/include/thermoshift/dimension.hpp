#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "thermoshift/potential.hpp"
#include "thermoshift/pressure.hpp"
#include "thermoshift/sequence.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift {

/// Interval lengths r_w of a countable geometric construction.
class GeometricConstruction {
 public:
  enum class Kind { product, general };

  /// r_w = prod_k rho_{w_k}; every rho_j must lie in (0,1).
  static GeometricConstruction product(WeightSequence rho);
  /// Arbitrary log r_w with a declared almost-multiplicativity constant C.
  static GeometricConstruction general(std::function<double(WordView)> log_ratio,
                                       std::optional<Symbol> alphabet, double declared_C);

  Kind kind() const noexcept { return kind_; }
  std::optional<Symbol> alphabet() const;
  /// Product kind only.
  const WeightSequence& rho() const;
  double declared_C() const noexcept { return declared_C_; }

  double log_ratio(WordView w) const;
  double ratio(WordView w) const;

  /// phi_n(w) = log r_w as a potential on `model`.
  PotentialSequence potential(const TransitionModel& model) const;
  /// The coding full shift.
  TransitionModel default_model() const;

 private:
  GeometricConstruction(Kind kind, std::optional<WeightSequence> rho,
                        std::function<double(WordView)> log_ratio, std::optional<Symbol> alphabet,
                        double c);

  Kind kind_;
  std::optional<WeightSequence> rho_;
  std::function<double(WordView)> log_ratio_;
  std::optional<Symbol> alphabet_;
  double declared_C_ = 0.0;
};

struct SolverParams {
  double t_lo = 0.0;
  double t_hi = 1.0;
  double tol = 1e-10;
  int max_iter = 200;
};

struct BisectionStep {
  int iteration = 0;
  double t = 0.0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string_view flag;
};

struct DimensionResult {
  double dim_hat = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool root_found = false;
  double pressure_at_dim = 0.0;
  /// An endpoint's sign is not certain given its slope oscillation.
  bool uncertain_crossing = false;
  std::vector<BisectionStep> trace;
};

/// inf{t : P(t phi) <= 0} by bisection on the pressure estimate. Throws
/// DomainError when the bracket does not straddle the crossing.
DimensionResult bowen_dimension(const GeometricConstruction& gc, const TransitionModel& model,
                                const SolverParams& solver, const PressureParams& params);

struct LedrappierYoung {
  double lhs = 0.0;
  double rhs = 0.0;
  double deviation = 0.0;
  double entropy = 0.0;
  double lyapunov = 0.0;
};

/// Compares dim_hat with -h(mu)/Lambda(mu) for mu the equilibrium of
/// dim_hat * log rho on the truncation (product kind).
LedrappierYoung ledrappier_young_check(const GeometricConstruction& gc, const TransitionModel& model,
                                       const DimensionResult& result, Symbol truncation);

/// log sum over admissible words of length n of r_w^t.
double log_natural_cover_sum(const GeometricConstruction& gc, const FiniteSubshift& sub, double t,
                             int n);

}  // namespace thermoshift
