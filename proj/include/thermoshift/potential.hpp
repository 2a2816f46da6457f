#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "thermoshift/matrix_family.hpp"
#include "thermoshift/sequence.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift {

/// Linear representation of f_n evaluated at a point x:
///   f_n(x) = c(n) * U^t K_{x_{n-1}} ... K_{x_0} U * prod_k e(x_k, x_{k+1})
/// where the edge product runs over k < n-1, or k < n when `lookahead` is set
/// (then f_n also depends on x_n). Periodic sums and cylinder-extension sums
/// of such potentials reduce to products of transfer matrices.
struct TransferKernel {
  std::size_t dim = 1;
  bool lookahead = false;
  /// log c(n); empty means c = 1.
  std::function<double(int)> log_length_factor;
  /// dim x dim, entrywise positive.
  std::function<Matrix(Symbol)> symbol_matrix;
  /// log e(a, b); empty means e = 1.
  std::function<double(Symbol, Symbol)> log_edge;
};

namespace detail {

class PotentialImpl {
 public:
  virtual ~PotentialImpl() = default;
  virtual std::string_view kind() const = 0;
  virtual const TransitionModel& model() const = 0;
  virtual int lookahead() const = 0;
  /// log f_n at any point whose first n + lookahead() symbols are x.
  virtual double eval_prefix(WordView x, std::size_t n) const = 0;
  virtual std::optional<double> declared_C() const = 0;
  virtual std::optional<double> declared_M() const { return 1.0; }
  /// Bound on sum_{a>m} sup (f_1)^t on C_a.
  virtual std::optional<double> sup_f1_tail(Symbol, double) const { return std::nullopt; }
  virtual std::optional<TransferKernel> kernel() const { return std::nullopt; }
};

}  // namespace detail

/// The sequence F = {log f_n}. Values are immutable and cheap to copy; all
/// evaluation is reentrant.
class PotentialSequence {
 public:
  explicit PotentialSequence(std::shared_ptr<const detail::PotentialImpl> impl,
                             double scale = 1.0);

  std::string_view kind() const { return impl_->kind(); }
  const TransitionModel& model() const { return impl_->model(); }
  int lookahead() const { return impl_->lookahead(); }
  /// Multiplier t of a scaled potential tF (1 when unscaled).
  double scale() const noexcept { return scale_; }

  /// log f_n at the periodic point w^infty, n = |w|.
  double eval(WordView w) const;
  /// log f_n at any point starting with x; needs |x| >= n + lookahead().
  double eval_prefix(WordView x, std::size_t n) const;
  /// log f_n at sigma^shift of the periodic point cycle^infty.
  double eval_at(WordView cycle, std::size_t shift, std::size_t n) const;

  /// log sup / inf of f_n over the cylinder C_w within `scope`.
  double log_sup_cylinder(WordView w, const FiniteSubshift& scope) const;
  double log_inf_cylinder(WordView w, const FiniteSubshift& scope) const;
  double log_sup_f1(Symbol a, const FiniteSubshift& scope) const;
  double log_inf_f1(Symbol a, const FiniteSubshift& scope) const;

  std::optional<double> declared_C() const;
  std::optional<double> declared_M() const;
  /// Closed-form bound on sum_{a>m} sup f_1|_{C_a}.
  std::optional<double> sup_f1_tail(Symbol m) const;
  std::optional<TransferKernel> transfer_kernel() const;

  /// tF; scaling composes multiplicatively.
  PotentialSequence scaled(double t) const;

 private:
  double cylinder_extreme(WordView w, const FiniteSubshift& scope, bool sup) const;

  std::shared_ptr<const detail::PotentialImpl> impl_;
  double scale_;
};

using PairFunction = std::function<double(Symbol, Symbol)>;

/// Birkhoff sums of a 2-cylinder function: eval(w) = sum_k f(w_k, w_{k+1 mod n}).
/// A non-finite value of f on an admissible pair is a domain error.
PotentialSequence birkhoff_potential(PairFunction f, TransitionModel model);

/// log c_n either linear (gamma * n, additive) or a general sequence with a
/// caller-declared almost-additivity constant.
struct LogCoefficients {
  std::optional<double> gamma = 0.0;
  std::function<double(int)> general;
  double declared_C = 0.0;

  static LogCoefficients linear(double gamma) { return {gamma, {}, 0.0}; }
  static LogCoefficients sequence(std::function<double(int)> log_c, double declared_C) {
    return {std::nullopt, std::move(log_c), declared_C};
  }
  double at(int n) const { return gamma ? *gamma * n : general(n); }
};

/// f_n = c_n * lambda_{x_0} ... lambda_{x_{n-1}} on the full shift on
/// {1..size(lambda)} (countable when lambda is infinite).
PotentialSequence weighted_fullshift_potential(LogCoefficients log_c, WeightSequence lambda);

/// f_n(w) = ||A_{w_{n-1}} ... A_{w_0}|| with the entry-sum norm. The declared
/// almost-additivity constant comes from the cone condition over the family.
PotentialSequence cocycle_potential(MatrixFamily family, TransitionModel model);

/// The factor-map potential on Y: eval(y) = -log |pi^{-1}[y_1..y_n]|, with
/// pi(k) = k/2 + 1 (k even), (k-1)/2 + 1 (k odd) from X onto Y.
PotentialSequence fiber_count_potential();
/// |pi^{-1}[y]| as a real (exact below 2^53).
double fiber_count(WordView y);

/// Locally constant potential given by an arbitrary word function.
PotentialSequence callback_potential(std::string name, TransitionModel model,
                                     std::function<double(WordView)> log_fn,
                                     std::optional<double> declared_C);

struct RegularityReport {
  double C_hat = 0.0;
  double M_hat = 1.0;
  std::size_t samples = 0;
  std::size_t depth = 0;
  /// Set when declared_C is present and C_hat exceeds it beyond tolerance.
  bool violation = false;
};

/// Samples admissible points of `scope`, splits them at random n + m <= depth
/// and records |log f_{n+m}(x) - log f_n(x) - log f_m(sigma^n x)|. A falsifier
/// for declared constants, never a proof.
RegularityReport estimate_regularity(const PotentialSequence& p, const FiniteSubshift& scope,
                                     std::size_t depth, std::size_t samples,
                                     std::uint64_t seed = 1, double tolerance = 1e-9);

struct ConeReport {
  bool holds = false;
  /// Largest C with min/max >= dC for every probed matrix.
  double best_C = 0.0;
  /// Symbol attaining the smallest ratio.
  Symbol worst_symbol = 0;
};

/// Cone condition; `uniform_floor` is the value below which the condition is
/// reported as degenerating (not uniform) over the probed range.
ConeReport check_cone_condition(const MatrixFamily& family, Symbol symbol_bound,
                                double uniform_floor = 1e-2);

enum class SummabilityVerdict { summable, not_summable, inconclusive };

struct SummabilityReport {
  double partial_sum = 0.0;
  std::optional<double> tail_bound;
  SummabilityVerdict verdict = SummabilityVerdict::inconclusive;
};

SummabilityReport summability_report(const PotentialSequence& p, Symbol probe_bound);

std::string_view to_string(SummabilityVerdict v);

}  // namespace thermoshift
