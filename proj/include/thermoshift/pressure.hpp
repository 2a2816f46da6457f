#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "thermoshift/numeric.hpp"
#include "thermoshift/potential.hpp"
#include "thermoshift/sequence.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift {

/// How Z_n is summed. `transfer` multiplies block transfer matrices and needs a
/// TransferKernel; `enumerate` visits every periodic word; `automatic` picks
/// transfer whenever a kernel exists.
enum class PartitionMethod { automatic, enumerate, transfer };

std::string_view to_string(PartitionMethod m);

struct PartitionOptions {
  PartitionMethod method = PartitionMethod::automatic;
  /// Largest number of periodic words enumerated for a single Z_n.
  std::uint64_t enumeration_cap = 100'000'000;
  unsigned threads = 0;
};

struct PartitionSeries {
  Symbol base_symbol = 0;
  /// log_Z[n-1] = log Z_n; -inf when no period-n word starts at the base symbol.
  std::vector<double> log_Z;
  PartitionMethod method = PartitionMethod::enumerate;
  /// Set when the enumeration cap stopped the series before the requested n_max.
  bool capped = false;

  std::size_t n_max() const noexcept { return log_Z.size(); }
  double at(std::size_t n) const { return log_Z.at(n - 1); }
  /// slope[n-1] = log Z_{n+1} - log Z_n (NaN where either side is -inf).
  std::vector<double> slopes() const;
};

/// log Z_n(F, a) on the truncation; -inf when no periodic word exists.
double partition_function(const FiniteSubshift& sub, const PotentialSequence& p, int n, Symbol a,
                          const PartitionOptions& options = {});

PartitionSeries partition_series(const FiniteSubshift& sub, const PotentialSequence& p, int n_max,
                                 Symbol a, const PartitionOptions& options = {});

/// log of max over x0 of sum over z -> x0 of sup f_1 on C_z.
double transfer_norm(const FiniteSubshift& sub, const PotentialSequence& p);

struct PressureParams {
  /// Base symbol; defaults to the first symbol of the model.
  std::optional<Symbol> a;
  /// Strictly increasing truncation levels.
  std::vector<Symbol> truncations{20};
  int n_max = 40;
  int slope_window = 4;
  /// Slope oscillation allowed for a converged estimate; also the
  /// monotonicity slack across truncations.
  double tol = 1e-6;
  /// On the transfer path, keep iterating past n_max until the trailing slopes
  /// settle to `extension_tol` (or `extension_cap` steps).
  bool extend = true;
  double extension_tol = 1e-12;
  int extension_cap = 1'000'000;
  /// Divergence: per-doubling growth of the truncation estimates (normalized by
  /// log2 of the level ratio) at least this large for `divergence_doublings`
  /// consecutive pairs of levels.
  double divergence_growth = 0.2;
  int divergence_doublings = 3;
  PartitionOptions partition;
};

struct TruncationEstimate {
  Symbol level = 0;
  std::size_t symbols = 0;
  double value = 0.0;
  double lower = kNegInf;
  double upper = kInf;
  double slope_span = 0.0;
  int n_used = 0;
  bool converged = false;
  bool capped = false;
};

struct PressureEstimate {
  /// +inf when divergent.
  double value = 0.0;
  double lower = kNegInf;
  double upper = kInf;
  Symbol truncation_level = 0;
  int n_max = 0;
  /// Steps actually taken at the largest truncation (>= n_max when extended).
  int n_used = 0;
  /// Per-n slopes at the largest truncation, n = 1..n_max-1.
  std::vector<double> slopes;
  /// Trailing window the value is averaged over.
  std::vector<double> window;
  double slope_span = 0.0;
  bool converged = false;
  bool divergent = false;
  bool monotone = true;
  double k = 0.0;
  PartitionSeries series;
  std::vector<TruncationEstimate> per_truncation;

  bool infinite() const noexcept { return divergent; }
  std::string_view flag() const noexcept {
    return divergent ? "divergent" : (converged ? "converged" : "unconverged");
  }
};

/// Slope estimator of the Gurevich pressure on increasing truncations with
/// two-sided brackets. Throws NotMixing for a non-mixing truncation.
PressureEstimate gurevich_pressure(const TransitionModel& model, const PotentialSequence& p,
                                   const PressureParams& params);

/// t*gamma + log(lambda_power_sum); +inf when the sum diverges.
double closed_form_fullshift_pressure(double gamma, double lambda_power_sum, double t);
double closed_form_fullshift_pressure(double gamma, const WeightSequence& lambda, double t);

struct CurvePoint {
  double t = 0.0;
  PressureEstimate estimate;
};

struct PressureCurve {
  std::vector<CurvePoint> points;
  /// Most negative change of consecutive divided differences on the finite part.
  double convexity_defect = 0.0;
  bool convex = true;
};

/// P(tF) for every t of an ascending grid. Convexity is judged up to `convexity_tol`.
PressureCurve pressure_curve(const TransitionModel& model, const PotentialSequence& p,
                             const std::vector<double>& t_grid, const PressureParams& params,
                             double convexity_tol = 1e-6);

struct SymbolIndependence {
  std::vector<Symbol> symbols;
  std::vector<double> values;
  double max_deviation = 0.0;
  bool pass = false;
};

SymbolIndependence symbol_independence_check(const TransitionModel& model,
                                             const PotentialSequence& p,
                                             const std::vector<Symbol>& symbols,
                                             const PressureParams& params);

/// Worst slack of the structural inequalities on a stored series: positive
/// values mean the inequality holds with room to spare.
struct PartitionInvariants {
  /// min over n+m <= n_max of log Z_{n+m} + k - log Z_n - log Z_m.
  double superadditivity_slack = kInf;
  /// min over n of log Z_n - (n log beta - (n-1) C - log M), where Z_n > 0.
  double floor_slack = kInf;
  /// min over n of n (C + log ||L 1||) + log M - log Z_n, where Z_n > 0.
  double upper_slack = kInf;
  double k = 0.0;
  double log_beta = 0.0;
};

PartitionInvariants check_partition_invariants(const FiniteSubshift& sub,
                                               const PotentialSequence& p,
                                               const PartitionSeries& series);

}  // namespace thermoshift
