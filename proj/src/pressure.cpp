#include "thermoshift/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "thermoshift/error.hpp"
#include "thermoshift/numeric.hpp"
#include "thermoshift/parallel.hpp"

namespace thermoshift {

std::string_view to_string(PartitionMethod m) {
  switch (m) {
    case PartitionMethod::automatic:
      return "automatic";
    case PartitionMethod::enumerate:
      return "enumerate";
    case PartitionMethod::transfer:
      return "transfer";
  }
  return "automatic";
}

std::vector<double> PartitionSeries::slopes() const {
  std::vector<double> out;
  if (log_Z.size() < 2) return out;
  out.reserve(log_Z.size() - 1);
  for (std::size_t k = 0; k + 1 < log_Z.size(); ++k) {
    const bool finite = log_Z[k] != kNegInf && log_Z[k + 1] != kNegInf;
    out.push_back(finite ? log_Z[k + 1] - log_Z[k] : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

namespace {

Symbol require_base(const FiniteSubshift& sub, Symbol a) {
  if (!sub.contains(a)) {
    throw DomainError("base symbol " + std::to_string(a) + " does not survive the truncation");
  }
  return a;
}

double enumerate_log_Z(const FiniteSubshift& sub, const PotentialSequence& p, int n, Symbol a,
                       unsigned threads) {
  if (n == 1) {
    LogSumExp acc;
    visit_periodic_words(sub, 1, a, [&](WordView w) { acc.add(p.eval(w)); });
    return acc.value();
  }
  const auto start = *sub.index_of(a);
  const auto next = sub.successors(start);
  // One chunk per second symbol; chunk shape is independent of the thread count.
  auto parts = parallel_map<LogSumExp>(next.size(), threads, [&](std::size_t i) {
    LogSumExp acc;
    visit_periodic_words(
        sub, n, a, [&](WordView w) { acc.add(p.eval(w)); }, sub.symbol(next[i]));
    return acc;
  });
  return pairwise_reduce(std::move(parts), [](LogSumExp x, const LogSumExp& y) {
           x.merge(y);
           return x;
         }).value();
}

// Block transfer iteration for Z_n(a):
//   R_1(a) = K_a U,  R_{k+1}(c) = sum_{b->c} e(b,c) K_c R_k(b),
//   Z_n = c(n) sum_{b->a} [e(b,a)] U^t R_n(b).
// R is renormalized every step; `log_scale` carries the factor.
class TransferIterator {
 public:
  TransferIterator(const FiniteSubshift& sub, const TransferKernel& kernel, Symbol a)
      : sub_(sub), kernel_(kernel), a_(*sub.index_of(a)), d_(kernel.dim) {
    const std::size_t m = sub.size();
    matrices_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Matrix k = kernel.symbol_matrix(sub.symbol(i));
      if (static_cast<std::size_t>(k.rows()) != d_ || static_cast<std::size_t>(k.cols()) != d_) {
        throw DomainError("transfer kernel matrix has the wrong shape");
      }
      matrices_.push_back(std::move(k));
    }
    edge_.assign(m * m, 0.0);
    if (kernel.log_edge) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j : sub.successors(i)) {
          const double v = kernel.log_edge(sub.symbol(i), sub.symbol(j));
          if (!std::isfinite(v)) throw DomainError("non-finite edge weight in transfer kernel");
          edge_[i * m + j] = v;
        }
    }
    r_.assign(m, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_)));
    r_[a_] = matrices_[a_] * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d_));
    renormalize();
    n_ = 1;
  }

  int n() const noexcept { return n_; }

  double log_Z() const {
    const std::size_t m = sub_.size();
    LogSumExp acc;
    for (std::size_t b : sub_.predecessors(a_)) {
      const double s = r_[b].sum();
      if (s <= 0.0) continue;
      acc.add(std::log(s) + (kernel_.lookahead ? edge_[b * m + a_] : 0.0));
    }
    const double v = acc.value();
    if (v == kNegInf) return kNegInf;
    const double c = kernel_.log_length_factor ? kernel_.log_length_factor(n_) : 0.0;
    return v + log_scale_ + c;
  }

  void step() {
    const std::size_t m = sub_.size();
    std::vector<Eigen::VectorXd> next(m, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_)));
    for (std::size_t c = 0; c < m; ++c) {
      const auto preds = sub_.predecessors(c);
      if (preds.empty()) continue;
      double shift = kNegInf;
      for (std::size_t b : preds) shift = std::max(shift, edge_[b * m + c]);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_));
      for (std::size_t b : preds) acc += std::exp(edge_[b * m + c] - shift) * r_[b];
      next[c] = std::exp(shift) * (matrices_[c] * acc);
    }
    r_ = std::move(next);
    renormalize();
    ++n_;
  }

 private:
  void renormalize() {
    double top = 0.0;
    for (const auto& v : r_) top = std::max(top, v.cwiseAbs().maxCoeff());
    if (!(top > 0.0) || !std::isfinite(top)) throw DomainError("transfer iteration degenerated");
    for (auto& v : r_) v /= top;
    log_scale_ += std::log(top);
  }

  const FiniteSubshift& sub_;
  const TransferKernel& kernel_;
  std::size_t a_;
  std::size_t d_;
  std::vector<Matrix> matrices_;
  std::vector<double> edge_;
  std::vector<Eigen::VectorXd> r_;
  double log_scale_ = 0.0;
  int n_ = 0;
};

PartitionMethod resolve_method(const PotentialSequence& p, PartitionMethod requested,
                               const std::optional<TransferKernel>& kernel) {
  if (requested == PartitionMethod::transfer && !kernel) {
    throw DomainError("potential '" + std::string(p.kind()) + "' has no transfer kernel");
  }
  if (requested == PartitionMethod::automatic) {
    return kernel ? PartitionMethod::transfer : PartitionMethod::enumerate;
  }
  return requested;
}

bool over_cap(const FiniteSubshift& sub, int n, Symbol a, std::uint64_t cap) {
  const auto count = count_periodic(sub, n, a);
  return count.saturated || count.value > cap;
}

}  // namespace

double partition_function(const FiniteSubshift& sub, const PotentialSequence& p, int n, Symbol a,
                          const PartitionOptions& options) {
  if (n < 1) throw DomainError("partition function needs n >= 1");
  require_base(sub, a);
  const auto kernel = p.transfer_kernel();
  if (resolve_method(p, options.method, kernel) == PartitionMethod::transfer) {
    TransferIterator it(sub, *kernel, a);
    while (it.n() < n) it.step();
    return it.log_Z();
  }
  if (over_cap(sub, n, a, options.enumeration_cap)) {
    throw DomainError("enumeration of Z_" + std::to_string(n) + " exceeds the cap of " +
                      std::to_string(options.enumeration_cap) + " words");
  }
  return enumerate_log_Z(sub, p, n, a, options.threads);
}

PartitionSeries partition_series(const FiniteSubshift& sub, const PotentialSequence& p, int n_max,
                                 Symbol a, const PartitionOptions& options) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  require_base(sub, a);
  PartitionSeries series;
  series.base_symbol = a;
  const auto kernel = p.transfer_kernel();
  series.method = resolve_method(p, options.method, kernel);
  series.log_Z.reserve(static_cast<std::size_t>(n_max));
  if (series.method == PartitionMethod::transfer) {
    TransferIterator it(sub, *kernel, a);
    series.log_Z.push_back(it.log_Z());
    while (it.n() < n_max) {
      it.step();
      series.log_Z.push_back(it.log_Z());
    }
    return series;
  }
  for (int n = 1; n <= n_max; ++n) {
    if (over_cap(sub, n, a, options.enumeration_cap)) {
      series.capped = true;
      break;
    }
    series.log_Z.push_back(enumerate_log_Z(sub, p, n, a, options.threads));
  }
  return series;
}

double transfer_norm(const FiniteSubshift& sub, const PotentialSequence& p) {
  if (sub.size() == 0) throw DomainError("empty truncation");
  double best = kNegInf;
  for (std::size_t x0 = 0; x0 < sub.size(); ++x0) {
    LogSumExp acc;
    for (std::size_t z : sub.predecessors(x0)) acc.add(p.log_sup_f1(sub.symbol(z), sub));
    best = std::max(best, acc.value());
  }
  return best;
}

namespace {

struct WindowStats {
  double mean = 0.0;
  double span = kInf;
  bool valid = false;
};

WindowStats window_stats(const std::vector<double>& slopes, std::size_t w) {
  WindowStats out;
  if (w == 0 || slopes.size() < w) return out;
  double lo = kInf, hi = kNegInf, sum = 0.0;
  for (std::size_t k = slopes.size() - w; k < slopes.size(); ++k) {
    if (!std::isfinite(slopes[k])) return out;
    lo = std::min(lo, slopes[k]);
    hi = std::max(hi, slopes[k]);
    sum += slopes[k];
  }
  out.mean = sum / static_cast<double>(w);
  out.span = hi - lo;
  out.valid = true;
  return out;
}

// Geometric-tail guess for the remaining slope error from the last three slopes.
double tail_guess(const std::vector<double>& s) {
  const std::size_t n = s.size();
  if (n < 3) return kInf;
  const double d1 = s[n - 1] - s[n - 2];
  const double d0 = s[n - 2] - s[n - 3];
  if (d1 == 0.0) return 0.0;
  if (d0 == 0.0) return std::abs(d1);
  const double r = d1 / d0;
  if (r > 0.0 && r < 1.0) return std::abs(d1) * r / (1.0 - r);
  return std::abs(d1);
}

struct LevelResult {
  TruncationEstimate summary;
  PartitionSeries series;
  std::vector<double> slopes;
  std::vector<double> window;
};

LevelResult estimate_level(const TransitionModel& model, const PotentialSequence& p, Symbol m,
                           Symbol a, double k, const PressureParams& params) {
  FiniteSubshift sub = truncate(model, m);
  const std::size_t size = sub.size();
  const int bound = static_cast<int>(std::min<std::size_t>((size - 1) * (size - 1) + 1, 1 << 20));
  if (!check_mixing(sub, bound)) {
    throw NotMixing("truncation m=" + std::to_string(m) + " of '" + model.name() +
                    "' is not topologically mixing");
  }
  require_base(sub, a);

  LevelResult out;
  out.summary.level = m;
  out.summary.symbols = size;
  out.series = partition_series(sub, p, params.n_max, a, params.partition);
  out.summary.capped = out.series.capped;
  out.slopes = out.series.slopes();
  const auto w = static_cast<std::size_t>(params.slope_window);

  std::vector<double> slopes = out.slopes;
  int n_used = static_cast<int>(out.series.n_max());
  if (params.extend && out.series.method == PartitionMethod::transfer) {
    const auto kernel = p.transfer_kernel();
    TransferIterator it(sub, *kernel, a);
    double prev = it.log_Z();
    while (it.n() < n_used) {
      it.step();
      prev = it.log_Z();
    }
    while (it.n() < params.extension_cap) {
      const auto stats = window_stats(slopes, w);
      if (stats.valid && stats.span <= params.extension_tol &&
          tail_guess(slopes) <= params.extension_tol) {
        break;
      }
      it.step();
      const double cur = it.log_Z();
      slopes.push_back(cur != kNegInf && prev != kNegInf ? cur - prev
                                                         : std::numeric_limits<double>::quiet_NaN());
      prev = cur;
    }
    n_used = it.n();
  }

  const auto stats = window_stats(slopes, w);
  if (stats.valid) {
    out.summary.value = stats.mean;
    out.summary.slope_span = stats.span;
    out.window.assign(slopes.end() - static_cast<std::ptrdiff_t>(w), slopes.end());
  } else {
    // Too few finite slopes: fall back on log Z_n / n at the last finite n.
    out.summary.value = kNegInf;
    out.summary.slope_span = kInf;
    for (std::size_t n = out.series.n_max(); n >= 1; --n) {
      if (out.series.at(n) != kNegInf) {
        out.summary.value = out.series.at(n) / static_cast<double>(n);
        break;
      }
    }
  }
  out.summary.n_used = n_used;
  out.summary.converged = stats.valid && stats.span <= params.tol;

  for (std::size_t n = 1; n <= out.series.n_max(); ++n) {
    const double z = out.series.at(n);
    if (z != kNegInf) out.summary.lower = std::max(out.summary.lower, (z - k) / static_cast<double>(n));
  }
  out.summary.upper = *p.declared_C() + transfer_norm(sub, p);
  return out;
}

void validate(const PressureParams& params) {
  if (params.truncations.empty()) throw DomainError("no truncation levels given");
  for (std::size_t i = 1; i < params.truncations.size(); ++i) {
    if (params.truncations[i] <= params.truncations[i - 1]) {
      throw DomainError("truncation levels must be strictly increasing");
    }
  }
  if (params.n_max < 2) throw DomainError("n_max must be >= 2");
  if (params.slope_window < 1 || params.slope_window >= params.n_max) {
    throw DomainError("slope_window must lie in [1, n_max)");
  }
  if (!(params.tol > 0.0)) throw DomainError("tol must be > 0");
}

bool detect_divergence(const std::vector<TruncationEstimate>& levels, const PressureParams& params) {
  int run = 0;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double doublings = std::log2(static_cast<double>(levels[i].level) /
                                       static_cast<double>(levels[i - 1].level));
    const double growth = (levels[i].value - levels[i - 1].value) / doublings;
    run = growth >= params.divergence_growth ? run + 1 : 0;
    if (run >= params.divergence_doublings) return true;
  }
  return false;
}

}  // namespace

PressureEstimate gurevich_pressure(const TransitionModel& model, const PotentialSequence& p,
                                   const PressureParams& params) {
  validate(params);
  const auto C = p.declared_C();
  const auto M = p.declared_M();
  if (!C || !M) {
    throw DomainError("potential '" + std::string(p.kind()) +
                      "' needs declared almost-additivity constants");
  }
  const Symbol a = params.a.value_or(model.first_symbol());

  PressureEstimate est;
  est.k = *C + 2.0 * std::log(*M);
  est.n_max = params.n_max;
  LevelResult last;
  for (Symbol m : params.truncations) {
    last = estimate_level(model, p, m, a, est.k, params);
    est.per_truncation.push_back(last.summary);
  }
  for (std::size_t i = 1; i < est.per_truncation.size(); ++i) {
    if (est.per_truncation[i].value < est.per_truncation[i - 1].value - params.tol) {
      est.monotone = false;
    }
  }
  const auto& top = last.summary;
  est.truncation_level = top.level;
  est.n_used = top.n_used;
  est.slopes = std::move(last.slopes);
  est.window = std::move(last.window);
  est.slope_span = top.slope_span;
  est.converged = top.converged;
  est.series = std::move(last.series);
  est.divergent = detect_divergence(est.per_truncation, params);
  if (est.divergent) {
    est.value = kInf;
    est.upper = kInf;
    est.lower = top.lower;
    est.converged = false;
  } else {
    est.value = top.value;
    est.lower = top.lower;
    est.upper = top.upper;
  }
  return est;
}

double closed_form_fullshift_pressure(double gamma, double lambda_power_sum, double t) {
  if (!(lambda_power_sum > 0.0)) throw DomainError("power sum must be positive");
  if (std::isinf(lambda_power_sum)) return kInf;
  return t * gamma + std::log(lambda_power_sum);
}

double closed_form_fullshift_pressure(double gamma, const WeightSequence& lambda, double t) {
  return closed_form_fullshift_pressure(gamma, lambda.power_sum(t), t);
}

PressureCurve pressure_curve(const TransitionModel& model, const PotentialSequence& p,
                             const std::vector<double>& t_grid, const PressureParams& params,
                             double convexity_tol) {
  if (t_grid.empty()) throw DomainError("empty t grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("t grid must be strictly ascending");
  }
  PressureCurve curve;
  for (double t : t_grid) {
    curve.points.push_back({t, gurevich_pressure(model, p.scaled(t), params)});
  }
  // Consecutive divided differences over runs of finite points.
  std::optional<double> prev_slope;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& u = curve.points[i - 1];
    const auto& v = curve.points[i];
    if (u.estimate.divergent || v.estimate.divergent) {
      prev_slope.reset();
      continue;
    }
    const double slope = (v.estimate.value - u.estimate.value) / (v.t - u.t);
    if (prev_slope) curve.convexity_defect = std::min(curve.convexity_defect, slope - *prev_slope);
    prev_slope = slope;
  }
  curve.convex = curve.convexity_defect >= -convexity_tol;
  return curve;
}

SymbolIndependence symbol_independence_check(const TransitionModel& model,
                                             const PotentialSequence& p,
                                             const std::vector<Symbol>& symbols,
                                             const PressureParams& params) {
  if (symbols.size() < 2) throw DomainError("symbol independence needs at least two symbols");
  SymbolIndependence out;
  out.symbols = symbols;
  for (Symbol s : symbols) {
    PressureParams q = params;
    q.a = s;
    out.values.push_back(gurevich_pressure(model, p, q).value);
  }
  for (std::size_t i = 0; i < out.values.size(); ++i)
    for (std::size_t j = i + 1; j < out.values.size(); ++j)
      out.max_deviation = std::max(out.max_deviation, std::abs(out.values[i] - out.values[j]));
  out.pass = out.max_deviation < params.tol;
  return out;
}

PartitionInvariants check_partition_invariants(const FiniteSubshift& sub,
                                               const PotentialSequence& p,
                                               const PartitionSeries& series) {
  const double C = p.declared_C().value_or(kInf);
  const double logM = std::log(p.declared_M().value_or(kInf));
  PartitionInvariants out;
  out.k = C + 2.0 * logM;
  out.log_beta = kInf;
  for (Symbol s : sub.symbols()) out.log_beta = std::min(out.log_beta, p.log_inf_f1(s, sub));
  const double log_norm = transfer_norm(sub, p);
  const std::size_t N = series.n_max();
  for (std::size_t n = 1; n <= N; ++n) {
    const double z = series.at(n);
    if (z == kNegInf) continue;
    const double nn = static_cast<double>(n);
    out.floor_slack = std::min(out.floor_slack, z - (nn * out.log_beta - (nn - 1.0) * C - logM));
    out.upper_slack = std::min(out.upper_slack, (nn - 1.0) * C + nn * log_norm + logM - z);
    for (std::size_t m = 1; n + m <= N; ++m) {
      const double zm = series.at(m);
      if (zm == kNegInf) continue;
      out.superadditivity_slack = std::min(out.superadditivity_slack, series.at(n + m) + out.k - z - zm);
    }
  }
  return out;
}

}  // namespace thermoshift
