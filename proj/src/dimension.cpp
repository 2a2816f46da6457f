#include "thermoshift/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermoshift/error.hpp"
#include "thermoshift/gibbs.hpp"
#include "thermoshift/numeric.hpp"

namespace thermoshift {

GeometricConstruction::GeometricConstruction(Kind kind, std::optional<WeightSequence> rho,
                                             std::function<double(WordView)> log_ratio,
                                             std::optional<Symbol> alphabet, double c)
    : kind_(kind), rho_(std::move(rho)), log_ratio_(std::move(log_ratio)), alphabet_(alphabet), declared_C_(c) {}

GeometricConstruction GeometricConstruction::product(WeightSequence rho) {
  const auto size = rho.size();
  const Symbol check = size ? *size : 1;
  for (Symbol j = 1; j <= check; ++j) {
    const double r = rho.value(j);
    if (!(r > 0.0 && r < 1.0)) throw DomainError("rho_" + std::to_string(j) + " must lie in (0,1)");
  }
  if (!size && !(rho.value(1) < 1.0)) throw DomainError("rho must lie in (0,1)");
  auto alphabet = rho.size();
  return GeometricConstruction(Kind::product, std::move(rho), {}, alphabet, 0.0);
}

GeometricConstruction GeometricConstruction::general(std::function<double(WordView)> log_ratio,
                                                     std::optional<Symbol> alphabet, double declared_C) {
  if (!log_ratio) throw DomainError("general construction needs a ratio function");
  if (!(declared_C >= 0.0)) throw DomainError("declared C must be >= 0");
  return GeometricConstruction(Kind::general, std::nullopt, std::move(log_ratio), alphabet, declared_C);
}

std::optional<Symbol> GeometricConstruction::alphabet() const { return alphabet_; }

const WeightSequence& GeometricConstruction::rho() const {
  if (!rho_) throw DomainError("per-symbol ratios exist only for product constructions");
  return *rho_;
}

double GeometricConstruction::log_ratio(WordView w) const {
  if (w.empty()) throw DomainError("ratio of the empty word");
  double v = 0.0;
  if (rho_) {
    for (Symbol s : w) {
      const double r = rho_->value(s);
      if (!(r > 0.0 && r < 1.0)) throw DomainError("rho_" + std::to_string(s) + " must lie in (0,1)");
      v += std::log(r);
    }
  } else {
    v = log_ratio_(w);
  }
  if (!(v < 0.0) || std::isnan(v)) throw DomainError("ratio outside (0,1) on a word");
  return v;
}

double GeometricConstruction::ratio(WordView w) const { return std::exp(log_ratio(w)); }

TransitionModel GeometricConstruction::default_model() const { return TransitionModel::full_shift(alphabet_); }

PotentialSequence GeometricConstruction::potential(const TransitionModel& model) const {
  if (rho_) {
    if (model.name() == "full") return weighted_fullshift_potential(LogCoefficients::linear(0.0), *rho_);
    const WeightSequence rho = *rho_;
    return birkhoff_potential([rho](Symbol i, Symbol) { return std::log(rho.value(i)); }, model);
  }
  const auto fn = log_ratio_;
  return callback_potential("construction", model, [fn](WordView w) { return fn(w); }, declared_C_);
}

namespace {

struct Sample {
  double t;
  PressureEstimate est;
  // Sign classification: +inf or positive counts as "above".
  bool above() const { return est.divergent || est.value > 0.0; }
};

BisectionStep step_of(int it, const Sample& s) {
  return {it, s.t, s.est.value, s.est.lower, s.est.upper, s.est.flag()};
}

bool sign_uncertain(const Sample& s) {
  if (s.est.divergent) return false;
  return s.est.value - s.est.slope_span <= 0.0 && s.est.value + s.est.slope_span >= 0.0 &&
         s.est.slope_span > 0.0;
}

}  // namespace

DimensionResult bowen_dimension(const GeometricConstruction& gc, const TransitionModel& model,
                                const SolverParams& solver, const PressureParams& params) {
  if (!(solver.t_hi > solver.t_lo)) throw DomainError("t bracket must satisfy t_lo < t_hi");
  if (!(solver.tol > 0.0)) throw DomainError("solver tol must be > 0");
  const PotentialSequence phi = gc.potential(model);
  auto eval = [&](double t) { return Sample{t, gurevich_pressure(model, phi.scaled(t), params)}; };

  DimensionResult res;
  res.t_lo = solver.t_lo;
  res.t_hi = solver.t_hi;
  int it = 0;
  Sample lo = eval(solver.t_lo);
  res.trace.push_back(step_of(it, lo));
  if (!lo.est.divergent && std::abs(lo.est.value) <= solver.tol) {
    res.dim_hat = lo.t;
    res.root_found = true;
    res.pressure_at_dim = lo.est.value;
    return res;
  }
  Sample hi = eval(solver.t_hi);
  res.trace.push_back(step_of(it, hi));
  if (!lo.above() || hi.above()) {
    auto show = [](const Sample& s) {
      return s.est.divergent ? std::string("+inf") : std::to_string(s.est.value);
    };
    throw DomainError("bracket [" + std::to_string(lo.t) + ", " + std::to_string(hi.t) +
                      "] does not straddle P = 0: P(t_lo) = " + show(lo) + ", P(t_hi) = " + show(hi));
  }
  std::optional<Sample> hit;
  while (it < solver.max_iter && hi.t - lo.t > solver.tol) {
    ++it;
    Sample mid = eval(0.5 * (lo.t + hi.t));
    res.trace.push_back(step_of(it, mid));
    if (!mid.est.divergent && std::abs(mid.est.value) <= solver.tol) {
      hit = mid;
      break;
    }
    (mid.above() ? lo : hi) = std::move(mid);
  }
  res.t_lo = lo.t;
  res.t_hi = hi.t;
  res.uncertain_crossing = sign_uncertain(lo) || sign_uncertain(hi);
  if (hit) {
    res.dim_hat = hit->t;
    res.pressure_at_dim = hit->est.value;
    res.root_found = true;
    return res;
  }
  // The infimum is the right end; a true root needs P continuous across the bracket.
  res.dim_hat = hi.t;
  res.pressure_at_dim = hi.est.value;
  res.root_found = !lo.est.divergent && lo.est.value - hi.est.value <= std::sqrt(solver.tol);
  return res;
}

LedrappierYoung ledrappier_young_check(const GeometricConstruction& gc, const TransitionModel& model,
                                       const DimensionResult& result, Symbol truncation) {
  if (gc.kind() != GeometricConstruction::Kind::product) {
    throw DomainError("Ledrappier-Young check needs a product construction");
  }
  if (!result.root_found) throw DomainError("Ledrappier-Young check needs a root of the pressure");
  const FiniteSubshift sub = truncate(model, truncation);
  const WeightSequence rho = gc.rho();
  const double t = result.dim_hat;
  const auto eq = rpf_equilibrium(sub, [&rho, t](Symbol i, Symbol) { return t * std::log(rho.value(i)); });
  const WeightSequence& w = rho;
  const auto phi = birkhoff_potential([w](Symbol i, Symbol) { return std::log(w.value(i)); }, model);
  LedrappierYoung out;
  out.entropy = entropy_markov(eq.measure);
  out.lyapunov = lyapunov_functional(eq.measure, phi, 1);
  if (!(out.lyapunov < 0.0)) throw DomainError("Lyapunov exponent of the ratios must be negative");
  out.lhs = t;
  out.rhs = -out.entropy / out.lyapunov;
  out.deviation = std::abs(out.lhs - out.rhs);
  return out;
}

double log_natural_cover_sum(const GeometricConstruction& gc, const FiniteSubshift& sub, double t,
                             int n) {
  if (n < 1) throw DomainError("cover level must be >= 1");
  const std::size_t m = sub.size();
  if (gc.kind() == GeometricConstruction::Kind::product) {
    std::vector<double> logs(m);
    for (std::size_t i = 0; i < m; ++i) logs[i] = t * std::log(gc.rho().value(sub.symbol(i)));
    std::vector<double> cur = logs;
    for (int k = 1; k < n; ++k) {
      std::vector<double> next(m);
      for (std::size_t c = 0; c < m; ++c) {
        LogSumExp acc;
        for (std::size_t b : sub.predecessors(c)) acc.add(cur[b]);
        next[c] = acc.value() + logs[c];
      }
      cur = std::move(next);
    }
    return log_sum_exp(cur);
  }
  LogSumExp acc;
  visit_words(sub, n, [&](WordView w) { acc.add(t * gc.log_ratio(w)); });
  return acc.value();
}

}  // namespace thermoshift
