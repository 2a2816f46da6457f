#include "thermoshift/matrix_cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "thermoshift/error.hpp"
#include "thermoshift/parallel.hpp"

namespace thermoshift {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t draw(std::mt19937_64& rng, const Eigen::VectorXd& weights) {
  const double u = uniform01(rng) * weights.sum();
  double acc = 0.0;
  Eigen::Index last = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    acc += weights(i);
    last = i;
    if (u < acc) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(last);
}

}  // namespace

LyapunovEstimate max_lyapunov(const MatrixFamily& family, const CylinderMeasure& mu, int n,
                              std::size_t samples, std::uint64_t seed,
                              const LyapunovOptions& options) {
  if (n < 1) throw DomainError("lyapunov estimate needs n >= 1");
  if (samples < 1) throw DomainError("lyapunov estimate needs at least one sample");
  const auto& sub = mu.subshift();
  const auto& pi = mu.stationary();
  const auto& p = mu.transition();
  std::vector<const Matrix*> mats;
  for (Symbol s : sub.symbols()) mats.push_back(&family.at(s));

  LyapunovEstimate est;
  est.n_used = n;
  if (family.dim() == 1 && !options.force_sampling) {
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const double w = pi(static_cast<Eigen::Index>(i));
      if (w > 0.0) est.lambda_hat += w * std::log((*mats[i])(0, 0));
    }
    est.sample_count = 0;
    est.exact = true;
    return est;
  }

  const auto values = parallel_map<double>(samples, options.threads, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    std::size_t state = draw(rng, pi);
    Eigen::VectorXd v = *mats[state] * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(family.dim()));
    double log_norm = 0.0;
    for (int step = 1; step < n; ++step) {
      const double s = v.sum();
      v /= s;
      log_norm += std::log(s);
      Eigen::VectorXd row = p.row(static_cast<Eigen::Index>(state)).transpose();
      state = draw(rng, row);
      v = *mats[state] * v;
    }
    // ||A_w|| = U^t A_w U, and v = A_w U up to the accumulated scale.
    return (log_norm + std::log(v.sum())) / n;
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(samples);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  est.lambda_hat = mean;
  est.sample_count = samples;
  est.standard_error =
      samples > 1 ? std::sqrt(var / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
  return est;
}

CocyclePressure cocycle_pressure(const MatrixFamily& family, const TransitionModel& model,
                                 const std::vector<double>& t_grid, const PressureParams& params) {
  if (params.truncations.empty()) throw DomainError("no truncation levels given");
  const Symbol probe = std::min(params.truncations.back(), family.size());
  CocyclePressure out;
  out.cone = check_cone_condition(family, probe);
  if (!out.cone.holds) {
    throw DomainError("cone condition fails on symbols 1.." + std::to_string(probe) +
                      " (best C " + std::to_string(out.cone.best_C) + ", worst symbol " +
                      std::to_string(out.cone.worst_symbol) + ")");
  }
  const auto potential = cocycle_potential(family, model);
  out.summability = summability_report(potential, probe);
  if (out.summability.verdict != SummabilityVerdict::summable) {
    out.warnings.push_back("sum of norms is " + std::string(to_string(out.summability.verdict)) +
                           "; Gibbs existence is not guaranteed");
  }
  out.curve = pressure_curve(model, potential, t_grid, params);

  bool contracting = true;
  for (Symbol i = 1; i <= probe; ++i) contracting = contracting && entry_sum_norm(family.at(i)) < 1.0;
  if (contracting) {
    bool decreasing = true;
    for (std::size_t lvl = 0; lvl < params.truncations.size(); ++lvl) {
      std::optional<double> prev;
      for (const auto& pt : out.curve.points) {
        if (pt.estimate.divergent) {
          prev.reset();
          continue;
        }
        const double v = pt.estimate.per_truncation[lvl].value;
        if (prev && !(v < *prev + params.tol)) decreasing = false;
        prev = v;
      }
    }
    out.decreasing = decreasing;
    if (!decreasing) out.warnings.push_back("pressure curve is not decreasing in t on some truncation");
  }
  return out;
}

}  // namespace thermoshift
