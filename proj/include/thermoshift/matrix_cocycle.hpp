#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermoshift/gibbs.hpp"
#include "thermoshift/matrix_family.hpp"
#include "thermoshift/potential.hpp"
#include "thermoshift/pressure.hpp"

namespace thermoshift {

struct LyapunovEstimate {
  double lambda_hat = 0.0;
  int n_used = 0;
  std::size_t sample_count = 0;
  double standard_error = 0.0;
  /// True when the value came from the closed form for scalar families.
  bool exact = false;
};

struct LyapunovOptions {
  /// Scalar (d = 1) families are additive, so the mean is computed exactly
  /// unless sampling is forced.
  bool force_sampling = false;
  unsigned threads = 0;
};

/// Mean of (1/n) log ||A_{w_{n-1}} ... A_{w_0}|| over ancestral samples of the
/// Markov measure mu. Sample i uses a stream seeded from (seed, i), so the
/// result does not depend on the thread count.
LyapunovEstimate max_lyapunov(const MatrixFamily& family, const CylinderMeasure& mu, int n,
                              std::size_t samples, std::uint64_t seed,
                              const LyapunovOptions& options = {});

struct CocyclePressure {
  PressureCurve curve;
  ConeReport cone;
  SummabilityReport summability;
  /// Set when every probed ||A_i|| < 1; then whether each truncation's
  /// estimates decrease along the finite part of the t grid.
  std::optional<bool> decreasing;
  std::vector<std::string> warnings;
};

/// P(t log ||A_w||) over the grid. Throws DomainError when the cone condition
/// fails on the probed symbols.
CocyclePressure cocycle_pressure(const MatrixFamily& family, const TransitionModel& model,
                                 const std::vector<double>& t_grid, const PressureParams& params);

/// Per-sample stream seed: splitmix64 of the master seed offset by the index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace thermoshift
