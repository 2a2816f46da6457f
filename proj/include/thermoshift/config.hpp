#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "thermoshift/dimension.hpp"
#include "thermoshift/gibbs.hpp"
#include "thermoshift/matrix_family.hpp"
#include "thermoshift/potential.hpp"
#include "thermoshift/pressure.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift {

inline constexpr const char* kModelFormat = "thermoshift-model/1";
inline constexpr const char* kRunFormat = "thermoshift-run/1";

/// Numeric knobs shared by every command; any of them can sit in the model
/// file's `params` block or be overridden on the command line.
struct Params {
  std::vector<Symbol> truncations{20};
  int n_max = 40;
  int slope_window = 4;
  double tol = 1e-6;
  std::optional<Symbol> base_symbol;
  std::string method = "automatic";
  std::uint64_t enumeration_cap = 100'000'000;
  bool extend = true;
  double extension_tol = 1e-12;
  int extension_cap = 1'000'000;
  double divergence_growth = 0.2;
  int divergence_doublings = 3;
  std::vector<double> t_grid;
  double convexity_tol = 1e-6;
  // lyapunov
  int n = 200;
  std::uint64_t samples = 200;
  // gibbs
  int depth = 6;
  double gibbs_bound = 10.0;
  std::optional<double> pressure;
  // dimension
  double t_lo = 0.0;
  double t_hi = 1.0;
  double solver_tol = 1e-10;
  int max_iter = 200;
  // validate
  int regularity_depth = 12;
  std::uint64_t regularity_samples = 2000;
  Symbol probe_bound = 50;
  std::vector<Symbol> bip_witness;
  Symbol bip_up_to = 50;

  bool operator==(const Params&) const = default;
};

struct RunConfig {
  std::string command;
  std::filesystem::path model_path;
  std::filesystem::path out_dir{"."};
  unsigned threads = 0;
  std::uint64_t seed = 1;
  std::string format = kRunFormat;
  Params params;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const Params& p);
void validate(const RunConfig& c);

void to_json(nlohmann::json& j, const Params& p);
void from_json(const nlohmann::json& j, Params& p);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

std::string serialize(const RunConfig& c);
RunConfig parse_run_config(const std::string& text);

/// Model file contents, built into library objects on demand.
class ModelSpec {
 public:
  static ModelSpec parse(const std::string& text);
  static ModelSpec load(const std::filesystem::path& path);

  const Params& params() const noexcept { return params_; }
  Params& params() noexcept { return params_; }

  TransitionModel model() const;
  bool has_potential() const;
  PotentialSequence potential() const;
  /// Set only for birkhoff potentials (needed by the rpf measure).
  std::optional<PairFunction> pair_function() const;
  MatrixFamily matrices() const;
  GeometricConstruction construction() const;
  bool has_construction() const;
  bool has_shift() const;
  /// Measure on `sub` from the `measure` block.
  CylinderMeasure measure(const FiniteSubshift& sub) const;
  std::string measure_kind() const;

 private:
  std::shared_ptr<const nlohmann::json> doc_;
  Params params_;
};

PressureParams pressure_params(const Params& p, unsigned threads);

}  // namespace thermoshift
