#include "thermoshift/commands.hpp"

#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>

#include "thermoshift/csv.hpp"
#include "thermoshift/error.hpp"
#include "thermoshift/matrix_cocycle.hpp"

namespace thermoshift {

namespace fs = std::filesystem;

namespace {

void kv(std::ostream& out, std::string_view key, const std::string& value) { out << key << '=' << value << '\n'; }
template <class T>
void kv(std::ostream& out, std::string_view key, const T& value) { kv(out, key, csv::format(value)); }

int cmd_pressure(const RunConfig& c, const ModelSpec& spec, std::ostream& out) {
  const auto model = spec.model();
  const auto p = spec.potential();
  const auto params = pressure_params(c.params, c.threads);
  spdlog::info("pressure: model '{}', potential '{}', {} truncation(s)", model.name(), p.kind(), params.truncations.size());
  const auto est = gurevich_pressure(model, p, params);

  csv::Writer series(c.out_dir / "series.csv", {"n", "log_Z_n", "slope"});
  const auto slopes = est.series.slopes();
  for (std::size_t n = 1; n <= est.series.n_max(); ++n) {
    series.row(n, est.series.at(n), n - 1 < slopes.size() ? slopes[n - 1] : std::numeric_limits<double>::quiet_NaN());
  }
  csv::Writer table(c.out_dir / "estimate.csv", {"truncation", "value", "lower", "upper", "flag"});
  for (const auto& t : est.per_truncation) {
    table.row(t.level, t.value, t.lower, t.upper, std::string_view(t.converged ? "converged" : "unconverged"));
  }
  table.row(std::string_view("final"), est.value, est.lower, est.upper, est.flag());

  kv(out, "value", est.value);
  kv(out, "lower", est.lower);
  kv(out, "upper", est.upper);
  kv(out, "truncation", est.truncation_level);
  kv(out, "n_used", est.n_used);
  kv(out, "slope_span", est.slope_span);
  kv(out, "monotone", est.monotone);
  kv(out, "flag", est.flag());
  if (!est.monotone) spdlog::warn("estimates decrease across truncation levels beyond tol");
  if (est.divergent) return kExitDivergent;
  return est.converged ? kExitOk : kExitUnconverged;
}

int cmd_curve(const RunConfig& c, const ModelSpec& spec, std::ostream& out) {
  if (c.params.t_grid.empty()) throw ConfigError("params.t_grid", "must not be empty");
  const auto model = spec.model();
  const auto p = spec.potential();
  const auto params = pressure_params(c.params, c.threads);
  const auto curve = pressure_curve(model, p, c.params.t_grid, params, c.params.convexity_tol);
  csv::Writer table(c.out_dir / "curve.csv", {"t", "value", "lower", "upper", "flag"});
  bool all_converged = true;
  for (const auto& pt : curve.points) {
    table.row(pt.t, pt.estimate.value, pt.estimate.lower, pt.estimate.upper, pt.estimate.flag());
    all_converged = all_converged && (pt.estimate.converged || pt.estimate.divergent);
  }
  if (!curve.convex) spdlog::warn("pressure curve violates convexity by {}", -curve.convexity_defect);
  kv(out, "points", curve.points.size());
  kv(out, "convex", curve.convex);
  kv(out, "convexity_defect", curve.convexity_defect);
  return curve.convex && all_converged ? kExitOk : kExitUnconverged;
}

int cmd_dimension(const RunConfig& c, const ModelSpec& spec, std::ostream& out) {
  const auto gc = spec.construction();
  const auto model = spec.has_shift() ? spec.model() : gc.default_model();
  if (model.name() != "full") spdlog::warn("Markov-constrained constructions are experimental");
  SolverParams solver{c.params.t_lo, c.params.t_hi, c.params.solver_tol, c.params.max_iter};
  const auto res = bowen_dimension(gc, model, solver, pressure_params(c.params, c.threads));
  csv::Writer result(c.out_dir / "dimension.csv",
                     {"dim_hat", "t_lo", "t_hi", "root_found", "pressure_at_dim", "uncertain_crossing"});
  result.row(res.dim_hat, res.t_lo, res.t_hi, res.root_found, res.pressure_at_dim, res.uncertain_crossing);
  csv::Writer trace(c.out_dir / "bisection.csv", {"iteration", "t", "value", "lower", "upper", "flag"});
  for (const auto& s : res.trace) trace.row(s.iteration, s.t, s.value, s.lower, s.upper, s.flag);
  kv(out, "dim_hat", res.dim_hat);
  kv(out, "root_found", res.root_found);
  kv(out, "pressure_at_dim", res.pressure_at_dim);
  kv(out, "uncertain_crossing", res.uncertain_crossing);
  return res.root_found ? kExitOk : kExitUnconverged;
}

int cmd_lyapunov(const RunConfig& c, const ModelSpec& spec, std::ostream& out) {
  const auto family = spec.matrices();
  const auto model = spec.has_shift() ? spec.model() : TransitionModel::full_shift(family.size());
  const auto sub = truncate(model, c.params.truncations.back());
  const auto mu = spec.measure(sub);
  if (mu.kind() != CylinderMeasure::Kind::markov) throw ConfigError("measure.kind", "lyapunov needs a markov measure");
  LyapunovOptions opts;
  opts.threads = c.threads;
  const auto est = max_lyapunov(family, mu, c.params.n, c.params.samples, c.seed, opts);
  csv::Writer table(c.out_dir / "lyapunov.csv", {"lambda_hat", "n_used", "sample_count", "standard_error", "exact"});
  table.row(est.lambda_hat, est.n_used, est.sample_count, est.standard_error, est.exact);
  kv(out, "lambda_hat", est.lambda_hat);
  kv(out, "standard_error", est.standard_error);
  kv(out, "n_used", est.n_used);
  kv(out, "sample_count", est.sample_count);
  return kExitOk;
}

int cmd_gibbs(const RunConfig& c, const ModelSpec& spec, std::ostream& out) {
  const auto model = spec.model();
  const auto p = spec.potential();
  const auto sub = truncate(model, c.params.truncations.back());
  const auto mu = spec.measure(sub);
  double P = 0.0;
  if (c.params.pressure) {
    P = *c.params.pressure;
  } else if (spec.measure_kind() == "rpf") {
    P = rpf_equilibrium(sub, *spec.pair_function()).P_exact;
  } else {
    const auto est = gurevich_pressure(model, p, pressure_params(c.params, c.threads));
    if (est.divergent) throw Error("pressure is infinite; no Gibbs certificate");
    P = est.value;
  }
  VerifyOptions opts;
  opts.bound = c.params.gibbs_bound;
  opts.collect_rows = true;
  opts.threads = c.threads;
  const int depth = std::min(c.params.depth, mu.depth());
  const auto cert = verify_gibbs(mu, p, P, depth, opts);
  csv::Writer table(c.out_dir / "gibbs.csv", {"n", "word", "mass", "log_weight", "ratio"});
  for (const auto& r : cert.rows) table.row(r.n, csv::format_word(r.word), r.mass, r.log_weight, r.ratio);
  // Summary row: verdict in the word column, ratio extremes in mass/ratio, P in log_weight.
  table.row(std::string_view("summary"), std::string_view(cert.pass ? "PASS" : "FAIL"), cert.ratio_min,
            cert.P_used, cert.ratio_max);
  kv(out, "P", cert.P_used);
  kv(out, "ratio_min", cert.ratio_min);
  kv(out, "ratio_max", cert.ratio_max);
  kv(out, "depth", cert.depth);
  kv(out, "result", std::string(cert.pass ? "PASS" : "FAIL"));
  return cert.pass ? kExitOk : kExitUnconverged;
}

int cmd_validate(const RunConfig& c, const ModelSpec& spec, std::ostream& out) {
  const auto model = spec.model();
  const auto p = spec.potential();
  const auto sub = truncate(model, c.params.truncations.back());
  const auto reg = estimate_regularity(p, sub, static_cast<std::size_t>(c.params.regularity_depth),
                                       c.params.regularity_samples, c.seed);
  const auto sum = summability_report(p, c.params.probe_bound);
  std::optional<BipReport> bip;
  if (!c.params.bip_witness.empty()) bip = check_bip(model, c.params.bip_witness, c.params.bip_up_to);

  csv::Writer table(c.out_dir / "validate.csv", {"check", "value", "status"});
  const auto declared = p.declared_C();
  table.row(std::string_view("C_hat"), reg.C_hat, std::string_view(reg.violation ? "FAIL" : "PASS"));
  table.row(std::string_view("declared_C"), declared.value_or(std::numeric_limits<double>::quiet_NaN()),
            std::string_view(declared ? "declared" : "missing"));
  table.row(std::string_view("M_hat"), reg.M_hat, std::string_view("info"));
  table.row(std::string_view("partial_sum"), sum.partial_sum, to_string(sum.verdict));
  table.row(std::string_view("tail_bound"), sum.tail_bound.value_or(std::numeric_limits<double>::quiet_NaN()),
            to_string(sum.verdict));
  if (bip) {
    table.row(std::string_view("bip_verified_up_to"),
              static_cast<double>(bip->ok() ? bip->certificate->verified_up_to : 0),
              std::string_view(bip->ok() ? "PASS" : "FAIL"));
    if (bip->first_failure) {
      table.row(std::string_view("bip_first_failure"), static_cast<double>(*bip->first_failure), std::string_view("FAIL"));
    }
  }
  kv(out, "C_hat", reg.C_hat);
  kv(out, "M_hat", reg.M_hat);
  kv(out, "summability", to_string(sum.verdict));
  if (bip) kv(out, "bip", std::string(bip->ok() ? "PASS" : "FAIL"));
  const bool ok = !reg.violation && sum.verdict != SummabilityVerdict::not_summable && (!bip || bip->ok());
  kv(out, "result", std::string(ok ? "PASS" : "FAIL"));
  return ok ? kExitOk : kExitUnconverged;
}

}  // namespace

int run_command(const RunConfig& config, const ModelSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    fs::create_directories(config.out_dir);
    {
      std::ofstream run(config.out_dir / "run.json", std::ios::binary);
      run << serialize(config);
    }
    if (config.command != "dimension" && config.command != "lyapunov" && !spec.has_potential()) {
      throw ConfigError("potential", "required");
    }
    if (config.command == "pressure") return cmd_pressure(config, spec, out);
    if (config.command == "curve") return cmd_curve(config, spec, out);
    if (config.command == "dimension") return cmd_dimension(config, spec, out);
    if (config.command == "lyapunov") return cmd_lyapunov(config, spec, out);
    if (config.command == "gibbs") return cmd_gibbs(config, spec, out);
    return cmd_validate(config, spec, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto spec = ModelSpec::load(config.model_path);
    return run_command(config, spec, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace thermoshift
