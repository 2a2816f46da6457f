#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "thermoshift/commands.hpp"
#include "thermoshift/error.hpp"

using namespace thermoshift;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("thermoshift");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("THERMOSHIFT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept the real spelling.
    if (level != spdlog::level::off || std::string_view(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring THERMOSHIFT_LOG='{}'", env);
    }
  }
}

struct Overrides {
  std::optional<std::vector<Symbol>> truncations;
  std::optional<int> n_max, slope_window, n, depth, max_iter;
  std::optional<double> tol, t_lo, t_hi, solver_tol, pressure;
  std::optional<std::vector<double>> t_grid;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> method;

  void apply(Params& p) const {
    if (truncations) p.truncations = *truncations;
    if (n_max) p.n_max = *n_max;
    if (slope_window) p.slope_window = *slope_window;
    if (n) p.n = *n;
    if (depth) p.depth = *depth;
    if (max_iter) p.max_iter = *max_iter;
    if (tol) p.tol = *tol;
    if (t_lo) p.t_lo = *t_lo;
    if (t_hi) p.t_hi = *t_hi;
    if (solver_tol) p.solver_tol = *solver_tol;
    if (pressure) p.pressure = *pressure;
    if (t_grid) p.t_grid = *t_grid;
    if (samples) p.samples = *samples;
    if (method) p.method = *method;
  }
};

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Thermodynamic formalism toolkit for countable Markov shifts"};
  app.require_subcommand(1);

  std::string model_path, out_dir = ".", run_file;
  unsigned threads = 0;
  std::uint64_t seed = 1;
  Overrides ov;

  for (const char* name : {"pressure", "curve", "dimension", "lyapunov", "gibbs", "validate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--model", model_path, "model file (JSON)");
    sub->add_option("--run", run_file, "run configuration (JSON) to replay");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = available parallelism)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--truncations", ov.truncations, "truncation levels");
    sub->add_option("--n-max", ov.n_max);
    sub->add_option("--slope-window", ov.slope_window);
    sub->add_option("--tol", ov.tol);
    sub->add_option("--method", ov.method, "automatic | enumerate | transfer");
    sub->add_option("--t-grid", ov.t_grid);
    sub->add_option("--n", ov.n, "product length (lyapunov)");
    sub->add_option("--samples", ov.samples, "sample paths (lyapunov)");
    sub->add_option("--depth", ov.depth, "certificate depth (gibbs)");
    sub->add_option("--pressure", ov.pressure, "pressure used by the certificate (gibbs)");
    sub->add_option("--t-lo", ov.t_lo);
    sub->add_option("--t-hi", ov.t_hi);
    sub->add_option("--solver-tol", ov.solver_tol);
    sub->add_option("--max-iter", ov.max_iter);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    if (!run_file.empty()) {
      std::ifstream in(run_file, std::ios::binary);
      if (!in) throw ConfigError("run", "cannot read " + run_file);
      std::stringstream buf;
      buf << in.rdbuf();
      config = parse_run_config(buf.str());
      if (config.command != command) throw ConfigError("command", "run file is for '" + config.command + "'");
    } else {
      if (model_path.empty()) throw ConfigError("model", "required");
      config.command = command;
      config.model_path = model_path;
      config.params = ModelSpec::load(model_path).params();
    }
    if (app.get_subcommands().front()->count("--out")) config.out_dir = out_dir;
    else if (run_file.empty()) config.out_dir = out_dir;
    if (app.get_subcommands().front()->count("--threads")) config.threads = threads;
    if (app.get_subcommands().front()->count("--seed")) config.seed = seed;
    ov.apply(config.params);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return run_command(config, std::cout, std::cerr);
}
