#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "support/generators.hpp"
#include "thermoshift/commands.hpp"
#include "thermoshift/config.hpp"
#include "thermoshift/csv.hpp"
#include "thermoshift/error.hpp"

using namespace thermoshift;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures{THERMOSHIFT_FIXTURE_DIR};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("thermoshift_unit_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

RunConfig random_config(gen::Rng& rng) {
  static const char* commands[] = {"pressure", "curve", "dimension", "lyapunov", "gibbs", "validate"};
  static const char* methods[] = {"automatic", "enumerate", "transfer"};
  RunConfig c;
  c.command = commands[rng.integer(0, 5)];
  c.model_path = "models/m" + std::to_string(rng.integer(0, 999)) + ".json";
  c.out_dir = "out/" + std::to_string(rng.integer(0, 999));
  c.threads = static_cast<unsigned>(rng.integer(0, 8));
  c.seed = static_cast<std::uint64_t>(rng.engine()());
  Params& p = c.params;
  p.truncations.clear();
  Symbol level = 0;
  for (int k = rng.integer(1, 4); k > 0; --k) p.truncations.push_back(level += rng.integer(1, 50));
  p.n_max = static_cast<int>(rng.integer(5, 80));
  p.slope_window = static_cast<int>(rng.integer(1, p.n_max - 1));
  p.tol = std::pow(10.0, -rng.real(1, 12));
  if (rng.coin(0.5)) p.base_symbol = rng.integer(1, 5);
  p.method = methods[rng.integer(0, 2)];
  p.enumeration_cap = static_cast<std::uint64_t>(rng.integer(1, 1'000'000'000));
  p.extend = rng.coin(0.5);
  p.extension_tol = rng.real(1e-15, 1e-6);
  p.divergence_growth = rng.real(0.01, 1.0);
  p.divergence_doublings = static_cast<int>(rng.integer(1, 5));
  double t = rng.real(-1, 0);
  for (int k = rng.integer(0, 6); k > 0; --k) p.t_grid.push_back(t += rng.real(0.01, 1.0));
  p.n = static_cast<int>(rng.integer(1, 1000));
  p.samples = static_cast<std::uint64_t>(rng.integer(1, 1000));
  p.depth = static_cast<int>(rng.integer(1, 12));
  p.gibbs_bound = rng.real(1.0, 100.0);
  if (rng.coin(0.5)) p.pressure = rng.real(-3, 3);
  p.t_lo = rng.real(-1, 1);
  p.t_hi = p.t_lo + rng.real(0.1, 5);
  p.solver_tol = rng.real(1e-14, 1e-4);
  p.max_iter = static_cast<int>(rng.integer(1, 400));
  p.regularity_depth = static_cast<int>(rng.integer(2, 20));
  p.probe_bound = rng.integer(1, 100);
  for (int k = rng.integer(0, 3); k > 0; --k) p.bip_witness.push_back(rng.integer(1, 9));
  p.bip_up_to = rng.integer(1, 100);
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("csv doubles round-trip through their shortest form") {
  gen::Rng rng(5);
  for (int k = 0; k < 5000; ++k) {
    const double v = std::ldexp(rng.real(-1, 1), static_cast<int>(rng.integer(-300, 300)));
    const std::string s = csv::format(v);
    CHECK(std::stod(s) == v);
    CHECK(s.find(' ') == std::string::npos);
  }
  CHECK(csv::format(0.1) == "0.1");
  CHECK(csv::format(1.0) == "1");
  CHECK(csv::format(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(csv::format(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(csv::format(std::nan("")) == "nan");
  CHECK(csv::format(true) == "true");
  CHECK(csv::format_word(Word{1, 12, 3}) == "1-12-3");
  CHECK(csv::format_word(Word{}).empty());
}

TEST_CASE("csv writer checks row width") {
  const auto dir = scratch("writer");
  {
    csv::Writer w(dir / "t.csv", {"a", "b"});
    w.row(1, 0.5);
    CHECK_THROWS_AS(w.row(1), Error);
  }
  CHECK(slurp(dir / "t.csv") == "a,b\n1,0.5\n");
}

TEST_CASE("run configurations round-trip") {
  gen::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const RunConfig c = random_config(rng);
    const std::string text = serialize(c);
    const RunConfig back = parse_run_config(text);
    CAPTURE(text);
    CHECK(back == c);
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("run configuration errors name their field") {
  RunConfig c;
  c.command = "pressure";
  c.model_path = "m.json";
  const std::string good = serialize(c);
  CHECK(parse_run_config(good) == c);

  auto with = [&](const std::function<void(nlohmann::json&)>& edit) {
    auto j = nlohmann::json::parse(good);
    edit(j);
    return j.dump();
  };
  CHECK(field_of([&] { parse_run_config("{not json"); }) == "run");
  CHECK(field_of([&] { parse_run_config(with([](auto& j) { j["command"] = "explode"; })); }) == "command");
  CHECK(field_of([&] { parse_run_config(with([](auto& j) { j["format"] = "other/2"; })); }) == "format");
  CHECK(field_of([&] { parse_run_config(with([](auto& j) { j["params"]["n_max"] = 1; })); }) == "params.n_max");
  CHECK(field_of([&] { parse_run_config(with([](auto& j) { j["params"]["truncations"] = {5, 3}; })); }) ==
        "params.truncations");
  CHECK(field_of([&] { parse_run_config(with([](auto& j) { j["params"]["method"] = "guess"; })); }) ==
        "params.method");
  CHECK(field_of([&] { parse_run_config(with([](auto& j) { j["params"]["t_grid"] = {1.0, 0.5}; })); }) ==
        "params.t_grid");
  CHECK(field_of([&] { parse_run_config(with([](auto& j) { j["params"]["t_hi"] = -1.0; })); }) == "params.t_hi");
  Params p;
  p.slope_window = p.n_max;
  CHECK(field_of([&] { validate(p); }) == "params.slope_window");
}

TEST_CASE("every shipped fixture parses or fails with a field") {
  const std::map<std::string, std::string> expected_errors{
      {"unknown_key.json", "params.n_maximum"},
  };
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(kFixtures)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const std::string name = entry.path().filename().string();
    CAPTURE(name);
    const auto it = expected_errors.find(name);
    if (it != expected_errors.end()) {
      CHECK(field_of([&] { ModelSpec::load(entry.path()); }) == it->second);
      continue;
    }
    const ModelSpec spec = ModelSpec::load(entry.path());
    CHECK_NOTHROW(validate(spec.params()));
    if (spec.has_construction()) CHECK_NOTHROW(spec.construction());
    if (spec.has_potential()) CHECK_NOTHROW(spec.potential());
    if (!spec.has_construction() && !spec.has_potential()) {
      CHECK(field_of([&] { spec.potential(); }) == "potential");
    }
  }
  CHECK(seen >= 20);
}

TEST_CASE("model documents: parse errors and builders") {
  CHECK(field_of([] { ModelSpec::parse("[1,2"); }) == "model");
  CHECK(field_of([] { ModelSpec::parse(R"({"format": "x"})"); }) == "format");
  CHECK(field_of([] { ModelSpec::load("/nonexistent/model.json"); }) == "model");

  const auto spec = ModelSpec::parse(R"({
    "format": "thermoshift-model/1",
    "shift": {"rule": "golden_mean"},
    "potential": {"kind": "birkhoff", "default": 0.0, "pairs": [[1, 2, 0.5]]},
    "measure": {"kind": "uniform"},
    "params": {"truncations": [2, 4], "n_max": 12}
  })");
  CHECK(spec.params().truncations == std::vector<Symbol>{2, 4});
  CHECK(spec.params().n_max == 12);
  CHECK(spec.has_shift());
  CHECK(spec.model().name() == "golden_mean");
  REQUIRE(spec.pair_function());
  CHECK((*spec.pair_function())(1, 2) == 0.5);
  CHECK((*spec.pair_function())(2, 1) == 0.0);
  CHECK(spec.measure_kind() == "uniform");

  const auto both = ModelSpec::parse(R"({
    "format": "thermoshift-model/1",
    "shift": {"rule": "golden_mean", "arcs": [[1, 1]]},
    "potential": {"kind": "birkhoff", "default": 0.0}
  })");
  CHECK(field_of([&] { both.model(); }) == "shift");

  const auto rho = ModelSpec::parse(R"({
    "format": "thermoshift-model/1",
    "construction": {"kind": "product", "rho": {"power": {"exponent": 3, "coefficient": 0.5}}}
  })");
  const auto gc = rho.construction();
  CHECK(gc.rho().value(1) == Approx(0.5));
  CHECK(gc.rho().value(2) == Approx(0.5 / 8));

  const auto bad_power = ModelSpec::parse(R"({
    "format": "thermoshift-model/1",
    "construction": {"kind": "product", "rho": {"power": {"exponent": 3, "scale": 0.5}}}
  })");
  CHECK(field_of([&] { bad_power.construction(); }) == "construction.rho.power.scale");

  const auto bad_matrix = ModelSpec::parse(R"({
    "format": "thermoshift-model/1",
    "potential": {"kind": "cocycle"},
    "matrices": {"d": 0, "list": [[[1]]]}
  })");
  CHECK(field_of([&] { bad_matrix.matrices(); }) == "matrices.d");
}

TEST_CASE("commands: exit codes, summaries and artifacts") {
  struct Case {
    const char* fixture;
    const char* command;
    int code;
    const char* artifact;
  };
  const Case cases[] = {
      {"golden_zero", "pressure", kExitOk, "estimate.csv"},
      {"golden_unconverged", "pressure", kExitUnconverged, "estimate.csv"},
      {"fiber_count", "pressure", kExitDivergent, "estimate.csv"},
      {"missing_potential", "pressure", kExitConfig, "run.json"},
      {"non_mixing", "pressure", kExitComputation, "run.json"},
      {"example1_curve", "curve", kExitOk, "curve.csv"},
      {"empty_grid", "curve", kExitConfig, "run.json"},
      {"cantor", "dimension", kExitOk, "dimension.csv"},
      {"cantor_few_steps", "dimension", kExitUnconverged, "bisection.csv"},
      {"cantor_bad_bracket", "dimension", kExitComputation, "run.json"},
      {"lyapunov_scalar", "lyapunov", kExitOk, "lyapunov.csv"},
      {"gibbs_bernoulli", "gibbs", kExitOk, "gibbs.csv"},
      {"gibbs_skewed", "gibbs", kExitUnconverged, "gibbs.csv"},
      {"validate_birkhoff", "validate", kExitOk, "validate.csv"},
      {"validate_bip_fail", "validate", kExitUnconverged, "validate.csv"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.fixture);
    RunConfig config;
    config.command = c.command;
    config.model_path = kFixtures / (std::string(c.fixture) + ".json");
    config.out_dir = scratch(std::string(c.fixture) + "_" + c.command);
    config.threads = 1;
    config.params = ModelSpec::load(config.model_path).params();
    std::ostringstream out, err;
    CHECK(run_command(config, out, err) == c.code);
    CHECK(fs::exists(config.out_dir / c.artifact));
    CHECK(parse_run_config(slurp(config.out_dir / "run.json")) == config);
    if (c.code == kExitConfig || c.code == kExitComputation) {
      CHECK(err.str().rfind("error: ", 0) == 0);
    } else {
      CHECK(err.str().empty());
      CHECK_FALSE(out.str().empty());
    }
  }
}

TEST_CASE("non-mixing error names the truncation") {
  RunConfig config;
  config.command = "pressure";
  config.model_path = kFixtures / "non_mixing.json";
  config.out_dir = scratch("non_mixing_msg");
  config.params = ModelSpec::load(config.model_path).params();
  std::ostringstream out, err;
  CHECK(run_command(config, out, err) == kExitComputation);
  CHECK(err.str().find("m=2") != std::string::npos);
}

TEST_CASE("unreadable model is a configuration error") {
  RunConfig config;
  config.command = "pressure";
  config.model_path = "/nonexistent/model.json";
  config.out_dir = scratch("missing_model");
  std::ostringstream out, err;
  CHECK(run_command(config, out, err) == kExitConfig);
}

TEST_CASE("pressure summary reports the known value") {
  RunConfig config;
  config.command = "pressure";
  config.model_path = kFixtures / "golden_zero.json";
  config.out_dir = scratch("golden_value");
  config.params = ModelSpec::load(config.model_path).params();
  std::ostringstream out, err;
  REQUIRE(run_command(config, out, err) == kExitOk);
  const std::string s = out.str();
  const auto at = s.find("value=");
  REQUIRE(at != std::string::npos);
  CHECK(std::stod(s.substr(at + 6)) == Approx(std::log((1 + std::sqrt(5.0)) / 2)).epsilon(1e-6));
  CHECK(s.find("flag=converged") != std::string::npos);
}

TEST_CASE("outputs do not depend on the thread count") {
  for (const char* fixture : {"golden_enumerate", "cocycle_pair"}) {
    CAPTURE(fixture);
    std::string first;
    for (unsigned threads : {1u, 3u}) {
      RunConfig config;
      config.command = std::string(fixture) == "cocycle_pair" ? "lyapunov" : "pressure";
      config.model_path = kFixtures / (std::string(fixture) + ".json");
      config.out_dir = scratch(std::string(fixture) + std::to_string(threads));
      config.threads = threads;
      config.params = ModelSpec::load(config.model_path).params();
      std::ostringstream out, err;
      REQUIRE(run_command(config, out, err) == kExitOk);
      const std::string csv = slurp(config.out_dir / (config.command == "lyapunov" ? "lyapunov.csv" : "series.csv"));
      if (first.empty()) first = csv;
      else CHECK(csv == first);
    }
  }
}

}  // TEST_SUITE
