#include "thermoshift/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "thermoshift/error.hpp"

namespace thermoshift {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key), "unknown key");
  }
}

template <class T>
T as(const json& v, const std::string& field) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError(field, "expected a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(field, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

template <class T>
std::vector<T> as_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected a list");
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as<T>(v[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

template <class T>
void read(const json& obj, const char* key, const std::string& path, T& into) {
  if (!obj.contains(key)) return;
  into = as<T>(obj.at(key), join(path, key));
}

template <class T>
void read(const json& obj, const char* key, const std::string& path, std::vector<T>& into) {
  if (!obj.contains(key)) return;
  into = as_list<T>(obj.at(key), join(path, key));
}

template <class T>
void read(const json& obj, const char* key, const std::string& path, std::optional<T>& into) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    into.reset();
    return;
  }
  into = as<T>(obj.at(key), join(path, key));
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(join(path, key), "required");
  return obj.at(key);
}

void positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("params.") + field, "must be > 0");
}

}  // namespace

void validate(const Params& p) {
  if (p.truncations.empty()) throw ConfigError("params.truncations", "must not be empty");
  for (std::size_t k = 0; k < p.truncations.size(); ++k) {
    if (p.truncations[k] < 1) throw ConfigError("params.truncations", "levels must be >= 1");
    if (k > 0 && p.truncations[k] <= p.truncations[k - 1]) {
      throw ConfigError("params.truncations", "must be strictly increasing");
    }
  }
  if (p.n_max < 2) throw ConfigError("params.n_max", "must be >= 2");
  if (p.slope_window < 1 || p.slope_window >= p.n_max) {
    throw ConfigError("params.slope_window", "must lie in [1, n_max)");
  }
  positive(p.tol, "tol");
  positive(p.extension_tol, "extension_tol");
  positive(p.convexity_tol, "convexity_tol");
  positive(p.solver_tol, "solver_tol");
  positive(p.gibbs_bound, "gibbs_bound");
  if (p.method != "automatic" && p.method != "enumerate" && p.method != "transfer") {
    throw ConfigError("params.method", "must be automatic, enumerate or transfer");
  }
  if (p.divergence_doublings < 1) throw ConfigError("params.divergence_doublings", "must be >= 1");
  for (std::size_t k = 1; k < p.t_grid.size(); ++k) {
    if (!(p.t_grid[k] > p.t_grid[k - 1])) throw ConfigError("params.t_grid", "must be strictly ascending");
  }
  if (p.n < 1) throw ConfigError("params.n", "must be >= 1");
  if (p.samples < 1) throw ConfigError("params.samples", "must be >= 1");
  if (p.depth < 1) throw ConfigError("params.depth", "must be >= 1");
  if (!(p.t_hi > p.t_lo)) throw ConfigError("params.t_hi", "must exceed t_lo");
  if (p.max_iter < 1) throw ConfigError("params.max_iter", "must be >= 1");
  if (p.regularity_depth < 2) throw ConfigError("params.regularity_depth", "must be >= 2");
  if (p.probe_bound < 1) throw ConfigError("params.probe_bound", "must be >= 1");
  if (p.bip_up_to < 1) throw ConfigError("params.bip_up_to", "must be >= 1");
}

void validate(const RunConfig& c) {
  static const char* commands[] = {"pressure", "curve", "dimension", "lyapunov", "gibbs", "validate"};
  bool known = false;
  for (auto* k : commands) known = known || c.command == k;
  if (!known) throw ConfigError("command", "unknown command '" + c.command + "'");
  if (c.format != kRunFormat) throw ConfigError("format", "expected " + std::string(kRunFormat));
  if (c.model_path.empty()) throw ConfigError("model", "required");
  validate(c.params);
}

void to_json(json& j, const Params& p) {
  j = json{{"truncations", p.truncations},
           {"n_max", p.n_max},
           {"slope_window", p.slope_window},
           {"tol", p.tol},
           {"method", p.method},
           {"enumeration_cap", p.enumeration_cap},
           {"extend", p.extend},
           {"extension_tol", p.extension_tol},
           {"extension_cap", p.extension_cap},
           {"divergence_growth", p.divergence_growth},
           {"divergence_doublings", p.divergence_doublings},
           {"t_grid", p.t_grid},
           {"convexity_tol", p.convexity_tol},
           {"n", p.n},
           {"samples", p.samples},
           {"depth", p.depth},
           {"gibbs_bound", p.gibbs_bound},
           {"t_lo", p.t_lo},
           {"t_hi", p.t_hi},
           {"solver_tol", p.solver_tol},
           {"max_iter", p.max_iter},
           {"regularity_depth", p.regularity_depth},
           {"regularity_samples", p.regularity_samples},
           {"probe_bound", p.probe_bound},
           {"bip_witness", p.bip_witness},
           {"bip_up_to", p.bip_up_to}};
  j["base_symbol"] = p.base_symbol ? json(*p.base_symbol) : json(nullptr);
  j["pressure"] = p.pressure ? json(*p.pressure) : json(nullptr);
}

void from_json(const json& j, Params& p) {
  const std::string path = "params";
  check_keys(j, path,
             {"truncations", "n_max", "slope_window", "tol", "base_symbol", "method", "enumeration_cap",
              "extend", "extension_tol", "extension_cap", "divergence_growth", "divergence_doublings",
              "t_grid", "convexity_tol", "n", "samples", "depth", "gibbs_bound", "pressure", "t_lo", "t_hi",
              "solver_tol", "max_iter", "regularity_depth", "regularity_samples", "probe_bound",
              "bip_witness", "bip_up_to"});
  read(j, "truncations", path, p.truncations);
  read(j, "n_max", path, p.n_max);
  read(j, "slope_window", path, p.slope_window);
  read(j, "tol", path, p.tol);
  read(j, "base_symbol", path, p.base_symbol);
  read(j, "method", path, p.method);
  read(j, "enumeration_cap", path, p.enumeration_cap);
  read(j, "extend", path, p.extend);
  read(j, "extension_tol", path, p.extension_tol);
  read(j, "extension_cap", path, p.extension_cap);
  read(j, "divergence_growth", path, p.divergence_growth);
  read(j, "divergence_doublings", path, p.divergence_doublings);
  read(j, "t_grid", path, p.t_grid);
  read(j, "convexity_tol", path, p.convexity_tol);
  read(j, "n", path, p.n);
  read(j, "samples", path, p.samples);
  read(j, "depth", path, p.depth);
  read(j, "gibbs_bound", path, p.gibbs_bound);
  read(j, "pressure", path, p.pressure);
  read(j, "t_lo", path, p.t_lo);
  read(j, "t_hi", path, p.t_hi);
  read(j, "solver_tol", path, p.solver_tol);
  read(j, "max_iter", path, p.max_iter);
  read(j, "regularity_depth", path, p.regularity_depth);
  read(j, "regularity_samples", path, p.regularity_samples);
  read(j, "probe_bound", path, p.probe_bound);
  read(j, "bip_witness", path, p.bip_witness);
  read(j, "bip_up_to", path, p.bip_up_to);
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"format", c.format},      {"command", c.command}, {"model", c.model_path.generic_string()},
           {"out", c.out_dir.generic_string()}, {"threads", c.threads}, {"seed", c.seed},
           {"params", c.params}};
}

void from_json(const json& j, RunConfig& c) {
  check_keys(j, "", {"format", "command", "model", "out", "threads", "seed", "params"});
  c.format = as<std::string>(require(j, "format", ""), "format");
  c.command = as<std::string>(require(j, "command", ""), "command");
  c.model_path = as<std::string>(require(j, "model", ""), "model");
  if (j.contains("out")) c.out_dir = as<std::string>(j.at("out"), "out");
  read(j, "threads", "", c.threads);
  read(j, "seed", "", c.seed);
  if (j.contains("params")) from_json(j.at("params"), c.params);
}

std::string serialize(const RunConfig& c) { return json(c).dump(2) + "\n"; }

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("run", std::string("malformed JSON: ") + e.what());
  }
  RunConfig c;
  from_json(j, c);
  validate(c);
  return c;
}

// ---- model files ----

ModelSpec ModelSpec::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("model", std::string("malformed JSON: ") + e.what());
  }
  check_keys(j, "", {"format", "shift", "potential", "matrices", "construction", "measure", "params"});
  if (j.contains("format") && as<std::string>(j.at("format"), "format") != kModelFormat) {
    throw ConfigError("format", "expected " + std::string(kModelFormat));
  }
  ModelSpec spec;
  if (j.contains("params")) from_json(j.at("params"), spec.params_);
  spec.doc_ = std::make_shared<const json>(std::move(j));
  return spec;
}

ModelSpec ModelSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("model", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

namespace {
WeightSequence weights(const json& v, const std::string& field);
}  // namespace

bool ModelSpec::has_shift() const { return doc_->contains("shift"); }
bool ModelSpec::has_potential() const { return doc_->contains("potential"); }
bool ModelSpec::has_construction() const { return doc_->contains("construction"); }

TransitionModel ModelSpec::model() const {
  if (!has_shift()) {
    // Potentials and constructions that fix their own coding shift.
    if (has_potential()) {
      const json& p = doc_->at("potential");
      const json* base = &p;
      while (base->is_object() && base->contains("kind") && base->at("kind") == "scaled" && base->contains("base")) {
        base = &base->at("base");
      }
      if (base->is_object() && base->contains("kind")) {
        const json& kind = base->at("kind");
        if (kind == "fiber_count") return TransitionModel::example2_y();
        if (kind == "cocycle") return TransitionModel::full_shift(matrices().size());
        if (kind == "weighted_full") return TransitionModel::full_shift(weights(require(*base, "lambda", "potential"), "potential.lambda").size());
      }
    }
    if (has_construction()) return construction().default_model();
    throw ConfigError("shift", "required");
  }
  const json& s = doc_->at("shift");
  check_keys(s, "shift", {"rule", "size", "arcs"});
  if (s.contains("arcs")) {
    if (s.contains("rule")) throw ConfigError("shift", "give either rule or arcs, not both");
    const json& arcs = s.at("arcs");
    if (!arcs.is_array() || arcs.empty()) throw ConfigError("shift.arcs", "expected a nonempty list of pairs");
    std::vector<std::pair<Symbol, Symbol>> list;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const std::string field = "shift.arcs[" + std::to_string(k) + "]";
      auto pair = as_list<Symbol>(arcs[k], field);
      if (pair.size() != 2) throw ConfigError(field, "expected [from, to]");
      list.emplace_back(pair[0], pair[1]);
    }
    return TransitionModel::from_arcs(std::move(list));
  }
  const auto rule = as<std::string>(require(s, "rule", "shift"), "shift.rule");
  std::optional<Symbol> size;
  read(s, "size", "shift", size);
  try {
    return TransitionModel::named(rule, size);
  } catch (const DomainError& e) {
    throw ConfigError("shift.rule", e.what());
  }
}

namespace {

WeightSequence weights(const json& v, const std::string& field) {
  if (v.is_array()) {
    auto list = as_list<double>(v, field);
    if (list.empty()) throw ConfigError(field, "must not be empty");
    return WeightSequence::list(std::move(list));
  }
  check_keys(v, field, {"geometric", "power"});
  if (v.size() != 1) throw ConfigError(field, "expected exactly one of geometric, power");
  try {
    if (v.contains("geometric")) {
      const json& g = v.at("geometric");
      check_keys(g, field + ".geometric", {"base"});
      return WeightSequence::geometric(as<double>(require(g, "base", field + ".geometric"), field + ".geometric.base"));
    }
    const json& p = v.at("power");
    check_keys(p, field + ".power", {"exponent", "coefficient"});
    const double coefficient =
        p.contains("coefficient") ? as<double>(p.at("coefficient"), field + ".power.coefficient") : 1.0;
    return WeightSequence::power(as<double>(require(p, "exponent", field + ".power"), field + ".power.exponent"),
                                 coefficient);
  } catch (const DomainError& e) {
    throw ConfigError(field, e.what());
  }
}

struct BirkhoffTable {
  double fallback = 0.0;
  std::vector<double> source;
  std::vector<std::tuple<Symbol, Symbol, double>> pairs;

  double operator()(Symbol i, Symbol j) const {
    for (const auto& [a, b, v] : pairs)
      if (a == i && b == j) return v;
    if (!source.empty()) {
      if (i < 1 || i > static_cast<Symbol>(source.size())) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      return source[static_cast<std::size_t>(i - 1)];
    }
    return fallback;
  }
};

BirkhoffTable birkhoff_table(const json& p, const std::string& path) {
  BirkhoffTable t;
  read(p, "default", path, t.fallback);
  if (p.contains("source_log_weights")) t.source = as_list<double>(p.at("source_log_weights"), path + ".source_log_weights");
  if (p.contains("pairs")) {
    const json& pairs = p.at("pairs");
    if (!pairs.is_array()) throw ConfigError(path + ".pairs", "expected a list of [i, j, value]");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const std::string field = path + ".pairs[" + std::to_string(k) + "]";
      const json& e = pairs[k];
      if (!e.is_array() || e.size() != 3) throw ConfigError(field, "expected [i, j, value]");
      t.pairs.emplace_back(as<Symbol>(e[0], field), as<Symbol>(e[1], field), as<double>(e[2], field));
    }
  }
  return t;
}

}  // namespace

MatrixFamily ModelSpec::matrices() const {
  const json& m = require(*doc_, "matrices", "");
  check_keys(m, "matrices", {"d", "list", "tail"});
  const auto d = as<int>(require(m, "d", "matrices"), "matrices.d");
  if (d < 1) throw ConfigError("matrices.d", "must be >= 1");
  const json& list = require(m, "list", "matrices");
  if (!list.is_array() || list.empty()) throw ConfigError("matrices.list", "expected a nonempty list of matrices");
  std::vector<Matrix> mats;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string field = "matrices.list[" + std::to_string(k) + "]";
    const json& rows = list[k];
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) throw ConfigError(field, "expected d rows");
    Matrix a(d, d);
    for (int r = 0; r < d; ++r) {
      auto row = as_list<double>(rows[static_cast<std::size_t>(r)], field);
      if (static_cast<int>(row.size()) != d) throw ConfigError(field, "expected d columns");
      for (int c = 0; c < d; ++c) a(r, c) = row[static_cast<std::size_t>(c)];
    }
    mats.push_back(std::move(a));
  }
  std::optional<double> ratio;
  if (m.contains("tail")) {
    const json& t = m.at("tail");
    check_keys(t, "matrices.tail", {"kind", "ratio"});
    if (as<std::string>(require(t, "kind", "matrices.tail"), "matrices.tail.kind") != "geometric") {
      throw ConfigError("matrices.tail.kind", "only geometric tails are supported");
    }
    ratio = as<double>(require(t, "ratio", "matrices.tail"), "matrices.tail.ratio");
  }
  try {
    return MatrixFamily(std::move(mats), ratio);
  } catch (const DomainError& e) {
    throw ConfigError("matrices", e.what());
  }
}

namespace {

PotentialSequence build_potential(const ModelSpec& spec, const json& p, const std::string& path) {
  if (!p.is_object()) throw ConfigError(path, "expected an object");
  const auto kind = as<std::string>(require(p, "kind", path), path + ".kind");
  if (kind == "birkhoff") {
    check_keys(p, path, {"kind", "default", "pairs", "source_log_weights"});
    return birkhoff_potential(birkhoff_table(p, path), spec.model());
  }
  if (kind == "weighted_full") {
    check_keys(p, path, {"kind", "lambda", "gamma"});
    double gamma = 0.0;
    read(p, "gamma", path, gamma);
    try {
      return weighted_fullshift_potential(LogCoefficients::linear(gamma),
                                          weights(require(p, "lambda", path), path + ".lambda"));
    } catch (const DomainError& e) {
      throw ConfigError(path + ".lambda", e.what());
    }
  }
  if (kind == "cocycle") {
    check_keys(p, path, {"kind"});
    return cocycle_potential(spec.matrices(), spec.model());
  }
  if (kind == "fiber_count") {
    check_keys(p, path, {"kind"});
    return fiber_count_potential();
  }
  if (kind == "scaled") {
    check_keys(p, path, {"kind", "t", "base"});
    const double t = as<double>(require(p, "t", path), path + ".t");
    return build_potential(spec, require(p, "base", path), path + ".base").scaled(t);
  }
  throw ConfigError(path + ".kind", "unknown potential kind '" + kind + "'");
}

}  // namespace

PotentialSequence ModelSpec::potential() const {
  return build_potential(*this, require(*doc_, "potential", ""), "potential");
}

std::optional<PairFunction> ModelSpec::pair_function() const {
  if (!has_potential()) return std::nullopt;
  const json& p = doc_->at("potential");
  if (!p.is_object() || !p.contains("kind") || p.at("kind") != "birkhoff") return std::nullopt;
  return PairFunction(birkhoff_table(p, "potential"));
}

GeometricConstruction ModelSpec::construction() const {
  const json& c = require(*doc_, "construction", "");
  check_keys(c, "construction", {"kind", "rho"});
  const auto kind = as<std::string>(require(c, "kind", "construction"), "construction.kind");
  if (kind != "product" && kind != "list") {
    throw ConfigError("construction.kind", "must be product or list");
  }
  const json& rho = require(c, "rho", "construction");
  if (kind == "list" && !rho.is_array()) throw ConfigError("construction.rho", "list constructions need a list");
  try {
    return GeometricConstruction::product(weights(rho, "construction.rho"));
  } catch (const DomainError& e) {
    throw ConfigError("construction.rho", e.what());
  }
}

std::string ModelSpec::measure_kind() const {
  const json& m = require(*doc_, "measure", "");
  return as<std::string>(require(m, "kind", "measure"), "measure.kind");
}

CylinderMeasure ModelSpec::measure(const FiniteSubshift& sub) const {
  const json& m = require(*doc_, "measure", "");
  const auto kind = measure_kind();
  try {
    if (kind == "bernoulli") {
      check_keys(m, "measure", {"kind", "probs"});
      return CylinderMeasure::bernoulli(sub, as_list<double>(require(m, "probs", "measure"), "measure.probs"));
    }
    if (kind == "uniform") {
      check_keys(m, "measure", {"kind"});
      return CylinderMeasure::bernoulli(sub, std::vector<double>(sub.size(), 1.0 / static_cast<double>(sub.size())));
    }
    if (kind == "markov") {
      check_keys(m, "measure", {"kind", "matrix"});
      const json& rows = require(m, "matrix", "measure");
      if (!rows.is_array() || rows.size() != sub.size()) {
        throw ConfigError("measure.matrix", "expected one row per surviving symbol");
      }
      const auto n = static_cast<Eigen::Index>(sub.size());
      Matrix p(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        auto row = as_list<double>(rows[static_cast<std::size_t>(i)], "measure.matrix");
        if (static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("measure.matrix", "row width mismatch");
        for (Eigen::Index j = 0; j < n; ++j) p(i, j) = row[static_cast<std::size_t>(j)];
      }
      return CylinderMeasure::markov(sub, std::move(p));
    }
    if (kind == "rpf") {
      check_keys(m, "measure", {"kind"});
      auto f = pair_function();
      if (!f) throw ConfigError("measure.kind", "rpf needs a birkhoff potential");
      return rpf_equilibrium(sub, *f).measure;
    }
    if (kind == "nu") {
      check_keys(m, "measure", {"kind", "l"});
      const int l = as<int>(require(m, "l", "measure"), "measure.l");
      if (l < 1) throw ConfigError("measure.l", "must be >= 1");
      return finite_gibbs_nu(sub, potential(), l);
    }
  } catch (const DomainError& e) {
    throw ConfigError("measure", e.what());
  }
  throw ConfigError("measure.kind", "unknown measure kind '" + kind + "'");
}

PressureParams pressure_params(const Params& p, unsigned threads) {
  PressureParams q;
  q.a = p.base_symbol;
  q.truncations = p.truncations;
  q.n_max = p.n_max;
  q.slope_window = p.slope_window;
  q.tol = p.tol;
  q.extend = p.extend;
  q.extension_tol = p.extension_tol;
  q.extension_cap = p.extension_cap;
  q.divergence_growth = p.divergence_growth;
  q.divergence_doublings = p.divergence_doublings;
  q.partition.method = p.method == "enumerate"  ? PartitionMethod::enumerate
                       : p.method == "transfer" ? PartitionMethod::transfer
                                                : PartitionMethod::automatic;
  q.partition.enumeration_cap = p.enumeration_cap;
  q.partition.threads = threads;
  return q;
}

}  // namespace thermoshift
