#include "thermoshift/potential.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "thermoshift/error.hpp"
#include "thermoshift/numeric.hpp"

namespace thermoshift {

PotentialSequence::PotentialSequence(std::shared_ptr<const detail::PotentialImpl> impl, double scale)
    : impl_(std::move(impl)), scale_(scale) {
  if (!impl_) throw DomainError("null potential");
  if (!std::isfinite(scale_)) throw DomainError("potential scale must be finite");
}

double PotentialSequence::eval_prefix(WordView x, std::size_t n) const {
  if (n == 0) throw DomainError("potential evaluated on an empty word");
  if (x.size() < n + static_cast<std::size_t>(lookahead())) {
    throw DomainError("prefix too short for log f_" + std::to_string(n));
  }
  return scale_ * impl_->eval_prefix(x, n);
}

double PotentialSequence::eval(WordView w) const {
  const auto la = static_cast<std::size_t>(lookahead());
  if (la == 0) return eval_prefix(w, w.size());
  Word buffer(w.begin(), w.end());
  for (std::size_t k = 0; k < la; ++k) buffer.push_back(w[k % w.size()]);
  return eval_prefix(buffer, w.size());
}

double PotentialSequence::eval_at(WordView cycle, std::size_t shift, std::size_t n) const {
  if (cycle.empty()) throw DomainError("empty cycle");
  const std::size_t len = n + static_cast<std::size_t>(lookahead());
  Word buffer(len);
  for (std::size_t k = 0; k < len; ++k) buffer[k] = cycle[(shift + k) % cycle.size()];
  return eval_prefix(buffer, n);
}

double PotentialSequence::cylinder_extreme(WordView w, const FiniteSubshift& scope, bool sup) const {
  if (lookahead() == 0) return eval_prefix(w, w.size());
  auto last = scope.index_of(w.back());
  if (!last) throw DomainError("cylinder symbol outside the scope subshift");
  Word buffer(w.begin(), w.end());
  buffer.push_back(0);
  double best = sup ? kNegInf : kInf;
  for (std::size_t j : scope.successors(*last)) {
    buffer.back() = scope.symbol(j);
    const double v = eval_prefix(buffer, w.size());
    best = sup ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

double PotentialSequence::log_sup_cylinder(WordView w, const FiniteSubshift& scope) const {
  return cylinder_extreme(w, scope, true);
}

double PotentialSequence::log_inf_cylinder(WordView w, const FiniteSubshift& scope) const {
  return cylinder_extreme(w, scope, false);
}

double PotentialSequence::log_sup_f1(Symbol a, const FiniteSubshift& scope) const {
  const Symbol w[1] = {a};
  return log_sup_cylinder(w, scope);
}

double PotentialSequence::log_inf_f1(Symbol a, const FiniteSubshift& scope) const {
  const Symbol w[1] = {a};
  return log_inf_cylinder(w, scope);
}

std::optional<double> PotentialSequence::declared_C() const {
  auto c = impl_->declared_C();
  if (!c) return std::nullopt;
  return std::abs(scale_) * *c;
}

std::optional<double> PotentialSequence::declared_M() const {
  auto m = impl_->declared_M();
  if (!m) return std::nullopt;
  return std::pow(*m, std::abs(scale_));
}

std::optional<double> PotentialSequence::sup_f1_tail(Symbol m) const {
  if (scale_ < 0.0) return std::nullopt;
  return impl_->sup_f1_tail(m, scale_);
}

std::optional<TransferKernel> PotentialSequence::transfer_kernel() const {
  auto k = impl_->kernel();
  if (!k || scale_ == 1.0) return k;
  if (k->dim != 1) return std::nullopt;
  const double t = scale_;
  TransferKernel out;
  out.dim = 1;
  out.lookahead = k->lookahead;
  if (k->log_length_factor) {
    out.log_length_factor = [f = k->log_length_factor, t](int n) { return t * f(n); };
  }
  out.symbol_matrix = [f = k->symbol_matrix, t](Symbol s) {
    Matrix m = f(s);
    m(0, 0) = std::pow(m(0, 0), t);
    return m;
  };
  if (k->log_edge) {
    out.log_edge = [f = k->log_edge, t](Symbol a, Symbol b) { return t * f(a, b); };
  }
  return out;
}

PotentialSequence PotentialSequence::scaled(double t) const { return PotentialSequence(impl_, scale_ * t); }

namespace {

class Birkhoff final : public detail::PotentialImpl {
 public:
  Birkhoff(PairFunction f, TransitionModel model) : f_(std::move(f)), model_(std::move(model)) {
    if (!f_) throw DomainError("birkhoff potential needs a pair function");
  }
  std::string_view kind() const override { return "birkhoff"; }
  const TransitionModel& model() const override { return model_; }
  int lookahead() const override { return 1; }
  double eval_prefix(WordView x, std::size_t n) const override {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += pair(x[k], x[k + 1]);
    return sum;
  }
  std::optional<double> declared_C() const override { return 0.0; }
  std::optional<TransferKernel> kernel() const override {
    TransferKernel k;
    k.dim = 1;
    k.lookahead = true;
    k.symbol_matrix = [](Symbol) { return Matrix::Ones(1, 1); };
    k.log_edge = [f = f_](Symbol a, Symbol b) { return f(a, b); };
    return k;
  }

 private:
  double pair(Symbol a, Symbol b) const {
    const double v = f_(a, b);
    if (!std::isfinite(v)) {
      throw DomainError("pair function undefined on (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
    }
    return v;
  }

  PairFunction f_;
  TransitionModel model_;
};

class WeightedFull final : public detail::PotentialImpl {
 public:
  WeightedFull(LogCoefficients log_c, WeightSequence lambda)
      : log_c_(std::move(log_c)),
        lambda_(std::move(lambda)),
        model_(TransitionModel::full_shift(lambda_.size())) {
    if (!log_c_.gamma && !log_c_.general) throw DomainError("log c_n sequence missing");
    if (!(log_c_.declared_C >= 0.0)) throw DomainError("declared C must be >= 0");
    if (auto n = lambda_.size()) {
      for (Symbol j = 1; j <= *n; ++j) check(lambda_.value(j), j);
    } else {
      check(lambda_.value(1), 1);
    }
  }
  std::string_view kind() const override { return "weighted_full"; }
  const TransitionModel& model() const override { return model_; }
  int lookahead() const override { return 0; }
  double eval_prefix(WordView x, std::size_t n) const override {
    double sum = log_c_.at(static_cast<int>(n));
    for (std::size_t k = 0; k < n; ++k) sum += log_lambda(x[k]);
    return sum;
  }
  std::optional<double> declared_C() const override {
    return log_c_.gamma ? 0.0 : log_c_.declared_C;
  }
  std::optional<double> sup_f1_tail(Symbol m, double t) const override {
    return std::exp(t * log_c_.at(1)) * lambda_.power_tail(t, m);
  }
  std::optional<TransferKernel> kernel() const override {
    TransferKernel k;
    k.dim = 1;
    k.lookahead = false;
    if (!log_c_.gamma || *log_c_.gamma != 0.0) {
      k.log_length_factor = [c = log_c_](int n) { return c.at(n); };
    }
    k.symbol_matrix = [w = lambda_](Symbol s) { return Matrix::Constant(1, 1, w.value(s)); };
    return k;
  }

 private:
  static void check(double v, Symbol j) {
    if (!(v > 0.0 && v < 1.0)) {
      throw DomainError("lambda_" + std::to_string(j) + " must lie in (0,1)");
    }
  }
  double log_lambda(Symbol s) const {
    const double v = lambda_.value(s);
    check(v, s);
    return std::log(v);
  }

  LogCoefficients log_c_;
  WeightSequence lambda_;
  TransitionModel model_;
};

class Cocycle final : public detail::PotentialImpl {
 public:
  Cocycle(MatrixFamily family, TransitionModel model)
      : family_(std::move(family)), model_(std::move(model)) {
    auto cone = check_cone_condition(family_, family_.size(), 0.0);
    if (cone.best_C > 0.0) declared_C_ = -std::log(cone.best_C);
  }
  std::string_view kind() const override { return "cocycle"; }
  const TransitionModel& model() const override { return model_; }
  int lookahead() const override { return 0; }
  double eval_prefix(WordView x, std::size_t n) const override {
    Matrix product = family_.at(x[0]);
    double log_scale = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      product = family_.at(x[k]) * product;
      const double s = product.sum();
      product /= s;
      log_scale += std::log(s);
    }
    return log_scale + std::log(product.sum());
  }
  std::optional<double> declared_C() const override { return declared_C_; }
  std::optional<double> sup_f1_tail(Symbol m, double t) const override {
    if (t != 1.0) return std::nullopt;
    return family_.norm_tail(m);
  }
  std::optional<TransferKernel> kernel() const override {
    TransferKernel k;
    k.dim = family_.dim();
    k.symbol_matrix = [f = family_](Symbol s) { return f.at(s); };
    return k;
  }

 private:
  MatrixFamily family_;
  TransitionModel model_;
  std::optional<double> declared_C_;
};

class FiberCount final : public detail::PotentialImpl {
 public:
  FiberCount() : model_(TransitionModel::example2_y()) {}
  std::string_view kind() const override { return "fiber_count"; }
  const TransitionModel& model() const override { return model_; }
  int lookahead() const override { return 0; }
  double eval_prefix(WordView x, std::size_t n) const override {
    return -log_fiber_count(x.first(n));
  }
  // Joining two Y-words loses at most half of the concatenated X-preimages.
  std::optional<double> declared_C() const override { return std::log(2.0); }

  static void check_word(WordView y) {
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (y[k] < 1) throw DomainError("symbol " + std::to_string(y[k]) + " outside Y");
      if (k + 1 < y.size() && y[k] != 1 && y[k + 1] != 1) {
        throw DomainError("inadmissible Y-word: pair (" + std::to_string(y[k]) + "," +
                          std::to_string(y[k + 1]) + ")");
      }
    }
  }

  // Preimages 2(k-1) and 2(k-1)+1; in X, p -> q iff p == 0 or q == 0.
  static void step(Symbol from, Symbol to, const double c[2], double next[2]) {
    next[0] = next[1] = 0.0;
    for (int q = 0; q < 2; ++q)
      for (int p = 0; p < 2; ++p) {
        const Symbol xp = 2 * (from - 1) + p;
        const Symbol xq = 2 * (to - 1) + q;
        if (xp == 0 || xq == 0) next[q] += c[p];
      }
  }

  static double log_fiber_count(WordView y) {
    check_word(y);
    double c[2] = {1.0, 1.0};
    double log_scale = 0.0;
    for (std::size_t k = 1; k < y.size(); ++k) {
      double next[2];
      step(y[k - 1], y[k], c, next);
      const double s = next[0] + next[1];
      c[0] = next[0] / s;
      c[1] = next[1] / s;
      log_scale += std::log(s);
    }
    return log_scale + std::log(c[0] + c[1]);
  }

  static double raw_fiber_count(WordView y) {
    check_word(y);
    double c[2] = {1.0, 1.0};
    for (std::size_t k = 1; k < y.size(); ++k) {
      double next[2];
      step(y[k - 1], y[k], c, next);
      c[0] = next[0];
      c[1] = next[1];
    }
    return c[0] + c[1];
  }

 private:
  TransitionModel model_;
};

class Callback final : public detail::PotentialImpl {
 public:
  Callback(std::string name, TransitionModel model, std::function<double(WordView)> fn,
           std::optional<double> c)
      : name_(std::move(name)), model_(std::move(model)), fn_(std::move(fn)), c_(c) {
    if (!fn_) throw DomainError("callback potential needs a function");
  }
  std::string_view kind() const override { return name_; }
  const TransitionModel& model() const override { return model_; }
  int lookahead() const override { return 0; }
  double eval_prefix(WordView x, std::size_t n) const override {
    const double v = fn_(x.first(n));
    if (!std::isfinite(v)) throw DomainError(name_ + ": non-finite value on a word");
    return v;
  }
  std::optional<double> declared_C() const override { return c_; }

 private:
  std::string name_;
  TransitionModel model_;
  std::function<double(WordView)> fn_;
  std::optional<double> c_;
};

}  // namespace

PotentialSequence birkhoff_potential(PairFunction f, TransitionModel model) {
  return PotentialSequence(std::make_shared<Birkhoff>(std::move(f), std::move(model)));
}

PotentialSequence weighted_fullshift_potential(LogCoefficients log_c, WeightSequence lambda) {
  return PotentialSequence(std::make_shared<WeightedFull>(std::move(log_c), std::move(lambda)));
}

PotentialSequence cocycle_potential(MatrixFamily family, TransitionModel model) {
  return PotentialSequence(std::make_shared<Cocycle>(std::move(family), std::move(model)));
}

PotentialSequence fiber_count_potential() {
  return PotentialSequence(std::make_shared<FiberCount>());
}

double fiber_count(WordView y) { return FiberCount::raw_fiber_count(y); }

PotentialSequence callback_potential(std::string name, TransitionModel model,
                                     std::function<double(WordView)> log_fn,
                                     std::optional<double> declared_C) {
  return PotentialSequence(
      std::make_shared<Callback>(std::move(name), std::move(model), std::move(log_fn), declared_C));
}

RegularityReport estimate_regularity(const PotentialSequence& p, const FiniteSubshift& scope,
                                     std::size_t depth, std::size_t samples, std::uint64_t seed,
                                     double tolerance) {
  if (depth < 2) throw DomainError("regularity depth must be >= 2");
  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t k) { return static_cast<std::size_t>((rng() >> 11) % k); };
  const auto la = static_cast<std::size_t>(p.lookahead());

  RegularityReport report;
  report.depth = depth;
  Word x;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t len = 2 + pick(depth - 1);
    x.assign(len + la, 0);
    std::size_t state = pick(scope.size());
    for (std::size_t k = 0; k < len + la; ++k) {
      x[k] = scope.symbol(state);
      auto next = scope.successors(state);
      state = next[pick(next.size())];
    }
    const std::size_t n = 1 + pick(len - 1);
    const std::size_t m = len - n;
    const WordView xv(x);
    const double defect =
        std::abs(p.eval_prefix(xv, len) - p.eval_prefix(xv, n) - p.eval_prefix(xv.subspan(n), m));
    report.C_hat = std::max(report.C_hat, defect);
    const WordView cyl = xv.first(len);
    const double osc = p.log_sup_cylinder(cyl, scope) - p.log_inf_cylinder(cyl, scope);
    report.M_hat = std::max(report.M_hat, std::exp(osc));
    ++report.samples;
  }
  if (auto c = p.declared_C()) report.violation = report.C_hat > *c + tolerance;
  return report;
}

ConeReport check_cone_condition(const MatrixFamily& family, Symbol symbol_bound,
                                double uniform_floor) {
  ConeReport report;
  const double d = static_cast<double>(family.dim());
  const Symbol last = std::min(symbol_bound, family.size());
  double worst = kInf;
  for (Symbol k = 1; k <= last; ++k) {
    const Matrix& a = family.at(k);
    const double ratio = a.minCoeff() / a.maxCoeff();
    if (ratio < worst) {
      worst = ratio;
      report.worst_symbol = k;
    }
  }
  report.best_C = worst / d;
  report.holds = report.best_C > 0.0 && report.best_C >= uniform_floor;
  return report;
}

SummabilityReport summability_report(const PotentialSequence& p, Symbol probe_bound) {
  if (probe_bound < 1) throw DomainError("probe bound must be >= 1");
  const FiniteSubshift scope = truncate(p.model(), probe_bound);
  SummabilityReport report;
  std::vector<double> terms;
  terms.reserve(scope.size());
  for (Symbol a : scope.symbols()) terms.push_back(std::exp(p.log_sup_f1(a, scope)));
  for (double t : terms) report.partial_sum += t;

  const Symbol last = p.model().first_symbol() + probe_bound - 1;
  if (p.model().is_finite() && *p.model().last_symbol() <= last) {
    report.tail_bound = 0.0;
    report.verdict = SummabilityVerdict::summable;
    return report;
  }
  report.tail_bound = p.sup_f1_tail(last);
  if (report.tail_bound && std::isfinite(*report.tail_bound)) {
    report.verdict = SummabilityVerdict::summable;
    return report;
  }
  // Terms that do not decay over the upper half of the probe range.
  const std::size_t half = terms.size() / 2;
  bool flat = terms.size() >= 2;
  for (std::size_t k = half + 1; k < terms.size() && flat; ++k) flat = terms[k] >= terms[k - 1];
  if (flat && terms.back() > 0.0) report.verdict = SummabilityVerdict::not_summable;
  return report;
}

std::string_view to_string(SummabilityVerdict v) {
  switch (v) {
    case SummabilityVerdict::summable:
      return "summable";
    case SummabilityVerdict::not_summable:
      return "not_summable";
    case SummabilityVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace thermoshift
