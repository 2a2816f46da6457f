#include "thermoshift/gibbs.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "thermoshift/error.hpp"
#include "thermoshift/numeric.hpp"
#include "thermoshift/parallel.hpp"

namespace thermoshift {

namespace {

constexpr double kStochasticTol = 1e-9;

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (Symbol s : w) {
      h ^= static_cast<std::uint64_t>(s);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

void require_mixing(const FiniteSubshift& sub) {
  const std::size_t n = sub.size();
  if (!check_mixing(sub, static_cast<int>((n - 1) * (n - 1) + 1))) {
    throw NotMixing("subshift is not topologically mixing");
  }
}

}  // namespace

CylinderMeasure CylinderMeasure::markov(FiniteSubshift sub, Eigen::VectorXd pi, Matrix p) {
  const auto m = static_cast<Eigen::Index>(sub.size());
  if (pi.size() != m || p.rows() != m || p.cols() != m) {
    throw DomainError("markov measure dimensions do not match the subshift");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(pi(i) >= 0.0)) throw DomainError("stationary vector has a negative entry");
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!(p(i, j) >= 0.0)) throw DomainError("transition matrix has a negative entry");
      if (p(i, j) > 0.0 && !sub.allows_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
        throw DomainError("transition matrix charges a forbidden pair");
      }
    }
    if (std::abs(p.row(i).sum() - 1.0) > kStochasticTol) {
      throw DomainError("transition matrix row " + std::to_string(i) + " does not sum to 1");
    }
  }
  if (std::abs(pi.sum() - 1.0) > kStochasticTol) throw DomainError("stationary vector does not sum to 1");
  if ((p.transpose() * pi - pi).cwiseAbs().maxCoeff() > kStochasticTol) {
    throw DomainError("vector is not stationary for the transition matrix");
  }
  CylinderMeasure mu(Kind::markov, std::move(sub), std::numeric_limits<int>::max());
  mu.pi_ = std::move(pi);
  mu.p_ = std::move(p);
  return mu;
}

CylinderMeasure CylinderMeasure::markov(FiniteSubshift sub, Matrix p) {
  const auto m = p.rows();
  if (p.cols() != m || m == 0) throw DomainError("transition matrix must be square");
  Matrix a = p.transpose() - Matrix::Identity(m, m);
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(b);
  for (Eigen::Index i = 0; i < m; ++i) pi(i) = std::max(pi(i), 0.0);
  pi /= pi.sum();
  return markov(std::move(sub), std::move(pi), std::move(p));
}

CylinderMeasure CylinderMeasure::bernoulli(FiniteSubshift sub, const std::vector<double>& probs) {
  const auto m = static_cast<Eigen::Index>(sub.size());
  if (static_cast<Eigen::Index>(probs.size()) != m) {
    throw DomainError("bernoulli weights must match the alphabet size");
  }
  Eigen::VectorXd pi(m);
  for (Eigen::Index i = 0; i < m; ++i) pi(i) = probs[static_cast<std::size_t>(i)];
  Matrix p(m, m);
  for (Eigen::Index i = 0; i < m; ++i) p.row(i) = pi.transpose();
  return markov(std::move(sub), std::move(pi), std::move(p));
}

CylinderMeasure CylinderMeasure::empirical(FiniteSubshift sub, int depth,
                                           std::shared_ptr<const detail::MassBackend> backend) {
  if (depth < 1) throw DomainError("measure depth must be >= 1");
  if (!backend) throw DomainError("empirical measure needs a mass backend");
  CylinderMeasure mu(Kind::empirical, std::move(sub), depth);
  mu.backend_ = std::move(backend);
  return mu;
}

double CylinderMeasure::mass(WordView w) const {
  if (w.empty()) return 1.0;
  if (static_cast<long>(w.size()) > depth_) {
    throw DomainError("cylinder of length " + std::to_string(w.size()) + " beyond measure depth " +
                      std::to_string(depth_));
  }
  std::vector<std::size_t> idx(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    auto i = sub_.index_of(w[k]);
    if (!i) return 0.0;
    idx[k] = *i;
    if (k > 0 && !sub_.allows_index(idx[k - 1], idx[k])) return 0.0;
  }
  if (kind_ == Kind::empirical) return backend_->mass(w);
  double m = pi_(static_cast<Eigen::Index>(idx[0]));
  for (std::size_t k = 1; k < idx.size(); ++k) {
    m *= p_(static_cast<Eigen::Index>(idx[k - 1]), static_cast<Eigen::Index>(idx[k]));
  }
  return m;
}

const Eigen::VectorXd& CylinderMeasure::stationary() const {
  if (kind_ != Kind::markov) throw DomainError("stationary vector needs a markov measure");
  return pi_;
}

const Matrix& CylinderMeasure::transition() const {
  if (kind_ != Kind::markov) throw DomainError("transition matrix needs a markov measure");
  return p_;
}

namespace {

// nu_l through extension sums S_j(b) (row vectors):
//   S_0(b) = max_y e(b,y) U^t (lookahead) or U^t,
//   S_j(b) = sum_{b->c} e(b,c) S_{j-1}(c) K_c,
// so the nu_l weight of a prefix u is c(l) S_{l-|u|}(u_last) K_u...K_{u_0} U prod e(u).
class TransferNu final : public detail::MassBackend {
 public:
  TransferNu(const FiniteSubshift& sub, const TransferKernel& kernel, int l)
      : sub_(sub), l_(l), d_(static_cast<Eigen::Index>(kernel.dim)), lookahead_(kernel.lookahead),
        log_c_(kernel.log_length_factor ? kernel.log_length_factor(l) : 0.0) {
    const std::size_t m = sub.size();
    for (std::size_t i = 0; i < m; ++i) matrices_.push_back(kernel.symbol_matrix(sub.symbol(i)));
    edge_.assign(m * m, 0.0);
    if (kernel.log_edge) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j : sub.successors(i)) edge_[i * m + j] = kernel.log_edge(sub.symbol(i), sub.symbol(j));
    }
    s_.resize(static_cast<std::size_t>(l));
    log_s_.assign(static_cast<std::size_t>(l), 0.0);
    auto& s0 = s_[0];
    s0.assign(m, Eigen::RowVectorXd::Ones(d_));
    if (lookahead_) {
      for (std::size_t b = 0; b < m; ++b) {
        double best = kNegInf;
        for (std::size_t y : sub.successors(b)) best = std::max(best, edge_[b * m + y]);
        s0[b] *= std::exp(best);
      }
    }
    normalize(0);
    for (int j = 1; j < l; ++j) {
      auto& cur = s_[static_cast<std::size_t>(j)];
      cur.assign(m, Eigen::RowVectorXd::Zero(d_));
      const auto& prev = s_[static_cast<std::size_t>(j - 1)];
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t c : sub.successors(b)) cur[b] += std::exp(edge_[b * m + c]) * (prev[c] * matrices_[c]);
      log_s_[static_cast<std::size_t>(j)] = log_s_[static_cast<std::size_t>(j - 1)];
      normalize(j);
    }
    LogSumExp alpha;
    for (std::size_t a = 0; a < m; ++a) {
      const Word w{sub.symbol(a)};
      alpha.add(log_weight(w));
    }
    log_alpha_ = alpha.value();
    if (log_alpha_ == kNegInf || !std::isfinite(log_alpha_)) {
      throw DomainError("nu_l normalization is not finite");
    }
  }

  double mass(WordView w) const override { return std::exp(log_weight(w) - log_alpha_); }

 private:
  void normalize(int j) {
    auto& level = s_[static_cast<std::size_t>(j)];
    double top = 0.0;
    for (const auto& v : level) top = std::max(top, v.maxCoeff());
    if (!(top > 0.0) || !std::isfinite(top)) throw DomainError("nu_l extension sums degenerated");
    for (auto& v : level) v /= top;
    log_s_[static_cast<std::size_t>(j)] += std::log(top);
  }

  double log_weight(WordView w) const {
    const std::size_t m = sub_.size();
    Eigen::VectorXd y = Eigen::VectorXd::Ones(d_);
    double log_y = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const std::size_t i = *sub_.index_of(w[k]);
      y = matrices_[i] * y;
      if (k > 0) log_y += edge_[prev * m + i];
      const double s = y.maxCoeff();
      y /= s;
      log_y += std::log(s);
      prev = i;
    }
    const auto j = static_cast<std::size_t>(l_) - w.size();
    const double v = s_[j][prev].dot(y);
    if (!(v > 0.0)) return kNegInf;
    return log_c_ + log_s_[j] + log_y + std::log(v);
  }

  FiniteSubshift sub_;
  int l_;
  Eigen::Index d_;
  bool lookahead_;
  double log_c_;
  std::vector<Matrix> matrices_;
  std::vector<double> edge_;
  std::vector<std::vector<Eigen::RowVectorXd>> s_;
  std::vector<double> log_s_;
  double log_alpha_ = 0.0;
};

class TableNu final : public detail::MassBackend {
 public:
  TableNu(const FiniteSubshift& sub, const PotentialSequence& p, int l) : levels_(static_cast<std::size_t>(l)) {
    std::vector<std::pair<Word, double>> top;
    LogSumExp alpha;
    visit_words(sub, l, [&](WordView w) {
      const double lw = p.log_sup_cylinder(w, sub);
      alpha.add(lw);
      top.emplace_back(Word(w.begin(), w.end()), lw);
    });
    const double log_alpha = alpha.value();
    if (log_alpha == kNegInf) throw DomainError("no admissible words of length " + std::to_string(l));
    for (auto& [w, lw] : top) {
      const double mass = std::exp(lw - log_alpha);
      for (std::size_t n = 1; n <= w.size(); ++n) levels_[n - 1][Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n))] += mass;
    }
  }

  double mass(WordView w) const override {
    const auto& level = levels_[w.size() - 1];
    auto it = level.find(Word(w.begin(), w.end()));
    return it == level.end() ? 0.0 : it->second;
  }

 private:
  std::vector<std::unordered_map<Word, double, WordHash>> levels_;
};

}  // namespace

CylinderMeasure finite_gibbs_nu(const FiniteSubshift& sub, const PotentialSequence& p, int l,
                                const GibbsOptions& options) {
  if (l < 1) throw DomainError("nu_l needs l >= 1");
  require_mixing(sub);
  if (auto kernel = p.transfer_kernel()) {
    return CylinderMeasure::empirical(sub, l, std::make_shared<TransferNu>(sub, *kernel, l));
  }
  const auto count = count_words(sub, l);
  if (count.saturated || count.value > options.word_cap) {
    throw DomainError("nu_" + std::to_string(l) + " needs more than " +
                      std::to_string(options.word_cap) + " words");
  }
  if (count.value == 0) throw DomainError("no admissible words of length " + std::to_string(l));
  return CylinderMeasure::empirical(sub, l, std::make_shared<TableNu>(sub, p, l));
}

namespace {

Eigen::VectorXd perron_vector(const Matrix& w) {
  const auto m = w.rows();
  Eigen::EigenSolver<Matrix> es(w);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < m; ++i)
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  const double rho0 = es.eigenvalues()(best).real();
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0.0) v = -v;
  v = v.cwiseAbs();
  if (!(v.sum() > 0.0)) v.setOnes();
  v /= v.sum();
  // Inverse iteration from just above rho sharpens the eigensolver's vector.
  const double shift = rho0 * (1.0 + 1e-10) + 1e-300;
  auto lu = (w - shift * Matrix::Identity(m, m)).partialPivLu();
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd x = lu.solve(v);
    if (!x.allFinite() || x.sum() == 0.0) break;
    x /= x.sum();
    v = x.cwiseAbs();
  }
  // Power iteration to the stated tolerance.
  for (int k = 0; k < 100000; ++k) {
    Eigen::VectorXd x = w * v;
    const double rho = x.sum();
    x /= rho;
    const double change = (x - v).cwiseAbs().maxCoeff();
    v = x;
    if (change <= 1e-13) break;
  }
  return v;
}

}  // namespace

RpfEquilibrium rpf_equilibrium(const FiniteSubshift& sub, const PairFunction& f) {
  require_mixing(sub);
  const auto m = static_cast<Eigen::Index>(sub.size());
  Matrix w = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < sub.size(); ++i)
    for (std::size_t j : sub.successors(i)) {
      const double v = f(sub.symbol(i), sub.symbol(j));
      if (!std::isfinite(v)) {
        throw DomainError("pair function undefined on (" + std::to_string(sub.symbol(i)) + "," +
                          std::to_string(sub.symbol(j)) + ")");
      }
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(v);
    }
  Eigen::VectorXd v = perron_vector(w);
  Eigen::VectorXd u = perron_vector(w.transpose());
  const double rho = (w * v).sum() / v.sum();
  u /= u.dot(v);

  Matrix p = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) p(i, j) = w(i, j) * v(j) / (rho * v(i));
    p.row(i) /= p.row(i).sum();
  }
  Eigen::VectorXd pi = u.cwiseProduct(v);
  pi /= pi.sum();
  // Stationarity of pi is exact only up to the eigenvector error; re-project.
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd next = p.transpose() * pi;
    pi = next / next.sum();
  }
  return {std::log(rho), rho, v, u, CylinderMeasure::markov(sub, std::move(pi), std::move(p))};
}

namespace {

struct Extremes {
  double log_min = kInf;
  double log_max = kNegInf;
  bool zero_mass = false;
  std::uint64_t cylinders = 0;
  std::vector<GibbsRow> rows;
};

}  // namespace

GibbsCertificate verify_gibbs(const CylinderMeasure& mu, const PotentialSequence& p, double P,
                              int depth, const VerifyOptions& options) {
  if (depth < 1) throw DomainError("gibbs depth must be >= 1");
  if (depth > mu.depth()) throw DomainError("gibbs depth exceeds the measure depth");
  const FiniteSubshift& sub = mu.subshift();
  std::uint64_t total = 0;
  for (int n = 1; n <= depth; ++n) {
    const auto c = count_words(sub, n);
    if (c.saturated || total + c.value > options.word_cap) {
      throw DomainError("gibbs scan exceeds the cap of " + std::to_string(options.word_cap) + " cylinders");
    }
    total += c.value;
  }
  const bool markov = mu.kind() == CylinderMeasure::Kind::markov;

  auto parts = parallel_map<Extremes>(sub.size(), options.threads, [&](std::size_t first) {
    Extremes ex;
    Word w{sub.symbol(first)};
    std::vector<std::size_t> idx{first};
    // log mass + nP, grouped per factor so that exact Gibbs identities stay exact.
    std::vector<double> acc{markov ? std::log(mu.stationary()(static_cast<Eigen::Index>(first))) + P : 0.0};
    auto visit = [&](auto&& self) -> void {
      const int n = static_cast<int>(w.size());
      double log_mass_nP;
      double mass;
      if (markov) {
        log_mass_nP = acc.back();
        mass = mu.mass(w);
      } else {
        mass = mu.mass(w);
        log_mass_nP = std::log(mass) + n * P;
      }
      const double log_sup = p.log_sup_cylinder(w, sub);
      const double log_inf = p.log_inf_cylinder(w, sub);
      ++ex.cylinders;
      if (mass > 0.0) {
        ex.log_min = std::min(ex.log_min, log_mass_nP - log_sup);
        ex.log_max = std::max(ex.log_max, log_mass_nP - log_inf);
      } else if (log_sup > kNegInf) {
        ex.zero_mass = true;
      }
      if (options.collect_rows) {
        ex.rows.push_back({n, w, mass, log_sup - n * P, std::exp(log_mass_nP - log_sup)});
      }
      if (n == depth) return;
      for (std::size_t next : sub.successors(idx.back())) {
        if (markov) {
          const double step = mu.transition()(static_cast<Eigen::Index>(idx.back()), static_cast<Eigen::Index>(next));
          acc.push_back(acc.back() + (std::log(step) + P));
        }
        w.push_back(sub.symbol(next));
        idx.push_back(next);
        self(self);
        w.pop_back();
        idx.pop_back();
        if (markov) acc.pop_back();
      }
    };
    visit(visit);
    return ex;
  });

  GibbsCertificate cert;
  cert.P_used = P;
  cert.depth = depth;
  cert.bound = options.bound;
  double log_min = kInf, log_max = kNegInf;
  bool zero = false;
  for (auto& part : parts) {
    log_min = std::min(log_min, part.log_min);
    log_max = std::max(log_max, part.log_max);
    zero = zero || part.zero_mass;
    cert.cylinders += part.cylinders;
    for (auto& r : part.rows) cert.rows.push_back(std::move(r));
  }
  if (options.collect_rows) {
    std::stable_sort(cert.rows.begin(), cert.rows.end(),
                     [](const GibbsRow& a, const GibbsRow& b) { return a.n < b.n; });
  }
  cert.ratio_min = zero ? 0.0 : std::exp(log_min);
  cert.ratio_max = std::exp(log_max);
  cert.pass = std::isfinite(cert.ratio_min) && std::isfinite(cert.ratio_max) && cert.ratio_min > 0.0 &&
              cert.ratio_max / cert.ratio_min < options.bound;
  return cert;
}

double entropy_markov(const CylinderMeasure& mu) {
  if (mu.kind() != CylinderMeasure::Kind::markov) {
    throw DomainError("entropy is only computed for markov measures");
  }
  const auto& pi = mu.stationary();
  const auto& p = mu.transition();
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0.0) h -= pi(i) * p(i, j) * std::log(p(i, j));
  return h;
}

double lyapunov_functional(const CylinderMeasure& mu, const PotentialSequence& p, int n) {
  if (n < 1) throw DomainError("lyapunov functional needs n >= 1");
  const FiniteSubshift& sub = mu.subshift();
  const int la = p.lookahead();
  const auto kernel = p.transfer_kernel();
  if (mu.kind() == CylinderMeasure::Kind::markov && kernel && kernel->dim == 1) {
    const auto& pi = mu.stationary();
    const auto& tp = mu.transition();
    double site = 0.0, edge = 0.0;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (pi(ii) == 0.0) continue;
      site += pi(ii) * std::log(kernel->symbol_matrix(sub.symbol(i))(0, 0));
      if (!kernel->log_edge) continue;
      for (std::size_t j : sub.successors(i)) {
        const double q = tp(ii, static_cast<Eigen::Index>(j));
        if (q > 0.0) edge += pi(ii) * q * kernel->log_edge(sub.symbol(i), sub.symbol(j));
      }
    }
    const double c = kernel->log_length_factor ? kernel->log_length_factor(n) : 0.0;
    const double edges = static_cast<double>(n - 1 + (kernel->lookahead ? 1 : 0));
    return (c + n * site + edges * edge) / n;
  }
  const int len = n + la;
  if (len > mu.depth()) throw DomainError("lyapunov functional needs cylinders beyond the measure depth");
  const auto count = count_words(sub, len);
  if (count.saturated || count.value > 50'000'000ull) {
    throw DomainError("lyapunov functional enumeration too large");
  }
  double sum = 0.0;
  visit_words(sub, len, [&](WordView w) {
    const double m = mu.mass(w);
    if (m > 0.0) sum += m * p.eval_prefix(w, static_cast<std::size_t>(n));
  });
  return sum / n;
}

double variational_defect(const CylinderMeasure& mu, const PotentialSequence& p, double P, int n) {
  return P - (entropy_markov(mu) + lyapunov_functional(mu, p, n));
}

}  // namespace thermoshift
