#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thermoshift/matrix_family.hpp"
#include "thermoshift/potential.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift {

namespace detail {
class MassBackend {
 public:
  virtual ~MassBackend() = default;
  /// Mass of the cylinder of an admissible word with 1 <= |w| <= depth.
  virtual double mass(WordView w) const = 0;
};
}  // namespace detail

/// Probability on cylinders of a finite subshift, either a stationary Markov
/// chain (any depth) or a finite-depth table such as nu_l.
class CylinderMeasure {
 public:
  enum class Kind { markov, empirical };

  /// Stationary Markov measure; pi must be stationary for the stochastic p,
  /// and p must vanish off the arcs of `sub`.
  static CylinderMeasure markov(FiniteSubshift sub, Eigen::VectorXd pi, Matrix p);
  /// Markov measure with pi solved from p (p irreducible on `sub`).
  static CylinderMeasure markov(FiniteSubshift sub, Matrix p);
  /// i.i.d. measure on a full truncation.
  static CylinderMeasure bernoulli(FiniteSubshift sub, const std::vector<double>& probs);
  static CylinderMeasure empirical(FiniteSubshift sub, int depth,
                                   std::shared_ptr<const detail::MassBackend> backend);

  Kind kind() const noexcept { return kind_; }
  int depth() const noexcept { return depth_; }
  const FiniteSubshift& subshift() const noexcept { return sub_; }
  /// 0 for words that are not admissible in the subshift.
  double mass(WordView w) const;
  /// Markov kind only.
  const Eigen::VectorXd& stationary() const;
  const Matrix& transition() const;

 private:
  CylinderMeasure(Kind kind, FiniteSubshift sub, int depth) : kind_(kind), sub_(std::move(sub)), depth_(depth) {}

  Kind kind_;
  FiniteSubshift sub_;
  int depth_;
  Eigen::VectorXd pi_;
  Matrix p_;
  std::shared_ptr<const detail::MassBackend> backend_;
};

struct GibbsOptions {
  /// Most admissible length-l words tabulated when no transfer kernel exists.
  std::uint64_t word_cap = 4'000'000;
};

/// nu_l: length-l cylinders weighted by sup f_l on the cylinder and normalized
/// over all admissible length-l words; shallower cylinders by summation.
CylinderMeasure finite_gibbs_nu(const FiniteSubshift& sub, const PotentialSequence& p, int l,
                                const GibbsOptions& options = {});

struct RpfEquilibrium {
  double P_exact = 0.0;
  double rho = 0.0;
  /// Right and left Perron vectors, positive, right normalized to sum 1 and
  /// left scaled so that u.v = 1.
  Eigen::VectorXd right;
  Eigen::VectorXd left;
  CylinderMeasure measure;
};

/// Exact pressure and equilibrium of an additive 2-cylinder potential:
/// W_ij = t_ij e^{f(i,j)}, P = log rho(W), p_ij = W_ij v_j / (rho v_i).
RpfEquilibrium rpf_equilibrium(const FiniteSubshift& sub, const PairFunction& f);

struct GibbsRow {
  int n = 0;
  Word word;
  double mass = 0.0;
  double log_weight = 0.0;
  double ratio = 0.0;
};

struct GibbsCertificate {
  double P_used = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  int depth = 0;
  double bound = 0.0;
  std::uint64_t cylinders = 0;
  bool pass = false;
  std::vector<GibbsRow> rows;
};

struct VerifyOptions {
  /// PASS needs ratio_max / ratio_min below this.
  double bound = 10.0;
  bool collect_rows = false;
  std::uint64_t word_cap = 50'000'000;
  unsigned threads = 0;
};

/// Extremes of mu(C_w) / (exp(-nP) f_n(x)) over every admissible w with
/// |w| <= depth and every x in C_w (sup and inf of f_n over the cylinder).
GibbsCertificate verify_gibbs(const CylinderMeasure& mu, const PotentialSequence& p, double P,
                              int depth, const VerifyOptions& options = {});

/// -sum_i pi_i sum_j p_ij log p_ij.
double entropy_markov(const CylinderMeasure& mu);

/// (1/n) int log f_n dmu.
double lyapunov_functional(const CylinderMeasure& mu, const PotentialSequence& p, int n);

/// P - (h(mu) + (1/n) int log f_n dmu).
double variational_defect(const CylinderMeasure& mu, const PotentialSequence& p, double P, int n);

}  // namespace thermoshift
