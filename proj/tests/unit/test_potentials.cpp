#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "thermoshift/error.hpp"
#include "thermoshift/numeric.hpp"
#include "thermoshift/potential.hpp"

using namespace thermoshift;
using doctest::Approx;

namespace {

const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

MatrixFamily single(Matrix a) { return MatrixFamily({std::move(a)}); }

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Worst split defect over every admissible word of length <= max_len in
// `sub`, each word extended by every admissible lookahead symbol.
struct SplitScan {
  double worst_defect = 0.0;
  double worst_subadditivity = -kInf;
  std::size_t splits = 0;
};

SplitScan scan_splits(const PotentialSequence& p, const FiniteSubshift& sub, int max_len) {
  SplitScan scan;
  const auto la = static_cast<std::size_t>(p.lookahead());
  for (int len = 2; len <= max_len; ++len) {
    visit_words(sub, len + static_cast<int>(la), [&](WordView x) {
      const auto n_total = static_cast<std::size_t>(len);
      const double whole = p.eval_prefix(x, n_total);
      for (std::size_t n = 1; n < n_total; ++n) {
        const double split = p.eval_prefix(x, n) + p.eval_prefix(x.subspan(n), n_total - n);
        scan.worst_defect = std::max(scan.worst_defect, std::abs(whole - split));
        scan.worst_subadditivity = std::max(scan.worst_subadditivity, whole - split);
        ++scan.splits;
      }
    });
  }
  return scan;
}

}  // namespace

TEST_SUITE("potentials") {

TEST_CASE("birkhoff evaluation examples") {
  auto zero = birkhoff_potential([](Symbol, Symbol) { return 0.0; }, TransitionModel::full_shift(3));
  CHECK(zero.eval(Word{1, 2, 3, 1, 2}) == 0.0);
  auto half = birkhoff_potential([](Symbol, Symbol) { return -kLog2; }, TransitionModel::full_shift(3));
  CHECK(half.eval(Word{1, 3, 2}) == Approx(-3 * kLog2).epsilon(1e-15));
  auto golden = birkhoff_potential([](Symbol i, Symbol j) { return (i == 1 && j == 1) ? 0.0 : -1.0; },
                                   TransitionModel::golden_mean());
  CHECK(golden.eval(Word{1, 2, 1}) == Approx(-2.0));
  CHECK(golden.declared_C() == 0.0);
  CHECK(golden.declared_M() == 1.0);
  // The wrap pair (2,2) is not admissible, so f is never asked for it on
  // admissible input; a non-finite value on an admissible pair is rejected.
  auto bad = birkhoff_potential([](Symbol i, Symbol) { return i == 2 ? kNegInf : 0.0; },
                                TransitionModel::golden_mean());
  CHECK_THROWS_AS(bad.eval(Word{1, 2}), DomainError);
}

TEST_CASE("weighted full shift evaluation examples") {
  auto p = weighted_fullshift_potential(LogCoefficients::linear(0.0), WeightSequence::geometric(3.0));
  CHECK(p.eval(Word{1, 2}) == Approx(-3 * kLog3).epsilon(1e-14));
  auto q = weighted_fullshift_potential(LogCoefficients::linear(0.5), WeightSequence::geometric(3.0));
  CHECK(q.eval(Word{1, 1}) == Approx(1.0 - 2 * kLog3).epsilon(1e-14));
  for (Symbol j : {1, 4, 9}) {
    CHECK(q.eval(Word{j}) == Approx(0.5 - j * kLog3).epsilon(1e-14));
  }
  auto sub = truncate(p.model(), 5);
  CHECK(std::exp(p.log_sup_f1(2, sub)) == Approx(1.0 / 9.0));
  CHECK_THROWS_AS(weighted_fullshift_potential(LogCoefficients::linear(0.0), WeightSequence::list({0.5, 1.5})),
                  DomainError);
}

TEST_CASE("cocycle evaluation examples") {
  auto p = cocycle_potential(single(m2(2, 1, 1, 2)), TransitionModel::full_shift(1));
  CHECK(p.eval(Word{1}) == Approx(std::log(6.0)));
  CHECK(p.eval(Word{1, 1}) == Approx(std::log(18.0)));
  auto s = cocycle_potential(MatrixFamily({scalar(3), scalar(5)}), TransitionModel::full_shift(2));
  CHECK(s.eval(Word{2, 1}) == Approx(std::log(15.0)));
  // Long products stay finite where raw entries overflow.
  Word ones(2000, 1);
  CHECK(p.eval(ones) == Approx(std::log(2.0) + 2000 * kLog3).epsilon(1e-12));
  CHECK_THROWS_AS(MatrixFamily({m2(1, 0, 1, 1)}), DomainError);
  CHECK_THROWS_AS(MatrixFamily({m2(1, -1, 1, 1)}), DomainError);
}

TEST_CASE("entry-sum norm") {
  CHECK(entry_sum_norm(m2(2, 1, 1, 2)) == 6.0);
  CHECK(entry_sum_norm(Matrix::Identity(3, 3)) == 3.0);
  CHECK(entry_sum_norm(scalar(0.5)) == 0.5);
}

TEST_CASE("renormalized products agree with exact rational arithmetic") {
  // Entries are numerator / 7 so the exact product grows without bound in
  // both numerator and denominator.
  const std::vector<std::vector<std::vector<long>>> nums = {
      {{13, 2}, {5, 9}}, {{1, 20}, {3, 4}}, {{8, 8}, {1, 30}}};
  std::vector<Matrix> family;
  for (const auto& a : nums) family.push_back(m2(a[0][0] / 7.0, a[0][1] / 7.0, a[1][0] / 7.0, a[1][1] / 7.0));
  auto p = cocycle_potential(MatrixFamily(family), TransitionModel::full_shift(3));
  gen::Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = rng.integer(1, 20);
    std::vector<int> word;
    Word w;
    for (int k = 0; k < n; ++k) {
      word.push_back(rng.integer(1, 3));
      w.push_back(word.back());
    }
    CHECK(std::abs(p.eval(w) - oracle::exact_log_norm(nums, 7, word)) < 1e-10);
  }
  // Scalar case as well.
  auto s = cocycle_potential(MatrixFamily({scalar(3.0 / 7.0), scalar(11.0 / 7.0)}), TransitionModel::full_shift(2));
  std::vector<int> word{1, 2, 2, 1, 2, 1, 1, 1, 2, 2, 2, 1, 2};
  Word w(word.begin(), word.end());
  CHECK(std::abs(s.eval(w) - oracle::exact_log_norm({{{3}}, {{11}}}, 7, word)) < 1e-10);
}

TEST_CASE("fiber counts") {
  auto p = fiber_count_potential();
  CHECK(p.eval(Word{1}) == Approx(-kLog2));
  CHECK(p.eval(Word{1, 1}) == Approx(-kLog3));
  CHECK(p.eval(Word{1, 1, 1}) == Approx(-std::log(5.0)));
  CHECK(fiber_count(Word{1, 1, 1, 1}) == 8.0);
  CHECK_THROWS_AS(p.eval(Word{2, 3}), DomainError);
  CHECK_THROWS_AS(p.eval(Word{0}), DomainError);
  CHECK(p.declared_C() == Approx(kLog2));
}

TEST_CASE("fiber counts match exhaustive preimage enumeration") {
  gen::Rng rng(17);
  auto y = truncate(TransitionModel::example2_y(), 6);
  for (int rep = 0; rep < 300; ++rep) {
    auto w = gen::walk(rng, y, static_cast<std::size_t>(rng.integer(1, 16)));
    CHECK(fiber_count(w) == static_cast<double>(oracle::brute_fiber_count(w)));
  }
}

TEST_CASE("fiber counts follow the Fibonacci block formula") {
  // y = 1^{n1} i1 1^{n2} i2 ... 1^{nl} il with i_k >= 2: every i_k forces its
  // neighbours onto 0, leaving no-11 binary blocks. The first block may start
  // freely (F_{n1+1} choices), later blocks are pinned at both ends (F_{nk}).
  gen::Rng rng(23);
  for (int rep = 0; rep < 500; ++rep) {
    Word y;
    std::vector<int> blocks;
    int total = 0;
    const int l = rng.integer(1, 5);
    for (int k = 0; k < l; ++k) {
      const int n = rng.integer(k == 0 ? 0 : 1, 4);
      blocks.push_back(n);
      total += n;
      for (int r = 0; r < n; ++r) y.push_back(1);
      y.push_back(rng.integer(2, 9));
    }
    double expected = std::pow(2.0, l) * static_cast<double>(oracle::fibonacci(blocks[0] + 1));
    for (int k = 1; k < l; ++k) expected *= static_cast<double>(oracle::fibonacci(blocks[static_cast<std::size_t>(k)]));
    CHECK(fiber_count(y) == expected);
    // Per-block bracketing: each block ratio F / a^n lies in [1/a^2, 1].
    const double a = std::numbers::phi;
    const double ratio = fiber_count(y) / (std::pow(2.0, l) * std::pow(a, total));
    CHECK(ratio <= 1.0 + 1e-12);
    CHECK(ratio >= std::pow(a, -2.0 * l) - 1e-12);
  }
}

TEST_CASE("scaling multiplies every evaluation") {
  gen::Rng rng(3);
  auto sub = gen::mixing_subshift(rng, 3, 4);
  auto weights = gen::pair_weights(rng, sub);
  auto f = birkhoff_potential([weights](Symbol i, Symbol j) { return weights.at({i, j}); },
                              TransitionModel::from_arcs([&] {
                                std::vector<std::pair<Symbol, Symbol>> arcs;
                                for (auto& [k, v] : weights) arcs.push_back(k);
                                return arcs;
                              }()));
  auto fam = cocycle_potential(MatrixFamily({m2(2, 1, 1, 2), m2(1, 3, 0.5, 1)}), TransitionModel::full_shift(2));
  auto fib = fiber_count_potential();
  for (double t : {-1.5, -0.3, 0.0, 0.25, 1.0, 2.0, 7.5}) {
    for (int rep = 0; rep < 20; ++rep) {
      auto w = gen::walk(rng, sub, static_cast<std::size_t>(rng.integer(2, 12)));
      if (!sub.allows(w.back(), w.front())) continue;
      CHECK(f.scaled(t).eval(w) == t * f.eval(w));
      Word v;
      for (int k = 0; k < rng.integer(1, 12); ++k) v.push_back(rng.integer(1, 2));
      CHECK(fam.scaled(t).eval(v) == t * fam.eval(v));
      Word y{1, 1, 3, 1, 2, 1};
      CHECK(fib.scaled(t).eval(y) == t * fib.eval(y));
    }
    CHECK(f.scaled(t).scaled(2.0).scale() == 2.0 * t);
  }
  CHECK(fam.scaled(-2.0).declared_C() == Approx(2.0 * *fam.declared_C()));
}

TEST_CASE("exhaustive almost-additivity on small truncations") {
  gen::Rng rng(29);
  std::vector<std::pair<PotentialSequence, FiniteSubshift>> cases;
  auto pf = [](Symbol i, Symbol j) { return std::sin(3.0 * i + j) - 0.5; };
  cases.emplace_back(birkhoff_potential(pf, TransitionModel::full_shift()), truncate(TransitionModel::full_shift(), 3));
  cases.emplace_back(birkhoff_potential(pf, TransitionModel::golden_mean()), truncate(TransitionModel::golden_mean(), 2));
  cases.emplace_back(birkhoff_potential(pf, TransitionModel::renewal()), truncate(TransitionModel::renewal(), 4));
  cases.emplace_back(weighted_fullshift_potential(LogCoefficients::linear(0.3), WeightSequence::geometric(3.0)),
                     truncate(TransitionModel::full_shift(), 3));
  cases.emplace_back(weighted_fullshift_potential(LogCoefficients::sequence(
                                                      [](int n) { return std::log(1.0 + 1.0 / n); }, 1.0),
                                                  WeightSequence::geometric(2.5)),
                     truncate(TransitionModel::full_shift(), 3));
  cases.emplace_back(cocycle_potential(single(m2(2, 1, 1, 2)), TransitionModel::full_shift(1)),
                     truncate(TransitionModel::full_shift(1), 1));
  cases.emplace_back(cocycle_potential(MatrixFamily({m2(2, 1, 1, 2), m2(1, 3, 0.5, 1), m2(4, 1, 2, 1),
                                                     gen::positive_matrix(rng, 2)}),
                                       TransitionModel::full_shift(4)),
                     truncate(TransitionModel::full_shift(4), 4));
  cases.emplace_back(fiber_count_potential(), truncate(TransitionModel::example2_y(), 4));
  for (auto& [p, sub] : cases) {
    INFO("potential kind " << p.kind());
    auto c = p.declared_C();
    REQUIRE(c.has_value());
    auto scan = scan_splits(p, sub, 10);
    CHECK(scan.splits > 0);
    CHECK(scan.worst_defect <= *c + 1e-9);
    if (p.kind() == "cocycle") CHECK(scan.worst_subadditivity <= 1e-9);
  }
}

TEST_CASE("weighted full shift is exactly additive when c_n = e^{gamma n}") {
  auto p = weighted_fullshift_potential(LogCoefficients::linear(0.0), WeightSequence::geometric(3.0));
  auto scan = scan_splits(p, truncate(p.model(), 3), 8);
  CHECK(scan.worst_defect <= 1e-12);
}

TEST_CASE("cocycle sub-additivity on random positive families") {
  gen::Rng rng(31);
  for (int inst = 0; inst < 5; ++inst) {
    const int d = rng.integer(1, 3);
    std::vector<Matrix> fam;
    for (int k = 0; k < 3; ++k) fam.push_back(gen::positive_matrix(rng, d, 0.01, 3.0));
    auto p = cocycle_potential(MatrixFamily(fam), TransitionModel::full_shift(3));
    auto scan = scan_splits(p, truncate(p.model(), 3), 8);
    CHECK(scan.worst_subadditivity <= 1e-9);
    CHECK(scan.worst_defect <= *p.declared_C() + 1e-9);
  }
}

TEST_CASE("regularity estimates") {
  gen::Rng rng(37);
  for (int inst = 0; inst < 10; ++inst) {
    auto sub = gen::mixing_subshift(rng, 2, 5);
    auto w = gen::pair_weights(rng, sub);
    auto p = birkhoff_potential([w](Symbol i, Symbol j) { return w.at({i, j}); }, TransitionModel::full_shift(5));
    auto r = estimate_regularity(p, sub, 12, 500, static_cast<std::uint64_t>(inst));
    CHECK(r.C_hat <= 1e-12);
    CHECK_FALSE(r.violation);
    CHECK(r.M_hat >= 1.0);
    CHECK(r.samples == 500);
  }
  auto weighted = weighted_fullshift_potential(LogCoefficients::linear(0.0), WeightSequence::geometric(3.0));
  auto rw = estimate_regularity(weighted, truncate(weighted.model(), 8), 12, 2000);
  CHECK(rw.C_hat <= 1e-12);
  CHECK(rw.M_hat == 1.0);

  auto cocycle = cocycle_potential(single(m2(2, 1, 1, 2)), TransitionModel::full_shift(1));
  auto scope = truncate(cocycle.model(), 1);
  double previous = 0.0;
  for (std::size_t depth : {4, 6, 8, 10, 12}) {
    auto r = estimate_regularity(cocycle, scope, depth, 400);
    CHECK(r.C_hat <= *cocycle.declared_C());
    CHECK(r.C_hat >= previous - 1e-6);
    CHECK(r.C_hat == Approx(std::log(2.0)));  // ||A^n|| = 2 * 3^n: every split loses exactly log 2
    previous = r.C_hat;
  }
  CHECK_THROWS_AS(estimate_regularity(cocycle, scope, 1, 10), DomainError);
}

TEST_CASE("regularity flags a callback with an understated constant") {
  auto lying = callback_potential("quadratic", TransitionModel::full_shift(2),
                                  [](WordView w) { return 0.01 * static_cast<double>(w.size() * w.size()); }, 0.0);
  auto r = estimate_regularity(lying, truncate(lying.model(), 2), 12, 200);
  CHECK(r.violation);
  CHECK(r.C_hat > 0.0);
}

TEST_CASE("cone condition") {
  auto a = check_cone_condition(single(m2(2, 1, 1, 2)), 1);
  CHECK(a.best_C == Approx(0.25));
  CHECK(a.holds);
  auto fam = MatrixFamily::generated(100, [](Symbol k) { return m2(1, double(k), double(k), 1); });
  auto b = check_cone_condition(fam, 100);
  CHECK(b.best_C == Approx(1.0 / 200.0));
  CHECK(b.worst_symbol == 100);
  CHECK_FALSE(b.holds);
  auto c = check_cone_condition(MatrixFamily({scalar(0.1), scalar(7.0)}), 2);
  CHECK(c.best_C == 1.0);
  CHECK(c.holds);
}

TEST_CASE("summability examples") {
  auto p = weighted_fullshift_potential(LogCoefficients::linear(0.0), WeightSequence::geometric(3.0));
  auto r = summability_report(p, 10);
  CHECK(r.partial_sum == Approx(0.499992).epsilon(1e-6));
  REQUIRE(r.tail_bound.has_value());
  CHECK(*r.tail_bound == Approx(std::pow(3.0, -10) / 2).epsilon(1e-12));
  CHECK(r.partial_sum + *r.tail_bound == Approx(0.5).epsilon(1e-14));
  CHECK(r.verdict == SummabilityVerdict::summable);

  auto zero = birkhoff_potential([](Symbol, Symbol) { return 0.0; }, TransitionModel::full_shift());
  auto z = summability_report(zero, 50);
  CHECK(z.partial_sum == Approx(50.0));
  CHECK(z.verdict == SummabilityVerdict::not_summable);

  auto fam = MatrixFamily::generated(60, [](Symbol i) { return scalar(std::pow(2.0, -double(i))); }, 0.5);
  auto cocycle = cocycle_potential(fam, TransitionModel::full_shift());
  auto c = summability_report(cocycle, 20);
  CHECK(c.partial_sum == Approx(1.0 - std::pow(2.0, -20)).epsilon(1e-12));
  CHECK(c.verdict == SummabilityVerdict::summable);
  CHECK(c.partial_sum + *c.tail_bound == Approx(1.0).epsilon(1e-12));

  CHECK(to_string(SummabilityVerdict::inconclusive) == "inconclusive");
  CHECK_THROWS_AS(summability_report(p, 0), DomainError);
}

TEST_CASE("weight sequences") {
  auto g = WeightSequence::geometric(3.0);
  CHECK(g.power_sum(1.0) == Approx(0.5));
  CHECK(g.power_sum(kLog2 / kLog3) == Approx(1.0));
  CHECK(g.power_sum(0.0) == kInf);
  auto z = WeightSequence::power(3.0);
  CHECK(z.power_sum(1.0) == Approx(1.2020569031595942).epsilon(1e-9));
  CHECK(z.power_sum(0.2) == kInf);
  CHECK(z.convergence_threshold() == Approx(1.0 / 3.0));
  CHECK(z.partial_power_sum(1.0, 1000) + z.power_tail(1.0, 1000) >= z.power_sum(1.0) - 1e-12);
  auto l = WeightSequence::list({0.5, 0.25});
  CHECK(l.size() == 2);
  CHECK(l.power_sum(1.0) == 0.75);
  CHECK_THROWS_AS(l.value(3), DomainError);
  CHECK_THROWS_AS(g.value(0), DomainError);
}

}  // TEST_SUITE
