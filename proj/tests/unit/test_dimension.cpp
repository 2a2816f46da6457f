#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "thermoshift/dimension.hpp"
#include "thermoshift/error.hpp"
#include "thermoshift/numeric.hpp"

using namespace thermoshift;
using doctest::Approx;

namespace {

const double kCantor = std::log(2.0) / std::log(3.0);
const double kGolden = std::log(std::numbers::phi) / std::log(2.0);

PressureParams params_for(std::vector<Symbol> truncations, int n_max) {
  PressureParams p;
  p.truncations = std::move(truncations);
  p.n_max = n_max;
  return p;
}

GeometricConstruction cantor() { return GeometricConstruction::product(WeightSequence::list({1.0 / 3, 1.0 / 3})); }

DimensionResult solve(const GeometricConstruction& gc, const TransitionModel& model, PressureParams p,
                      SolverParams s = {}) {
  return bowen_dimension(gc, model, s, p);
}

}  // namespace

TEST_SUITE("dimension") {

TEST_CASE("construction validation and nesting") {
  CHECK_THROWS_AS(GeometricConstruction::product(WeightSequence::list({0.5, 1.0})), DomainError);
  CHECK_THROWS_AS(GeometricConstruction::product(WeightSequence::list({0.0})), DomainError);
  CHECK_THROWS_AS(GeometricConstruction::general({}, 2, 0.0), DomainError);
  CHECK_THROWS_AS(GeometricConstruction::general([](WordView) { return -1.0; }, 2, -1.0), DomainError);

  const auto gc = GeometricConstruction::product(WeightSequence::list({0.5, 0.25, 0.125}));
  CHECK(gc.alphabet() == Symbol{3});
  CHECK_THROWS_AS(gc.log_ratio(Word{}), DomainError);
  CHECK(gc.ratio(Word{1, 2}) == Approx(0.125));
  CHECK(gc.ratio(Word{3, 3, 1}) == Approx(0.5 / 64.0));

  // Nested intervals shrink: r_{wv} <= r_w, with r multiplicative for products.
  gen::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Word w, v;
    const int lw = static_cast<int>(rng.integer(1, 8));
    const int lv = static_cast<int>(rng.integer(1, 8));
    for (int k = 0; k < lw; ++k) w.push_back(rng.integer(1, 3));
    for (int k = 0; k < lv; ++k) v.push_back(rng.integer(1, 3));
    Word wv = w;
    wv.insert(wv.end(), v.begin(), v.end());
    CHECK(gc.ratio(wv) < gc.ratio(w));
    CHECK(gc.log_ratio(wv) == Approx(gc.log_ratio(w) + gc.log_ratio(v)).epsilon(1e-12));
    CHECK(gc.ratio(wv) > 0.0);
  }

  const auto bad = GeometricConstruction::general([](WordView) { return 0.5; }, 2, 0.0);
  CHECK_THROWS_AS(bad.log_ratio(Word{1}), DomainError);
  CHECK_THROWS_AS(bad.rho(), DomainError);
}

TEST_CASE("middle-thirds Cantor set") {
  const auto gc = cantor();
  const auto r = solve(gc, gc.default_model(), params_for({2}, 20));
  CHECK(r.root_found);
  CHECK(std::abs(r.dim_hat - kCantor) < 1e-4);
  CHECK(std::abs(r.pressure_at_dim) < 1e-6);
  CHECK_FALSE(r.trace.empty());
  CHECK(r.t_lo <= r.dim_hat);
  CHECK(r.dim_hat <= r.t_hi);
}

TEST_CASE("countable construction with geometric ratios") {
  const auto gc = GeometricConstruction::product(WeightSequence::geometric(3.0));
  for (Symbol m : {Symbol{10}, Symbol{20}}) {
    CAPTURE(m);
    const auto r = solve(gc, gc.default_model(), params_for({m}, 20));
    CHECK(r.root_found);
    CHECK(std::abs(r.dim_hat - kCantor) < 1e-3);
  }
}

TEST_CASE("single symbol has dimension zero") {
  const auto gc = GeometricConstruction::product(WeightSequence::list({0.5}));
  const auto r = solve(gc, gc.default_model(), params_for({1}, 20));
  CHECK(r.root_found);
  CHECK(std::abs(r.dim_hat) < 1e-8);
}

TEST_CASE("two unequal ratios match the closed-form root") {
  const double root = oracle::bisect_decreasing(
      [](long double t) { return std::pow(0.5L, t) + std::pow(0.25L, t) - 1.0L; }, 0.0L, 1.0L);
  CHECK(root == Approx(kGolden).epsilon(1e-12));
  const auto gc = GeometricConstruction::product(WeightSequence::list({0.5, 0.25}));
  const auto r = solve(gc, gc.default_model(), params_for({2}, 30));
  CHECK(r.root_found);
  CHECK(std::abs(r.dim_hat - root) < 1e-6);

  // Same number through the golden mean shift with equal ratios 1/2.
  const auto half = GeometricConstruction::product(WeightSequence::list({0.5, 0.5}));
  const auto g = solve(half, TransitionModel::golden_mean(), params_for({2}, 30));
  CHECK(g.root_found);
  CHECK(std::abs(g.dim_hat - root) < 1e-6);
}

TEST_CASE("random finite ratio lists: root of sum rho^t = 1") {
  gen::Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = static_cast<int>(rng.integer(2, 6));
    std::vector<double> rho(m);
    for (auto& x : rho) x = rng.real(0.05, 0.6);
    const double root = oracle::bisect_decreasing(
        [&](long double t) {
          long double s = 0;
          for (double x : rho) s += std::pow(static_cast<long double>(x), t);
          return s - 1.0L;
        },
        0.0L, 10.0L);
    const auto gc = GeometricConstruction::product(WeightSequence::list(rho));
    SolverParams s;
    s.t_hi = 10.0;
    const auto r = solve(gc, gc.default_model(), params_for({static_cast<Symbol>(m)}, 20), s);
    CAPTURE(trial);
    CHECK(r.root_found);
    CHECK(std::abs(r.dim_hat - root) < 1e-6);
  }
}

TEST_CASE("bounded distortion keeps the dimension") {
  const auto gc = GeometricConstruction::general(
      [](WordView w) { return static_cast<double>(w.size()) * std::log(1.0 / 3) + std::log(0.8); }, 2,
      std::log(1.25));
  const auto r = solve(gc, gc.default_model(), params_for({2}, 16));
  CHECK(r.root_found);
  CHECK(std::abs(r.dim_hat - kCantor) < 1e-4);
}

TEST_CASE("power-law ratios with a divergent lower bracket") {
  const auto gc = GeometricConstruction::product(WeightSequence::power(3.0, 0.5));
  // The estimate is the top truncation's root; the untruncated one lies above it.
  auto truncated = [](long double t) {
    long double s = 0;
    for (int j = 1; j <= 128; ++j) s += std::pow(0.5L / (static_cast<long double>(j) * j * j), t);
    return std::log(s);
  };
  const double root = oracle::bisect_decreasing(truncated, 0.34L, 1.0L);
  const double full = oracle::bisect_decreasing(
      [](long double t) { return t * std::log(0.5L) + std::log(boost::math::zeta(3.0L * t)); }, 0.34L, 1.0L);
  CHECK(root < full);
  SolverParams s;
  s.t_lo = 0.2;
  s.tol = 1e-8;
  const auto r = solve(gc, gc.default_model(), params_for({8, 16, 32, 64, 128}, 30), s);
  CHECK(r.trace.front().flag == "divergent");
  CHECK(r.root_found);
  CHECK(std::abs(r.dim_hat - root) < 1e-6);
}

TEST_CASE("Ledrappier-Young identity at the root") {
  {
    const auto gc = cantor();
    const auto r = solve(gc, gc.default_model(), params_for({2}, 20));
    const auto ly = ledrappier_young_check(gc, gc.default_model(), r, 2);
    CHECK(ly.deviation < 1e-3);
    CHECK(ly.entropy == Approx(std::log(2.0)).epsilon(1e-8));
    CHECK(ly.lyapunov == Approx(-std::log(3.0)).epsilon(1e-8));
  }
  {
    const auto gc = GeometricConstruction::product(WeightSequence::list({0.5, 0.25}));
    const auto r = solve(gc, gc.default_model(), params_for({2}, 30));
    const auto ly = ledrappier_young_check(gc, gc.default_model(), r, 2);
    CHECK(ly.deviation < 1e-6);
  }
  {
    const auto gc = GeometricConstruction::product(WeightSequence::geometric(3.0));
    const auto r = solve(gc, gc.default_model(), params_for({20}, 20));
    const auto ly = ledrappier_young_check(gc, gc.default_model(), r, 20);
    CHECK(ly.deviation < 1e-3);
    CHECK(ly.lhs == r.dim_hat);
  }
  const auto general = GeometricConstruction::general([](WordView w) { return -1.0 * w.size(); }, 2, 0.0);
  DimensionResult fake;
  fake.root_found = true;
  CHECK_THROWS_AS(ledrappier_young_check(general, general.default_model(), fake, 2), DomainError);
  const auto gc = cantor();
  DimensionResult none;
  CHECK_THROWS_AS(ledrappier_young_check(gc, gc.default_model(), none, 2), DomainError);
}

TEST_CASE("bracket errors report the endpoint pressures") {
  const auto gc = cantor();
  SolverParams s;
  s.t_hi = 0.5;
  try {
    solve(gc, gc.default_model(), params_for({2}, 20), s);
    FAIL("expected a bracket error");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("P(t_lo) =") != std::string::npos);
    CHECK(msg.find("P(t_hi) =") != std::string::npos);
  }
  s = {};
  s.t_lo = 0.8;
  CHECK_THROWS_AS(solve(gc, gc.default_model(), params_for({2}, 20), s), DomainError);
  s = {};
  s.t_lo = 1.0;
  s.t_hi = 1.0;
  CHECK_THROWS_AS(solve(gc, gc.default_model(), params_for({2}, 20), s), DomainError);
  s = {};
  s.tol = 0.0;
  CHECK_THROWS_AS(solve(gc, gc.default_model(), params_for({2}, 20), s), DomainError);
}

TEST_CASE("iteration cap leaves the root unconfirmed") {
  const auto gc = cantor();
  SolverParams s;
  s.max_iter = 3;
  const auto r = solve(gc, gc.default_model(), params_for({2}, 20), s);
  CHECK_FALSE(r.root_found);
  CHECK(r.t_hi - r.t_lo == Approx(0.125));
  CHECK(r.dim_hat == r.t_hi);
  CHECK(r.t_lo < kCantor);
  CHECK(kCantor < r.t_hi);
  CHECK(r.trace.size() == 5);
}

TEST_CASE("dimension is monotone in the truncation level") {
  const auto gc = GeometricConstruction::product(WeightSequence::geometric(1.0 / 0.45));
  double prev = -1.0;
  for (Symbol m : {Symbol{2}, Symbol{4}, Symbol{8}, Symbol{16}}) {
    const auto r = solve(gc, gc.default_model(), params_for({m}, 20));
    CAPTURE(m);
    CHECK(r.root_found);
    CHECK(r.dim_hat >= prev - 1e-9);
    prev = r.dim_hat;
  }
}

TEST_CASE("natural cover sums straddle the dimension") {
  struct Case {
    GeometricConstruction gc;
    TransitionModel model;
    Symbol m;
  };
  std::vector<Case> cases{
      {cantor(), TransitionModel::full_shift(2), 2},
      {GeometricConstruction::product(WeightSequence::list({0.5, 0.25})), TransitionModel::full_shift(2), 2},
      {GeometricConstruction::product(WeightSequence::list({0.5, 0.5})), TransitionModel::golden_mean(), 2},
      {GeometricConstruction::product(WeightSequence::geometric(3.0)), TransitionModel::full_shift(6), 6},
  };
  for (const auto& c : cases) {
    const auto r = solve(c.gc, c.model, params_for({c.m}, 20));
    REQUIRE(r.root_found);
    const auto sub = truncate(c.model, c.m);
    double prev_hi = log_natural_cover_sum(c.gc, sub, r.dim_hat + 0.05, 1);
    for (int n = 2; n <= 12; ++n) {
      const double hi = log_natural_cover_sum(c.gc, sub, r.dim_hat + 0.05, n);
      CAPTURE(n);
      CHECK(hi < prev_hi);
      prev_hi = hi;
    }
    // Below the dimension the sums grow linearly once past the transient.
    const double lo6 = log_natural_cover_sum(c.gc, sub, r.dim_hat - 0.05, 6);
    const double lo12 = log_natural_cover_sum(c.gc, sub, r.dim_hat - 0.05, 12);
    CHECK(lo12 > lo6);
    CHECK(lo12 > 0.0);
    // At the root the sums stay bounded.
    CHECK(std::abs(log_natural_cover_sum(c.gc, sub, r.dim_hat, 12)) < 2.0);
  }
  CHECK_THROWS_AS(log_natural_cover_sum(cantor(), truncate(TransitionModel::full_shift(2), 2), 1.0, 0),
                  DomainError);
}

TEST_CASE("natural cover sum matches direct enumeration") {
  const auto gc = GeometricConstruction::product(WeightSequence::list({0.5, 0.3, 0.1}));
  const auto model = TransitionModel::full_shift(3);
  const auto sub = truncate(model, 3);
  for (int n = 1; n <= 6; ++n) {
    LogSumExp acc;
    visit_words(sub, n, [&](WordView w) { acc.add(0.7 * gc.log_ratio(w)); });
    CHECK(log_natural_cover_sum(gc, sub, 0.7, n) == Approx(acc.value()).epsilon(1e-12));
  }
}

}  // TEST_SUITE
