#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "smoothgreed/objectives.hpp"
#include "smoothgreed/rng.hpp"
#include "smoothgreed/smoothing.hpp"

using namespace smoothgreed;

namespace {

constexpr double kE = std::numbers::e;
const double kAdwordsBeta = kE / (kE - 1.0);

ScalarConcave three_piece() { return ScalarConcave::piecewise_linear({0.0, 0.5, 1.0}, {1.0, 0.5, 0.0}); }

DesignSpec spec_for(ScalarConcave f, double horizon, std::size_t d, TailMode tail) {
  DesignSpec s;
  s.base = std::move(f);
  s.horizon = horizon;
  s.d = d;
  s.tail = tail;
  return s;
}

std::vector<double> gamma_sweep() {
  std::vector<double> g;
  for (int i = 0; i < 50; ++i) g.push_back(std::pow(10.0, -3.0 + 4.0 * i / 49.0));
  return g;
}

}  // namespace

TEST_CASE("make_monotone") {
  CHECK(make_monotone({3, 1, 2, 0}) == std::vector<double>{3, 1, 1, 0});
  CHECK(make_monotone({4, 2, 2, 1}) == std::vector<double>{4, 2, 2, 1});
  SplitMix64 rng(1, 0);
  std::vector<double> y(50);
  for (double& v : y) v = rng.uniform();
  const auto m = make_monotone(y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(m[i] <= y[i]);
    if (i > 0) CHECK(m[i] <= m[i - 1]);
  }
  CHECK(make_monotone(m) == m);
}

TEST_CASE("grid smoothing accessors") {
  const auto s = SmoothedScalar::from_grid(0.5, {2.0, 1.0, 0.0}, TailMode::zero);
  CHECK(s.value(0.5) == doctest::Approx(0.75));
  CHECK(s.value(1.0) == doctest::Approx(1.0));
  CHECK(s.value(5.0) == doctest::Approx(1.0));
  CHECK(s.derivative(0.25) == doctest::Approx(1.5));
  CHECK(s.supergrad(1.0).lo == 0.0);
  CHECK(s.slope_preimage(1.5).lo == doctest::Approx(0.25));
  CHECK(s.max_curvature() == doctest::Approx(2.0));
  CHECK_THROWS_AS(SmoothedScalar::from_grid(0.5, {1.0, 2.0}, TailMode::zero), std::invalid_argument);
  const auto r = SmoothedScalar::from_json(s.to_json());
  CHECK(r.value(0.8) == s.value(0.8));
}

TEST_CASE("closed-form penalty smoothings") {
  const auto adw = nesterov_penalty_smoothing(1.0, 1.0, 1.0);
  for (double u : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    CHECK(adw.derivative(u) == doctest::Approx((kE - std::exp(u)) / (kE - 1.0)).epsilon(1e-12));
  }
  CHECK(nesterov_penalty_smoothing(1.0, 1.0).derivative(0.0) == 0.0);
  // l = 2, theta = 1: e^{gamma u} = 1 + l (e - 1) / theta at u = 1
  const auto two = nesterov_penalty_smoothing(2.0, 1.0);
  CHECK(two.profile()->clip_point() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(two.derivative(1.0) == doctest::Approx(-2.0));
  CHECK(two.derivative(3.0) == doctest::Approx(-2.0));
  CHECK(two.derivative(0.999) > -2.0);

  LogDetObjective ld(Eigen::MatrixXd::Identity(2, 2), 3.0, 2.0);
  ld.use_nesterov_smoothing();
  CHECK(ld.gamma() == doctest::Approx(std::log(1.0 + 2.0 / std::log(1.5))).epsilon(1e-12));
  const auto lds = nesterov_logdet_smoothing(2, 2.0, 3.0);
  CHECK(lds.profile()->gamma == doctest::Approx(std::log(1.0 + 2.0 / std::log(1.5))).epsilon(1e-12));
  // small l leaves the budget region almost untouched
  const auto tiny = nesterov_logdet_smoothing(2, 1e-9, 3.0);
  CHECK(std::abs(tiny.derivative(2.0)) < 1e-8);
}

TEST_CASE("verify_beta anchors") {
  CHECK(verify_beta(ScalarConcave::cap(), 1.0, 4000).sup_beta == doctest::Approx(2.0).epsilon(1e-9));
  const auto adw = adwords_nesterov_smoothing();
  CHECK(verify_beta(adw, ScalarConcave::cap(), 0.0, 1.0, 4000).sup_beta ==
        doctest::Approx(kAdwordsBeta).epsilon(1e-3));
}

TEST_CASE("adwords certificate check") {
  const auto r = adwords_certificate_check(1e-6);
  CHECK(r.passed);
  CHECK(r.normalization == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.min_f >= 0.0);
  CHECK(r.slackness_residual <= 1e-6);
}

TEST_CASE("optimal smoothing of the cap") {
  const DesignResult r = design_optimal(spec_for(ScalarConcave::cap(), 1.0, 1000, TailMode::zero));
  CHECK(r.certified);
  CHECK(std::abs(r.beta - kAdwordsBeta) <= 1e-3);
  double err = 0.0;
  for (std::size_t t = 0; t <= 1000; ++t) {
    const double u = t / 1000.0;
    err = std::max(err, std::abs(r.smoothed.y()[t] - std::max((kE - std::exp(u)) / (kE - 1.0), 0.0)));
  }
  CHECK(err <= 2e-2);

  // re-verification at 8x stays within the certified beta
  const auto v = verify_beta(r.smoothed, ScalarConcave::cap(), 0.0, 1.0, 8000);
  CHECK(v.sup_beta <= r.beta + 10 * r.spec.feas_tol);

  // cumint concave
  const auto& c = r.smoothed.cumint();
  for (std::size_t i = 2; i < c.size(); ++i) CHECK(c[i] - 2 * c[i - 1] + c[i - 2] <= 1e-12);
}

TEST_CASE("linear base needs no smoothing") {
  const DesignResult r = design_optimal(spec_for(ScalarConcave::linear(1.0), 2.0, 100, TailMode::hold_last));
  CHECK(r.beta == doctest::Approx(1.0).epsilon(1e-9));
  for (double y : r.smoothed.y()) CHECK(y == doctest::Approx(1.0));
}

TEST_CASE("plateau equivalence") {
  const DesignResult a = design_optimal(spec_for(ScalarConcave::cap(), 1.0, 1000, TailMode::zero));
  const DesignResult b = design_optimal(spec_for(ScalarConcave::cap(), 10.0, 10000, TailMode::zero));
  CHECK(std::abs(a.beta - b.beta) <= 1e-3);
}

TEST_CASE("grid refinement does not increase beta") {
  double prev = oracle::kInf;
  for (std::size_t d : {100u, 200u, 400u, 800u}) {
    DesignSpec s = spec_for(three_piece(), 1.0, d, TailMode::zero);
    s.beta_tol = 1e-9;
    const DesignResult r = design_optimal(s);
    CHECK(r.beta <= prev + s.feas_tol);
    prev = r.beta;
  }
}

TEST_CASE("three-piece design against the dynamic program") {
  const std::vector<double> b{0.0, 0.5, 1.0}, s{1.0, 0.5, 0.0};
  const double dp = oracle::dp_beta([&](double u) { return oracle::pl_value(b, s, u); },
                                    [&](double y) { return oracle::pl_conjugate(b, s, y); }, 1.0, 1.0, 200, 400);
  const DesignResult r = design_optimal(spec_for(three_piece(), 1.0, 200, TailMode::zero));
  CHECK(r.certified);
  CHECK(std::abs(r.beta - dp) <= 2e-2);
  CHECK(r.beta <= nesterov_sweep(three_piece(), 1.0, 4000, gamma_sweep()).best_beta);
}

TEST_CASE("designer dominates closed-form smoothings of the cap") {
  const DesignResult r = design_optimal(spec_for(ScalarConcave::cap(), 1.0, 1000, TailMode::zero));
  const auto sweep = nesterov_sweep(ScalarConcave::cap(), 1.0, 4000, gamma_sweep());
  CHECK(sweep.gammas.size() == 50);
  CHECK(r.beta <= sweep.best_beta + 1e-6);
}

TEST_CASE("sequential designs of the cap") {
  for (double c : {0.05, 0.1, 0.5}) {
    DesignSpec s = spec_for(ScalarConcave::cap(), 1.0, 1000, TailMode::zero);
    s.c = c;
    const DesignResult r = design_sequential(s);
    CHECK(r.certified);
    CHECK(std::abs(r.ratio() - (1.0 - std::exp(-1.0 / (c + 1.0)))) <= 1e-3);
    if (c == 0.1) {
      double err = 0.0;
      for (std::size_t t = 0; t <= 1000; ++t) {
        const double u = t / 1000.0;
        const double closed = r.beta * std::max(1.0 - std::exp((u - 1.0) / (1.0 + c)), 0.0);
        err = std::max(err, std::abs(r.smoothed.y()[t] - closed));
      }
      CHECK(err <= 2e-2);
      // beta splits into the smoothing part and the lag part
      const double a = verify_beta(r.smoothed, ScalarConcave::cap(), 0.0, 1.0, 4000).sup_beta;
      const double k = kappa_of(r.smoothed, ScalarConcave::cap(), c, 1.0, 4000);
      CHECK(r.beta <= a + k + 1e-6);
      CHECK(r.beta >= a - 1e-6);
      CHECK(kappa_of(r.smoothed, ScalarConcave::cap(), 0.0, 1.0, 4000) == 0.0);
    }
  }
  DesignSpec s = spec_for(ScalarConcave::cap(), 1.0, 1000, TailMode::zero);
  const double sim = design_optimal(s).beta;
  s.c = 1e-3;
  CHECK(std::abs(design_sequential(s).beta - sim) <= 1e-2);
}

TEST_CASE("kappa of a linear smoothing") {
  const auto flat = SmoothedScalar::from_grid(0.1, std::vector<double>(11, 1.0), TailMode::hold_last);
  CHECK(kappa_of(flat, ScalarConcave::linear(1.0), 0.3, 1.0, 100) == 0.0);
}

TEST_CASE("power-law head for infinite slope at zero") {
  // scale invariance gives y = u^{-1/2} / (2 sqrt 2) and beta = sqrt 2
  for (double horizon : {1.0, 100.0}) {
    DesignSpec s = spec_for(ScalarConcave::sqrt(), horizon, 400, TailMode::hold_last);
    s.beta_tol = 1e-7;
    const DesignResult r = design_optimal(s);
    REQUIRE(r.smoothed.head_exponent());
    CHECK(*r.smoothed.head_exponent() == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(r.beta == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
    const auto v = verify_beta(r.smoothed, ScalarConcave::sqrt(), 0.0, horizon, 3200);
    CHECK(v.sup_beta <= r.beta + 10 * s.feas_tol);
    const auto rt = SmoothedScalar::from_json(r.smoothed.to_json());
    CHECK(rt.value(0.3 * horizon / 400) == doctest::Approx(r.smoothed.value(0.3 * horizon / 400)));
  }
}

TEST_CASE("log1p finite horizon") {
  DesignSpec s = spec_for(ScalarConcave::log1p(), 100.0, 2000, TailMode::hold_last);
  const DesignResult r = design_optimal(s);
  CHECK(r.certified);
  CHECK(r.beta >= 1.0);
  // smoothing beats the unsmoothed 1 - alpha_bar
  CHECK(r.beta < 1.0 - alpha_bar(ScalarConcave::log1p(), 100.0));
}

TEST_CASE("design input validation") {
  CHECK_THROWS_AS(design_optimal(spec_for(ScalarConcave::cap(), 1.0, 5, TailMode::zero)), std::invalid_argument);
  CHECK_THROWS_AS(design_optimal(spec_for(ScalarConcave::neg_plus_penalty(1.0, 1.0), 1.0, 100, TailMode::zero)),
                  std::invalid_argument);
  DesignSpec s = spec_for(ScalarConcave::cap(), 1.0, 100, TailMode::zero);
  s.variant = DesignVariant::sequential;
  CHECK_THROWS_AS(design_optimal(s), std::invalid_argument);
}

TEST_CASE("design export") {
  const DesignResult r = design_optimal(spec_for(ScalarConcave::cap(), 1.0, 100, TailMode::zero));
  const auto rows = design_table(r);
  CHECK(rows.size() == 101);
  CHECK(rows.front().u == 0.0);
  CHECK(rows.back().psiS == doctest::Approx(r.smoothed.value(1.0)));
  const auto j = design_summary(r);
  for (const char* key : {"beta", "ratio", "d", "variant", "c"}) CHECK(j.contains(key));
  CHECK(j["variant"] == "sim");
}
