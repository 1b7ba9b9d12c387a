#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "smoothgreed/instances.hpp"
#include "smoothgreed/online.hpp"
#include "smoothgreed/rng.hpp"
#include "smoothgreed/smoothing.hpp"

using namespace smoothgreed;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

Step diag(std::initializer_list<double> c) {
  const Eigen::VectorXd v = vec(c);
  return Step{DiagonalMap{v}, FeasibleSet::simplex(static_cast<std::size_t>(v.size()))};
}

/// Offline optimum of a small adwords instance: every step picks a vertex
/// (advertiser or nothing); fractional splits cannot beat the best vertex
/// assignment on these integral-bid toys.
double adwords_vertex_optimum(const std::vector<Step>& steps, std::size_t n) {
  double best = 0.0;
  std::vector<std::size_t> pick(steps.size(), 0);
  for (;;) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < steps.size(); ++t) {
      if (pick[t] == 0) continue;
      const auto& c = std::get<DiagonalMap>(steps[t].A).c;
      u[static_cast<Eigen::Index>(pick[t] - 1)] += c[static_cast<Eigen::Index>(pick[t] - 1)];
    }
    best = std::max(best, u.cwiseMin(1.0).sum());
    std::size_t t = 0;
    while (t < steps.size() && ++pick[t] > n) pick[t++] = 0;
    if (t == steps.size()) break;
  }
  return best;
}

std::vector<Step> random_adwords(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::vector<Step> steps;
  for (std::size_t t = 0; t < m; ++t) {
    SplitMix64 rng(seed, t);
    Eigen::VectorXd c(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform() < 0.6 ? rng.uniform(0.0, 0.3) : 0.0;
    steps.push_back(Step{DiagonalMap{c}, FeasibleSet::simplex(n)});
  }
  return steps;
}

}  // namespace

TEST_CASE("single linear step") {
  SeparableObjective lin({ScalarConcave::linear(1.0)});
  const std::vector<Step> steps{Step{DiagonalMap{vec({1.0})}, FeasibleSet::unit_interval()}};
  for (Algorithm a : {Algorithm::sequential, Algorithm::simultaneous}) {
    const RunTrace tr = run(a, lin, steps);
    CHECK(tr.steps[0].x[0] == doctest::Approx(1.0));
    CHECK(tr.P == doctest::Approx(1.0));
    CHECK(tr.D == doctest::Approx(1.0));
    CHECK(tr.ratio_lb() == doctest::Approx(1.0));
    const auto cert = certify(tr, CertifyOptions{1.0, a == Algorithm::sequential});
    CHECK(cert.holds);
    CHECK(cert.ratio_lb == doctest::Approx(1.0).epsilon(1e-9));
    const auto gaps = duality_gap_diagnostics(tr, std::nullopt);
    CHECK(gaps.passed);
    CHECK(gaps.lemma_slack == doctest::Approx(0.0));
  }
}

TEST_CASE("two-advertiser toy, sequential") {
  const auto obj = SeparableObjective::adwords(2);
  const std::vector<Step> steps{diag({1.0, 0.0}), diag({1.0, 1.0})};
  const RunTrace tr = run_sequential(obj, steps);
  CHECK(tr.steps[0].x.isApprox(vec({1.0, 0.0})));
  CHECK(tr.steps[1].x.isApprox(vec({0.0, 1.0})));
  CHECK(tr.P == doctest::Approx(2.0));
  // sigma_1 = 1, sigma_2 = 1, psi*(0, 0) = -2
  CHECK(tr.D == doctest::Approx(4.0));
  CHECK(tr.sum_correction == doctest::Approx(-2.0));
  const double opt = adwords_vertex_optimum(steps, 2);
  CHECK(opt == doctest::Approx(2.0));
  CHECK(tr.D >= opt);
  CHECK(certify(tr, CertifyOptions{2.0, true}).holds);
  CHECK(duality_gap_diagnostics(tr, std::nullopt).passed);
}

TEST_CASE("classic adversary halves the unsmoothed simultaneous run") {
  const auto obj = SeparableObjective::adwords(2);
  const std::vector<Step> steps{diag({1.0, 1.0}), diag({1.0, 0.0})};
  const RunTrace tr = run_simultaneous(obj, steps);
  const double opt = adwords_vertex_optimum(steps, 2);
  CHECK(opt == doctest::Approx(2.0));
  CHECK(tr.P / opt == doctest::Approx(0.5));
  const auto cert = certify(tr, CertifyOptions{2.0, false});
  CHECK(cert.holds);
  CHECK(cert.ratio_lb >= 0.5 - 1e-9);
}

TEST_CASE("adwords certificates on random instances") {
  const auto smooth = SeparableObjective::adwords(4, adwords_nesterov_smoothing());
  const auto raw = SeparableObjective::adwords(4);
  const double e = std::numbers::e;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto steps = random_adwords(4, 30, seed);
    for (Algorithm a : {Algorithm::sequential, Algorithm::simultaneous}) {
      const bool seq = a == Algorithm::sequential;
      const RunTrace r0 = run(a, raw, steps);
      const auto c0 = certify(r0, CertifyOptions{2.0, seq});
      CHECK(c0.holds);
      if (!seq) CHECK(c0.ratio_lb >= 0.5 - 1e-9);
      const RunTrace r1 = run(a, smooth, steps);
      const auto c1 = certify(r1, CertifyOptions{e / (e - 1.0), seq});
      CHECK(c1.holds);
      if (!seq) CHECK(c1.ratio_lb >= (1.0 - 1.0 / e) - 1e-9);
      const auto g = duality_gap_diagnostics(r1, 1.0 / smooth.curvature());
      CHECK(g.passed);
      CHECK(g.regret_checked);
      if (!seq) {
        for (const auto& s : r1.steps) CHECK(s.gain >= -1e-12);
      }
      // weak duality against the true optimum of tiny prefixes
      if (seed < 3) {
        std::vector<Step> head(steps.begin(), steps.begin() + 6);
        const RunTrace h = run(a, raw, head);
        CHECK(h.D >= adwords_vertex_optimum(head, 4) - 1e-12);
      }
    }
  }
}

TEST_CASE("dual iterates are non-increasing") {
  const auto obj = SeparableObjective::adwords(3, adwords_nesterov_smoothing());
  const RunTrace tr = run_sequential(obj, random_adwords(3, 40, 99));
  for (std::size_t t = 1; t < tr.steps.size(); ++t) {
    CHECK((tr.steps[t].y - tr.steps[t - 1].y).maxCoeff() <= 1e-15);
  }
}

TEST_CASE("sequential step is a linearized maximization") {
  const SmoothedScalar s = adwords_nesterov_smoothing();
  const auto obj = SeparableObjective::adwords(3, s);
  const auto steps = random_adwords(3, 25, 4);
  const RunTrace tr = run_sequential(obj, steps);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(3);
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& c = std::get<DiagonalMap>(steps[t].A).c;
    Eigen::VectorXd grad(3);
    for (int i = 0; i < 3; ++i) grad[i] = c[i] * s.derivative(u[i]);
    Eigen::Index best = 0;
    const double top = grad.maxCoeff(&best);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    if (top > 0.0) x[best] = 1.0;
    CHECK(tr.steps[t].x.isApprox(x));
    u += c.cwiseProduct(x);
  }
}

TEST_CASE("smoothed online LP stays within budgets") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const OnlineInstance inst = gen_lp_random(4, 60, 3, 0.6, seed);
    PenaltyLPObjective obj(4, inst.l, inst.theta);
    obj.use_nesterov_smoothing();
    const RunTrace tr = run_simultaneous(obj, inst.steps);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(4);
    for (std::size_t t = 0; t < inst.steps.size(); ++t) {
      load += std::get<StackedMap>(inst.steps[t].A).B * tr.steps[t].x;
    }
    CHECK(load.maxCoeff() <= 1.0 + 1e-9);
    const auto cert = certify(tr, CertifyOptions{std::max(1.0, tr.realized_beta()), false});
    CHECK(cert.holds);
    CHECK(duality_gap_diagnostics(tr, 1.0 / obj.curvature()).passed);
  }
}

TEST_CASE("log-det stream against grid enumeration") {
  const Eigen::VectorXd a = vec({1.0, 0.5, 0.0});
  OnlineInstance inst;
  inst.n = 3;
  inst.A0 = Eigen::MatrixXd::Identity(3, 3);
  for (int t = 0; t < 3; ++t) inst.steps.push_back(Step{RankOneMap{a}, FeasibleSet::unit_interval()});
  const double l = 2.0 * (1.0 + 1e-6);
  LogDetObjective obj(*inst.A0, 2.0, l);
  obj.use_nesterov_smoothing();
  const RunTrace tr = run_simultaneous(obj, inst.steps);
  // relaxation value of the true objective on a grid of x
  double best = -oracle::kInf;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j)
      for (int k = 0; k <= 20; ++k) {
        const double s = (i + j + k) / 20.0;
        const Eigen::MatrixXd M = *inst.A0 + s * a * a.transpose();
        best = std::max(best, oracle::logdet_dense(M) - l * std::max(s - 2.0, 0.0));
      }
  CHECK(tr.P <= best + 1e-9);
  CHECK(tr.D >= best - 1e-9);
  for (const auto& st : tr.steps) CHECK(st.gain >= -1e-12);
  const auto cert = certify(tr, CertifyOptions{beta_logdet_smoothed(obj.gamma()), false});
  CHECK(cert.holds);
}

TEST_CASE("interior shift for an infinite slope at zero") {
  SeparableObjective obj({ScalarConcave::sqrt(), ScalarConcave::sqrt()});
  const RunTrace tr = run_sequential(obj, {diag({1.0, 0.5}), diag({0.2, 1.0})});
  CHECK(tr.interior_shift);
  CHECK(tr.P > 0.0);
}

TEST_CASE("runs are deterministic") {
  const auto obj = SeparableObjective::adwords(4, adwords_nesterov_smoothing());
  const auto steps = random_adwords(4, 30, 12);
  for (Algorithm a : {Algorithm::sequential, Algorithm::simultaneous}) {
    std::ostringstream x, y;
    write_trace_jsonl(x, run(a, obj, steps));
    write_trace_jsonl(y, run(a, obj, steps));
    CHECK(x.str() == y.str());
  }
}

TEST_CASE("trace export") {
  const auto obj = SeparableObjective::adwords(2);
  const RunTrace tr = run_sequential(obj, {diag({1.0, 0.0}), diag({1.0, 1.0})});
  std::ostringstream os;
  write_trace_jsonl(os, tr);
  std::istringstream is(os.str());
  std::string line;
  int count = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["t"] == count + 1);
    ++count;
  }
  CHECK(count == 2);
  const auto sum = trace_summary(tr, certify(tr, CertifyOptions{2.0, true}));
  for (const char* key : {"P", "D", "ratio_lb", "alpha_used"}) CHECK(sum.contains(key));
  CHECK(sum["alpha_used"] == doctest::Approx(-1.0));
}

TEST_CASE("certify rejects beta below one") {
  const auto obj = SeparableObjective::adwords(1);
  const RunTrace tr = run_sequential(obj, {diag({1.0})});
  CHECK_THROWS_AS(certify(tr, CertifyOptions{0.5, true}), std::invalid_argument);
  CHECK(algorithm_from_string("seq") == Algorithm::sequential);
  CHECK_THROWS_AS(algorithm_from_string("nope"), std::invalid_argument);
}
