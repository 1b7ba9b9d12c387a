#include "smoothgreed/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace smoothgreed {

namespace {

// Euclidean projection onto {x >= 0, 1^T x <= 1}.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v) {
  Eigen::VectorXd x = v.cwiseMax(0.0);
  if (x.sum() <= 1.0) return x;
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) tau = t;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

double support_gap(const FeasibleSet& F, const Eigen::VectorXd& z, const Eigen::VectorXd& x) {
  return std::max(0.0, support(F, z).value - z.dot(x));
}

bool below_floor(double w, double l) { return w < -l * (1.0 + 1e-12); }

}  // namespace

// ---------------------------------------------------------------- separable

SeparableObjective::SeparableObjective(std::vector<ScalarConcave> base, std::vector<Coordinate> run)
    : base_(std::move(base)), run_(std::move(run)) {
  if (base_.empty()) throw std::invalid_argument("separable objective needs at least one coordinate");
  if (base_.size() != run_.size()) {
    throw std::invalid_argument("separable objective: base and run coordinate counts differ");
  }
}

SeparableObjective::SeparableObjective(std::vector<ScalarConcave> base)
    : SeparableObjective(base, std::vector<Coordinate>(base.begin(), base.end())) {}

SeparableObjective SeparableObjective::adwords(std::size_t n, std::optional<SmoothedScalar> smoothing) {
  std::vector<ScalarConcave> base(n, ScalarConcave::cap());
  std::vector<Coordinate> run;
  run.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (smoothing) {
      run.emplace_back(*smoothing);
    } else {
      run.emplace_back(base[i]);
    }
  }
  return SeparableObjective(std::move(base), std::move(run));
}

State SeparableObjective::origin() const {
  return State{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim())), std::nullopt};
}

void SeparableObjective::check_step(const Step& step) const {
  const auto* d = std::get_if<DiagonalMap>(&step.A);
  if (!d) throw std::invalid_argument("separable objective needs diagonal steps");
  if (static_cast<std::size_t>(d->c.size()) != dim()) {
    throw std::invalid_argument("diagonal step dimension does not match the objective");
  }
}

void SeparableObjective::advance(State& s, const Step& step, const Eigen::VectorXd& x) const {
  s.u += std::get<DiagonalMap>(step.A).c.cwiseProduct(x);
}

double SeparableObjective::run_value(const State& s) const {
  double v = 0.0;
  for (std::size_t i = 0; i < run_.size(); ++i) v += run_[i].value(s.u[static_cast<Eigen::Index>(i)]);
  return v;
}

double SeparableObjective::true_value(const State& s) const {
  double v = 0.0;
  for (std::size_t i = 0; i < base_.size(); ++i) v += base_[i].value(s.u[static_cast<Eigen::Index>(i)]);
  return v;
}

DualPoint SeparableObjective::min_dual(const State& s) const {
  DualPoint y;
  y.v.resize(s.u.size());
  for (Eigen::Index i = 0; i < s.u.size(); ++i) {
    y.v[i] = run_[static_cast<std::size_t>(i)].supergrad(s.u[i]).lo;
  }
  return y;
}

double SeparableObjective::true_conjugate(const DualPoint& y) const {
  double v = 0.0;
  for (std::size_t i = 0; i < base_.size(); ++i) {
    v += base_[i].conjugate(y.v[static_cast<Eigen::Index>(i)]);
    if (v == -kInf) return v;
  }
  return v;
}

BestResponse SeparableObjective::best_response(const State& s, const Step& step) const {
  const Eigen::VectorXd& c = std::get<DiagonalMap>(step.A).c;
  const Eigen::Index n = c.size();
  const std::size_t un = static_cast<std::size_t>(n);

  // Smallest increment reaching marginal value lambda on coordinate j.
  auto reach = [&](Eigen::Index j, double lambda) -> double {
    if (c[j] <= 0.0) return 0.0;
    const double lo = run_[static_cast<std::size_t>(j)].slope_preimage(lambda / c[j]).lo;
    if (std::isinf(lo)) return kInf;
    return std::max(0.0, (lo - s.u[j]) / c[j]);
  };
  auto reach_all = [&](double lambda, std::vector<double>& out) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      out[static_cast<std::size_t>(j)] = reach(j, lambda);
      total += out[static_cast<std::size_t>(j)];
    }
    return total;
  };

  BestResponse br;
  br.x = Eigen::VectorXd::Zero(n);
  std::vector<double> at_hi(un), at_lo(un);
  double lambda = 0.0;

  if (step.F.kind == FeasibleSet::Kind::box) {
    reach_all(0.0, at_hi);
    for (Eigen::Index j = 0; j < n; ++j) br.x[j] = std::min(at_hi[static_cast<std::size_t>(j)], step.F.upper[j]);
  } else if (reach_all(0.0, at_hi) <= 1.0) {
    for (Eigen::Index j = 0; j < n; ++j) br.x[j] = at_hi[static_cast<std::size_t>(j)];
  } else {
    double hi = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (c[j] > 0.0) hi = std::max(hi, c[j] * run_[static_cast<std::size_t>(j)].supergrad(s.u[j]).hi);
    }
    double lo = 0.0;
    for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (reach_all(mid, at_lo) > 1.0 ? lo : hi) = mid;
    }
    lambda = hi;
    double used = reach_all(hi, at_hi);
    reach_all(lo, at_lo);
    for (Eigen::Index j = 0; j < n; ++j) br.x[j] = at_hi[static_cast<std::size_t>(j)];
    // Spread the remainder across the coordinates that jump between lo and hi.
    double rest = 1.0 - used;
    for (Eigen::Index j = 0; j < n && rest > 0.0; ++j) {
      const double room = at_lo[static_cast<std::size_t>(j)] - br.x[j];
      if (room <= 0.0) continue;
      const double add = std::min(room, rest);
      br.x[j] += add;
      rest -= add;
    }
    const double total = br.x.sum();
    if (total > 1.0) br.x /= total;
  }

  br.dual.v.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const SupergradInterval sg = run_[static_cast<std::size_t>(j)].supergrad(s.u[j] + c[j] * br.x[j]);
    br.dual.v[j] = (br.x[j] > 0.0 && c[j] > 0.0) ? std::clamp(lambda / c[j], sg.lo, sg.hi) : sg.lo;
  }
  br.gap = support_gap(step.F, adjoint(step, br.dual), br.x);
  return br;
}

double SeparableObjective::curvature() const {
  double L = 0.0;
  for (const Coordinate& f : run_) {
    if (const SmoothedScalar* sm = f.smoothing()) {
      L = std::max(L, sm->max_curvature());
    } else {
      const ScalarConcave& r = *f.raw();
      if (r.is_piecewise_linear()) {
        if (r.slopes().size() > 1) return kInf;
      } else if (r.kind() == ScalarConcave::Kind::log1p) {
        L = std::max(L, 1.0);
      } else {
        return kInf;
      }
    }
  }
  return L;
}

bool SeparableObjective::smoothed() const {
  return std::any_of(run_.begin(), run_.end(), [](const Coordinate& f) { return f.smoothed(); });
}

bool SeparableObjective::monotone() const {
  return std::all_of(base_.begin(), base_.end(), [](const ScalarConcave& f) { return f.monotone(); });
}

nlohmann::json SeparableObjective::describe() const {
  nlohmann::json coords = nlohmann::json::array();
  for (const ScalarConcave& f : base_) coords.push_back(f.to_json());
  return {{"type", "separable"}, {"coords", coords}, {"smoothed", smoothed()}};
}

// ---------------------------------------------------------------- penalty LP

PenaltyLPObjective::PenaltyLPObjective(std::size_t n, double l, double theta, Penalty penalty,
                                       double p)
    : n_(n), l_(l), theta_(theta), penalty_(penalty), p_(p) {
  if (n_ == 0) throw std::invalid_argument("penalty LP needs at least one constraint");
  if (!(l_ > 0.0) || !(theta_ > 0.0)) throw std::invalid_argument("penalty LP needs l, theta > 0");
  if (penalty_ == Penalty::lp_ball && !(p_ >= 1.0)) throw std::invalid_argument("lp ball needs p >= 1");
}

double PenaltyLPObjective::gamma() const {
  return std::log1p(l_ * (std::numbers::e - 1.0) / theta_);
}

void PenaltyLPObjective::use_nesterov_smoothing() {
  if (penalty_ != Penalty::separable) {
    throw std::invalid_argument("closed-form smoothing is available for the separable penalty only");
  }
  smoothing_ = SmoothedScalar::exp_penalty(ExpPenaltyProfile{theta_, gamma(), l_, 1.0});
}

double PenaltyLPObjective::penalty_value(const Eigen::VectorXd& load) const {
  if (penalty_ == Penalty::lp_ball) return -l_ * lp_ball_distance(load, p_).value;
  return -l_ * (load.array() - 1.0).cwiseMax(0.0).sum();
}

double PenaltyLPObjective::run_penalty(const Eigen::VectorXd& load) const {
  if (!smoothing_) return penalty_value(load);
  double v = 0.0;
  for (Eigen::Index i = 0; i < load.size(); ++i) v += smoothing_->value(load[i]);
  return v;
}

Eigen::VectorXd PenaltyLPObjective::run_penalty_grad(const Eigen::VectorXd& load) const {
  Eigen::VectorXd g(load.size());
  if (smoothing_) {
    for (Eigen::Index i = 0; i < load.size(); ++i) g[i] = smoothing_->derivative(load[i]);
  } else if (penalty_ == Penalty::lp_ball) {
    g = -l_ * lp_ball_distance(load, p_).subgrad_hi;
  } else {
    for (Eigen::Index i = 0; i < load.size(); ++i) g[i] = load[i] >= 1.0 ? -l_ : 0.0;
  }
  return g;
}

State PenaltyLPObjective::origin() const {
  return State{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_ + 1)), std::nullopt};
}

void PenaltyLPObjective::check_step(const Step& step) const {
  const auto* m = std::get_if<StackedMap>(&step.A);
  if (!m) throw std::invalid_argument("penalty LP objective needs stacked steps");
  if (static_cast<std::size_t>(m->B.rows()) != n_) {
    throw std::invalid_argument("stacked step has the wrong number of constraint rows");
  }
  if (step.F.kind != FeasibleSet::Kind::simplex) {
    throw std::invalid_argument("penalty LP steps must use simplex feasible sets");
  }
}

void PenaltyLPObjective::advance(State& s, const Step& step, const Eigen::VectorXd& x) const {
  const auto& m = std::get<StackedMap>(step.A);
  s.u[0] += m.c.dot(x);
  s.u.tail(static_cast<Eigen::Index>(n_)) += m.B * x;
}

double PenaltyLPObjective::run_value(const State& s) const {
  return s.u[0] + run_penalty(s.u.tail(static_cast<Eigen::Index>(n_)));
}

double PenaltyLPObjective::true_value(const State& s) const {
  return s.u[0] + penalty_value(s.u.tail(static_cast<Eigen::Index>(n_)));
}

DualPoint PenaltyLPObjective::min_dual(const State& s) const {
  DualPoint y;
  y.v.resize(static_cast<Eigen::Index>(n_ + 1));
  y.v[0] = 1.0;
  y.v.tail(static_cast<Eigen::Index>(n_)) = run_penalty_grad(s.u.tail(static_cast<Eigen::Index>(n_)));
  return y;
}

double PenaltyLPObjective::true_conjugate(const DualPoint& y) const {
  if (y.v[0] < 1.0) return -kInf;
  const Eigen::VectorXd w = y.v.tail(static_cast<Eigen::Index>(n_));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (below_floor(w[i], l_)) return -kInf;
  }
  const Eigen::VectorXd neg = (-w).cwiseMax(0.0).cwiseMin(l_);
  if (penalty_ == Penalty::separable) return -neg.sum();
  // G*(w) = -||(w)_-||_q with 1/p + 1/q = 1
  if (p_ == 1.0) return -neg.maxCoeff();
  if (std::isinf(p_)) return -neg.sum();
  const double q = p_ / (p_ - 1.0);
  return -std::pow(neg.array().pow(q).sum(), 1.0 / q);
}

BestResponse PenaltyLPObjective::best_response(const State& s, const Step& step) const {
  if (!smoothing_) {
    throw std::invalid_argument("simultaneous updates on the penalty LP need a smoothed penalty");
  }
  const auto& m = std::get<StackedMap>(step.A);
  const Eigen::Index k = m.c.size();
  const Eigen::VectorXd load0 = s.u.tail(static_cast<Eigen::Index>(n_));

  auto phi = [&](const Eigen::VectorXd& x) { return m.c.dot(x) + run_penalty(load0 + m.B * x); };
  auto grad = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(m.c + m.B.transpose() * run_penalty_grad(load0 + m.B * x));
  };
  auto fw_gap = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    return std::max(0.0, g.maxCoeff()) - g.dot(x);
  };

  // Start from the best vertex (including the origin).
  Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
  double fx = phi(x);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
    e[j] = 1.0;
    const double fe = phi(e);
    if (fe > fx) {
      fx = fe;
      x = e;
    }
  }

  const double L = std::max(m.B.squaredNorm() * smoothing_->max_curvature(), 1e-12);
  double eta = 1.0 / L;
  Eigen::VectorXd g = grad(x);
  double gap = fw_gap(x, g);
  auto tol = [&] { return 1e-12 * std::max(1.0, std::abs(fx)); };

  for (int it = 0; it < 20000 && gap > tol(); ++it) {
    Eigen::VectorXd xn;
    double fn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      xn = project_capped_simplex(x + eta * g);
      fn = phi(xn);
      const Eigen::VectorXd dx = xn - x;
      if (fn >= fx + g.dot(dx) - dx.squaredNorm() / (2.0 * eta) - 1e-15 * std::abs(fx)) break;
      eta *= 0.5;
    }
    if ((xn - x).lpNorm<Eigen::Infinity>() == 0.0) break;
    x = xn;
    fx = fn;
    g = grad(x);
    gap = fw_gap(x, g);
    eta = std::min(eta * 1.5, 1e6 / L);
  }

  BestResponse br;
  if (gap > tol()) {
    // Frank-Wolfe with exact line search along the edge to the best vertex.
    br.fallback = true;
    for (int it = 0; it < 5000 && gap > tol(); ++it) {
      Eigen::Index j = 0;
      const double gmax = g.maxCoeff(&j);
      Eigen::VectorXd target = Eigen::VectorXd::Zero(k);
      if (gmax > 0.0) target[j] = 1.0;
      const Eigen::VectorXd dir = target - x;
      double a = 0.0;
      double b = 1.0;
      if (grad(x + dir).dot(dir) >= 0.0) {
        a = 1.0;
      } else {
        for (int bs = 0; bs < 100; ++bs) {
          const double mid = 0.5 * (a + b);
          (grad(x + mid * dir).dot(dir) > 0.0 ? a : b) = mid;
        }
      }
      x += a * dir;
      fx = phi(x);
      g = grad(x);
      gap = fw_gap(x, g);
      if (a == 0.0) break;
    }
  }

  br.x = x;
  br.dual.v.resize(static_cast<Eigen::Index>(n_ + 1));
  br.dual.v[0] = 1.0;
  br.dual.v.tail(static_cast<Eigen::Index>(n_)) = run_penalty_grad(load0 + m.B * x);
  br.gap = support_gap(step.F, adjoint(step, br.dual), br.x);
  return br;
}

double PenaltyLPObjective::curvature() const {
  return smoothing_ ? smoothing_->max_curvature() : kInf;
}

nlohmann::json PenaltyLPObjective::describe() const {
  return {{"type", "penalty_lp"},
          {"penalty", penalty_ == Penalty::separable ? "separable" : "lp_ball"},
          {"p", penalty_ == Penalty::lp_ball ? nlohmann::json(p_) : nlohmann::json(nullptr)},
          {"l", l_},
          {"theta", theta_},
          {"smoothed", smoothed()}};
}

// ---------------------------------------------------------------- log-det

LogDetObjective::LogDetObjective(Eigen::MatrixXd A0, double b, double l)
    : A0_(std::move(A0)),
      logdet_A0_(0.0),
      lambda_min_(0.0),
      b_(b),
      l_(l),
      true_penalty_(ScalarConcave::neg_plus_penalty(l, b)),
      run_penalty_(true_penalty_) {
  if (A0_.rows() != A0_.cols() || A0_.rows() == 0) throw std::invalid_argument("A0 must be square");
  logdet_A0_ = logdet_spd(A0_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A0_, Eigen::EigenvaluesOnly);
  lambda_min_ = es.eigenvalues().minCoeff();
}

double LogDetObjective::theta() const {
  return std::log1p(1.0 / static_cast<double>(A0_.rows()));
}

double LogDetObjective::gamma() const { return std::log1p(l_ / theta()); }

void LogDetObjective::use_nesterov_smoothing() {
  run_penalty_ = Coordinate(SmoothedScalar::exp_penalty(ExpPenaltyProfile{theta(), gamma(), l_, b_}));
}

State LogDetObjective::origin() const {
  return State{Eigen::VectorXd::Zero(1), LogDetState(A0_)};
}

void LogDetObjective::check_step(const Step& step) const {
  const auto* r = std::get_if<RankOneMap>(&step.A);
  if (!r) throw std::invalid_argument("log-det objective needs rank-one steps");
  if (r->a.size() != A0_.rows()) throw std::invalid_argument("rank-one step has the wrong dimension");
  if (step.F.kind != FeasibleSet::Kind::unit_interval) {
    throw std::invalid_argument("log-det steps must use the unit interval");
  }
}

void LogDetObjective::advance(State& s, const Step& step, const Eigen::VectorXd& x) const {
  s.psd->update(std::get<RankOneMap>(step.A).a, x[0]);
  s.u[0] += x[0];
}

double LogDetObjective::run_value(const State& s) const {
  return s.psd->gain() + run_penalty_.value(s.u[0]);
}

double LogDetObjective::true_value(const State& s) const {
  return s.psd->gain() + true_penalty_.value(s.u[0]);
}

DualPoint LogDetObjective::min_dual(const State& s) const {
  DualPoint y;
  y.Y = s.psd->Y();
  y.v = Eigen::VectorXd::Constant(1, run_penalty_.supergrad(s.u[0]).lo);
  return y;
}

double LogDetObjective::true_conjugate(const DualPoint& y) const {
  const Eigen::Index n = A0_.rows();
  if (y.Y.rows() != n || y.Y.cols() != n) throw std::invalid_argument("dual matrix has the wrong size");
  const double w = y.v[0];
  if (below_floor(w, l_)) return -kInf;
  const double gconj = std::min(0.0, std::max(w, -l_) * b_);
  const Eigen::MatrixXd Ys = 0.5 * (y.Y + y.Y.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ys);
  if (es.eigenvalues().minCoeff() <= 0.0) return -kInf;
  // Stationary point U = Y^{-1} - A0 must lie in the cone.
  const Eigen::MatrixXd Yinv =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eu(0.5 * (Yinv - A0_ + (Yinv - A0_).transpose()),
                                                   Eigen::EigenvaluesOnly);
  if (eu.eigenvalues().minCoeff() < -1e-8 * (1.0 + A0_.norm())) {
    throw std::domain_error("log-det conjugate only implemented for Y = (A0 + U)^{-1} with U PSD");
  }
  const double logdetY = es.eigenvalues().array().log().sum();
  const double hconj = static_cast<double>(n) - (Ys * A0_).trace() + logdetY + logdet_A0_;
  return hconj + gconj;
}

BestResponse LogDetObjective::best_response(const State& s, const Step& step) const {
  const Eigen::VectorXd& a = std::get<RankOneMap>(step.A).a;
  const double q = s.psd->quad(a);
  const double u = s.u[0];
  auto right_slope = [&](double x) { return q / (1.0 + q * x) + run_penalty_.supergrad(u + x).lo; };

  double x = 0.0;
  if (right_slope(0.0) <= 0.0) {
    x = 0.0;
  } else if (right_slope(1.0) >= 0.0) {
    x = 1.0;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      (right_slope(mid) > 0.0 ? lo : hi) = mid;
    }
    x = hi;
  }

  BestResponse br;
  br.x = Eigen::VectorXd::Constant(1, x);
  LogDetState next = *s.psd;
  next.update(a, x);
  br.dual.Y = next.Y();
  const SupergradInterval sg = run_penalty_.supergrad(u + x);
  br.dual.v = Eigen::VectorXd::Constant(1, std::clamp(-q / (1.0 + q * x), sg.lo, sg.hi));
  br.gap = support_gap(step.F, adjoint(step, br.dual), br.x);
  return br;
}

double LogDetObjective::curvature() const {
  const double logdet_part = 1.0 / (lambda_min_ * lambda_min_);
  if (const SmoothedScalar* sm = run_penalty_.smoothing()) {
    return std::max(logdet_part, sm->max_curvature());
  }
  return kInf;
}

nlohmann::json LogDetObjective::describe() const {
  return {{"type", "logdet"},
          {"n", A0_.rows()},
          {"b", b_},
          {"l", l_},
          {"theta", theta()},
          {"gamma", gamma()},
          {"smoothed", smoothed()}};
}

double dual_objective(const Objective& obj, const std::vector<Step>& steps, const DualPoint& y) {
  const double conj = obj.true_conjugate(y);
  if (conj == -kInf) return kInf;
  double total = -conj;
  for (const Step& s : steps) total += support(s.F, adjoint(s, y)).value;
  return total;
}

}  // namespace smoothgreed
