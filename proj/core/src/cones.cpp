#include "smoothgreed/cones.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "smoothgreed/rng.hpp"

namespace smoothgreed {

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

FeasibleSet FeasibleSet::simplex(std::size_t k) {
  require(k >= 1, "simplex needs k >= 1");
  FeasibleSet F;
  F.kind = Kind::simplex;
  F.k = k;
  return F;
}

FeasibleSet FeasibleSet::unit_interval() {
  FeasibleSet F;
  F.kind = Kind::unit_interval;
  F.k = 1;
  return F;
}

FeasibleSet FeasibleSet::box(Eigen::VectorXd upper) {
  require(upper.size() >= 1, "box needs at least one coordinate");
  require((upper.array() >= 0.0).all(), "box upper bounds must be nonnegative");
  FeasibleSet F;
  F.kind = Kind::box;
  F.k = static_cast<std::size_t>(upper.size());
  F.upper = std::move(upper);
  return F;
}

bool FeasibleSet::contains(const Eigen::VectorXd& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != k) return false;
  if ((x.array() < -tol).any()) return false;
  switch (kind) {
    case Kind::simplex:
      return x.sum() <= 1.0 + tol;
    case Kind::unit_interval:
      return x[0] <= 1.0 + tol;
    case Kind::box:
      return ((x - upper).array() <= tol).all();
  }
  return false;
}

nlohmann::json FeasibleSet::to_json() const {
  switch (kind) {
    case Kind::simplex:
      return {{"type", "simplex"}, {"k", k}};
    case Kind::unit_interval:
      return {{"type", "unit_interval"}};
    case Kind::box:
      return {{"type", "box"}, {"upper", to_std(upper)}};
  }
  return {};
}

FeasibleSet FeasibleSet::from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "simplex") return simplex(j.at("k").get<std::size_t>());
  if (type == "unit_interval") return unit_interval();
  if (type == "box") return box(to_vector(j.at("upper").get<std::vector<double>>()));
  throw std::invalid_argument("unknown feasible set type: " + type);
}

SupportResult support(const FeasibleSet& F, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != F.k) {
    throw std::invalid_argument("support: dimension mismatch");
  }
  SupportResult r{0.0, Eigen::VectorXd::Zero(z.size())};
  switch (F.kind) {
    case FeasibleSet::Kind::simplex: {
      Eigen::Index best = -1;
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (z[j] > r.value) {
          r.value = z[j];
          best = j;
        }
      }
      if (best >= 0) r.argmax[best] = 1.0;
      break;
    }
    case FeasibleSet::Kind::unit_interval:
      if (z[0] > 0.0) {
        r.value = z[0];
        r.argmax[0] = 1.0;
      }
      break;
    case FeasibleSet::Kind::box:
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (z[j] > 0.0) {
          r.argmax[j] = F.upper[j];
          r.value += z[j] * F.upper[j];
        }
      }
      break;
  }
  return r;
}

std::size_t Step::input_dim() const {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiagonalMap>) {
          return static_cast<std::size_t>(m.c.size());
        } else if constexpr (std::is_same_v<T, StackedMap>) {
          return static_cast<std::size_t>(m.c.size());
        } else {
          return 1;
        }
      },
      A);
}

nlohmann::json Step::to_json() const {
  nlohmann::json a = std::visit(
      [](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiagonalMap>) {
          return {{"type", "diag"}, {"c", to_std(m.c)}};
        } else if constexpr (std::is_same_v<T, StackedMap>) {
          nlohmann::json rows = nlohmann::json::array();
          for (Eigen::Index i = 0; i < m.B.rows(); ++i) rows.push_back(to_std(m.B.row(i).transpose()));
          return {{"type", "stacked"}, {"c", to_std(m.c)}, {"B", rows}};
        } else {
          return {{"type", "rank_one"}, {"a", to_std(m.a)}};
        }
      },
      A);
  return {{"A", a}, {"F", F.to_json()}};
}

Step Step::from_json(const nlohmann::json& j) {
  const auto& a = j.at("A");
  const std::string type = a.at("type").get<std::string>();
  Step s;
  if (type == "diag") {
    s.A = DiagonalMap{to_vector(a.at("c").get<std::vector<double>>())};
  } else if (type == "stacked") {
    StackedMap m;
    m.c = to_vector(a.at("c").get<std::vector<double>>());
    const auto rows = a.at("B").get<std::vector<std::vector<double>>>();
    m.B.resize(static_cast<Eigen::Index>(rows.size()), m.c.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].size() == static_cast<std::size_t>(m.c.size()), "stacked map: ragged B");
      m.B.row(static_cast<Eigen::Index>(i)) = to_vector(rows[i]).transpose();
    }
    s.A = std::move(m);
  } else if (type == "rank_one") {
    s.A = RankOneMap{to_vector(a.at("a").get<std::vector<double>>())};
  } else {
    throw std::invalid_argument("unknown step map type: " + type);
  }
  s.F = FeasibleSet::from_json(j.at("F"));
  validate_step(s);
  return s;
}

void validate_step(const Step& step) {
  require(step.input_dim() == step.F.k, "step map and feasible set dimensions differ");
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiagonalMap>) {
          require((m.c.array() >= 0.0).all(), "diagonal map entries must be nonnegative");
        } else if constexpr (std::is_same_v<T, StackedMap>) {
          require((m.c.array() >= 0.0).all() && (m.B.array() >= 0.0).all(),
                  "stacked map entries must be nonnegative");
        } else {
          require(m.a.size() >= 1 && m.a.allFinite(), "rank-one map needs a finite vector");
        }
      },
      step.A);
}

Eigen::VectorXd adjoint(const Step& step, const DualPoint& y) {
  return std::visit(
      [&y](const auto& m) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiagonalMap>) {
          return m.c.cwiseProduct(y.v);
        } else if constexpr (std::is_same_v<T, StackedMap>) {
          return m.c * y.v[0] + m.B.transpose() * y.v.tail(y.v.size() - 1);
        } else {
          Eigen::VectorXd z(1);
          z[0] = m.a.dot(y.Y * m.a) + y.v[0];
          return z;
        }
      },
      step.A);
}

double image_sq_norm(const Step& step, const Eigen::VectorXd& x) {
  return std::visit(
      [&x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiagonalMap>) {
          return m.c.cwiseProduct(x).squaredNorm();
        } else if constexpr (std::is_same_v<T, StackedMap>) {
          const double r = m.c.dot(x);
          return r * r + (m.B * x).squaredNorm();
        } else {
          const double a2 = m.a.squaredNorm();
          return x[0] * x[0] * (a2 * a2 + 1.0);
        }
      },
      step.A);
}

LpBallDistance lp_ball_distance(const Eigen::VectorXd& u, double p) {
  require(p >= 1.0, "lp_ball_distance: p must be >= 1");
  require((u.array() >= 0.0).all(), "lp_ball_distance: u must be nonnegative");
  const Eigen::Index n = u.size();
  LpBallDistance out;
  out.subgrad_lo = Eigen::VectorXd::Zero(n);
  out.subgrad_hi = Eigen::VectorXd::Zero(n);
  if (n == 0) return out;
  const double umax = u.maxCoeff();

  if (std::isinf(p)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (u[i] > 1.0) {
        out.value += u[i] - 1.0;
        out.subgrad_lo[i] = out.subgrad_hi[i] = 1.0;
      } else if (u[i] == 1.0) {
        out.subgrad_hi[i] = 1.0;
      }
    }
    out.radius = umax > 1.0 ? 1.0 : 0.0;
    return out;
  }

  auto capped_norm = [&](double r) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += std::pow(std::min(u[i], r), p);
    return std::pow(s, 1.0 / p);
  };
  const double full = capped_norm(umax);
  if (full < 1.0) return out;

  double r = umax;
  if (full > 1.0) {
    double lo = 0.0;
    double hi = umax;
    while (hi - lo > 1e-12 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (capped_norm(mid) > 1.0 ? hi : lo) = mid;
    }
    r = 0.5 * (lo + hi);
  }
  out.radius = r;
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.value += u[i] - std::min(u[i], r);
    g[i] = p == 1.0 ? 1.0 : std::pow(std::min(u[i], r) / r, p - 1.0);
  }
  out.subgrad_hi = g;
  // On the sphere the cap is inactive and the segment reaches 0.
  if (full > 1.0) out.subgrad_lo = g;
  return out;
}

double theta_of_instance(const std::vector<Step>& steps) {
  double theta = kInf;
  for (const Step& s : steps) {
    if (const auto* d = std::get_if<DiagonalMap>(&s.A)) {
      if ((d->c.array() > 0.0).any()) theta = std::min(theta, 1.0);
    } else if (const auto* m = std::get_if<StackedMap>(&s.A)) {
      for (Eigen::Index j = 0; j < m->c.size(); ++j) {
        const double load = m->B.col(j).sum();
        if (load > 0.0) theta = std::min(theta, m->c[j] / load);
      }
    }
  }
  return theta;
}

double l_bound_lp(const std::vector<Step>& steps, double eps) {
  double best = 0.0;
  for (const Step& s : steps) {
    if (const auto* d = std::get_if<DiagonalMap>(&s.A)) {
      if ((d->c.array() > 0.0).any()) best = std::max(best, 1.0);
    } else if (const auto* m = std::get_if<StackedMap>(&s.A)) {
      for (Eigen::Index i = 0; i < m->B.rows(); ++i) {
        for (Eigen::Index j = 0; j < m->B.cols(); ++j) {
          if (m->B(i, j) > 0.0) best = std::max(best, m->c[j] / m->B(i, j));
        }
      }
    }
  }
  return (1.0 + eps) * best;
}

double logdet_spd(const Eigen::MatrixXd& M) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw std::domain_error("matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

LogDetState::LogDetState(Eigen::MatrixXd A0) : M_(std::move(A0)) {
  require(M_.rows() == M_.cols() && M_.rows() >= 1, "A0 must be square");
  require((M_ - M_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + M_.cwiseAbs().maxCoeff()),
          "A0 must be symmetric");
  refactorize();
  refactorizations_ = 0;
}

void LogDetState::refactorize() {
  Eigen::LLT<Eigen::MatrixXd> llt(M_);
  if (llt.info() != Eigen::Success) throw std::domain_error("log-det state lost positive definiteness");
  Y_ = llt.solve(Eigen::MatrixXd::Identity(M_.rows(), M_.cols()));
  Y_ = 0.5 * (Y_ + Y_.transpose());
  since_refactor_ = 0;
  ++refactorizations_;
}

double LogDetState::quad(const Eigen::VectorXd& a) const { return a.dot(Y_ * a); }

double LogDetState::step_gain(const Eigen::VectorXd& a, double x) const {
  return std::log1p(x * quad(a));
}

void LogDetState::update(const Eigen::VectorXd& a, double x) {
  if (x == 0.0) return;
  if (!(x > 0.0)) throw std::domain_error("log-det update needs x >= 0");
  const Eigen::VectorXd Ya = Y_ * a;
  const double q = a.dot(Ya);
  if (!(q >= 0.0)) throw std::domain_error("log-det state is not positive definite");
  Y_.noalias() -= (x / (1.0 + x * q)) * (Ya * Ya.transpose());
  M_.noalias() += x * (a * a.transpose());
  gain_ += std::log1p(x * q);
  ++updates_;
  ++since_refactor_;
  const bool cheap = M_.rows() <= 64;
  if (since_refactor_ >= kRefactorEvery ||
      ((cheap || since_refactor_ % 16 == 0) && drift() > kDriftLimit)) {
    refactorize();
  }
}

double LogDetState::drift() const {
  return (Y_ * M_ - Eigen::MatrixXd::Identity(M_.rows(), M_.cols())).cwiseAbs().maxCoeff();
}

double logdet_step_gain(const LogDetState& state, const Eigen::VectorXd& a, double x) {
  return state.step_gain(a, x);
}

AntitoneReport antitone_check(const std::vector<Coordinate>& coords, std::size_t trials,
                              std::uint64_t seed, double u_max) {
  AntitoneReport rep;
  SplitMix64 rng(seed, 1);
  for (std::size_t t = 0; t < trials; ++t) {
    for (const Coordinate& f : coords) {
      double u = rng.uniform(0.0, u_max);
      // land on kinks a quarter of the time
      if (const ScalarConcave* raw = f.raw(); raw && raw->is_piecewise_linear() && rng.uniform() < 0.25) {
        const auto& bp = raw->breakpoints();
        u = std::min(bp[rng.below(bp.size())], u_max);
      }
      const double up = u + rng.uniform(1e-6, 1.0) * u_max;
      const double lo = f.supergrad(u).lo;
      const double hi = f.supergrad(up).hi;
      const double viol = hi - lo;
      rep.max_violation = std::max(rep.max_violation, viol);
      if (viol > 1e-12 * std::max(1.0, std::abs(lo))) rep.passed = false;
    }
    ++rep.trials;
  }
  return rep;
}

AntitoneReport antitone_check_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad, std::size_t dim,
    std::size_t trials, std::uint64_t seed, double u_max) {
  AntitoneReport rep;
  SplitMix64 rng(seed, 2);
  const Eigen::Index n = static_cast<Eigen::Index>(dim);
  for (std::size_t t = 0; t < trials; ++t) {
    Eigen::VectorXd u(n), up(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u[i] = rng.uniform(0.0, u_max);
      up[i] = u[i] + rng.uniform(0.0, u_max);
    }
    const Eigen::VectorXd diff = grad(up) - grad(u);
    const double viol = diff.maxCoeff();
    rep.max_violation = std::max(rep.max_violation, viol);
    if (viol > 1e-12 * std::max(1.0, grad(u).cwiseAbs().maxCoeff())) rep.passed = false;
    ++rep.trials;
  }
  return rep;
}

AntitoneReport antitone_check_logdet(const Eigen::MatrixXd& A0, std::size_t trials,
                                     std::uint64_t seed) {
  AntitoneReport rep;
  rep.assumption = "antitone gradient of logdet(A0 + U)";
  SplitMix64 rng(seed, 3);
  const Eigen::Index n = A0.rows();
  auto random_psd = [&](int rank) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < rank; ++r) {
      Eigen::VectorXd a(n);
      for (Eigen::Index i = 0; i < n; ++i) a[i] = rng.normal();
      P.noalias() += rng.uniform() * (a * a.transpose());
    }
    return P;
  };
  for (std::size_t t = 0; t < trials; ++t) {
    const int rank = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const Eigen::MatrixXd V = random_psd(rank);
    const Eigen::MatrixXd U = V + random_psd(rank);
    const Eigen::MatrixXd G = (A0 + V).inverse() - (A0 + U).inverse();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
    const double viol = -es.eigenvalues().minCoeff();
    rep.max_violation = std::max(rep.max_violation, viol);
    if (viol > 1e-8) rep.passed = false;
    ++rep.trials;
  }
  return rep;
}

}  // namespace smoothgreed
