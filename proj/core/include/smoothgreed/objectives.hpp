#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "smoothgreed/cones.hpp"
#include "smoothgreed/scalar_fun.hpp"
#include "smoothgreed/smoothed_scalar.hpp"

namespace smoothgreed {

/// Cumulative point sum_s A_s x_s. Orthant objectives use `u`; the log-det
/// objective keeps its matrix part in `psd` and the budget usage in u[0].
struct State {
  Eigen::VectorXd u;
  std::optional<LogDetState> psd;
};

/// Solution of one simultaneous step: the new x and a dual point y in the
/// superdifferential at the post-step point with support(F, A^T y) = <A x, y>.
struct BestResponse {
  Eigen::VectorXd x;
  DualPoint dual;
  double gap = 0.0;       // support(F, A^T y) - <A x, y> left by the inner solver
  bool fallback = false;  // inner solver needed its fallback path
};

/// Objective psi on a cone, paired with the surrogate psi_run the online
/// engines maximize (psi itself when unsmoothed). Certificates are always
/// evaluated with the conjugate of the true psi.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual State origin() const = 0;
  virtual void advance(State& s, const Step& step, const Eigen::VectorXd& x) const = 0;
  virtual double run_value(const State& s) const = 0;
  virtual double true_value(const State& s) const = 0;
  /// Minimal supergradient of psi_run at s.
  virtual DualPoint min_dual(const State& s) const = 0;
  /// psi*(y) for the true psi; -inf outside its domain.
  virtual double true_conjugate(const DualPoint& y) const = 0;
  /// Coordinate maximization of psi_run(s + A x) over F.
  virtual BestResponse best_response(const State& s, const Step& step) const = 0;
  /// Lipschitz constant of grad psi_run; infinity when psi_run is not smooth.
  virtual double curvature() const = 0;
  virtual bool smoothed() const = 0;
  /// Whether the true psi is monotone on its cone.
  virtual bool monotone() const = 0;
  virtual void check_step(const Step& step) const = 0;
  virtual nlohmann::json describe() const = 0;
};

/// psi(u) = sum_i psi_i(u_i) over the orthant with diagonal steps.
class SeparableObjective final : public Objective {
 public:
  SeparableObjective(std::vector<ScalarConcave> base, std::vector<Coordinate> run);
  explicit SeparableObjective(std::vector<ScalarConcave> base);

  /// n coordinates of min(u, 1), optionally run through `smoothing`.
  static SeparableObjective adwords(std::size_t n, std::optional<SmoothedScalar> smoothing = {});

  std::size_t dim() const { return base_.size(); }
  const std::vector<ScalarConcave>& base() const { return base_; }
  const std::vector<Coordinate>& run() const { return run_; }

  std::string name() const override { return "separable"; }
  State origin() const override;
  void advance(State& s, const Step& step, const Eigen::VectorXd& x) const override;
  double run_value(const State& s) const override;
  double true_value(const State& s) const override;
  DualPoint min_dual(const State& s) const override;
  double true_conjugate(const DualPoint& y) const override;
  BestResponse best_response(const State& s, const Step& step) const override;
  double curvature() const override;
  bool smoothed() const override;
  bool monotone() const override;
  void check_step(const Step& step) const override;
  nlohmann::json describe() const override;

 private:
  std::vector<ScalarConcave> base_;
  std::vector<Coordinate> run_;
};

/// psi(v, u) = v + G(u) on R_+^{1+n} with stacked steps (c_t; B_t) and
/// G(u) = -l * d_1(u, B_p): separable (p = inf, i.e. -l sum (u_i - 1)_+) or
/// an l_p ball.
class PenaltyLPObjective final : public Objective {
 public:
  enum class Penalty { separable, lp_ball };

  PenaltyLPObjective(std::size_t n, double l, double theta, Penalty penalty = Penalty::separable,
                     double p = 1.0);

  /// Run with the closed-form exponential smoothing of the separable penalty.
  void use_nesterov_smoothing();

  std::size_t n() const { return n_; }
  double l() const { return l_; }
  double theta() const { return theta_; }
  double gamma() const;
  Penalty penalty() const { return penalty_; }
  double p() const { return p_; }
  /// G(u) for the true penalty.
  double penalty_value(const Eigen::VectorXd& load) const;

  std::string name() const override { return "penalty_lp"; }
  State origin() const override;
  void advance(State& s, const Step& step, const Eigen::VectorXd& x) const override;
  double run_value(const State& s) const override;
  double true_value(const State& s) const override;
  DualPoint min_dual(const State& s) const override;
  double true_conjugate(const DualPoint& y) const override;
  BestResponse best_response(const State& s, const Step& step) const override;
  double curvature() const override;
  bool smoothed() const override { return smoothing_.has_value(); }
  bool monotone() const override { return false; }
  void check_step(const Step& step) const override;
  nlohmann::json describe() const override;

 private:
  double run_penalty(const Eigen::VectorXd& load) const;
  Eigen::VectorXd run_penalty_grad(const Eigen::VectorXd& load) const;

  std::size_t n_;
  double l_;
  double theta_;
  Penalty penalty_;
  double p_;
  std::optional<SmoothedScalar> smoothing_;
};

/// psi(U, u) = logdet(A0 + U) - logdet(A0) - l (u - b)_+ on PSD x R_+ with
/// rank-one steps x -> (x a a^T, x), x in [0, 1].
class LogDetObjective final : public Objective {
 public:
  LogDetObjective(Eigen::MatrixXd A0, double b, double l);

  /// Smooth the budget penalty with theta = log(1 + 1/n), gamma = log(1 + l/theta).
  void use_nesterov_smoothing();

  const Eigen::MatrixXd& A0() const { return A0_; }
  double b() const { return b_; }
  double l() const { return l_; }
  double theta() const;
  double gamma() const;
  const Coordinate& run_penalty() const { return run_penalty_; }

  std::string name() const override { return "logdet"; }
  State origin() const override;
  void advance(State& s, const Step& step, const Eigen::VectorXd& x) const override;
  double run_value(const State& s) const override;
  double true_value(const State& s) const override;
  DualPoint min_dual(const State& s) const override;
  double true_conjugate(const DualPoint& y) const override;
  BestResponse best_response(const State& s, const Step& step) const override;
  double curvature() const override;
  bool smoothed() const override { return run_penalty_.smoothed(); }
  bool monotone() const override { return false; }
  void check_step(const Step& step) const override;
  nlohmann::json describe() const override;

 private:
  Eigen::MatrixXd A0_;
  double logdet_A0_;
  double lambda_min_;
  double b_;
  double l_;
  ScalarConcave true_penalty_;
  Coordinate run_penalty_;
};

/// sum_t support(F_t, A_t^T y) - psi*(y): an upper bound on the offline
/// optimum for every y (+inf when y is outside the conjugate domain).
double dual_objective(const Objective& obj, const std::vector<Step>& steps, const DualPoint& y);

}  // namespace smoothgreed
