#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "smoothgreed/smoothed_scalar.hpp"

namespace smoothgreed {

/// Compact convex feasible set containing 0.
struct FeasibleSet {
  enum class Kind { simplex, unit_interval, box };

  Kind kind = Kind::simplex;
  std::size_t k = 1;
  Eigen::VectorXd upper;  // box only

  static FeasibleSet simplex(std::size_t k);
  static FeasibleSet unit_interval();
  static FeasibleSet box(Eigen::VectorXd upper);

  bool contains(const Eigen::VectorXd& x, double tol = 1e-12) const;
  nlohmann::json to_json() const;
  static FeasibleSet from_json(const nlohmann::json& j);
};

struct SupportResult {
  double value = 0.0;
  Eigen::VectorXd argmax;
};

/// max_{x in F} <z, x> with lowest-index tie-breaking; the origin wins ties at 0.
SupportResult support(const FeasibleSet& F, const Eigen::VectorXd& z);

/// x -> c .* x on the orthant.
struct DiagonalMap {
  Eigen::VectorXd c;
};
/// x -> (c^T x, B x) on the orthant R^{1+n}.
struct StackedMap {
  Eigen::VectorXd c;
  Eigen::MatrixXd B;
};
/// x (scalar) -> (x a a^T, x) on PSD x R_+.
struct RankOneMap {
  Eigen::VectorXd a;
};
using StepMap = std::variant<DiagonalMap, StackedMap, RankOneMap>;

struct Step {
  StepMap A;
  FeasibleSet F;

  std::size_t input_dim() const;
  nlohmann::json to_json() const;
  static Step from_json(const nlohmann::json& j);
};

/// Dual point. On the orthant only `v` is used; on PSD x R_+ the matrix part
/// sits in `Y` and the budget multiplier in v[0].
struct DualPoint {
  Eigen::VectorXd v;
  Eigen::MatrixXd Y;
};

/// A_t^T y as a vector in the input space of the step.
Eigen::VectorXd adjoint(const Step& step, const DualPoint& y);
/// ||A_t x||^2 (Frobenius on the matrix part).
double image_sq_norm(const Step& step, const Eigen::VectorXd& x);
/// Checks A_t maps into the cone (nonnegative entries).
void validate_step(const Step& step);

struct LpBallDistance {
  double value = 0.0;
  double radius = 0.0;            // r_u; 0 when u is inside the ball
  Eigen::VectorXd subgrad_lo;     // endpoints of the subgradient segment of d
  Eigen::VectorXd subgrad_hi;
};

/// l1 distance from a nonnegative u to the unit l_p ball (p >= 1, p may be
/// infinity), via the cap u ^ r_u with ||u ^ r_u||_p = 1.
LpBallDistance lp_ball_distance(const Eigen::VectorXd& u, double p);

/// min over steps and simplex vertices of c^T x / 1^T B x (terms with
/// 1^T B x = 0 are skipped). Diagonal steps count as c = B = diag(bids).
double theta_of_instance(const std::vector<Step>& steps);

/// (1 + eps) * max c_j / B_ij over B_ij > 0.
double l_bound_lp(const std::vector<Step>& steps, double eps = 1e-6);

/// Inverse state for u -> logdet(A0 + sum x_s a_s a_s^T), maintained by
/// Sherman-Morrison rank-one updates with periodic refactorization.
class LogDetState {
 public:
  explicit LogDetState(Eigen::MatrixXd A0);

  /// a^T Y a for the current inverse Y.
  double quad(const Eigen::VectorXd& a) const;
  /// log(1 + x a^T Y a).
  double step_gain(const Eigen::VectorXd& a, double x) const;
  /// Accept M += x a a^T.
  void update(const Eigen::VectorXd& a, double x);
  /// Recompute Y from a Cholesky factorization of M.
  void refactorize();
  /// ||Y M - I||_inf (max absolute entry).
  double drift() const;

  const Eigen::MatrixXd& M() const { return M_; }
  const Eigen::MatrixXd& Y() const { return Y_; }
  /// Sum of accepted step gains = logdet(M) - logdet(A0).
  double gain() const { return gain_; }
  std::size_t updates() const { return updates_; }
  std::size_t refactorizations() const { return refactorizations_; }

  static constexpr std::size_t kRefactorEvery = 128;
  static constexpr double kDriftLimit = 1e-6;

 private:
  Eigen::MatrixXd M_;
  Eigen::MatrixXd Y_;
  double gain_ = 0.0;
  std::size_t updates_ = 0;
  std::size_t since_refactor_ = 0;
  std::size_t refactorizations_ = 0;
};

double logdet_step_gain(const LogDetState& state, const Eigen::VectorXd& a, double x);

/// logdet of a symmetric positive definite matrix; throws if not PD.
double logdet_spd(const Eigen::MatrixXd& M);

struct AntitoneReport {
  bool passed = true;
  double max_violation = 0.0;
  std::size_t trials = 0;
  std::string assumption = "antitone supergradients";
};

/// Samples ordered pairs u <= u' on [0, u_max]^n and checks that the minimal
/// supergradient at u dominates the maximal one at u' coordinate-wise.
AntitoneReport antitone_check(const std::vector<Coordinate>& coords, std::size_t trials,
                              std::uint64_t seed, double u_max = 4.0);
/// Orthant check for an arbitrary gradient map (grad(u) - grad(u') >= -tol).
AntitoneReport antitone_check_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad, std::size_t dim,
    std::size_t trials, std::uint64_t seed, double u_max = 4.0);
/// PSD check: (A0 + V)^{-1} - (A0 + U)^{-1} >= -1e-8 I for random U >= V >= 0.
AntitoneReport antitone_check_logdet(const Eigen::MatrixXd& A0, std::size_t trials,
                                     std::uint64_t seed);

}  // namespace smoothgreed
