#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "smoothgreed/scalar_fun.hpp"
#include "smoothgreed/smoothed_scalar.hpp"

namespace smoothgreed {

enum class DesignVariant { simultaneous, sequential };

struct DesignSpec {
  ScalarConcave base = ScalarConcave::cap();
  /// Plateau point (tail zero) or finite horizon (tail hold_last).
  double horizon = 1.0;
  std::size_t d = 1000;
  TailMode tail = TailMode::zero;
  DesignVariant variant = DesignVariant::simultaneous;
  /// Weight of the sequential lag term; ignored for the simultaneous variant.
  double c = 0.0;
  double beta_tol = 1e-4;
  double feas_tol = 1e-6;
  /// Verification grid resolution relative to the design grid.
  std::size_t verify_factor = 4;
};

struct DesignResult {
  SmoothedScalar smoothed;
  /// Certified beta: the verified supremum, never below the bisection value.
  double beta = 0.0;
  /// Smallest beta the grid construction accepted.
  double beta_grid = 0.0;
  /// max over the verification grid of lhs(u) - beta * psi(u) (<= 0 when certified).
  double max_residual = 0.0;
  bool certified = false;
  std::size_t bisection_steps = 0;
  DesignSpec spec;

  double ratio() const { return 1.0 / beta; }
};

/// Raised when no beta up to the search limit admits a grid solution.
class DesignInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimizes beta over non-increasing derivative grids subject to
///   int_0^u y - psi*(y(u)) [+ c (psi'(0) - y(u))] <= beta psi(u)
/// at every grid point, then verifies the result on a finer grid.
DesignResult design_optimal(const DesignSpec& spec);
/// design_optimal with the sequential variant forced.
DesignResult design_sequential(DesignSpec spec);

struct VerifyResult {
  double sup_beta = 0.0;
  double argmax_u = 0.0;
  std::vector<double> u;
  std::vector<double> beta_u;  // pointwise ratio at each u
};

/// Pointwise sup of (psiS(u) + c (psi'(0) - y(u)) - psi*(y(u))) / psi(u) over
/// u = j * u_max / points, j = 1..points.
VerifyResult verify_beta(const SmoothedScalar& smoothed, const ScalarConcave& base, double c,
                         double u_max, std::size_t points);
/// Same ratio for the unsmoothed function (y = its own minimal supergradient),
/// i.e. sup of 1 - alpha_at(u); breakpoints are added to the grid.
VerifyResult verify_beta(const ScalarConcave& base, double u_max, std::size_t points);

/// sup over u = j * u_max / points of c (y(0) - y(u)) / psi(u).
double kappa_of(const SmoothedScalar& smoothed, const ScalarConcave& base, double c, double u_max,
                std::size_t points);

/// Smoothed penalty u -> -l (u - 1)_+ with gamma = log(1 + l (e - 1) / theta).
SmoothedScalar nesterov_penalty_smoothing(double l, double theta, double linear_part = 0.0,
                                          std::size_t d = 1000);
/// Smoothed budget penalty u -> -l (u - b)_+ with theta = log(1 + 1/n) and
/// gamma = log(1 + l / theta).
SmoothedScalar nesterov_logdet_smoothing(std::size_t n, double l, double b, std::size_t d = 1000);
/// u + smoothed -(u - 1)_+ with theta = l = 1: derivative ((e - e^u)/(e - 1))_+.
SmoothedScalar adwords_nesterov_smoothing(std::size_t d = 1000);

struct NesterovSweep {
  double best_beta = kInf;
  double best_gamma = 0.0;
  std::vector<double> gammas;
  std::vector<double> betas;
};

/// Exponential smoothings that start at slope y0 and reach 0 at u_prime:
///   y(u) = y0 (1 - (e^{g u / u_prime} - 1) / (e^g - 1)),
/// i.e. the closed form of nesterov_penalty_smoothing with l = y0,
/// theta = y0 (e - 1)/(e^g - 1) and the kink moved to u_prime. Each member
/// is verified against `base`.
NesterovSweep nesterov_sweep(const ScalarConcave& base, double u_prime, std::size_t points,
                             const std::vector<double>& gammas);

struct AdwordsCertificateReport {
  double normalization = 0.0;        // int f psi, expected 1
  double min_f = 0.0;                // expected >= 0
  double stationarity_residual = 0.0;
  double slackness_residual = 0.0;   // sup |f (lhs - beta psi)|
  double max_violation = 0.0;        // sup (lhs - beta psi)_+
  bool passed = false;
};

/// Quadrature check of the dual certificate f(u) = e^{1-u}/(e-1) for the
/// adwords smoothing y(u) = ((e - e^u)/(e - 1))_+ with beta = e/(e - 1).
AdwordsCertificateReport adwords_certificate_check(double tol = 1e-6);

/// Closed forms used as anchors.
double adwords_beta();                       // e / (e - 1)
double sequential_adwords_ratio(double c);   // 1 - exp(-1/(1 + c))

struct DesignRow {
  double u, y, psi, psiS, beta_u;
};
/// Per-grid-point table of a design (t = 0..d; beta_u is 0 at u = 0).
std::vector<DesignRow> design_table(const DesignResult& r);
nlohmann::json design_summary(const DesignResult& r);

const char* to_string(DesignVariant v);

}  // namespace smoothgreed
