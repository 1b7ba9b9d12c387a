#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "smoothgreed/cones.hpp"
#include "smoothgreed/objectives.hpp"

namespace smoothgreed {

enum class Algorithm { sequential, simultaneous };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct StepRecord {
  Eigen::VectorXd x;
  Eigen::VectorXd y;        // orthant part of the dual used at this step
  Eigen::VectorXd z;        // A_t^T y
  Eigen::VectorXd u_after;  // cumulative orthant point after the step
  double gain = 0.0;        // psi_run increase
  double sigma = 0.0;       // support(F_t, A_t^T y)
  double pairing = 0.0;     // <A_t x, y>
  double correction = 0.0;  // sequential: <A_t x, y_{t+1} - y_t>
  double sq_norm = 0.0;     // ||A_t x||^2
  double gap = 0.0;         // sigma - pairing
  bool fallback = false;
};

struct RunTrace {
  Algorithm algorithm = Algorithm::simultaneous;
  std::vector<StepRecord> steps;
  Eigen::VectorXd u_final;
  DualPoint y_final;        // minimal supergradient of psi_run at the final point
  double P = 0.0;           // true psi at the final point
  double P_run = 0.0;       // psi_run at the final point
  double conj_final = 0.0;  // psi*(y_final)
  double sum_sigma = 0.0;
  double sum_correction = 0.0;
  double sum_sq_norm = 0.0;
  double sum_gap = 0.0;
  double D = 0.0;           // sum_sigma - conj_final
  double curvature = 0.0;   // Lipschitz constant of grad psi_run
  bool interior_shift = false;
  std::size_t fallbacks = 0;
  bool monotone_objective = true;

  double ratio_lb() const { return D > 0.0 ? P / D : 1.0; }
  /// (psi_run(u) - psi*(y)) / psi(u) at the final point.
  double realized_beta() const;
};

/// Sequential updates: x_t maximizes <x, A_t^T y_t> over F_t and y_{t+1} is
/// the minimal supergradient of psi_run at the new point.
RunTrace run_sequential(const Objective& obj, const std::vector<Step>& steps);
/// Simultaneous updates through coordinate maximization of psi_run.
RunTrace run_simultaneous(const Objective& obj, const std::vector<Step>& steps);
RunTrace run(Algorithm algo, const Objective& obj, const std::vector<Step>& steps);

struct CertifyOptions {
  /// Claimed beta = 1 - alpha; the bound checked is beta * P >= D.
  double beta = 2.0;
  /// Add the realized lag sum_t <A_t x_t, y_{t+1} - y_t> to D (sequential runs).
  bool sequential_correction = false;
  double rel_tol = 1e-9;
};

struct CertificateReport {
  double P = 0.0;
  double D = 0.0;
  double D_checked = 0.0;  // D plus the lag correction when enabled
  double ratio_lb = 0.0;
  double beta = 0.0;
  double bound = 0.0;  // 1 / beta
  double alpha_used = 0.0;
  double slack = 0.0;  // beta * P - D_checked
  bool holds = false;
};

CertificateReport certify(const RunTrace& trace, const CertifyOptions& opts);

struct GapReport {
  bool passed = true;
  double lemma_slack = 0.0;   // psi_run(u) [- corrections] - sum sigma
  double regret_slack = kInf; // same plus sum ||A x||^2 / (2 mu)
  bool regret_checked = false;
  double min_gain = kInf;
  std::string failure;
};

/// Lemma-style duality gap checks for a finished run:
///   simultaneous: sum sigma <= psi_run(u)
///   sequential:   sum sigma <= psi_run(u) - sum corrections
/// plus the smooth form sum sigma <= psi_run(u) + sum ||A x||^2 / (2 mu) when
/// mu (1 / Lipschitz constant of grad psi_run) is finite.
GapReport duality_gap_diagnostics(const RunTrace& trace, std::optional<double> mu = {},
                                  double abs_tol = 1e-9);

/// Closed-form betas.
double beta_unsmoothed_adwords();           // 2
double beta_smoothed_adwords();             // e / (e - 1)
double beta_logdet_smoothed(double gamma);  // 1 + (1 + 1/(e - 1)) gamma

void write_trace_jsonl(std::ostream& os, const RunTrace& trace);
nlohmann::json trace_summary(const RunTrace& trace, const CertificateReport& cert);

}  // namespace smoothgreed
