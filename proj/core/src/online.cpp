#include "smoothgreed/online.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace smoothgreed {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void finish(RunTrace& tr, const Objective& obj, const State& s) {
  tr.u_final = s.u;
  tr.y_final = obj.min_dual(s);
  tr.P = obj.true_value(s);
  tr.P_run = obj.run_value(s);
  tr.conj_final = obj.true_conjugate(tr.y_final);
  tr.D = tr.sum_sigma - tr.conj_final;
  tr.curvature = obj.curvature();
  tr.monotone_objective = obj.monotone();
}

void account(RunTrace& tr, StepRecord rec) {
  tr.sum_sigma += rec.sigma;
  tr.sum_correction += rec.correction;
  tr.sum_sq_norm += rec.sq_norm;
  tr.sum_gap += rec.gap;
  if (rec.fallback) ++tr.fallbacks;
  tr.steps.push_back(std::move(rec));
}

bool needs_shift(const DualPoint& y) {
  return y.v.size() > 0 && y.v.cwiseAbs().maxCoeff() >= 0.5 * kDefaultSlopeCap;
}

}  // namespace

const char* to_string(Algorithm a) { return a == Algorithm::sequential ? "seq" : "sim"; }

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "seq" || s == "sequential") return Algorithm::sequential;
  if (s == "sim" || s == "simultaneous") return Algorithm::simultaneous;
  throw std::invalid_argument("unknown algorithm: " + s);
}

double RunTrace::realized_beta() const {
  if (!(P > 0.0)) return kInf;
  return (P_run - conj_final) / P;
}

RunTrace run_sequential(const Objective& obj, const std::vector<Step>& steps) {
  RunTrace tr;
  tr.algorithm = Algorithm::sequential;
  tr.steps.reserve(steps.size());
  State s = obj.origin();
  DualPoint y = obj.min_dual(s);
  if (needs_shift(y)) {
    // Boundary supergradient is infinite: start from a point just inside the cone.
    State shifted = s;
    shifted.u.array() += 1e-8;
    y = obj.min_dual(shifted);
    tr.interior_shift = true;
  }
  double value = obj.run_value(s);
  for (const Step& step : steps) {
    obj.check_step(step);
    StepRecord rec;
    rec.y = y.v;
    rec.z = adjoint(step, y);
    const SupportResult sup = support(step.F, rec.z);
    rec.x = sup.argmax;
    rec.sigma = sup.value;
    rec.pairing = rec.x.dot(rec.z);
    rec.gap = rec.sigma - rec.pairing;
    rec.sq_norm = image_sq_norm(step, rec.x);
    obj.advance(s, step, rec.x);
    const DualPoint next = obj.min_dual(s);
    rec.correction = rec.x.dot(adjoint(step, next) - rec.z);
    const double nv = obj.run_value(s);
    rec.gain = nv - value;
    value = nv;
    rec.u_after = s.u;
    account(tr, std::move(rec));
    y = next;
  }
  finish(tr, obj, s);
  return tr;
}

RunTrace run_simultaneous(const Objective& obj, const std::vector<Step>& steps) {
  RunTrace tr;
  tr.algorithm = Algorithm::simultaneous;
  tr.steps.reserve(steps.size());
  State s = obj.origin();
  double value = obj.run_value(s);
  for (const Step& step : steps) {
    obj.check_step(step);
    BestResponse br = obj.best_response(s, step);
    StepRecord rec;
    rec.x = std::move(br.x);
    rec.fallback = br.fallback;
    rec.y = br.dual.v;
    rec.z = adjoint(step, br.dual);
    rec.sigma = support(step.F, rec.z).value;
    rec.pairing = rec.x.dot(rec.z);
    rec.gap = rec.sigma - rec.pairing;
    rec.sq_norm = image_sq_norm(step, rec.x);
    obj.advance(s, step, rec.x);
    const double nv = obj.run_value(s);
    rec.gain = nv - value;
    value = nv;
    rec.u_after = s.u;
    account(tr, std::move(rec));
  }
  finish(tr, obj, s);
  return tr;
}

RunTrace run(Algorithm algo, const Objective& obj, const std::vector<Step>& steps) {
  return algo == Algorithm::sequential ? run_sequential(obj, steps) : run_simultaneous(obj, steps);
}

CertificateReport certify(const RunTrace& trace, const CertifyOptions& opts) {
  if (!(opts.beta >= 1.0)) throw std::invalid_argument("certify: beta must be >= 1");
  CertificateReport r;
  r.P = trace.P;
  r.D = trace.D;
  r.D_checked = trace.D + (opts.sequential_correction ? trace.sum_correction : 0.0);
  r.ratio_lb = trace.ratio_lb();
  r.beta = opts.beta;
  r.bound = 1.0 / opts.beta;
  r.alpha_used = 1.0 - opts.beta;
  r.slack = opts.beta * r.P - r.D_checked;
  const double tol = opts.rel_tol * std::max(1.0, std::abs(r.D));
  r.holds = std::isfinite(r.D) && r.slack >= -tol;
  return r;
}

GapReport duality_gap_diagnostics(const RunTrace& trace, std::optional<double> mu, double abs_tol) {
  GapReport g;
  const double tol = abs_tol * std::max(1.0, std::abs(trace.P_run));
  const double correction = trace.algorithm == Algorithm::sequential ? trace.sum_correction : 0.0;
  g.lemma_slack = trace.P_run - correction - trace.sum_sigma;
  if (g.lemma_slack < -tol) {
    g.passed = false;
    g.failure = "duality gap lemma violated";
  }
  for (const StepRecord& r : trace.steps) g.min_gain = std::min(g.min_gain, r.gain);
  if (trace.algorithm == Algorithm::simultaneous && !trace.steps.empty() && g.min_gain < -1e-12 * std::max(1.0, std::abs(trace.P_run))) {
    g.passed = false;
    if (g.failure.empty()) g.failure = "negative step gain in simultaneous run";
  }
  if (mu && std::isfinite(*mu) && *mu > 0.0) {
    g.regret_checked = true;
    g.regret_slack = trace.P_run + trace.sum_sq_norm / (2.0 * *mu) - trace.sum_sigma;
    if (g.regret_slack < -tol) {
      g.passed = false;
      if (g.failure.empty()) g.failure = "regret form of the duality gap lemma violated";
    }
  }
  return g;
}

double beta_unsmoothed_adwords() { return 2.0; }

double beta_smoothed_adwords() { return std::numbers::e / (std::numbers::e - 1.0); }

double beta_logdet_smoothed(double gamma) {
  return 1.0 + (1.0 + 1.0 / (std::numbers::e - 1.0)) * gamma;
}

void write_trace_jsonl(std::ostream& os, const RunTrace& trace) {
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const StepRecord& r = trace.steps[t];
    nlohmann::json j = {{"t", t + 1},
                        {"x", to_std(r.x)},
                        {"y", to_std(r.y)},
                        {"z", to_std(r.z)},
                        {"u", to_std(r.u_after)},
                        {"gain", r.gain},
                        {"sigma", r.sigma},
                        {"pairing", r.pairing},
                        {"correction", r.correction},
                        {"sq_norm", r.sq_norm}};
    if (r.fallback) j["fallback"] = true;
    os << j.dump() << '\n';
  }
}

nlohmann::json trace_summary(const RunTrace& trace, const CertificateReport& cert) {
  return {{"algo", to_string(trace.algorithm)},
          {"steps", trace.steps.size()},
          {"P", trace.P},
          {"P_run", trace.P_run},
          {"D", trace.D},
          {"ratio_lb", trace.ratio_lb()},
          {"alpha_used", cert.alpha_used},
          {"beta", cert.beta},
          {"bound", cert.bound},
          {"D_checked", cert.D_checked},
          {"certificate_holds", cert.holds},
          {"sum_correction", trace.sum_correction},
          {"interior_shift", trace.interior_shift},
          {"fallbacks", trace.fallbacks},
          {"u_final", to_std(trace.u_final)}};
}

}  // namespace smoothgreed
