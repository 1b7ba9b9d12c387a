#include "smoothgreed/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace smoothgreed {

namespace {

constexpr double kE = std::numbers::e;

template <class F>
double golden_argmin(const F& f, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

double finite_slope0(const ScalarConcave& base) {
  const double s = base.right_slope_at_zero();
  return s >= base.slope_cap() ? kInf : s;
}

class Designer {
 public:
  explicit Designer(const DesignSpec& spec)
      : spec_(spec),
        h_(spec.horizon / static_cast<double>(spec.d)),
        slope0_(finite_slope0(spec.base)),
        c_(spec.variant == DesignVariant::sequential ? spec.c : 0.0),
        psi_(spec.d + 1) {
    for (std::size_t t = 0; t <= spec.d; ++t) psi_[t] = spec.base.value(h_ * static_cast<double>(t));
    if (std::isinf(slope0_)) {
      // local power law psi'(u) ~ u^q from two slopes inside the first cell
      const double q = std::log2(spec.base.supergrad(h_).lo / spec.base.supergrad(0.5 * h_).lo);
      head_ = std::clamp(q, -1.0 + 1e-6, -1e-6);
    }
  }

  double h() const { return h_; }
  std::optional<double> head_exponent() const { return head_; }

  // Greedy forward construction: smallest feasible y[t] in [0, y[t-1]].
  bool construct(double beta, std::vector<double>& y) const {
    const std::size_t d = spec_.d;
    y.assign(d + 1, 0.0);
    const bool rect = std::isinf(slope0_);
    y[0] = rect ? kInf : slope0_;
    double integral = 0.0;
    for (std::size_t t = 1; t <= d; ++t) {
      const double u = h_ * static_cast<double>(t);
      const double prev = y[t - 1];
      const bool first_rect = rect && t == 1;
      const double bound = beta * psi_[t];
      auto f = [&](double v) {
        const double conj = spec_.base.conjugate(v);
        if (conj == -kInf) return kInf;
        const double area = first_rect ? h_ * v / (*head_ + 1.0) : 0.5 * h_ * (prev + v);
        const double lag = c_ > 0.0 ? c_ * (slope0_ - v) : 0.0;
        return integral + area - conj + lag - bound - 1e-12 * std::max(1.0, bound);
      };
      const double cap = first_rect ? 16.0 * spec_.base.supergrad(u).lo : prev;
      double v;
      if (t == d && spec_.tail == TailMode::zero) {
        if (!(f(0.0) <= 0.0)) return false;
        v = 0.0;
      } else {
        double vmin = golden_argmin(f, 0.0, cap);
        // conjugates finite only at the slope (linear pieces) need the endpoint itself
        if (f(cap) < f(vmin)) vmin = cap;
        if (!(f(vmin) <= 0.0)) return false;
        if (f(0.0) <= 0.0) {
          v = 0.0;
        } else {
          double lo = 0.0;
          double hi = vmin;
          for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) <= 0.0 ? hi : lo) = mid;
          }
          v = hi;
        }
      }
      y[t] = v;
      if (first_rect) {
        y[0] = v;
        integral += h_ * v / (*head_ + 1.0);
      } else {
        integral += 0.5 * h_ * (prev + v);
      }
    }
    return true;
  }

 private:
  const DesignSpec& spec_;
  double h_;
  double slope0_;
  double c_;
  std::vector<double> psi_;
  std::optional<double> head_;
};

void validate(const DesignSpec& spec) {
  if (spec.d < 10) throw std::invalid_argument("design grid needs d >= 10");
  if (!(spec.horizon > 0.0)) throw std::invalid_argument("design horizon must be positive");
  if (!(spec.beta_tol > 0.0) || !(spec.feas_tol > 0.0)) {
    throw std::invalid_argument("design tolerances must be positive");
  }
  if (spec.verify_factor < 1) throw std::invalid_argument("verify_factor must be >= 1");
  if (!spec.base.monotone()) throw std::invalid_argument("design needs a monotone base function");
  if (spec.variant == DesignVariant::sequential) {
    if (!(spec.c > 0.0)) throw std::invalid_argument("sequential design needs c > 0");
    if (std::isinf(finite_slope0(spec.base))) {
      throw std::invalid_argument("sequential design needs a finite slope at 0");
    }
  }
  const double h = spec.horizon / static_cast<double>(spec.d);
  for (std::size_t t = 1; t <= spec.d; ++t) {
    if (!(spec.base.value(h * static_cast<double>(t)) > 0.0)) {
      throw std::invalid_argument("design needs psi(u) > 0 on the grid");
    }
  }
}

}  // namespace

DesignResult design_optimal(const DesignSpec& spec) {
  validate(spec);
  Designer designer(spec);
  std::vector<double> y;
  std::vector<double> best;
  std::size_t steps = 0;

  double lo = 1.0;
  double hi;
  if (designer.construct(lo, best)) {
    hi = lo;
  } else {
    hi = std::max(verify_beta(spec.base, spec.horizon, spec.d).sup_beta, 1.0 + spec.beta_tol);
    if (spec.variant == DesignVariant::sequential) hi += spec.c * finite_slope0(spec.base) / spec.base.value(designer.h());
    int doublings = 0;
    while (!designer.construct(hi, best)) {
      lo = hi;
      hi *= 2.0;
      if (++doublings > 40) throw DesignInfeasible("no feasible smoothing found for any beta");
    }
    while (hi - lo > spec.beta_tol) {
      const double mid = 0.5 * (lo + hi);
      ++steps;
      if (designer.construct(mid, y)) {
        hi = mid;
        best.swap(y);
      } else {
        lo = mid;
      }
    }
  }

  best = make_monotone(std::move(best));
  DesignResult r{SmoothedScalar::from_grid(designer.h(), best, spec.tail, designer.head_exponent()), 0.0, hi, 0.0, false,
                 steps, spec};
  const double c = spec.variant == DesignVariant::sequential ? spec.c : 0.0;
  const VerifyResult v = verify_beta(r.smoothed, spec.base, c, spec.horizon, spec.verify_factor * spec.d);
  r.beta = std::max(hi, v.sup_beta);
  r.max_residual = -kInf;
  for (std::size_t j = 0; j < v.u.size(); ++j) {
    r.max_residual = std::max(r.max_residual, (v.beta_u[j] - r.beta) * spec.base.value(v.u[j]));
  }
  r.certified = r.max_residual <= spec.feas_tol;
  return r;
}

DesignResult design_sequential(DesignSpec spec) {
  spec.variant = DesignVariant::sequential;
  return design_optimal(spec);
}

VerifyResult verify_beta(const SmoothedScalar& smoothed, const ScalarConcave& base, double c,
                         double u_max, std::size_t points) {
  points = std::max<std::size_t>(points, 1);
  const double slope0 = c != 0.0 ? finite_slope0(base) : 0.0;
  if (std::isinf(slope0)) throw std::invalid_argument("lag term needs a finite slope at 0");
  VerifyResult r;
  r.sup_beta = -kInf;
  std::vector<double> us;
  // approach the right limit at 0, where the grid itself never looks
  for (int k = 4; k >= 1; --k) us.push_back(u_max / static_cast<double>(points) * std::pow(10.0, -k));
  for (std::size_t j = 1; j <= points; ++j) {
    us.push_back(u_max * static_cast<double>(j) / static_cast<double>(points));
  }
  r.u.reserve(us.size());
  r.beta_u.reserve(us.size());
  for (double u : us) {
    const double yu = smoothed.derivative(u);
    const double lhs = smoothed.value(u) + c * (slope0 - yu) - base.conjugate(yu);
    const double b = lhs / base.value(u);
    r.u.push_back(u);
    r.beta_u.push_back(b);
    if (b > r.sup_beta) {
      r.sup_beta = b;
      r.argmax_u = u;
    }
  }
  return r;
}

VerifyResult verify_beta(const ScalarConcave& base, double u_max, std::size_t points) {
  points = std::max<std::size_t>(points, 1);
  std::vector<double> us;
  for (std::size_t j = 1; j <= points; ++j) {
    us.push_back(u_max * static_cast<double>(j) / static_cast<double>(points));
  }
  for (double b : base.breakpoints()) {
    if (b > 0.0 && b <= u_max) us.push_back(b);
  }
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  VerifyResult r;
  r.sup_beta = -kInf;
  for (double u : us) {
    if (!(base.value(u) > 0.0)) continue;
    const double b = 1.0 - alpha_at(base, u);
    r.u.push_back(u);
    r.beta_u.push_back(b);
    if (b > r.sup_beta) {
      r.sup_beta = b;
      r.argmax_u = u;
    }
  }
  return r;
}

double kappa_of(const SmoothedScalar& smoothed, const ScalarConcave& base, double c, double u_max,
                std::size_t points) {
  if (c == 0.0) return 0.0;
  points = std::max<std::size_t>(points, 1);
  const double y0 = smoothed.derivative(0.0);
  double best = 0.0;
  for (std::size_t j = 1; j <= points; ++j) {
    const double u = u_max * static_cast<double>(j) / static_cast<double>(points);
    best = std::max(best, c * (y0 - smoothed.derivative(u)) / base.value(u));
  }
  return best;
}

SmoothedScalar nesterov_penalty_smoothing(double l, double theta, double linear_part, std::size_t d) {
  if (!(l > 0.0) || !(theta > 0.0)) throw std::invalid_argument("smoothing needs l, theta > 0");
  const double gamma = std::log1p(l * (kE - 1.0) / theta);
  return SmoothedScalar::exp_penalty(ExpPenaltyProfile{theta, gamma, l, 1.0}, linear_part, d);
}

SmoothedScalar nesterov_logdet_smoothing(std::size_t n, double l, double b, std::size_t d) {
  if (n == 0 || !(l > 0.0) || !(b > 0.0)) throw std::invalid_argument("smoothing needs n >= 1, l, b > 0");
  const double theta = std::log1p(1.0 / static_cast<double>(n));
  const double gamma = std::log1p(l / theta);
  return SmoothedScalar::exp_penalty(ExpPenaltyProfile{theta, gamma, l, b}, 0.0, d);
}

SmoothedScalar adwords_nesterov_smoothing(std::size_t d) {
  return nesterov_penalty_smoothing(1.0, 1.0, 1.0, d);
}

NesterovSweep nesterov_sweep(const ScalarConcave& base, double u_prime, std::size_t points,
                             const std::vector<double>& gammas) {
  const double y0 = finite_slope0(base);
  if (std::isinf(y0)) throw std::invalid_argument("sweep needs a finite slope at 0");
  NesterovSweep sweep;
  for (double g : gammas) {
    if (!(g > 0.0)) continue;
    const double kappa = y0 / std::expm1(g);
    const ExpPenaltyProfile prof{kappa * (kE - 1.0), g, y0, u_prime};
    const SmoothedScalar s = SmoothedScalar::exp_penalty(prof, y0, 16);
    const double beta = verify_beta(s, base, 0.0, u_prime, points).sup_beta;
    sweep.gammas.push_back(g);
    sweep.betas.push_back(beta);
    if (beta < sweep.best_beta) {
      sweep.best_beta = beta;
      sweep.best_gamma = g;
    }
  }
  return sweep;
}

AdwordsCertificateReport adwords_certificate_check(double tol) {
  const double beta = adwords_beta();
  auto f = [](double u) { return std::exp(1.0 - u) / (kE - 1.0); };
  auto psi = [](double u) { return std::min(u, 1.0); };
  auto y = [](double u) { return std::max((kE - std::exp(u)) / (kE - 1.0), 0.0); };
  auto conj = [](double v) { return v >= 1.0 ? 0.0 : v - 1.0; };
  auto simpson = [](const auto& g, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = g(a) + g(b);
    for (int i = 1; i < n; ++i) s += g(a + h * i) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  const double far = 60.0;

  AdwordsCertificateReport rep;
  rep.normalization = simpson([&](double u) { return f(u) * psi(u); }, 0.0, 1.0, 2000) +
                      simpson([&](double u) { return f(u) * psi(u); }, 1.0, far, 20000);
  rep.min_f = kInf;
  for (int i = 0; i <= 500; ++i) {
    const double u = 5.0 * i / 500.0;
    rep.min_f = std::min(rep.min_f, f(u));
    const double tail = simpson(f, u, far, 20000);
    // superdifferential of psi* at y(u): {1} on (0, 1), [1, inf) at 0, [0, 1] at 1
    const double yu = y(u);
    double lo = 1.0, hi = 1.0;
    if (yu <= 0.0) hi = kInf;
    if (yu >= 1.0) lo = 0.0;
    const double fu = f(u);
    const double resid = std::max({0.0, fu * lo - tail, tail - fu * hi});
    rep.stationarity_residual = std::max(rep.stationarity_residual, resid);
    const double lhs = (u > 0.0 ? simpson(y, 0.0, std::min(u, 1.0), 2000) : 0.0) - conj(yu);
    rep.slackness_residual = std::max(rep.slackness_residual, std::abs(fu * (lhs - beta * psi(u))));
    rep.max_violation = std::max(rep.max_violation, lhs - beta * psi(u));
  }
  rep.passed = std::abs(rep.normalization - 1.0) <= tol && rep.min_f >= 0.0 &&
               rep.stationarity_residual <= tol && rep.slackness_residual <= tol &&
               rep.max_violation <= tol;
  return rep;
}

double adwords_beta() { return kE / (kE - 1.0); }

double sequential_adwords_ratio(double c) { return -std::expm1(-1.0 / (1.0 + c)); }

std::vector<DesignRow> design_table(const DesignResult& r) {
  const SmoothedScalar& s = r.smoothed;
  const ScalarConcave& base = r.spec.base;
  const double c = r.spec.variant == DesignVariant::sequential ? r.spec.c : 0.0;
  const double slope0 = c != 0.0 ? finite_slope0(base) : 0.0;
  std::vector<DesignRow> rows;
  rows.reserve(s.y().size());
  for (std::size_t t = 0; t < s.y().size(); ++t) {
    const double u = s.h() * static_cast<double>(t);
    const double yu = s.y()[t];
    const double psi = base.value(u);
    const double psiS = s.cumint()[t];
    double b = 0.0;
    if (psi > 0.0) b = (psiS + c * (slope0 - yu) - base.conjugate(yu)) / psi;
    rows.push_back({u, yu, psi, psiS, b});
  }
  return rows;
}

nlohmann::json design_summary(const DesignResult& r) {
  nlohmann::json j = {{"beta", r.beta},
          {"ratio", r.ratio()},
          {"d", r.spec.d},
          {"variant", to_string(r.spec.variant)},
          {"c", r.spec.variant == DesignVariant::sequential ? r.spec.c : 0.0},
          {"horizon", r.spec.horizon},
          {"tail", r.spec.tail == TailMode::zero ? "zero" : "hold_last"},
          {"beta_grid", r.beta_grid},
          {"max_residual", r.max_residual},
          {"certified", r.certified},
          {"base", r.spec.base.to_json()}};
  if (r.smoothed.head_exponent()) j["head_exponent"] = *r.smoothed.head_exponent();
  return j;
}

const char* to_string(DesignVariant v) {
  return v == DesignVariant::sequential ? "seq" : "sim";
}

}  // namespace smoothgreed
