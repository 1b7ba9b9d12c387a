#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace smoothgreed {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Stand-in for an infinite supergradient at the boundary of the domain (u = 0).
inline constexpr double kDefaultSlopeCap = 1e12;

/// Closed interval [lo, hi] of slopes.
struct SupergradInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double y, double tol = 0.0) const { return y >= lo - tol && y <= hi + tol; }
  bool singleton() const { return lo == hi; }
};

/// One-dimensional upper semi-continuous concave function on [0, inf) with
/// value(0) == 0.
///
/// Piecewise-linear members (cap, linear, neg_plus_penalty and general
/// piecewise_linear) share a breakpoint/slope representation: slopes[i] holds
/// on [breakpoints[i], breakpoints[i+1]) and the last slope extends to
/// infinity. Conjugates are closed-form for every kind.
class ScalarConcave {
 public:
  enum class Kind { cap, piecewise_linear, log1p, sqrt, power, linear, neg_plus_penalty };

  /// u -> scale * min(u, 1)
  static ScalarConcave cap(double scale = 1.0);
  /// breakpoints must start at 0 and increase strictly; slopes must not increase.
  static ScalarConcave piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes);
  /// u -> log(1 + u)
  static ScalarConcave log1p();
  /// u -> sqrt(u)
  static ScalarConcave sqrt();
  /// u -> u^p, p in (0, 1)
  static ScalarConcave power(double p);
  /// u -> slope * u
  static ScalarConcave linear(double slope);
  /// u -> -l * (u - b)_+
  static ScalarConcave neg_plus_penalty(double l, double b);

  Kind kind() const { return kind_; }

  /// Throws std::domain_error for u < 0.
  double value(double u) const;
  /// inf_{u >= 0} y*u - f(u); -inf outside the domain.
  double conjugate(double y) const;
  /// Superdifferential on the domain [0, inf). At u = 0 the upper end is the slope cap.
  SupergradInterval supergrad(double u) const;
  /// The set {u >= 0 : s in supergrad(u)} as [lo, hi]. Empty sets are reported
  /// as [inf, inf]; an unbounded set has hi = inf.
  SupergradInterval slope_preimage(double s) const;
  /// Right derivative at 0, clipped to the slope cap.
  double right_slope_at_zero() const;

  bool monotone() const;
  bool is_piecewise_linear() const { return !breakpoints_.empty(); }

  double slope_cap() const { return slope_cap_; }
  void set_slope_cap(double cap) { slope_cap_ = cap; }

  /// Exponent for power/sqrt kinds.
  double exponent() const { return exponent_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& slopes() const { return slopes_; }

  nlohmann::json to_json() const;
  /// Accepts {"kind": ..., "params": {...}}; throws std::invalid_argument on bad input.
  static ScalarConcave from_json(const nlohmann::json& j);

 private:
  ScalarConcave(Kind kind) : kind_(kind) {}
  void finish_piecewise();

  Kind kind_;
  double exponent_ = 0.0;
  // Constructor arguments kept for round-tripping descriptors.
  double param_a_ = 0.0;
  double param_b_ = 0.0;
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<double> values_;  // f(breakpoints_[i])
  double slope_cap_ = kDefaultSlopeCap;
};

/// inf over y in supergrad(u) of conjugate(y) / value(u). Requires value(u) > 0.
double alpha_at(const ScalarConcave& f, double u);

/// Infimum of alpha_at over a logarithmic grid on (0, u_max]. Closed forms take
/// precedence for cap, linear and power kinds.
double alpha_bar(const ScalarConcave& f, double u_max, std::size_t grid = 10000);

}  // namespace smoothgreed
