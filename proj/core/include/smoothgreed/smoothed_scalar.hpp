#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "smoothgreed/scalar_fun.hpp"

namespace smoothgreed {

/// Behaviour of a grid smoothing beyond its last sample.
enum class TailMode {
  zero,       // derivative 0 past the horizon (plateau)
  hold_last,  // derivative frozen at the last sample
};

/// Closed-form smoothed derivative of the penalty u -> -l (u - b)_+ :
///   y(u) = kappa (1 - exp(gamma u / b)),  kappa = theta / (e - 1),
/// clipped at -l from the point where it first reaches -l.
struct ExpPenaltyProfile {
  double theta = 1.0;
  double gamma = 1.0;
  double l = 1.0;
  double b = 1.0;

  double kappa() const;
  /// First u with y(u) = -l.
  double clip_point() const;
  double derivative(double u) const;
  /// Integral of derivative over [0, u].
  double integral(double u) const;
};

/// Concave function psiS on [0, inf) with psiS(0) = 0, given by a
/// non-increasing derivative. Two representations:
///  - grid: samples y[0..d] at spacing h, linearly interpolated, with
///    trapezoid prefix integrals (exact for the interpolant); an optional
///    head exponent q in (-1, 0) replaces the first cell by y[1] (u/h)^q,
///    for base functions whose slope at 0 is infinite;
///  - analytic: linear_part + ExpPenaltyProfile, with a sampled grid kept
///    for export only.
class SmoothedScalar {
 public:
  static SmoothedScalar from_grid(double h, std::vector<double> y, TailMode tail,
                                  std::optional<double> head_exponent = std::nullopt);
  /// Analytic smoothing u -> linear_part * u + integral of the profile.
  /// The export grid covers [0, export_horizon] with d cells; a
  /// non-positive horizon picks 1.25 times the clip point.
  static SmoothedScalar exp_penalty(const ExpPenaltyProfile& profile, double linear_part = 0.0,
                                    std::size_t d = 1000, double export_horizon = 0.0);

  double value(double u) const;
  double derivative(double u) const;
  SupergradInterval supergrad(double u) const;
  /// {u >= 0 : s in supergrad(u)}; empty as [inf, inf].
  SupergradInterval slope_preimage(double s) const;
  /// Largest |y'|, i.e. the Lipschitz constant of the derivative.
  double max_curvature() const;

  double h() const { return h_; }
  std::size_t d() const { return y_.empty() ? 0 : y_.size() - 1; }
  double horizon() const { return h_ * static_cast<double>(d()); }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& cumint() const { return cumint_; }
  TailMode tail_mode() const { return tail_; }
  bool analytic() const { return profile_.has_value(); }
  const std::optional<ExpPenaltyProfile>& profile() const { return profile_; }
  double linear_part() const { return linear_part_; }
  const std::optional<double>& head_exponent() const { return head_; }

  nlohmann::json to_json() const;
  static SmoothedScalar from_json(const nlohmann::json& j);

 private:
  SmoothedScalar() = default;
  void build_cumint();
  double grid_derivative(double u) const;

  double h_ = 1.0;
  std::vector<double> y_;
  std::vector<double> cumint_;
  TailMode tail_ = TailMode::zero;
  std::optional<ExpPenaltyProfile> profile_;
  double linear_part_ = 0.0;
  std::optional<double> head_;
};

/// Non-increasing running minimum of a sequence.
std::vector<double> make_monotone(std::vector<double> y);

/// One coordinate of a separable objective: either a raw concave function or
/// a smoothing of one.
class Coordinate {
 public:
  Coordinate(ScalarConcave f) : impl_(std::move(f)) {}
  Coordinate(SmoothedScalar s) : impl_(std::move(s)) {}

  double value(double u) const;
  SupergradInterval supergrad(double u) const;
  SupergradInterval slope_preimage(double s) const;
  bool smoothed() const { return std::holds_alternative<SmoothedScalar>(impl_); }
  const ScalarConcave* raw() const { return std::get_if<ScalarConcave>(&impl_); }
  const SmoothedScalar* smoothing() const { return std::get_if<SmoothedScalar>(&impl_); }

 private:
  std::variant<ScalarConcave, SmoothedScalar> impl_;
};

}  // namespace smoothgreed
