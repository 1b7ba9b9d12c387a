#include "smoothgreed/smoothed_scalar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace smoothgreed {

double ExpPenaltyProfile::kappa() const { return theta / (std::numbers::e - 1.0); }

double ExpPenaltyProfile::clip_point() const {
  return b * std::log1p(l / kappa()) / gamma;
}

double ExpPenaltyProfile::derivative(double u) const {
  if (u >= clip_point()) return -l;
  return std::max(-kappa() * std::expm1(gamma * u / b), -l);
}

double ExpPenaltyProfile::integral(double u) const {
  const double uc = clip_point();
  const double k = kappa();
  auto smooth_part = [&](double v) { return k * (v - (b / gamma) * std::expm1(gamma * v / b)); };
  if (u <= uc) return smooth_part(u);
  return smooth_part(uc) - l * (u - uc);
}

SmoothedScalar SmoothedScalar::from_grid(double h, std::vector<double> y, TailMode tail,
                                         std::optional<double> head_exponent) {
  if (!(h > 0.0)) throw std::invalid_argument("smoothing grid step must be positive");
  if (y.size() < 2) throw std::invalid_argument("smoothing grid needs at least two samples");
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (!(y[i] <= y[i - 1])) {
      throw std::invalid_argument("smoothing derivative samples must be non-increasing");
    }
  }
  if (head_exponent && !(*head_exponent > -1.0 && *head_exponent < 0.0)) {
    throw std::invalid_argument("head exponent must lie in (-1, 0)");
  }
  SmoothedScalar s;
  s.h_ = h;
  s.y_ = std::move(y);
  s.tail_ = tail;
  s.head_ = head_exponent;
  s.build_cumint();
  return s;
}

SmoothedScalar SmoothedScalar::exp_penalty(const ExpPenaltyProfile& profile, double linear_part,
                                           std::size_t d, double export_horizon) {
  if (!(profile.theta > 0.0) || !(profile.gamma > 0.0) || !(profile.l > 0.0) ||
      !(profile.b > 0.0)) {
    throw std::invalid_argument("exp penalty profile parameters must be positive");
  }
  d = std::max<std::size_t>(d, 1);
  if (!(export_horizon > 0.0)) export_horizon = 1.25 * profile.clip_point();
  SmoothedScalar s;
  s.profile_ = profile;
  s.linear_part_ = linear_part;
  s.tail_ = TailMode::hold_last;
  s.h_ = export_horizon / static_cast<double>(d);
  s.y_.resize(d + 1);
  for (std::size_t i = 0; i <= d; ++i) {
    s.y_[i] = linear_part + profile.derivative(s.h_ * static_cast<double>(i));
  }
  s.build_cumint();
  return s;
}

void SmoothedScalar::build_cumint() {
  cumint_.assign(y_.size(), 0.0);
  for (std::size_t i = 1; i < y_.size(); ++i) {
    cumint_[i] = cumint_[i - 1] + 0.5 * h_ * (y_[i - 1] + y_[i]);
  }
  if (head_) {
    const double shift = h_ * y_[1] / (*head_ + 1.0) - cumint_[1];
    for (std::size_t i = 1; i < y_.size(); ++i) cumint_[i] += shift;
  }
}

double SmoothedScalar::grid_derivative(double u) const {
  const std::size_t dd = d();
  const double H = horizon();
  if (u >= H) {
    if (u == H) return y_[dd];
    return tail_ == TailMode::zero ? 0.0 : y_[dd];
  }
  if (head_ && u < h_) {
    if (u == 0.0) return kDefaultSlopeCap;
    return std::min(y_[1] * std::pow(u / h_, *head_), kDefaultSlopeCap);
  }
  const double pos = u / h_;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), dd - 1);
  const double w = pos - static_cast<double>(i);
  return y_[i] + w * (y_[i + 1] - y_[i]);
}

double SmoothedScalar::value(double u) const {
  if (!(u >= 0.0)) throw std::domain_error("smoothed function evaluated at negative u");
  if (profile_) return linear_part_ * u + profile_->integral(u);
  const std::size_t dd = d();
  const double H = horizon();
  if (u >= H) {
    return cumint_[dd] + (tail_ == TailMode::hold_last ? y_[dd] * (u - H) : 0.0);
  }
  if (head_ && u < h_) return h_ * y_[1] / (*head_ + 1.0) * std::pow(u / h_, *head_ + 1.0);
  const std::size_t i = std::min(static_cast<std::size_t>(u / h_), dd - 1);
  const double ui = h_ * static_cast<double>(i);
  return cumint_[i] + 0.5 * (u - ui) * (y_[i] + grid_derivative(u));
}

double SmoothedScalar::derivative(double u) const {
  if (!(u >= 0.0)) throw std::domain_error("smoothed function evaluated at negative u");
  if (profile_) return linear_part_ + profile_->derivative(u);
  return grid_derivative(u);
}

SupergradInterval SmoothedScalar::supergrad(double u) const {
  const double g = derivative(u);
  if (!profile_ && tail_ == TailMode::zero && u == horizon() && g > 0.0) return {0.0, g};
  return {g, g};
}

SupergradInterval SmoothedScalar::slope_preimage(double s) const {
  if (profile_) {
    const double a = linear_part_;
    const ExpPenaltyProfile& p = *profile_;
    if (s > a) return {0.0, 0.0};
    if (s == a - p.l) return {p.clip_point(), kInf};
    if (s < a - p.l) return {kInf, kInf};
    const double u = std::min(p.b * std::log1p((a - s) / p.kappa()) / p.gamma, p.clip_point());
    return {u, u};
  }
  const std::size_t dd = d();
  const double H = horizon();
  if (head_ && s > y_[1]) {
    if (s >= kDefaultSlopeCap) return {0.0, 0.0};
    const double u = h_ * std::pow(s / y_[1], 1.0 / *head_);
    return {u, u};
  }
  if (s > y_[0]) return {0.0, 0.0};
  const double tail_slope = tail_ == TailMode::zero ? 0.0 : y_[dd];
  // Interpolated crossing inside cell [i-1, i].
  auto crossing = [&](std::size_t i) {
    const double y0 = y_[i - 1];
    const double y1 = y_[i];
    const double w = y0 == y1 ? 0.0 : (y0 - s) / (y0 - y1);
    return h_ * (static_cast<double>(i - 1) + std::clamp(w, 0.0, 1.0));
  };
  double lo;
  const auto first_le =
      std::partition_point(y_.begin(), y_.end(), [s](double v) { return v > s; });
  if (first_le == y_.end()) {
    // every sample exceeds s; only the zero tail can reach it
    if (tail_ == TailMode::zero && s >= 0.0) {
      return {H, s == 0.0 ? kInf : H};
    }
    return {kInf, kInf};
  }
  const std::size_t i_le = static_cast<std::size_t>(first_le - y_.begin());
  lo = i_le == 0 ? 0.0 : crossing(i_le);
  double hi;
  const auto first_lt =
      std::partition_point(y_.begin(), y_.end(), [s](double v) { return v >= s; });
  if (first_lt == y_.end()) {
    hi = tail_slope >= s ? kInf : H;
  } else {
    const std::size_t i_lt = static_cast<std::size_t>(first_lt - y_.begin());
    hi = i_lt == 0 ? 0.0 : crossing(i_lt);
  }
  return {lo, std::max(lo, hi)};
}

double SmoothedScalar::max_curvature() const {
  if (profile_) {
    const ExpPenaltyProfile& p = *profile_;
    return (p.gamma / p.b) * (p.kappa() + p.l);
  }
  if (head_) return kInf;
  double best = 0.0;
  for (std::size_t i = 1; i < y_.size(); ++i) {
    best = std::max(best, std::abs(y_[i] - y_[i - 1]) / h_);
  }
  return best;
}

nlohmann::json SmoothedScalar::to_json() const {
  if (profile_) {
    return {{"profile",
             {{"theta", profile_->theta},
              {"gamma", profile_->gamma},
              {"l", profile_->l},
              {"b", profile_->b}}},
            {"linear_part", linear_part_}};
  }
  nlohmann::json j = {{"h", h_}, {"y", y_}, {"tail", tail_ == TailMode::zero ? "zero" : "hold_last"}};
  if (head_) j["head_exponent"] = *head_;
  return j;
}

SmoothedScalar SmoothedScalar::from_json(const nlohmann::json& j) {
  try {
    if (j.contains("profile")) {
      const auto& p = j.at("profile");
      ExpPenaltyProfile prof{p.at("theta").get<double>(), p.at("gamma").get<double>(),
                             p.at("l").get<double>(), p.at("b").get<double>()};
      return exp_penalty(prof, j.value("linear_part", 0.0));
    }
    const std::string tail = j.value("tail", std::string("zero"));
    if (tail != "zero" && tail != "hold_last") {
      throw std::invalid_argument("unknown tail mode: " + tail);
    }
    return from_grid(j.at("h").get<double>(), j.at("y").get<std::vector<double>>(),
                     tail == "zero" ? TailMode::zero : TailMode::hold_last,
                     j.contains("head_exponent") ? std::optional<double>(j.at("head_exponent").get<double>())
                                                 : std::nullopt);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad smoothing descriptor: ") + e.what());
  }
}

std::vector<double> make_monotone(std::vector<double> y) {
  for (std::size_t i = 1; i < y.size(); ++i) y[i] = std::min(y[i], y[i - 1]);
  return y;
}

double Coordinate::value(double u) const {
  return std::visit([u](const auto& f) { return f.value(u); }, impl_);
}

SupergradInterval Coordinate::supergrad(double u) const {
  return std::visit([u](const auto& f) { return f.supergrad(u); }, impl_);
}

SupergradInterval Coordinate::slope_preimage(double s) const {
  return std::visit([s](const auto& f) { return f.slope_preimage(s); }, impl_);
}

}  // namespace smoothgreed
