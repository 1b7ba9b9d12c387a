#include "smoothgreed/scalar_fun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace smoothgreed {

namespace {

void require_nonneg(double u) {
  if (!(u >= 0.0)) {
    throw std::domain_error("scalar concave function evaluated at negative or NaN u");
  }
}

}  // namespace

ScalarConcave ScalarConcave::cap(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("cap: scale must be positive");
  ScalarConcave f(Kind::cap);
  f.param_a_ = scale;
  f.breakpoints_ = {0.0, 1.0};
  f.slopes_ = {scale, 0.0};
  f.finish_piecewise();
  return f;
}

ScalarConcave ScalarConcave::piecewise_linear(std::vector<double> breakpoints,
                                              std::vector<double> slopes) {
  if (breakpoints.empty() || breakpoints.size() != slopes.size()) {
    throw std::invalid_argument("piecewise_linear: need one slope per breakpoint");
  }
  if (breakpoints.front() != 0.0) {
    throw std::invalid_argument("piecewise_linear: first breakpoint must be 0");
  }
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw std::invalid_argument("piecewise_linear: breakpoints must increase strictly");
    }
    if (slopes[i] > slopes[i - 1]) {
      throw std::invalid_argument("piecewise_linear: slopes must be non-increasing (concavity)");
    }
  }
  ScalarConcave f(Kind::piecewise_linear);
  f.breakpoints_ = std::move(breakpoints);
  f.slopes_ = std::move(slopes);
  f.finish_piecewise();
  return f;
}

ScalarConcave ScalarConcave::log1p() { return ScalarConcave(Kind::log1p); }

ScalarConcave ScalarConcave::sqrt() {
  ScalarConcave f(Kind::sqrt);
  f.exponent_ = 0.5;
  return f;
}

ScalarConcave ScalarConcave::power(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("power: p must lie in (0, 1)");
  ScalarConcave f(Kind::power);
  f.exponent_ = p;
  return f;
}

ScalarConcave ScalarConcave::linear(double slope) {
  ScalarConcave f(Kind::linear);
  f.param_a_ = slope;
  f.breakpoints_ = {0.0};
  f.slopes_ = {slope};
  f.finish_piecewise();
  return f;
}

ScalarConcave ScalarConcave::neg_plus_penalty(double l, double b) {
  if (!(l > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("neg_plus_penalty: l and b must be positive");
  }
  ScalarConcave f(Kind::neg_plus_penalty);
  f.param_a_ = l;
  f.param_b_ = b;
  f.breakpoints_ = {0.0, b};
  f.slopes_ = {0.0, -l};
  f.finish_piecewise();
  return f;
}

void ScalarConcave::finish_piecewise() {
  // merge runs of equal slopes
  std::vector<double> bp{breakpoints_.front()};
  std::vector<double> sl{slopes_.front()};
  for (std::size_t i = 1; i < slopes_.size(); ++i) {
    if (slopes_[i] == sl.back()) continue;
    bp.push_back(breakpoints_[i]);
    sl.push_back(slopes_[i]);
  }
  breakpoints_ = std::move(bp);
  slopes_ = std::move(sl);
  values_.assign(breakpoints_.size(), 0.0);
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    values_[i] = values_[i - 1] + slopes_[i - 1] * (breakpoints_[i] - breakpoints_[i - 1]);
  }
}

double ScalarConcave::value(double u) const {
  require_nonneg(u);
  switch (kind_) {
    case Kind::log1p:
      return std::log1p(u);
    case Kind::sqrt:
    case Kind::power:
      return std::pow(u, exponent_);
    default:
      break;
  }
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return values_[i] + slopes_[i] * (u - breakpoints_[i]);
}

double ScalarConcave::conjugate(double y) const {
  switch (kind_) {
    case Kind::log1p:
      if (y <= 0.0) return -kInf;
      if (y >= 1.0) return 0.0;
      return 1.0 - y + std::log(y);
    case Kind::sqrt:
    case Kind::power: {
      if (y <= 0.0) return -kInf;
      const double p = exponent_;
      return (p - 1.0) * std::pow(y / p, p / (p - 1.0));
    }
    default:
      break;
  }
  // Concave PL: the infimum of y*u - f(u) sits at a breakpoint unless the
  // last piece decreases without bound.
  if (y < slopes_.back()) return -kInf;
  double best = kInf;
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    best = std::min(best, y * breakpoints_[i] - values_[i]);
  }
  return best;
}

SupergradInterval ScalarConcave::supergrad(double u) const {
  require_nonneg(u);
  if (u == 0.0) {
    const double right = right_slope_at_zero();
    return {right, std::max(right, slope_cap_)};
  }
  switch (kind_) {
    case Kind::log1p: {
      const double d = 1.0 / (1.0 + u);
      return {d, d};
    }
    case Kind::sqrt:
    case Kind::power: {
      const double d = std::min(exponent_ * std::pow(u, exponent_ - 1.0), slope_cap_);
      return {d, d};
    }
    default:
      break;
  }
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  if (u == breakpoints_[i] && i > 0) return {slopes_[i], slopes_[i - 1]};
  return {slopes_[i], slopes_[i]};
}

SupergradInterval ScalarConcave::slope_preimage(double s) const {
  switch (kind_) {
    case Kind::log1p: {
      if (s >= 1.0) return {0.0, 0.0};
      if (s <= 0.0) return {kInf, kInf};
      const double u = 1.0 / s - 1.0;
      return {u, u};
    }
    case Kind::sqrt:
    case Kind::power: {
      if (s <= 0.0) return {kInf, kInf};
      if (s >= slope_cap_) return {0.0, 0.0};
      const double u = std::pow(s / exponent_, 1.0 / (exponent_ - 1.0));
      return {u, u};
    }
    default:
      break;
  }
  const std::size_t k = slopes_.size();
  std::size_t first_le = k;
  for (std::size_t i = 0; i < k; ++i) {
    if (slopes_[i] <= s) {
      first_le = i;
      break;
    }
  }
  if (first_le == k) return {kInf, kInf};
  const double lo = breakpoints_[first_le];
  // last index whose slope is >= s
  std::size_t count_ge = 0;
  while (count_ge < k && slopes_[count_ge] >= s) ++count_ge;
  double hi = 0.0;
  if (count_ge == k) {
    hi = kInf;
  } else if (count_ge > 0) {
    hi = breakpoints_[count_ge];
  }
  return {lo, std::max(lo, hi)};
}

double ScalarConcave::right_slope_at_zero() const {
  switch (kind_) {
    case Kind::log1p:
      return 1.0;
    case Kind::sqrt:
    case Kind::power:
      return slope_cap_;
    default:
      return std::min(slopes_.front(), slope_cap_);
  }
}

bool ScalarConcave::monotone() const {
  if (is_piecewise_linear()) return slopes_.back() >= 0.0;
  return true;
}

nlohmann::json ScalarConcave::to_json() const {
  using nlohmann::json;
  switch (kind_) {
    case Kind::cap:
      return {{"kind", "cap"}, {"params", {{"scale", param_a_}}}};
    case Kind::piecewise_linear:
      return {{"kind", "piecewise_linear"},
              {"params", {{"breakpoints", breakpoints_}, {"slopes", slopes_}}}};
    case Kind::log1p:
      return {{"kind", "log1p"}, {"params", json::object()}};
    case Kind::sqrt:
      return {{"kind", "sqrt"}, {"params", json::object()}};
    case Kind::power:
      return {{"kind", "power"}, {"params", {{"p", exponent_}}}};
    case Kind::linear:
      return {{"kind", "linear"}, {"params", {{"slope", param_a_}}}};
    case Kind::neg_plus_penalty:
      return {{"kind", "neg_plus_penalty"}, {"params", {{"l", param_a_}, {"b", param_b_}}}};
  }
  return {};
}

ScalarConcave ScalarConcave::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw std::invalid_argument("function descriptor needs a \"kind\" field");
  }
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  try {
    if (kind == "cap") return cap(params.value("scale", 1.0));
    if (kind == "piecewise_linear") {
      return piecewise_linear(params.at("breakpoints").get<std::vector<double>>(),
                              params.at("slopes").get<std::vector<double>>());
    }
    if (kind == "log1p") return log1p();
    if (kind == "sqrt") return sqrt();
    if (kind == "power") return power(params.at("p").get<double>());
    if (kind == "linear") return linear(params.value("slope", 1.0));
    if (kind == "neg_plus_penalty") {
      return neg_plus_penalty(params.at("l").get<double>(), params.value("b", 1.0));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad function descriptor: ") + e.what());
  }
  throw std::invalid_argument("unknown function kind: " + kind);
}

double alpha_at(const ScalarConcave& f, double u) {
  const double fu = f.value(u);
  if (!(fu > 0.0)) throw std::domain_error("alpha_at: value(u) must be positive");
  // conjugate is non-decreasing, so the infimum over the interval is at lo
  return f.conjugate(f.supergrad(u).lo) / fu;
}

double alpha_bar(const ScalarConcave& f, double u_max, std::size_t grid) {
  if (!(u_max > 0.0)) throw std::invalid_argument("alpha_bar: u_max must be positive");
  grid = std::max<std::size_t>(grid, 2);
  switch (f.kind()) {
    case ScalarConcave::Kind::linear:
      return 0.0;
    case ScalarConcave::Kind::cap:
      if (u_max >= 1.0) return -1.0;
      return 0.0;
    case ScalarConcave::Kind::sqrt:
    case ScalarConcave::Kind::power:
      return f.exponent() - 1.0;
    default:
      break;
  }
  double best = kInf;
  auto visit = [&](double u) {
    if (u <= 0.0 || u > u_max) return;
    if (!(f.value(u) > 0.0)) return;
    best = std::min(best, alpha_at(f, u));
  };
  const double decades = 8.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid - 1);
    visit(u_max * std::pow(10.0, -decades * (1.0 - t)));
  }
  for (double b : f.breakpoints()) visit(b);
  return best;
}

}  // namespace smoothgreed
