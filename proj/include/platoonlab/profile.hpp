/*
 * Copyright 2026 The platoonlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "platoonlab/errors.hpp"

namespace platoonlab {

// Position-indexed desired speed v_d(x), defined on the whole real line.
template <typename P>
concept VelocityProfile = requires(const P& p, double x) {
  { p.eval(x) } -> std::convertible_to<double>;
  { p.derivative(x) } -> std::convertible_to<double>;
  { p.lipschitz_constant() } -> std::convertible_to<double>;
  { p.infimum() } -> std::convertible_to<double>;
  { p.supremum() } -> std::convertible_to<double>;
};

// Constant v0 up to drop_start, linear ramp down to (1 - rho) v0 over
// drop_length, constant afterwards.
class SpeedDropProfile {
 public:
  SpeedDropProfile(double v0, double rho, double drop_start, double drop_length)
      : v0_(v0), rho_(rho), drop_start_(drop_start), drop_length_(drop_length) {
    if (!(v0 > 0.0) || !std::isfinite(v0))
      throw std::invalid_argument("speed drop profile: v0 must be positive");
    if (!(rho >= 0.0 && rho < 1.0))
      throw std::invalid_argument("speed drop profile: rho must lie in [0, 1)");
    if (!(drop_length > 0.0) || !std::isfinite(drop_length))
      throw std::invalid_argument("speed drop profile: drop_length must be positive");
    if (!std::isfinite(drop_start))
      throw std::invalid_argument("speed drop profile: drop_start must be finite");
  }

  double v0() const { return v0_; }
  double rho() const { return rho_; }
  double drop_start() const { return drop_start_; }
  double drop_length() const { return drop_length_; }
  double drop_end() const { return drop_start_ + drop_length_; }
  double final_speed() const { return (1.0 - rho_) * v0_; }

  double eval(double x) const {
    if (x <= drop_start_) return v0_;
    if (x >= drop_end()) return final_speed();
    return v0_ - rho_ * v0_ * (x - drop_start_) / drop_length_;
  }

  // Right-hand derivative; the kinks at both ramp ends take the slope of the
  // segment to their right.
  double derivative(double x) const {
    if (x >= drop_start_ && x < drop_end()) return -rho_ * v0_ / drop_length_;
    return 0.0;
  }

  double lipschitz_constant() const { return rho_ * v0_ / drop_length_; }
  double infimum() const { return final_speed(); }
  double supremum() const { return v0_; }

  friend bool operator==(const SpeedDropProfile&, const SpeedDropProfile&) = default;

 private:
  double v0_;
  double rho_;
  double drop_start_;
  double drop_length_;
};

// Linear interpolation between (breakpoint, value) pairs with constant
// extrapolation on both sides.
class PiecewiseLinearProfile {
 public:
  PiecewiseLinearProfile(std::vector<double> breakpoints, std::vector<double> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size())
      throw std::invalid_argument(
          "piecewise linear profile: need matching, non-empty breakpoints and values");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!(values_[k] > 0.0) || !std::isfinite(values_[k]))
        throw std::invalid_argument("piecewise linear profile: values must be positive");
      if (!std::isfinite(breakpoints_[k]))
        throw std::invalid_argument("piecewise linear profile: breakpoints must be finite");
      if (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1]))
        throw std::invalid_argument(
            "piecewise linear profile: breakpoints must be strictly increasing");
    }
  }

  explicit PiecewiseLinearProfile(const SpeedDropProfile& p)
      : PiecewiseLinearProfile({p.drop_start(), p.drop_end()}, {p.v0(), p.final_speed()}) {}

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

  double eval(double x) const {
    if (x <= breakpoints_.front()) return values_.front();
    if (x >= breakpoints_.back()) return values_.back();
    const std::size_t k = segment(x);
    const double w = (x - breakpoints_[k]) / (breakpoints_[k + 1] - breakpoints_[k]);
    return values_[k] + w * (values_[k + 1] - values_[k]);
  }

  double derivative(double x) const {
    if (x < breakpoints_.front() || x >= breakpoints_.back()) return 0.0;
    return slope(segment(x));
  }

  double lipschitz_constant() const {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) m = std::max(m, std::abs(slope(k)));
    return m;
  }

  double infimum() const { return *std::min_element(values_.begin(), values_.end()); }
  double supremum() const { return *std::max_element(values_.begin(), values_.end()); }

 private:
  // Index k with breakpoints_[k] <= x < breakpoints_[k + 1]; requires x inside the range.
  std::size_t segment(double x) const {
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  }

  double slope(std::size_t k) const {
    return (values_[k + 1] - values_[k]) / (breakpoints_[k + 1] - breakpoints_[k]);
  }

  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

struct ProfileCheck {
  enum class Violation { none, lipschitz_bound, nonpositive_infimum };

  double lipschitz = 0.0;
  double infimum = 0.0;
  // lipschitz * T
  double contraction_factor = 0.0;
  Violation violation = Violation::none;

  bool ok() const { return violation == Violation::none; }
};

inline const char* to_string(ProfileCheck::Violation v) {
  switch (v) {
    case ProfileCheck::Violation::none: return "none";
    case ProfileCheck::Violation::lipschitz_bound: return "lipschitz constant times headway is not below 1";
    case ProfileCheck::Violation::nonpositive_infimum: return "infimum of the desired speed is not positive";
  }
  return "unknown";
}

// Checks the two hypotheses the stability and non-collision results rest on:
// M * T < 1 and inf v_d > 0. The Lipschitz bound is reported first when both fail.
template <VelocityProfile P>
ProfileCheck validate(const P& profile, double headway) {
  if (!(headway > 0.0)) throw std::invalid_argument("time headway must be positive");
  ProfileCheck check;
  check.lipschitz = profile.lipschitz_constant();
  check.infimum = profile.infimum();
  check.contraction_factor = check.lipschitz * headway;
  if (!(check.contraction_factor < 1.0))
    check.violation = ProfileCheck::Violation::lipschitz_bound;
  else if (!(check.infimum > 0.0))
    check.violation = ProfileCheck::Violation::nonpositive_infimum;
  return check;
}

template <VelocityProfile P>
void require_contraction(const P& profile, double headway) {
  const ProfileCheck check = validate(profile, headway);
  if (check.violation == ProfileCheck::Violation::lipschitz_bound)
    throw HypothesisError("M*T = " + std::to_string(check.contraction_factor) +
                          " violates M*T < 1");
}

}  // namespace platoonlab
