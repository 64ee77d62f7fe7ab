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
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoonlab/errors.hpp"
#include "platoonlab/profile.hpp"

namespace platoonlab {

// Positions and velocities of the platoon at time t. Vehicle 0 is the leader;
// vehicle i follows vehicle i - 1.
struct PlatoonState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y;

  PlatoonState() = default;
  PlatoonState(double time, std::vector<double> positions, std::vector<double> velocities)
      : t(time), x(std::move(positions)), y(std::move(velocities)) {
    if (x.size() != y.size())
      throw std::invalid_argument("platoon state: position/velocity size mismatch");
  }

  std::size_t size() const { return x.size(); }

  bool finite() const {
    const auto fin = [](double v) { return std::isfinite(v); };
    return std::all_of(x.begin(), x.end(), fin) && std::all_of(y.begin(), y.end(), fin);
  }

  friend bool operator==(const PlatoonState&, const PlatoonState&) = default;
};

// Speed error eps1 (m/s), spacing error eps2 (m) and delta = max(|eps1|, |eps2|).
// The two are compared numerically without unit scaling.
struct ErrorPair {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double delta = 0.0;

  ErrorPair() = default;
  ErrorPair(double speed_error, double spacing_error)
      : eps1(speed_error), eps2(spacing_error),
        delta(std::max(std::abs(speed_error), std::abs(spacing_error))) {}

  friend bool operator==(const ErrorPair&, const ErrorPair&) = default;
};

namespace detail {
inline void check_index(const PlatoonState& state, std::size_t i) {
  if (i >= state.size())
    throw std::out_of_range("vehicle index " + std::to_string(i + 1) + " outside platoon of " +
                            std::to_string(state.size()));
}
}  // namespace detail

// Leader (i = 0) has no predecessor; its spacing error is 0 by convention.
template <VelocityProfile P>
ErrorPair errors(const PlatoonState& state, std::size_t i, const P& profile, double headway) {
  detail::check_index(state, i);
  const double eps1 = state.y[i] - profile.eval(state.x[i]);
  const double eps2 = i == 0 ? 0.0 : state.x[i - 1] - state.x[i] - headway * state.y[i];
  return {eps1, eps2};
}

// Solves x = predecessor - T * v_d(x) by fixed-point iteration. The map is a
// contraction with factor T*M < 1. When `iterates` is given, every iterate
// (starting point included) is appended.
template <VelocityProfile P>
double solve_follower(double predecessor, const P& profile, double headway,
                      std::vector<double>* iterates = nullptr) {
  constexpr int kMaxIterations = 200;
  double x = predecessor - headway * profile.eval(predecessor);
  if (iterates) iterates->push_back(x);
  for (int it = 0; it < kMaxIterations; ++it) {
    const double next = predecessor - headway * profile.eval(x);
    if (iterates) iterates->push_back(next);
    // Near |x| ~ 1e4 a step of 1e-12 is below one ulp.
    const double tol =
        std::max(1e-12, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next));
    const double step = std::abs(next - x);
    x = next;
    if (step < tol) return x;
  }
  throw ConvergenceError("follower fixed point did not converge behind x=" +
                         std::to_string(predecessor));
}

// A point on the target curve, parameterized by the leader position.
struct TargetCurvePoint {
  double leader = 0.0;
  std::vector<double> x;
  std::vector<double> y;

  PlatoonState as_state(double t = 0.0) const { return {t, x, y}; }
};

template <VelocityProfile P>
TargetCurvePoint target_point(double leader, std::size_t n, const P& profile, double headway) {
  if (n == 0) throw std::invalid_argument("target point: platoon must have at least one vehicle");
  require_contraction(profile, headway);
  TargetCurvePoint point;
  point.leader = leader;
  point.x.resize(n);
  point.y.resize(n);
  point.x[0] = leader;
  for (std::size_t i = 1; i < n; ++i) point.x[i] = solve_follower(point.x[i - 1], profile, headway);
  for (std::size_t i = 0; i < n; ++i) point.y[i] = profile.eval(point.x[i]);
  return point;
}

// E(Q): the largest of the n speed errors and n - 1 spacing errors. The target
// curve is its zero level set. `spacing_weight` rescales the spacing errors.
template <VelocityProfile P>
double max_error(const PlatoonState& state, const P& profile, double headway,
                 double spacing_weight = 1.0) {
  double e = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const ErrorPair err = errors(state, i, profile, headway);
    e = std::max({e, std::abs(err.eps1), spacing_weight * std::abs(err.eps2)});
  }
  return e;
}

namespace detail {
inline double squared_distance(const PlatoonState& state, const TargetCurvePoint& point) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double dx = state.x[i] - point.x[i];
    const double dy = state.y[i] - point.y[i];
    d2 += dx * dx + dy * dy;
  }
  return d2;
}
}  // namespace detail

struct TargetDistance {
  double distance = 0.0;
  // Leader position of the closest target-curve point.
  double parameter = 0.0;
};

// Euclidean distance from `state` to the target curve. A grid scan over the
// leader parameter (step T * inf v_d / 4, window +-(n T sup v_d + 2 E) around
// x_1) brackets the minimum; golden-section search refines it to 1e-9.
template <VelocityProfile P>
TargetDistance distance_to_target(const PlatoonState& state, const P& profile, double headway) {
  const std::size_t n = state.size();
  if (n == 0) throw std::invalid_argument("distance to target: empty platoon");
  require_contraction(profile, headway);
  const auto objective = [&](double s) {
    return detail::squared_distance(state, target_point(s, n, profile, headway));
  };

  const double step = headway * profile.infimum() / 4.0;
  if (!(step > 0.0)) throw HypothesisError("distance to target needs inf v_d > 0");
  const double window = static_cast<double>(n) * headway * profile.supremum() +
                        2.0 * max_error(state, profile, headway);
  const double center = state.x[0];
  const auto points = static_cast<std::size_t>(std::ceil(2.0 * window / step));
  double best_s = center;
  double best_f = objective(center);
  for (std::size_t k = 0; k <= points; ++k) {
    const double s = center - window + static_cast<double>(k) * step;
    const double f = objective(s);
    if (f < best_f) {
      best_f = f;
      best_s = s;
    }
  }

  constexpr double kInvPhi = 0.6180339887498949;
  constexpr int kMaxIterations = 200;
  double a = best_s - step;
  double b = best_s + step;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  int it = 0;
  while (b - a > 1e-9) {
    if (++it > kMaxIterations) throw ConvergenceError("golden-section refinement did not converge");
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
    }
  }
  const double s = 0.5 * (a + b);
  const double f = objective(s);
  if (f < best_f) {
    best_f = f;
    best_s = s;
  }
  return {std::sqrt(best_f), best_s};
}

// Time headway (x_{i-1} - x_i) / y_i; empty when y_i <= 0 or i is the leader.
inline std::optional<double> headway(const PlatoonState& state, std::size_t i) {
  detail::check_index(state, i);
  if (i == 0 || !(state.y[i] > 0.0)) return std::nullopt;
  return (state.x[i - 1] - state.x[i]) / state.y[i];
}

// Gaps x_{i-1} - x_i for i = 1..n-1.
inline std::vector<double> spacings(const PlatoonState& state) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < state.size(); ++i) gaps.push_back(state.x[i - 1] - state.x[i]);
  return gaps;
}

}  // namespace platoonlab
