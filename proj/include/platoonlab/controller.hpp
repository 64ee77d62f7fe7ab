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
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoonlab/platoon.hpp"
#include "platoonlab/profile.hpp"

namespace platoonlab {

enum class Branch { velocity_tracking = 1, spacing_tracking = 2 };

// Branch taken when |eps1| == |eps2|.
enum class TiePolicy { velocity_tracking, spacing_tracking };

// Error dynamics d/dt eps = g(eps) enforced on the active branch. The default
// controller uses g(e) = -e for both.
struct ErrorDynamics {
  std::function<double(double)> speed;    // g1
  std::function<double(double)> spacing;  // g2

  static ErrorDynamics exponential() {
    return {[](double e) { return -e; }, [](double e) { return -e; }};
  }
};

struct ControllerParams {
  double headway = 1.0;
  TiePolicy tie_policy = TiePolicy::velocity_tracking;
  std::optional<ErrorDynamics> error_dynamics;
  // |u| cap applied by the simulator; never applied inside control().
  std::optional<double> saturation;
};

// Throws std::invalid_argument when T <= 0 or a custom g fails the sampled
// checks g(0) = 0 and sign(g(e)) = -sign(e).
inline void validate(const ControllerParams& params) {
  if (!(params.headway > 0.0)) throw std::invalid_argument("time headway must be positive");
  if (params.saturation && !(*params.saturation > 0.0))
    throw std::invalid_argument("saturation cap must be positive");
  if (!params.error_dynamics) return;
  const auto check = [](const std::function<double(double)>& g, const char* name) {
    if (!g) throw std::invalid_argument(std::string("error dynamics ") + name + " is empty");
    if (g(0.0) != 0.0) throw std::invalid_argument(std::string("error dynamics ") + name + "(0) != 0");
    constexpr std::array<double, 8> samples{1e-6, 1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0};
    for (double e : samples) {
      if (!(g(e) < 0.0) || !(g(-e) > 0.0))
        throw std::invalid_argument(std::string("error dynamics ") + name +
                                    " does not oppose the sign of its argument");
    }
  };
  check(params.error_dynamics->speed, "g1");
  check(params.error_dynamics->spacing, "g2");
}

struct ControlDecision {
  double u = 0.0;
  Branch branch = Branch::velocity_tracking;
  ErrorPair eps;
};

// Switched feedback for vehicle i. Branch 1 makes d/dt eps1 = g1(eps1):
//   u = y_i v_d'(x_i) + g1(eps1)
// branch 2 makes d/dt eps2 = g2(eps2):
//   u = (y_{i-1} - y_i - g2(eps2)) / T.
// With g(e) = -e these are the two linearizing laws; the leader always takes
// branch 1.
template <VelocityProfile P>
ControlDecision control(const PlatoonState& state, std::size_t i, const P& profile,
                        const ControllerParams& params) {
  const double T = params.headway;
  const ErrorPair eps = errors(state, i, profile, T);
  const double a1 = std::abs(eps.eps1);
  const double a2 = std::abs(eps.eps2);
  Branch branch = a1 > a2 ? Branch::velocity_tracking : Branch::spacing_tracking;
  if (a1 == a2)
    branch = params.tie_policy == TiePolicy::velocity_tracking ? Branch::velocity_tracking
                                                               : Branch::spacing_tracking;
  if (i == 0) branch = Branch::velocity_tracking;

  const auto g1 = [&](double e) { return params.error_dynamics ? params.error_dynamics->speed(e) : -e; };
  const auto g2 = [&](double e) { return params.error_dynamics ? params.error_dynamics->spacing(e) : -e; };

  ControlDecision decision;
  decision.branch = branch;
  decision.eps = eps;
  if (branch == Branch::velocity_tracking) {
    decision.u = state.y[i] * profile.derivative(state.x[i]) + g1(eps.eps1);
  } else {
    decision.u = (state.y[i - 1] - state.y[i] - g2(eps.eps2)) / T;
  }
  return decision;
}

struct ClosedLoopRate {
  std::vector<double> dx;
  std::vector<double> dy;
};

// Right-hand side of the closed loop x' = y, y' = u(x, y). When `decisions` is
// given it receives the per-vehicle control decisions (after saturation).
template <VelocityProfile P>
ClosedLoopRate closed_loop_rhs(const PlatoonState& state, const P& profile,
                               const ControllerParams& params,
                               std::vector<ControlDecision>* decisions = nullptr) {
  const std::size_t n = state.size();
  ClosedLoopRate rate{state.y, std::vector<double>(n)};
  if (decisions) decisions->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ControlDecision d = control(state, i, profile, params);
    if (params.saturation) d.u = std::clamp(d.u, -*params.saturation, *params.saturation);
    rate.dy[i] = d.u;
    if (decisions) (*decisions)[i] = d;
  }
  return rate;
}

struct ControlBound {
  double velocity_tracking = 0.0;  // m/s^2, branch 1
  double spacing_tracking = 0.0;   // m/s^2, branch 2

  double for_branch(Branch b) const {
    return b == Branch::velocity_tracking ? velocity_tracking : spacing_tracking;
  }
};

// Static acceleration bounds from the initial errors and the profile suprema:
//   branch 1: (sup|v_d| + d_i) sup|v_d'| + d_i
//   branch 2: (2 sup|v_d| + 2 d_i + d_{i-1}) / T
// where d_i = delta_i(t0). They presume delta_i(t) <= delta_i(t0) for t >= t0.
template <VelocityProfile P>
ControlBound control_bound(const PlatoonState& initial, std::size_t i, const P& profile,
                           const ControllerParams& params) {
  const double T = params.headway;
  const double vmax = std::max(std::abs(profile.supremum()), std::abs(profile.infimum()));
  const double slope = profile.lipschitz_constant();
  const double d_i = errors(initial, i, profile, T).delta;
  const double d_prev = i == 0 ? 0.0 : errors(initial, i - 1, profile, T).delta;
  return {(vmax + d_i) * slope + d_i, (2.0 * vmax + 2.0 * d_i + d_prev) / T};
}

}  // namespace platoonlab
