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

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "platoonlab/controller.hpp"
#include "platoonlab/errors.hpp"
#include "platoonlab/platoon.hpp"
#include "platoonlab/profile.hpp"

namespace platoonlab {

enum class Integrator { rk4, rk45 };

struct Perturbation {
  std::size_t vehicle = 1;  // one-based, as written in scenario files
  double dx = 0.0;
  double dv = 0.0;

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

struct SimSettings {
  double duration = 120.0;
  double dt = 0.01;
  double record_interval = 0.1;
  Integrator integrator = Integrator::rk4;
  // Tolerances of the adaptive mode.
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
};

struct Scenario {
  std::size_t n = 100;
  SpeedDropProfile profile{20.0, 0.5, 0.0, 500.0};
  ControllerParams controller;
  double x1_start = -500.0;
  SimSettings sim;
  std::vector<Perturbation> perturbations;
};

struct CollisionEvent {
  double t = 0.0;
  std::size_t vehicle = 0;  // zero-based follower whose gap closed
  double spacing = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PlatoonState> states;
  std::vector<std::vector<ControlDecision>> decisions;
  std::vector<std::vector<std::optional<double>>> headways;
  std::vector<CollisionEvent> collisions;

  std::size_t size() const { return times.size(); }
  std::size_t vehicles() const { return states.empty() ? 0 : states.front().size(); }
};

inline void validate(const Scenario& s) {
  if (s.n == 0) throw std::invalid_argument("scenario: n must be at least 1");
  if (!(s.sim.dt > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
  if (!(s.sim.duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(s.sim.record_interval > 0.0))
    throw std::invalid_argument("scenario: record_interval must be positive");
  for (const Perturbation& p : s.perturbations) {
    if (p.vehicle < 1 || p.vehicle > s.n)
      throw std::invalid_argument("scenario: perturbation vehicle " + std::to_string(p.vehicle) +
                                  " outside 1.." + std::to_string(s.n));
  }
  validate(s.controller);
}

// Places the platoon on the target curve with the leader at x1_start, then
// applies the listed offsets.
inline PlatoonState initial_state(const Scenario& s) {
  validate(s);
  PlatoonState state = target_point(s.x1_start, s.n, s.profile, s.controller.headway).as_state();
  for (const Perturbation& p : s.perturbations) {
    state.x[p.vehicle - 1] += p.dx;
    state.y[p.vehicle - 1] += p.dv;
  }
  return state;
}

namespace detail {

using FlatState = std::vector<double>;

inline PlatoonState unflatten(const FlatState& z, double t) {
  const std::size_t n = z.size() / 2;
  PlatoonState s;
  s.t = t;
  s.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
  s.y.assign(z.begin() + static_cast<std::ptrdiff_t>(n), z.end());
  return s;
}

inline FlatState flatten(const PlatoonState& s) {
  FlatState z(s.x);
  z.insert(z.end(), s.y.begin(), s.y.end());
  return z;
}

inline void require_finite(const FlatState& z, double t) {
  const std::size_t n = z.size() / 2;
  for (std::size_t k = 0; k < z.size(); ++k)
    if (!std::isfinite(z[k])) throw NumericBlowup(t, k % n);
}

template <VelocityProfile P>
struct ClosedLoopSystem {
  const P& profile;
  const ControllerParams& params;

  void operator()(const FlatState& z, FlatState& dz, double t) const {
    require_finite(z, t);
    const ClosedLoopRate rate = closed_loop_rhs(unflatten(z, t), profile, params);
    const std::size_t n = rate.dx.size();
    dz.resize(2 * n);
    std::copy(rate.dx.begin(), rate.dx.end(), dz.begin());
    std::copy(rate.dy.begin(), rate.dy.end(), dz.begin() + static_cast<std::ptrdiff_t>(n));
  }
};

class CollisionMonitor {
 public:
  explicit CollisionMonitor(std::size_t n) : closed_(n, false) {}

  void observe(const FlatState& z, double t, std::vector<CollisionEvent>& events) {
    const std::size_t n = z.size() / 2;
    for (std::size_t i = 1; i < n; ++i) {
      const double gap = z[i - 1] - z[i];
      if (gap <= 0.0 && !closed_[i]) events.push_back({t, i, gap});
      closed_[i] = gap <= 0.0;
    }
  }

 private:
  std::vector<bool> closed_;
};

inline std::size_t whole_multiple(double total, double unit, const char* what) {
  const double ratio = total / unit;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio))
    throw std::invalid_argument(std::string(what) + " must be a whole multiple of dt");
  return static_cast<std::size_t>(rounded);
}

}  // namespace detail

// Integrates the closed loop from `initial` and records a sample every
// record_interval. Fixed-step RK4 re-evaluates the switching logic at every
// stage. Gaps reaching zero are recorded as collision events and the run
// continues; a non-finite state throws NumericBlowup.
template <VelocityProfile P>
Trajectory simulate(const PlatoonState& initial, const P& profile, const ControllerParams& params,
                    const SimSettings& settings) {
  namespace odeint = boost::numeric::odeint;
  using detail::FlatState;
  validate(params);
  if (initial.size() == 0) throw std::invalid_argument("simulate: empty platoon");
  if (!(settings.dt > 0.0) || !(settings.duration > 0.0) || !(settings.record_interval > 0.0))
    throw std::invalid_argument("simulate: dt, duration and record_interval must be positive");

  const std::size_t n = initial.size();
  const double t0 = initial.t;
  const std::size_t samples =
      static_cast<std::size_t>(std::floor(settings.duration / settings.record_interval + 1e-9)) + 1;

  Trajectory traj;
  traj.times.reserve(samples);
  traj.states.reserve(samples);
  traj.decisions.reserve(samples);
  traj.headways.reserve(samples);

  const detail::ClosedLoopSystem<P> system{profile, params};
  detail::CollisionMonitor monitor(n);

  const auto record = [&](const FlatState& z, double t) {
    detail::require_finite(z, t);
    PlatoonState s = detail::unflatten(z, t);
    std::vector<ControlDecision> decisions;
    closed_loop_rhs(s, profile, params, &decisions);
    std::vector<std::optional<double>> hw(n);
    for (std::size_t i = 0; i < n; ++i) hw[i] = headway(s, i);
    traj.times.push_back(t);
    traj.states.push_back(std::move(s));
    traj.decisions.push_back(std::move(decisions));
    traj.headways.push_back(std::move(hw));
  };

  FlatState z = detail::flatten(initial);
  monitor.observe(z, t0, traj.collisions);
  record(z, t0);

  if (settings.integrator == Integrator::rk4) {
    const std::size_t per_record =
        detail::whole_multiple(settings.record_interval, settings.dt, "record_interval");
    const std::size_t steps = (samples - 1) * per_record;
    odeint::runge_kutta4<FlatState> stepper;
    for (std::size_t k = 1; k <= steps; ++k) {
      const double t = t0 + static_cast<double>(k - 1) * settings.dt;
      stepper.do_step(system, z, t, settings.dt);
      const double t_next = t0 + static_cast<double>(k) * settings.dt;
      detail::require_finite(z, t_next);
      monitor.observe(z, t_next, traj.collisions);
      if (k % per_record == 0) record(z, t_next);
    }
  } else {
    auto stepper = odeint::make_controlled(settings.abs_tol, settings.rel_tol,
                                           odeint::runge_kutta_dopri5<FlatState>());
    const auto observer = [&](const FlatState& state, double t) {
      detail::require_finite(state, t);
      monitor.observe(state, t, traj.collisions);
    };
    for (std::size_t k = 1; k < samples; ++k) {
      const double ta = t0 + static_cast<double>(k - 1) * settings.record_interval;
      const double tb = t0 + static_cast<double>(k) * settings.record_interval;
      odeint::integrate_adaptive(stepper, system, z, ta, tb, settings.dt, observer);
      record(z, tb);
    }
  }
  return traj;
}

inline Trajectory run(const Scenario& s) {
  return simulate(initial_state(s), s.profile, s.controller, s.sim);
}

// (t, delta_i(t)) for every recorded sample of vehicle i (zero-based).
inline std::vector<std::pair<double, double>> decay_series(const Trajectory& traj, std::size_t i) {
  if (traj.size() == 0) throw std::invalid_argument("decay series: empty trajectory");
  if (i >= traj.vehicles()) throw std::out_of_range("decay series: vehicle index out of range");
  std::vector<std::pair<double, double>> series;
  series.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k)
    series.emplace_back(traj.times[k], traj.decisions[k][i].eps.delta);
  return series;
}

}  // namespace platoonlab
