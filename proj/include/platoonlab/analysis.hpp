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
#include <utility>
#include <vector>

#include "platoonlab/controller.hpp"
#include "platoonlab/platoon.hpp"
#include "platoonlab/profile.hpp"
#include "platoonlab/sim.hpp"

namespace platoonlab {

// Slack granted to every "lhs <= rhs" check.
inline constexpr double kBoundSlack = 1e-6;

// One evaluated inequality lhs <= rhs.
struct BoundCheck {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = kBoundSlack;

  double margin() const { return rhs - lhs; }
  bool pass() const { return lhs <= rhs + slack; }
};

inline bool all_pass(const std::vector<BoundCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass(); });
}

inline const BoundCheck* worst(const std::vector<BoundCheck>& checks) {
  const auto it = std::min_element(checks.begin(), checks.end(),
                                   [](const BoundCheck& a, const BoundCheck& b) {
                                     return a.margin() < b.margin();
                                   });
  return it == checks.end() ? nullptr : &*it;
}

struct DecayFit {
  // Slope of ln(delta) against t; empty when the series never rises above the noise floor.
  std::optional<double> rate;
  // RMS residual of the log-linear fit.
  double residual = 0.0;
  std::size_t points = 0;

  bool converged() const { return !rate.has_value(); }
};

// Log-linear least squares over the samples with t >= t_min and delta above
// the noise floor. Needs at least 10 such samples unless there are none.
inline DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series,
                               double noise_floor = 1e-10,
                               double t_min = -std::numeric_limits<double>::infinity()) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, d] : series)
    if (t >= t_min && d > noise_floor) pts.emplace_back(t, std::log(d));
  DecayFit fit;
  fit.points = pts.size();
  if (pts.empty()) return fit;
  if (pts.size() < 10)
    throw std::invalid_argument("decay fit needs at least 10 samples above the noise floor, got " +
                                std::to_string(pts.size()));
  const double m = static_cast<double>(pts.size());
  double st = 0.0, sl = 0.0;
  for (const auto& [t, l] : pts) {
    st += t;
    sl += l;
  }
  const double tbar = st / m;
  const double lbar = sl / m;
  double stt = 0.0, stl = 0.0;
  for (const auto& [t, l] : pts) {
    stt += (t - tbar) * (t - tbar);
    stl += (t - tbar) * (l - lbar);
  }
  if (!(stt > 0.0)) throw std::invalid_argument("decay fit needs distinct sample times");
  const double slope = stl / stt;
  double ss = 0.0;
  for (const auto& [t, l] : pts) {
    const double r = l - (lbar + slope * (t - tbar));
    ss += r * r;
  }
  fit.rate = slope;
  fit.residual = std::sqrt(ss / m);
  return fit;
}

// Largest initial distance to the target curve for which every gap stays
// positive: T inf v_d / (max(2 + T, 1 + M) (1 + T)).
template <VelocityProfile P>
double noncollision_threshold(const P& profile, double headway) {
  const double inf = profile.infimum();
  if (!(inf > 0.0)) throw HypothesisError("non-collision threshold needs inf v_d > 0");
  const double M = profile.lipschitz_constant();
  return headway * inf / (std::max(2.0 + headway, 1.0 + M) * (1.0 + headway));
}

// Constant of max(2 + T, 1 + M) relating E(Q) to dist(Q, target curve).
inline double error_distance_ratio(double headway, double lipschitz) {
  return std::max(2.0 + headway, 1.0 + lipschitz);
}

// sum_{k=1..i} (1 - T M)^{-(i - k + 1)} for zero-based vehicle i; 0 for the leader.
inline double lemma2_constant(std::size_t i, double headway, double lipschitz) {
  const double q = 1.0 / (1.0 - headway * lipschitz);
  double c = 0.0;
  double term = q;
  for (std::size_t k = 0; k < i; ++k) {
    c += term;
    term *= q;
  }
  return c;
}

// Position and velocity deviations from the target point sharing the leader
// position, against C_i (1 + T) E and (C_i M (1 + T) + 1) E.
template <VelocityProfile P>
std::vector<BoundCheck> check_lemma2(const PlatoonState& state, const P& profile, double headway) {
  const std::size_t n = state.size();
  const TargetCurvePoint anchor = target_point(state.x.at(0), n, profile, headway);
  const double E = max_error(state, profile, headway);
  const double M = profile.lipschitz_constant();
  std::vector<BoundCheck> checks;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = lemma2_constant(i, headway, M);
    const std::string v = std::to_string(i + 1);
    if (i > 0)
      checks.push_back({"lemma2.position.v" + v, std::abs(state.x[i] - anchor.x[i]),
                        c * (1.0 + headway) * E});
    checks.push_back({"lemma2.velocity.v" + v, std::abs(state.y[i] - anchor.y[i]),
                      (c * M * (1.0 + headway) + 1.0) * E});
  }
  return checks;
}

template <VelocityProfile P>
BoundCheck check_lemma3(const PlatoonState& state, const P& profile, double headway) {
  const double dist = distance_to_target(state, profile, headway).distance;
  return {"lemma3", max_error(state, profile, headway),
          error_distance_ratio(headway, profile.lipschitz_constant()) * dist};
}

// Worst recorded |u| per vehicle and branch against the static bounds built
// from the first recorded state.
template <VelocityProfile P>
std::vector<BoundCheck> check_control_bounds(const Trajectory& traj, const P& profile,
                                             const ControllerParams& params) {
  std::vector<BoundCheck> checks;
  if (traj.size() == 0) return checks;
  for (std::size_t i = 0; i < traj.vehicles(); ++i) {
    const ControlBound bound = control_bound(traj.states.front(), i, profile, params);
    std::optional<double> worst1, worst2;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const ControlDecision& d = traj.decisions[k][i];
      auto& w = d.branch == Branch::velocity_tracking ? worst1 : worst2;
      w = std::max(w.value_or(0.0), std::abs(d.u));
    }
    const std::string v = std::to_string(i + 1);
    if (worst1) checks.push_back({"control.branch1.v" + v, *worst1, bound.velocity_tracking});
    if (worst2) checks.push_back({"control.branch2.v" + v, *worst2, bound.spacing_tracking});
  }
  return checks;
}

struct Macroscopic {
  double location = 0.0;
  double flow = 0.0;     // veh/s
  double density = 0.0;  // veh/m
};

// Equilibrium flow 1/T and density 1/(T v_d(l)) at location l.
template <VelocityProfile P>
Macroscopic macroscopic(const P& profile, double headway, double location) {
  if (!(headway > 0.0)) throw std::invalid_argument("time headway must be positive");
  return {location, 1.0 / headway, 1.0 / (headway * profile.eval(location))};
}

struct HeadwayBand {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  // Samples with non-positive speed, where headway is undefined.
  std::size_t undefined = 0;

  bool within(double lo, double hi) const { return samples > 0 && min >= lo && max <= hi; }
};

// Headway extremes over followers whose position has reached `from_position`.
inline HeadwayBand headway_band(const Trajectory& traj, double from_position) {
  HeadwayBand band;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    for (std::size_t i = 1; i < traj.vehicles(); ++i) {
      if (traj.states[k].x[i] < from_position) continue;
      const std::optional<double>& h = traj.headways[k][i];
      if (!h) {
        ++band.undefined;
        continue;
      }
      band.min = std::min(band.min, *h);
      band.max = std::max(band.max, *h);
      ++band.samples;
    }
  }
  return band;
}

struct VehicleDecay {
  std::size_t vehicle = 0;  // zero-based
  DecayFit fit;
};

struct AnalysisReport {
  ProfileCheck profile;
  double threshold = 0.0;
  double initial_distance = 0.0;
  double initial_max_error = 0.0;
  std::vector<VehicleDecay> decay;
  std::vector<BoundCheck> checks;
  std::vector<Macroscopic> macroscopic;
  HeadwayBand band;
  std::size_t collisions = 0;

  bool pass() const { return collisions == 0 && all_pass(checks); }
};

struct AnalysisOptions {
  // Skip the first part of each decay series.
  double decay_fit_start = 0.5;
  double noise_floor = 1e-10;
  // Lemma inequalities are evaluated at the first and last recorded states.
  bool lemma_checks = true;
};

// The full verification suite for one scenario run.
inline AnalysisReport analyze(const Scenario& scenario, const Trajectory& traj,
                              const AnalysisOptions& options = {}) {
  const auto& profile = scenario.profile;
  const double T = scenario.controller.headway;
  AnalysisReport report;
  report.profile = validate(profile, T);
  report.threshold = noncollision_threshold(profile, T);
  report.collisions = traj.collisions.size();
  if (traj.size() == 0) return report;

  const PlatoonState& first = traj.states.front();
  report.initial_max_error = max_error(first, profile, T);
  report.initial_distance = distance_to_target(first, profile, T).distance;

  for (std::size_t i = 0; i < traj.vehicles(); ++i) {
    VehicleDecay d{i, {}};
    const auto series = decay_series(traj, i);
    std::size_t above = 0;
    for (const auto& [t, v] : series)
      if (t >= options.decay_fit_start && v > options.noise_floor) ++above;
    if (above == 0 || above >= 10)
      d.fit = fit_decay_rate(series, options.noise_floor, options.decay_fit_start);
    else
      d.fit.points = above;
    report.decay.push_back(d);
  }

  report.checks = check_control_bounds(traj, profile, scenario.controller);
  if (options.lemma_checks) {
    for (const PlatoonState* s : {&traj.states.front(), &traj.states.back()}) {
      const std::string tag = s == &traj.states.front() ? "initial." : "final.";
      for (BoundCheck c : check_lemma2(*s, profile, T)) {
        c.id = tag + c.id;
        report.checks.push_back(std::move(c));
      }
      BoundCheck c3 = check_lemma3(*s, profile, T);
      c3.id = tag + c3.id;
      report.checks.push_back(std::move(c3));
    }
  }

  for (double l : {profile.drop_start() - profile.drop_length(),
                   profile.drop_start() + 0.5 * profile.drop_length(),
                   profile.drop_end() + profile.drop_length()})
    report.macroscopic.push_back(macroscopic(profile, T, l));
  report.band = headway_band(traj, profile.drop_start());
  return report;
}

}  // namespace platoonlab
