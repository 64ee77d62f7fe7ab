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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "platoonlab.hpp"

using namespace platoonlab;

namespace {
ControllerParams with_headway(double T) {
  ControllerParams p;
  p.headway = T;
  return p;
}
}  // namespace

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Shared between criteria 1, 2 and 7.
struct ScenarioRun {
  Scenario scenario;
  Trajectory traj;
  double seconds = 0.0;
};

ScenarioRun run_file(const std::string& name) {
  ScenarioRun r;
  r.scenario = load_scenario(std::string(PLATOONLAB_SCENARIO_DIR) + "/" + name);
  const auto t0 = std::chrono::steady_clock::now();
  r.traj = run(r.scenario);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Headway in [0.97, 1.05] s once each vehicle is past the drop start; every
// end-of-run speed within 0.1 m/s of v_d; runtime below 60 s.
Verdict scenario1(const ScenarioRun& r) {
  const auto& p = r.scenario.profile;
  const HeadwayBand band = headway_band(r.traj, p.drop_start());
  const PlatoonState& last = r.traj.states.back();
  double worst_speed = 0.0;
  for (std::size_t i = 0; i < last.size(); ++i)
    worst_speed = std::max(worst_speed, std::abs(last.y[i] - p.eval(last.x[i])));
  Verdict v;
  v.pass = band.within(0.97, 1.05) && band.undefined == 0 && worst_speed <= 0.1 && r.seconds < 60.0;
  std::ostringstream d;
  d << "headway band [" << band.min << ", " << band.max << "] over " << band.samples
    << " samples; worst end speed error " << worst_speed << " m/s; runtime " << r.seconds << " s";
  v.detail = d.str();
  return v;
}

// 2. No collision; at the end of the run vehicle 100 has headway within 1e-2 s
// of 1 s and speed within 0.1 m/s of v_d at its position. The worst deviation
// along the whole trace is reported alongside.
Verdict scenario2(const ScenarioRun& r) {
  const auto& p = r.scenario.profile;
  const std::size_t last = r.scenario.n - 1;
  const auto end_headway = r.traj.headways.back()[last];
  double worst_trace = 0.0;
  for (const PlatoonState& s : r.traj.states)
    worst_trace = std::max(worst_trace, std::abs(s.y[last] - p.eval(s.x[last])));
  const PlatoonState& end = r.traj.states.back();
  const double end_speed = std::abs(end.y[last] - p.eval(end.x[last]));
  Verdict v;
  v.pass = r.traj.collisions.empty() && end_headway && std::abs(*end_headway - 1.0) <= 1e-2 &&
           end_speed <= 0.1;
  std::ostringstream d;
  d << "collisions " << r.traj.collisions.size() << "; vehicle " << last + 1 << " end headway "
    << (end_headway ? *end_headway : NAN) << " s, end speed deviation " << end_speed
    << " m/s (worst along trace " << worst_trace << " m/s, at the ramp entry)";
  v.detail = d.str();
  return v;
}

// 3. Two vehicles, follower with random (eps1, eps2) and delta(0) in [0.1, 5]:
// fitted rate in [-1.02, -0.98] and delta(t) <= delta(0) e^-t (1 + 1e-3).
Verdict lemma1_decay() {
  const SpeedDropProfile profile(20.0, 0.5, 0.0, 500.0);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mag(0.1, 5.0), u(-1.0, 1.0);
  SimSettings st;
  st.duration = 10.0;
  st.dt = 1e-3;
  st.record_interval = 0.1;
  Verdict v;
  std::ostringstream d;
  int failures = 0;
  double worst_ratio = 0.0;
  double rate_lo = 1e9, rate_hi = -1e9;
  for (int trial = 0; trial < 10; ++trial) {
    const double delta0 = mag(rng);
    double e1 = u(rng), e2 = u(rng);
    const double scale = delta0 / std::max(std::abs(e1), std::abs(e2));
    e1 *= scale;
    e2 *= scale;
    const double y = 20.0 + e1;
    const PlatoonState s0(0.0, {-1e5, -1e5 - y - e2}, {20.0, y});
    const Trajectory tr = simulate(s0, profile, ControllerParams{}, st);
    const auto series = decay_series(tr, 1);
    const DecayFit fit = fit_decay_rate(series, 1e-10, 0.5);
    double ratio = 0.0;
    for (const auto& [t, delta] : series)
      ratio = std::max(ratio, delta / (series.front().second * std::exp(-t)));
    worst_ratio = std::max(worst_ratio, ratio);
    const double rate = fit.rate.value_or(NAN);
    rate_lo = std::min(rate_lo, rate);
    rate_hi = std::max(rate_hi, rate);
    const bool ok = fit.rate && rate >= -1.02 && rate <= -0.98 && ratio <= 1.0 + 1e-3;
    if (!ok) {
      ++failures;
      d << " [eps1=" << fmt("%.3f", e1) << " eps2=" << fmt("%.3f", e2) << " rate=" << fmt("%.4f", rate)
        << " envelope ratio=" << fmt("%.3g", ratio) << "]";
    }
  }
  v.pass = failures == 0;
  v.detail = std::to_string(10 - failures) + "/10 runs ok; rates in [" + fmt("%.4f", rate_lo) +
             ", " + fmt("%.4f", rate_hi) + "]; worst delta/(delta0 e^-t) " +
             fmt("%.4g", worst_ratio) + d.str();
  return v;
}

// 4. 200 random starts within the non-collision threshold, n in {2, 5, 10},
// 60 s each: no collision events.
Verdict noncollision_campaign() {
  const SpeedDropProfile profile(20.0, 0.5, 0.0, 500.0);
  const double T = 1.0;
  const double threshold = noncollision_threshold(profile, T);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> start(-1500.0, 700.0), unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  SimSettings st;
  st.duration = 60.0;
  st.dt = 0.01;
  st.record_interval = 0.5;
  const std::size_t sizes[] = {2, 5, 10};
  std::size_t collisions = 0;
  std::size_t outside = 0;
  double max_dist = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = sizes[trial % 3];
    PlatoonState s0 = target_point(start(rng), n, profile, T).as_state();
    std::vector<double> dir(2 * n);
    double norm = 0.0;
    for (double& c : dir) {
      c = normal(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    const double radius = threshold * (0.5 + 0.5 * unit(rng));
    for (std::size_t i = 0; i < n; ++i) {
      s0.x[i] += radius * dir[i] / norm;
      s0.y[i] += radius * dir[n + i] / norm;
    }
    const double dist = distance_to_target(s0, profile, T).distance;
    max_dist = std::max(max_dist, dist);
    if (dist > threshold) ++outside;
    collisions += simulate(s0, profile, with_headway(T), st).collisions.size();
  }
  Verdict v;
  v.pass = collisions == 0 && outside == 0 && std::abs(threshold - 10.0 / 6.0) < 1e-12;
  v.detail = "threshold " + fmt("%.4f", threshold) + " m; max start distance " +
             fmt("%.4f", max_dist) + " m; starts outside threshold " + std::to_string(outside) +
             "; collision events " + std::to_string(collisions);
  return v;
}

// Random state with 1 <= n <= 10 and 0 < E(Q) <= 5.
PlatoonState campaign_state(std::mt19937_64& rng, const SpeedDropProfile& profile, double T) {
  std::uniform_real_distribution<double> start(-800.0, 900.0), u(-1.0, 1.0), amp(0.0, 2.5);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  while (true) {
    const std::size_t n = size(rng);
    PlatoonState s = target_point(start(rng), n, profile, T).as_state();
    const double a = amp(rng);
    for (std::size_t i = 0; i < n; ++i) {
      s.x[i] += a * u(rng);
      s.y[i] += a * u(rng);
    }
    const double E = max_error(s, profile, T);
    if (E > 0.0 && E <= 5.0) return s;
  }
}

// 5. Lemma 2 and Lemma 3 inequalities on 1000 random states each.
Verdict lemma_campaigns() {
  const SpeedDropProfile profile(20.0, 0.5, 0.0, 500.0);
  const double T = 1.0;
  std::mt19937_64 rng(5150);
  std::size_t v2 = 0, v3 = 0;
  double worst2 = 1e9, worst3 = 1e9;
  for (int k = 0; k < 1000; ++k) {
    const PlatoonState s = campaign_state(rng, profile, T);
    for (const BoundCheck& c : check_lemma2(s, profile, T)) {
      worst2 = std::min(worst2, c.margin());
      if (!c.pass()) ++v2;
    }
  }
  for (int k = 0; k < 1000; ++k) {
    const PlatoonState s = campaign_state(rng, profile, T);
    const BoundCheck c = check_lemma3(s, profile, T);
    worst3 = std::min(worst3, c.margin());
    if (!c.pass()) ++v3;
  }
  Verdict v;
  v.pass = v2 == 0 && v3 == 0;
  v.detail = "lemma2 violations " + std::to_string(v2) + " (worst margin " + fmt("%.3g", worst2) +
             "); lemma3 violations " + std::to_string(v3) + " (worst margin " +
             fmt("%.3g", worst3) + ")";
  return v;
}

// 6. Fixed-point followers against chained bisection, 100 random cases.
Verdict target_oracle() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  while (cases < 100) {
    const double v0 = 5.0 + 30.0 * unit(rng);
    const double rho = 0.95 * unit(rng);
    const double a = -500.0 + 1000.0 * unit(rng);
    const double L = 5.0 + 600.0 * unit(rng);
    const double T = 0.2 + 2.5 * unit(rng);
    const SpeedDropProfile p(v0, rho, a, L);
    if (p.lipschitz_constant() * T >= 1.0) continue;
    ++cases;
    // Leader placed so the platoon straddles the ramp.
    const double x1 = a + L * (2.0 * unit(rng) - 0.5) + 3.0 * T * v0 * unit(rng);
    const TargetCurvePoint q = target_point(x1, 12, p, T);
    const auto v = oracle::ramp(v0, rho, a, L);
    double pred = x1;
    for (std::size_t i = 1; i < q.x.size(); ++i) {
      pred = oracle::follower_by_bisection(pred, T, v, v0);
      worst = std::max(worst, std::abs(q.x[i] - pred));
    }
  }
  Verdict r;
  r.pass = worst <= 1e-9;
  r.detail = "worst follower disagreement " + fmt("%.3g", worst) + " m over 100 cases";
  return r;
}

// 7. |u| within the branch-appropriate static bounds along Scenarios 1 and 2;
// leader bound 0.4 m/s^2 for the on-target start.
Verdict control_bounds(const ScenarioRun& one, const ScenarioRun& two) {
  Verdict v;
  std::ostringstream d;
  const ControlBound leader =
      control_bound(one.traj.states.front(), 0, one.scenario.profile, one.scenario.controller);
  v.pass = std::abs(leader.velocity_tracking - 0.4) < 1e-12;
  d << "leader bound " << leader.velocity_tracking << " m/s^2";
  for (const ScenarioRun* r : {&one, &two}) {
    const auto checks = check_control_bounds(r->traj, r->scenario.profile, r->scenario.controller);
    std::size_t failed = 0;
    for (const BoundCheck& c : checks) failed += c.pass() ? 0 : 1;
    const BoundCheck* w = worst(checks);
    d << "; " << (r == &one ? "scenario1" : "scenario2") << ": " << failed << "/" << checks.size()
      << " checks violated, worst " << w->id << " |u|=" << w->lhs << " bound=" << w->rhs;
    v.pass = v.pass && failed == 0;
  }
  v.detail = d.str();
  return v;
}

// 8. Halving dt on a switch-free run cuts the end-state error by >= 12.
Verdict integrator_order() {
  const SpeedDropProfile profile(20.0, 0.5, 0.0, 500.0);
  // Single vehicle inside the ramp with a speed error: branch 1 throughout.
  const PlatoonState s0(0.0, {100.0}, {17.0});
  const auto end_state = [&](double dt) {
    SimSettings st;
    st.duration = 4.0;
    st.dt = dt;
    st.record_interval = 0.4;
    return simulate(s0, profile, ControllerParams{}, st).states.back();
  };
  const PlatoonState ref = end_state(1e-4);
  const auto err = [&](double dt) {
    const PlatoonState s = end_state(dt);
    return std::max(std::abs(s.x[0] - ref.x[0]), std::abs(s.y[0] - ref.y[0]));
  };
  const double e1 = err(0.4), e2 = err(0.2), e3 = err(0.1);
  Verdict v;
  v.pass = e1 / e2 >= 12.0 && e2 / e3 >= 12.0;
  v.detail = "error ratios " + fmt("%.2f", e1 / e2) + ", " + fmt("%.2f", e2 / e3);
  return v;
}

// 9. q = 1/T and k = 1/(T v_d(l)).
Verdict macroscopic_formulas() {
  const SpeedDropProfile profile(20.0, 0.5, 0.0, 500.0);
  const Macroscopic before = macroscopic(profile, 1.0, -100.0);
  const Macroscopic after = macroscopic(profile, 1.0, 1000.0);
  Verdict v;
  v.pass = std::abs(before.flow - 1.0) < 1e-12 && std::abs(after.flow - 1.0) < 1e-12 &&
           std::abs(before.density - 0.05) < 1e-12 && std::abs(after.density - 0.1) < 1e-12;
  std::ostringstream d;
  d << "q=" << before.flow << " veh/s; k before drop " << before.density << " veh/m; k after drop "
    << after.density << " veh/m";
  v.detail = d.str();
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("[%s] %d. %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  };
  const auto guarded = [&](int id, const char* name, const std::function<Verdict()>& f) {
    try {
      report(id, name, f());
    } catch (const std::exception& e) {
      report(id, name, Verdict{false, std::string("exception: ") + e.what()});
    }
  };

  const ScenarioRun one = run_file("scenario1.cfg");
  const ScenarioRun two = run_file("scenario2.cfg");

  guarded(1, "Scenario 1 regression", [&] { return scenario1(one); });
  guarded(2, "Scenario 2 regression", [&] { return scenario2(two); });
  guarded(3, "Exponential decay of the max error", lemma1_decay);
  guarded(4, "Non-collision threshold campaign", noncollision_campaign);
  guarded(5, "Error/distance inequality campaigns", lemma_campaigns);
  guarded(6, "Target-curve oracle equivalence", target_oracle);
  guarded(7, "Bounded-control check", [&] { return control_bounds(one, two); });
  guarded(8, "Integrator order", integrator_order);
  guarded(9, "Macroscopic formulas", macroscopic_formulas);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
