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

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoonlab/analysis.hpp"
#include "platoonlab/scenario.hpp"
#include "platoonlab/sim.hpp"
#include "platoonlab/text.hpp"

namespace platoonlab {

inline constexpr const char* kTrajectoryHeader = "t,vehicle,x,v,u,branch,eps1,eps2,headway";

// One row per recorded sample and vehicle; vehicles are one-based and the
// headway column is empty where it is undefined.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kTrajectoryHeader << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PlatoonState& s = traj.states[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      const ControlDecision& d = traj.decisions[k][i];
      out << to_text(traj.times[k]) << ',' << i + 1 << ',' << to_text(s.x[i]) << ','
          << to_text(s.y[i]) << ',' << to_text(d.u) << ',' << static_cast<int>(d.branch) << ','
          << to_text(d.eps.eps1) << ',' << to_text(d.eps.eps2) << ',';
      if (const auto& h = traj.headways[k][i]) out << to_text(*h);
      out << "\n";
    }
  }
}

// Vehicles 10, 20, ... up to n (one-based); the last vehicle when n < 10.
inline std::vector<std::size_t> default_plot_vehicles(std::size_t n) {
  std::vector<std::size_t> v;
  for (std::size_t i = 10; i <= n; i += 10) v.push_back(i);
  if (v.empty() && n > 0) v.push_back(n);
  return v;
}

inline void write_velocity_plot_csv(std::ostream& out, const Trajectory& traj, std::size_t vehicle) {
  out << "x,v\n";
  for (const PlatoonState& s : traj.states)
    out << to_text(s.x[vehicle - 1]) << ',' << to_text(s.y[vehicle - 1]) << "\n";
}

inline void write_headway_plot_csv(std::ostream& out, const Trajectory& traj, std::size_t vehicle) {
  out << "x,headway\n";
  for (std::size_t k = 0; k < traj.size(); ++k)
    if (const auto& h = traj.headways[k][vehicle - 1])
      out << to_text(traj.states[k].x[vehicle - 1]) << ',' << to_text(*h) << "\n";
}

inline void write_margins_csv(std::ostream& out, const std::vector<BoundCheck>& checks) {
  out << "id,lhs,rhs,margin,pass\n";
  for (const BoundCheck& c : checks)
    out << c.id << ',' << to_text(c.lhs) << ',' << to_text(c.rhs) << ',' << to_text(c.margin())
        << ',' << (c.pass() ? "true" : "false") << "\n";
}

// "key: value" lines.
inline void write_report(std::ostream& out, const AnalysisReport& r) {
  out << "verdict: " << (r.pass() ? "pass" : "fail") << "\n"
      << "lipschitz_constant: " << to_text(r.profile.lipschitz) << "\n"
      << "speed_infimum: " << to_text(r.profile.infimum) << "\n"
      << "contraction_factor: " << to_text(r.profile.contraction_factor) << "\n"
      << "noncollision_threshold: " << to_text(r.threshold) << "\n"
      << "initial_distance_to_target: " << to_text(r.initial_distance) << "\n"
      << "initial_max_error: " << to_text(r.initial_max_error) << "\n"
      << "within_threshold: " << (r.initial_distance <= r.threshold ? "true" : "false") << "\n"
      << "collision_events: " << r.collisions << "\n"
      << "headway_band_min: " << to_text(r.band.min) << "\n"
      << "headway_band_max: " << to_text(r.band.max) << "\n"
      << "headway_band_samples: " << r.band.samples << "\n"
      << "headway_undefined_samples: " << r.band.undefined << "\n";
  for (const Macroscopic& m : r.macroscopic)
    out << "flow_at_" << to_text(m.location) << ": " << to_text(m.flow) << "\n"
        << "density_at_" << to_text(m.location) << ": " << to_text(m.density) << "\n";
  for (const VehicleDecay& d : r.decay) {
    const std::string key = "decay_rate_v" + std::to_string(d.vehicle + 1);
    if (d.fit.rate)
      out << key << ": " << to_text(*d.fit.rate) << "\n"
          << key << "_residual: " << to_text(d.fit.residual) << "\n";
    else
      out << key << ": " << (d.fit.points == 0 ? "converged" : "insufficient") << "\n";
  }
  std::size_t failed = 0;
  for (const BoundCheck& c : r.checks) failed += c.pass() ? 0 : 1;
  out << "bound_checks: " << r.checks.size() << "\n"
      << "bound_violations: " << failed << "\n";
  if (const BoundCheck* w = worst(r.checks))
    out << "worst_check: " << w->id << "\n"
        << "worst_check_lhs: " << to_text(w->lhs) << "\n"
        << "worst_check_rhs: " << to_text(w->rhs) << "\n"
        << "worst_check_margin: " << to_text(w->margin()) << "\n";
  for (const BoundCheck& c : r.checks)
    if (!c.pass())
      out << "violation: " << c.id << " lhs=" << to_text(c.lhs) << " rhs=" << to_text(c.rhs)
          << "\n";
}

struct RunArtifacts {
  std::filesystem::path directory;
  std::filesystem::path scenario;
  std::filesystem::path trajectory;
  std::filesystem::path report;
  std::filesystem::path margins;
  std::vector<std::filesystem::path> plots;
};

namespace detail {
inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

inline std::string vehicle_tag(std::size_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%03zu", v);
  return buf;
}
}  // namespace detail

// Writes scenario echo, trajectory and plot data into `dir`; the report and
// margin table only when `report` is given.
inline RunArtifacts write_artifacts(const std::filesystem::path& dir, const Scenario& scenario,
                                    const Trajectory& traj, const AnalysisReport* report = nullptr,
                                    std::vector<std::size_t> plot_vehicles = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "plot");
  RunArtifacts a;
  a.directory = dir;
  a.scenario = dir / "scenario.cfg";
  detail::open_output(a.scenario) << serialize(scenario);
  a.trajectory = dir / "trajectory.csv";
  {
    auto out = detail::open_output(a.trajectory);
    write_trajectory_csv(out, traj);
  }
  if (plot_vehicles.empty()) plot_vehicles = default_plot_vehicles(scenario.n);
  for (std::size_t v : plot_vehicles) {
    if (v < 1 || v > traj.vehicles())
      throw std::out_of_range("plot vehicle " + std::to_string(v) + " outside platoon");
    const fs::path vel = dir / "plot" / ("velocity_" + detail::vehicle_tag(v) + ".csv");
    const fs::path hw = dir / "plot" / ("headway_" + detail::vehicle_tag(v) + ".csv");
    {
      auto out = detail::open_output(vel);
      write_velocity_plot_csv(out, traj, v);
    }
    {
      auto out = detail::open_output(hw);
      write_headway_plot_csv(out, traj, v);
    }
    a.plots.push_back(vel);
    a.plots.push_back(hw);
  }
  if (report) {
    a.report = dir / "report.txt";
    {
      auto out = detail::open_output(a.report);
      write_report(out, *report);
    }
    a.margins = dir / "margins.csv";
    auto out = detail::open_output(a.margins);
    write_margins_csv(out, report->checks);
  }
  return a;
}

}  // namespace platoonlab
