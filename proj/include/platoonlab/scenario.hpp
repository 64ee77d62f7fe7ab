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
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "platoonlab/controller.hpp"
#include "platoonlab/errors.hpp"
#include "platoonlab/profile.hpp"
#include "platoonlab/sim.hpp"
#include "platoonlab/text.hpp"

// Scenario files are UTF-8 "key = value" documents split into the sections
// [profile], [platoon], [sim] and [perturbations]. '#' starts a comment.
//
//   [profile]      v0, rho, drop_start, drop_length
//   [platoon]      n, T, tie_policy (velocity | spacing)
//   [sim]          x1_start, duration, dt, record_interval,
//                  integrator (rk4 | rk45), saturation (none | m/s^2),
//                  abs_tol, rel_tol
//   [perturbations] perturb = <vehicle>, <dx m>[, <dv m/s>]   (repeatable)
//
// Every key is optional; missing keys keep the defaults of Scenario.

namespace platoonlab {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { syntax, unknown_key, type_mismatch, invalid_value, hypothesis };

  ConfigError(Kind kind, std::size_t line, const std::string& what)
      : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) + what),
        kind_(kind),
        line_(line) {}

  Kind kind() const { return kind_; }
  // One-based; 0 when the problem is not tied to a line.
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

namespace detail {

inline double require_double(std::string_view key, std::string_view value, std::size_t line) {
  const auto v = parse_double(value);
  if (!v)
    throw ConfigError(ConfigError::Kind::type_mismatch, line,
                      "'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  return *v;
}

inline long long require_integer(std::string_view key, std::string_view value, std::size_t line) {
  const auto v = parse_integer(value);
  if (!v)
    throw ConfigError(ConfigError::Kind::type_mismatch, line,
                      "'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
  return *v;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = s.find(',');
    items.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return items;
}

struct ProfileFields {
  double v0, rho, drop_start, drop_length;
};

inline ProfileFields fields(const SpeedDropProfile& p) {
  return {p.v0(), p.rho(), p.drop_start(), p.drop_length()};
}

inline SpeedDropProfile make_profile(const ProfileFields& f, std::size_t line) {
  try {
    return SpeedDropProfile(f.v0, f.rho, f.drop_start, f.drop_length);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ConfigError::Kind::invalid_value, line, e.what());
  }
}

}  // namespace detail

// Applies one key of one section to `s`. Used by the parser and by sweeps.
inline void set_key(Scenario& s, std::string_view section, std::string_view key,
                    std::string_view value, std::size_t line = 0) {
  using detail::require_double;
  const auto unknown = [&] {
    return ConfigError(ConfigError::Kind::unknown_key, line,
                       "unknown key '" + std::string(key) + "' in [" + std::string(section) + "]");
  };
  const auto invalid = [&](const std::string& why) {
    return ConfigError(ConfigError::Kind::invalid_value, line,
                       "'" + std::string(key) + "': " + why);
  };

  if (section == "profile") {
    detail::ProfileFields f = detail::fields(s.profile);
    if (key == "v0") f.v0 = require_double(key, value, line);
    else if (key == "rho") f.rho = require_double(key, value, line);
    else if (key == "drop_start") f.drop_start = require_double(key, value, line);
    else if (key == "drop_length") f.drop_length = require_double(key, value, line);
    else throw unknown();
    s.profile = detail::make_profile(f, line);
  } else if (section == "platoon") {
    if (key == "n") {
      const long long n = detail::require_integer(key, value, line);
      if (n < 1) throw invalid("must be at least 1");
      s.n = static_cast<std::size_t>(n);
    } else if (key == "T") {
      const double T = require_double(key, value, line);
      if (!(T > 0.0)) throw invalid("must be positive");
      s.controller.headway = T;
    } else if (key == "tie_policy") {
      if (value == "velocity") s.controller.tie_policy = TiePolicy::velocity_tracking;
      else if (value == "spacing") s.controller.tie_policy = TiePolicy::spacing_tracking;
      else throw invalid("expected 'velocity' or 'spacing'");
    } else {
      throw unknown();
    }
  } else if (section == "sim") {
    const auto positive = [&] {
      const double v = require_double(key, value, line);
      if (!(v > 0.0)) throw invalid("must be positive");
      return v;
    };
    if (key == "x1_start") s.x1_start = require_double(key, value, line);
    else if (key == "duration") s.sim.duration = positive();
    else if (key == "dt") s.sim.dt = positive();
    else if (key == "record_interval") s.sim.record_interval = positive();
    else if (key == "abs_tol") s.sim.abs_tol = positive();
    else if (key == "rel_tol") s.sim.rel_tol = positive();
    else if (key == "integrator") {
      if (value == "rk4") s.sim.integrator = Integrator::rk4;
      else if (value == "rk45") s.sim.integrator = Integrator::rk45;
      else throw invalid("expected 'rk4' or 'rk45'");
    } else if (key == "saturation") {
      if (value == "none") s.controller.saturation.reset();
      else s.controller.saturation = positive();
    } else {
      throw unknown();
    }
  } else if (section == "perturbations") {
    if (key != "perturb") throw unknown();
    const auto items = detail::split_list(value);
    if (items.size() < 2 || items.size() > 3)
      throw ConfigError(ConfigError::Kind::syntax, line,
                        "perturb expects '<vehicle>, <dx>[, <dv>]'");
    const long long vehicle = detail::require_integer("perturb vehicle", items[0], line);
    if (vehicle < 1) throw invalid("vehicle index is one-based");
    Perturbation p;
    p.vehicle = static_cast<std::size_t>(vehicle);
    p.dx = require_double("perturb dx", items[1], line);
    if (items.size() == 3) p.dv = require_double("perturb dv", items[2], line);
    s.perturbations.push_back(p);
  } else {
    throw ConfigError(ConfigError::Kind::unknown_key, line,
                      "unknown section [" + std::string(section) + "]");
  }
}

// Cross-field checks: perturbation indices, the step grid and M*T < 1.
inline void validate_config(const Scenario& s) {
  for (const Perturbation& p : s.perturbations)
    if (p.vehicle > s.n)
      throw ConfigError(ConfigError::Kind::invalid_value, 0,
                        "perturbation vehicle " + std::to_string(p.vehicle) + " exceeds n = " +
                            std::to_string(s.n));
  if (s.sim.integrator == Integrator::rk4) {
    const double ratio = s.sim.record_interval / s.sim.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio) || std::round(ratio) < 1.0)
      throw ConfigError(ConfigError::Kind::invalid_value, 0,
                        "record_interval must be a whole multiple of dt");
  }
  const ProfileCheck check = validate(s.profile, s.controller.headway);
  if (!check.ok())
    throw ConfigError(ConfigError::Kind::hypothesis, 0,
                      std::string(to_string(check.violation)) + " (M = " + to_text(check.lipschitz) +
                          ", T = " + to_text(s.controller.headway) + ")");
}

inline Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::string section;
  std::size_t line_no = 0;
  std::size_t headway_line = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(ConfigError::Kind::syntax, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "profile" && section != "platoon" && section != "sim" &&
          section != "perturbations")
        throw ConfigError(ConfigError::Kind::unknown_key, line_no,
                          "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(ConfigError::Kind::syntax, line_no, "expected 'key = value'");
    if (section.empty())
      throw ConfigError(ConfigError::Kind::syntax, line_no, "key outside of any section");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(ConfigError::Kind::syntax, line_no, "empty key");
    set_key(s, section, key, value, line_no);
    if (section == "platoon" && key == "T") headway_line = line_no;
  }
  try {
    validate_config(s);
  } catch (const ConfigError& e) {
    if (e.kind() == ConfigError::Kind::hypothesis && headway_line)
      throw ConfigError(e.kind(), headway_line, e.what());
    throw;
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

// Canonical text form; parse_scenario(serialize(s)) reproduces s.
inline std::string serialize(const Scenario& s) {
  std::ostringstream out;
  out << "[profile]\n"
      << "v0 = " << to_text(s.profile.v0()) << "\n"
      << "rho = " << to_text(s.profile.rho()) << "\n"
      << "drop_start = " << to_text(s.profile.drop_start()) << "\n"
      << "drop_length = " << to_text(s.profile.drop_length()) << "\n\n"
      << "[platoon]\n"
      << "n = " << s.n << "\n"
      << "T = " << to_text(s.controller.headway) << "\n"
      << "tie_policy = "
      << (s.controller.tie_policy == TiePolicy::velocity_tracking ? "velocity" : "spacing") << "\n\n"
      << "[sim]\n"
      << "x1_start = " << to_text(s.x1_start) << "\n"
      << "duration = " << to_text(s.sim.duration) << "\n"
      << "dt = " << to_text(s.sim.dt) << "\n"
      << "record_interval = " << to_text(s.sim.record_interval) << "\n"
      << "integrator = " << (s.sim.integrator == Integrator::rk4 ? "rk4" : "rk45") << "\n"
      << "saturation = " << (s.controller.saturation ? to_text(*s.controller.saturation) : "none")
      << "\n"
      << "abs_tol = " << to_text(s.sim.abs_tol) << "\n"
      << "rel_tol = " << to_text(s.sim.rel_tol) << "\n\n"
      << "[perturbations]\n";
  for (const Perturbation& p : s.perturbations)
    out << "perturb = " << p.vehicle << ", " << to_text(p.dx) << ", " << to_text(p.dv) << "\n";
  return out.str();
}

// Equality over every field a scenario file can express.
inline bool same_configuration(const Scenario& a, const Scenario& b) {
  return a.n == b.n && a.profile == b.profile && a.controller.headway == b.controller.headway &&
         a.controller.tie_policy == b.controller.tie_policy &&
         a.controller.saturation == b.controller.saturation && a.x1_start == b.x1_start &&
         a.sim.duration == b.sim.duration && a.sim.dt == b.sim.dt &&
         a.sim.record_interval == b.sim.record_interval && a.sim.integrator == b.sim.integrator &&
         a.sim.abs_tol == b.sim.abs_tol && a.sim.rel_tol == b.sim.rel_tol &&
         a.perturbations == b.perturbations;
}

}  // namespace platoonlab
