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

// platoonlab command line: run, verify, sweep and threshold over scenario files.
//
// Exit codes: 0 success, 1 usage error, 2 hypothesis violation,
// 3 bound-check failure, 4 numeric blow-up.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "platoonlab.hpp"

namespace fs = std::filesystem;
using namespace platoonlab;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kHypothesis = 2, kBoundFailure = 3, kBlowup = 4 };

fs::path output_dir(const std::string& flag, const std::string& config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PLATOON_OUT"); env && *env)
    return fs::path(env) / fs::path(config).stem();
  return fs::path("platoon_out") / fs::path(config).stem();
}

struct Outcome {
  int code = kOk;
  AnalysisReport report;
  RunArtifacts artifacts;
};

Outcome simulate_and_write(const Scenario& scenario, const fs::path& dir) {
  Outcome o;
  const Trajectory traj = run(scenario);
  o.report = analyze(scenario, traj);
  o.artifacts = write_artifacts(dir, scenario, traj, &o.report);
  return o;
}

// Runs `body` and maps library exceptions onto exit codes.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ConfigError::Kind::hypothesis ? kHypothesis : kUsage;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return kHypothesis;
  } catch (const NumericBlowup& e) {
    std::cerr << "numeric blow-up: " << e.what() << "\n";
    return kBlowup;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

// Nobody may have passed the drop yet in a short run.
std::string band_text(const HeadwayBand& b) {
  if (b.samples == 0) return "n/a";
  return "[" + to_text(b.min) + ", " + to_text(b.max) + "]";
}

void print_summary(const Outcome& o) {
  std::cout << "artifacts: " << o.artifacts.directory.string() << "\n"
            << "verdict: " << (o.report.pass() ? "pass" : "fail") << "\n"
            << "collision_events: " << o.report.collisions << "\n"
            << "headway_band: " << band_text(o.report.band) << "\n";
  for (const BoundCheck& c : o.report.checks)
    if (!c.pass())
      std::cout << "violation: " << c.id << " lhs=" << to_text(c.lhs) << " rhs=" << to_text(c.rhs)
                << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched constant-time-headway platoon simulator and verifier"};
  app.require_subcommand(1);

  std::string config;
  std::string out;

  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write its artifacts");
  run_cmd->add_option("config", config, "Scenario file")->required();
  run_cmd->add_option("--out", out, "Output directory (default: $PLATOON_OUT/<name> or platoon_out/<name>)");

  auto* verify_cmd =
      app.add_subcommand("verify", "Simulate and run every bound check; exit 3 on any violation");
  verify_cmd->add_option("config", config, "Scenario file")->required();
  verify_cmd->add_option("--out", out, "Output directory");

  std::string param;
  std::vector<std::string> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one scenario per parameter value");
  sweep_cmd->add_option("config", config, "Scenario file")->required();
  sweep_cmd->add_option("--param", param, "Parameter as section.key, e.g. platoon.T")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", out, "Output directory");

  auto* threshold_cmd =
      app.add_subcommand("threshold", "Print the non-collision threshold and profile constants");
  threshold_cmd->add_option("config", config, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*run_cmd || *verify_cmd) {
    const bool verify = verify_cmd->parsed();
    return guarded([&] {
      const Scenario scenario = load_scenario(config);
      const Outcome o = simulate_and_write(scenario, output_dir(out, config));
      print_summary(o);
      return verify && !o.report.pass() ? kBoundFailure : kOk;
    });
  }

  if (*threshold_cmd) {
    return guarded([&] {
      const Scenario scenario = load_scenario(config);
      const ProfileCheck check = validate(scenario.profile, scenario.controller.headway);
      const double threshold = noncollision_threshold(scenario.profile, scenario.controller.headway);
      std::cout << "noncollision_threshold: " << to_text(threshold) << " m\n"
                << "lipschitz_constant: " << to_text(check.lipschitz) << " 1/s\n"
                << "speed_infimum: " << to_text(check.infimum) << " m/s\n"
                << "contraction_factor: " << to_text(check.contraction_factor) << "\n";
      return kOk;
    });
  }

  // sweep
  return guarded([&] {
    const auto dot = param.find('.');
    if (dot == std::string::npos) throw std::invalid_argument("--param must be section.key");
    const std::string section = param.substr(0, dot);
    const std::string key = param.substr(dot + 1);
    const Scenario base = load_scenario(config);
    const fs::path root = output_dir(out, config);

    std::vector<Scenario> scenarios;
    for (const std::string& v : values) {
      Scenario s = base;
      set_key(s, section, key, trim(v));
      validate_config(s);
      scenarios.push_back(std::move(s));
    }

    std::vector<std::future<Outcome>> jobs;
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
      const fs::path dir = root / (key + "=" + std::string(trim(values[k])));
      jobs.push_back(std::async(std::launch::async, [&, k, dir] {
        return simulate_and_write(scenarios[k], dir);
      }));
    }
    int code = kOk;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      int job_code = kOk;
      Outcome o;
      try {
        o = jobs[k].get();
      } catch (const NumericBlowup& e) {
        std::cerr << param << "=" << values[k] << ": numeric blow-up: " << e.what() << "\n";
        job_code = kBlowup;
      }
      if (job_code == kOk) {
        std::cout << param << "=" << values[k] << ": " << (o.report.pass() ? "pass" : "fail")
                  << " band=" << band_text(o.report.band) << " collisions=" << o.report.collisions << " -> "
                  << o.artifacts.directory.string() << "\n";
      }
      code = std::max(code, job_code);
    }
    return code;
  });
}
