// Copyright 2026 The gridbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
//
// gridbo <command> [--config FILE | --benchmark NAME] [--seed N] [--out DIR]
//                  [--profile NAME] [--density N] [--jobs N]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gridbo/bayes_opt.hpp"
#include "gridbo/run.hpp"

int main(int argc, char** argv) {
  using namespace gridbo;
  CLI::App app{"Grid point allocation for robust and LPV controller synthesis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_file, benchmark, out, profile;
  std::optional<std::uint64_t> seed;
  std::optional<int> density, jobs;
  app.add_option("--config", config_file, "JSON run configuration");
  app.add_option("--benchmark", benchmark, "built-in benchmark: unbalanced_disk | robot_arm");
  app.add_option("--seed", seed, "run seed");
  app.add_option("--out", out, "artifact directory");
  app.add_option("--profile", profile, "BO profile: disk | satellite | robot_arm");
  app.add_option("--density", density, "sweep points per axis");
  app.add_option("--jobs", jobs, "OpenMP threads");

  app.add_subcommand("allocate", "design K0, allocate grid points, redesign");
  app.add_subcommand("synthesize", "design K0 on the initial points");
  app.add_subcommand("analyze", "dense worst-case sweep of the stored controllers");
  app.add_subcommand("simulate", "nonlinear closed-loop runs of the stored controllers");
  app.add_subcommand("report", "summary.json from the artifacts in --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (config_file && benchmark) throw ConfigError("give --config or --benchmark, not both");
    if (config_file) {
      cfg = load_run_config(*config_file);
    } else if (benchmark) {
      cfg = builtin_run_config(*benchmark);
    } else if (command != "report") {
      throw ConfigError("one of --config and --benchmark is required");
    }
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (profile) {
      cfg.profile = *profile;
      cfg.bo = acquisition_profile(*profile);
    }
    if (density) cfg.density = *density;
    if (jobs) cfg.jobs = *jobs;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return run_command(command, cfg, std::cerr);
}
