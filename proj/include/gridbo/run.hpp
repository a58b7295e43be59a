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
// Run configuration and the pipeline commands behind the command-line tool.
// Every command reads and writes artifacts in one output directory; all
// randomness is derived from the single run seed.

#ifndef GRIDBO_RUN_HPP_
#define GRIDBO_RUN_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridbo/allocation.hpp"
#include "gridbo/benchmarks.hpp"
#include "gridbo/sim.hpp"

namespace gridbo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct SimulationConfig {
  std::vector<std::string> references;
  /// 0 runs to the end of each reference.
  double t_end = 0.0;
  /// Disk only: the mass of the simulated plant.
  double mass = DiskParameters{}.mass;
  /// Input noise; 0 disables it.
  double noise_psd = 0.0;
  double sample_time = 0.01;
  /// Robot arm only: put the actuator lag in the loop.
  bool actuator = true;
  OdeOptions ode;
};

struct RunConfig {
  /// "unbalanced_disk" or "robot_arm"; empty when plant_file is used.
  std::string benchmark;
  std::filesystem::path plant_file;
  CostSpec cost;
  InitMode init = InitMode::kCorners;
  std::size_t n0 = 2;
  std::vector<GridPoint> explicit_points;
  std::string profile;
  AcquisitionConfig bo;
  ControllerStructure structure;
  /// Initial design, and redesigns inside the allocation loop.
  SynthesisOptions k0_synthesis;
  SynthesisOptions redesign;
  std::size_t n_target = 5;
  double early_stop_ratio = 0.01;
  int early_stop_patience = 0;
  std::uint64_t seed = 1;
  int density = 21;
  std::filesystem::path out = "out";
  /// OpenMP threads; 0 keeps the runtime default.
  int jobs = 0;
  SimulationConfig simulation;

  /// Throws ConfigError on an unknown benchmark, a missing plant file,
  /// non-positive profile values or an incomplete controller structure.
  void validate() const;
};

std::vector<std::string> builtin_benchmark_names();
/// Defaults for a built-in benchmark. Throws ConfigError if unknown.
RunConfig builtin_run_config(const std::string& benchmark);

/// Keys present in `j` override the defaults of its "benchmark" (or empty
/// defaults for a plant file). Relative paths resolve against `base_dir`.
/// Throws ConfigError on unknown keys or malformed values.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& file);
void to_json(nlohmann::json& j, const RunConfig& cfg);

/// Everything allocate needs, built from a config.
struct PipelineSetup {
  LfrPlant plant;
  std::optional<RobotArmModels> arm;
  std::vector<GridPoint> theta0;
  DesignOptions k0_design;
  AllocationOptions allocation;
};
PipelineSetup make_setup(const RunConfig& cfg);

/// Closed-loop scenario of a built-in benchmark: the disk (mass from the
/// config, input noise through W_di) or the arm (`arm` set, scheduled by
/// the state, actuator lag optional). `index` picks the noise stream.
SimScenario make_sim_scenario(const RunConfig& cfg, const ControllerDesign& design, const std::string& reference,
                              const std::optional<RobotArmModels>& arm, std::uint64_t index);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Commands. Each returns an exit code; ConfigError (bad config, missing
// inputs) propagates so the caller can map it to kExitUsage.

/// Initial design on the starting points: k0.json, selection0.json.
int cmd_synthesize(const RunConfig& cfg, std::ostream& log);
/// Initial design plus allocation: config.json, k0.json, selection0.json,
/// selection.json, controller.json, trace.csv, bo_trace_<it>.csv. On a
/// synthesis failure mid-loop the partial artifacts are written and 1 is
/// returned.
int cmd_allocate(const RunConfig& cfg, std::ostream& log);
/// Dense sweep of every controller present: sweep_k0.csv, sweep.csv.
int cmd_analyze(const RunConfig& cfg, std::ostream& log);
/// Closed-loop runs of every controller present on every configured
/// reference: sim_<controller>_<reference>.csv plus sim_index.csv.
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
/// summary.json from the CSVs in `dir`.
int cmd_report(const std::filesystem::path& dir, std::ostream& log);

/// Runs `name` with exceptions mapped to exit codes (ConfigError -> 2, any
/// other failure -> 1), printing the diagnostic to `log`.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log);

}  // namespace gridbo

#endif  // GRIDBO_RUN_HPP_
