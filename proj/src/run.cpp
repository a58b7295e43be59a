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

#include "gridbo/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridbo/rng.hpp"

namespace gridbo {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckKeys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// null stands for +inf.
void ReadLimit(const json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  out = j.at(key).is_null() ? kInf : j.at(key).get<double>();
}

json Limit(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void ReadSynthesis(const json& j, SynthesisOptions& s, const std::string& where) {
  CheckKeys(j, {"restarts", "budget", "margin"}, where);
  Read(j, "restarts", s.restarts);
  Read(j, "budget", s.budget);
  Read(j, "margin", s.margin);
}

json SynthesisJson(const SynthesisOptions& s) {
  return {{"restarts", s.restarts}, {"budget", s.budget}, {"margin", s.margin}};
}

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

template <typename Writer>
std::string ToText(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::optional<ControllerDesign> LoadDesign(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    return ReadJsonFile(path).get<ControllerDesign>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Controller artifacts in the order they are analysed and simulated.
struct ControllerArtifact {
  const char* tag;
  const char* file;
};
constexpr ControllerArtifact kControllers[] = {{"k0", "k0.json"}, {"kbo", "controller.json"}};

void WriteAllocationArtifacts(const fs::path& out, const AllocationResult& r, Eigen::Index dim) {
  write_file_atomic(out / "selection.json", Dump(json(r.selection)));
  write_file_atomic(out / "controller.json", Dump(json(r.design)));
  write_file_atomic(out / "trace.csv", ToText([&](std::ostream& os) { write_trace_csv(os, r.trace, dim); }));
  for (std::size_t i = 0; i < r.bo_traces.size(); ++i) {
    write_file_atomic(out / ("bo_trace_" + std::to_string(i + 1) + ".csv"),
                      ToText([&](std::ostream& os) { write_bo_trace_csv(os, r.bo_traces[i]); }));
  }
}

// -- CSV reading for the report ----------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("CSV is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  double number(std::size_t row, std::size_t col) const {
    try {
      return std::stod(rows[row].at(col));
    } catch (const std::exception&) {
      throw ConfigError("CSV cell is not a number: row " + std::to_string(row + 1));
    }
  }
};

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table ReadCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
  t.header = SplitCsv(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(SplitCsv(line));
    if (t.rows.back().size() != t.header.size()) throw ConfigError(path.string() + ": ragged row");
  }
  return t;
}

json Finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json SweepSummary(const Table& t) {
  const std::size_t jc = t.column("J");
  double worst = -kInf;
  std::size_t worst_row = 0, unstable = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double v = t.number(r, jc);
    if (!std::isfinite(v)) ++unstable;
    const double key = std::isnan(v) ? kInf : v;
    if (key > worst) {
      worst = key;
      worst_row = r;
    }
  }
  json theta = json::array();
  for (std::size_t c = 0; c < jc && !t.rows.empty(); ++c) theta.push_back(t.number(worst_row, c));
  return {{"points", t.rows.size()},
          {"j_worst", Finite(worst)},
          {"theta_worst", theta},
          {"unstable_count", unstable},
          {"verdict", unstable == 0 ? "all_stable" : "unstable_points"}};
}

}  // namespace

// -- Configuration -------------------------------------------------------------

void RunConfig::validate() const {
  if (benchmark.empty() == plant_file.empty())
    throw ConfigError("give exactly one of 'benchmark' and 'plant_file'");
  if (!benchmark.empty()) {
    const auto names = builtin_benchmark_names();
    if (std::find(names.begin(), names.end(), benchmark) == names.end())
      throw ConfigError("unknown benchmark '" + benchmark + "'");
  } else if (!fs::exists(plant_file)) {
    throw ConfigError("plant file not found: " + plant_file.string());
  }
  if (cost.terms.empty()) throw ConfigError("cost specification has no terms");
  bo.validate();
  if (structure.n_u < 1 || structure.n_y < 1 || structure.n_xk < 0)
    throw ConfigError("controller structure needs n_u, n_y >= 1 and n_xk >= 0");
  if (structure.parameter_count() < 1) throw ConfigError("controller structure has no free parameters");
  for (const auto* s : {&k0_synthesis, &redesign}) {
    if (s->restarts < 1 || s->budget < 1 || !(s->margin >= 0.0))
      throw ConfigError("synthesis restarts and budget must be positive");
  }
  if (init == InitMode::kRandom && n0 < 1) throw ConfigError("random initialization needs n0 >= 1");
  if (init == InitMode::kExplicit && explicit_points.empty()) throw ConfigError("explicit initialization needs points");
  if (n_target < 1) throw ConfigError("n_target must be positive");
  if (early_stop_patience < 0 || !(early_stop_ratio >= 0.0)) throw ConfigError("early stop settings must be >= 0");
  if (density < 2) throw ConfigError("density must be at least 2");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (!(simulation.t_end >= 0.0) || !(simulation.sample_time > 0.0) || !(simulation.noise_psd >= 0.0) ||
      !(simulation.mass > 0.0))
    throw ConfigError("simulation settings out of range");
  for (const auto& r : simulation.references) builtin_reference(r);
  simulation.ode.validate();
}

std::vector<std::string> builtin_benchmark_names() { return {"unbalanced_disk", "robot_arm"}; }

RunConfig builtin_run_config(const std::string& benchmark) {
  RunConfig c;
  c.benchmark = benchmark;
  if (benchmark == "unbalanced_disk") {
    c.cost.terms.push_back({{"w_r", "w_di"}, {"z1", "z2"}, NormKind::kHinf, 1.0});
    c.init = InitMode::kCorners;
    c.profile = "disk";
    c.structure = {3, 1, 1, true};
    c.k0_synthesis.restarts = 4;
    c.k0_synthesis.budget = 1500;
    c.redesign.restarts = 2;
    c.redesign.budget = 1500;
    c.n_target = 5;
    c.density = 21;
    c.simulation.references = {"disk_steps_v1"};
    c.simulation.ode.output_dt = 0.01;
    c.simulation.ode.max_step = 0.01;
    c.simulation.ode.max_steps = 2'000'000;
  } else if (benchmark == "robot_arm") {
    c.cost.terms.push_back({{"r", "d"}, {"z1", "z2"}, NormKind::kHinf, 1.0});
    c.init = InitMode::kDiagonal;
    c.profile = "robot_arm";
    c.structure = {2, 2, 2, false};
    c.k0_synthesis.restarts = 2;
    c.k0_synthesis.budget = 1000;
    c.redesign = c.k0_synthesis;
    c.n_target = 8;
    // 64 Latin hypercube samples over the ten scheduling variables.
    c.density = 8;
    c.simulation.references = {"arm_ref1_v1", "arm_ref2_v1", "arm_ref3_v1"};
    c.simulation.ode.output_dt = 0.01;
    c.simulation.ode.max_step = 1e-3;
    c.simulation.ode.max_steps = 200'000;
  } else {
    throw ConfigError("unknown benchmark '" + benchmark + "'");
  }
  c.bo = acquisition_profile(c.profile);
  c.early_stop_patience = 0;
  return c;
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  try {
    CheckKeys(j, {"benchmark", "plant_file", "cost", "init", "profile", "bo", "controller", "synthesis", "redesign",
                  "n_target", "early_stop", "seed", "density", "out", "jobs", "simulation"},
              "run config");
    if (j.contains("benchmark") && j.contains("plant_file"))
      throw ConfigError("give exactly one of 'benchmark' and 'plant_file'");
    RunConfig c = j.contains("benchmark") ? builtin_run_config(j.at("benchmark").get<std::string>()) : RunConfig{};
    auto resolve = [&](const fs::path& p) { return p.is_absolute() || base_dir.empty() ? p : base_dir / p; };
    if (j.contains("plant_file")) c.plant_file = resolve(j.at("plant_file").get<std::string>());
    if (j.contains("cost")) c.cost = j.at("cost").get<CostSpec>();
    if (j.contains("init")) {
      const json& in = j.at("init");
      CheckKeys(in, {"mode", "n0", "points"}, "init");
      if (in.contains("mode")) c.init = parse_init_mode(in.at("mode").get<std::string>());
      Read(in, "n0", c.n0);
      if (in.contains("points")) c.explicit_points = in.at("points").get<std::vector<GridPoint>>();
    }
    if (j.contains("profile")) {
      c.profile = j.at("profile").get<std::string>();
      c.bo = acquisition_profile(c.profile);
    }
    if (j.contains("bo")) {
      const json& b = j.at("bo");
      CheckKeys(b, {"epsilon", "n_max", "n_initial", "multistart_count", "local_steps"}, "bo");
      Read(b, "epsilon", c.bo.epsilon);
      Read(b, "n_max", c.bo.n_max);
      Read(b, "n_initial", c.bo.n_initial);
      Read(b, "multistart_count", c.bo.multistart_count);
      Read(b, "local_steps", c.bo.local_steps);
    }
    if (j.contains("controller")) {
      const json& k = j.at("controller");
      CheckKeys(k, {"n_xk", "n_u", "n_y", "fixed_zero_D"}, "controller");
      Read(k, "n_xk", c.structure.n_xk);
      Read(k, "n_u", c.structure.n_u);
      Read(k, "n_y", c.structure.n_y);
      Read(k, "fixed_zero_D", c.structure.fixed_zero_d);
    }
    if (j.contains("synthesis")) ReadSynthesis(j.at("synthesis"), c.k0_synthesis, "synthesis");
    if (j.contains("redesign")) ReadSynthesis(j.at("redesign"), c.redesign, "redesign");
    if (j.contains("n_target")) {
      if (j.at("n_target").get<long long>() < 1) throw ConfigError("n_target must be positive");
      c.n_target = j.at("n_target").get<std::size_t>();
    }
    if (j.contains("early_stop")) {
      const json& e = j.at("early_stop");
      CheckKeys(e, {"ratio", "patience"}, "early_stop");
      Read(e, "ratio", c.early_stop_ratio);
      Read(e, "patience", c.early_stop_patience);
    }
    Read(j, "seed", c.seed);
    Read(j, "density", c.density);
    if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>());
    Read(j, "jobs", c.jobs);
    if (j.contains("simulation")) {
      const json& s = j.at("simulation");
      CheckKeys(s,
                {"references", "t_end", "mass", "noise_psd", "sample_time", "actuator", "rel_tol", "abs_tol",
                 "max_step", "output_dt", "max_steps"},
                "simulation");
      auto& sim = c.simulation;
      Read(s, "references", sim.references);
      Read(s, "t_end", sim.t_end);
      Read(s, "mass", sim.mass);
      Read(s, "noise_psd", sim.noise_psd);
      Read(s, "sample_time", sim.sample_time);
      Read(s, "actuator", sim.actuator);
      Read(s, "rel_tol", sim.ode.rel_tol);
      Read(s, "abs_tol", sim.ode.abs_tol);
      ReadLimit(s, "max_step", sim.ode.max_step);
      Read(s, "output_dt", sim.ode.output_dt);
      Read(s, "max_steps", sim.ode.max_steps);
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& file) {
  return run_config_from_json(ReadJsonFile(file), file.parent_path());
}

void to_json(json& j, const RunConfig& c) {
  j = json::object();
  if (!c.benchmark.empty()) j["benchmark"] = c.benchmark;
  if (!c.plant_file.empty()) j["plant_file"] = c.plant_file.string();
  j["cost"] = c.cost;
  j["init"] = {{"mode", to_string(c.init)}, {"n0", c.n0}, {"points", c.explicit_points}};
  if (!c.profile.empty()) j["profile"] = c.profile;
  j["bo"] = {{"epsilon", c.bo.epsilon},
             {"n_max", c.bo.n_max},
             {"n_initial", c.bo.n_initial},
             {"multistart_count", c.bo.multistart_count},
             {"local_steps", c.bo.local_steps}};
  j["controller"] = {{"n_xk", c.structure.n_xk},
                     {"n_u", c.structure.n_u},
                     {"n_y", c.structure.n_y},
                     {"fixed_zero_D", c.structure.fixed_zero_d}};
  j["synthesis"] = SynthesisJson(c.k0_synthesis);
  j["redesign"] = SynthesisJson(c.redesign);
  j["n_target"] = c.n_target;
  j["early_stop"] = {{"ratio", c.early_stop_ratio}, {"patience", c.early_stop_patience}};
  j["seed"] = c.seed;
  j["density"] = c.density;
  j["out"] = c.out.string();
  j["jobs"] = c.jobs;
  const auto& s = c.simulation;
  j["simulation"] = {{"references", s.references},   {"t_end", s.t_end},
                     {"mass", s.mass},               {"noise_psd", s.noise_psd},
                     {"sample_time", s.sample_time}, {"actuator", s.actuator},
                     {"rel_tol", s.ode.rel_tol},     {"abs_tol", s.ode.abs_tol},
                     {"max_step", Limit(s.ode.max_step)}, {"output_dt", s.ode.output_dt},
                     {"max_steps", s.ode.max_steps}};
}

PipelineSetup make_setup(const RunConfig& cfg) {
  cfg.validate();
  PipelineSetup s;
  if (cfg.benchmark == "unbalanced_disk") {
    s.plant = unbalanced_disk_genplant();
  } else if (cfg.benchmark == "robot_arm") {
    s.arm = robot_arm_models();
    s.plant = s.arm->genplant;
  } else {
    try {
      s.plant = ReadJsonFile(cfg.plant_file).get<LfrPlant>();
    } catch (const json::exception& e) {
      throw ConfigError(cfg.plant_file.string() + ": " + e.what());
    }
  }
  s.theta0 = initial_points(s.plant.structure(), cfg.init, cfg.n0, derive_seed(cfg.seed, "init"), cfg.explicit_points);
  cfg.cost.validate(local_models(s.plant, {s.theta0.front()}).front());

  s.k0_design.structure = cfg.structure;
  s.k0_design.synthesis = cfg.k0_synthesis;
  s.k0_design.synthesis.seed = derive_seed(cfg.seed, "k0");
  s.k0_design.snapshot = cfg.k0_synthesis;
  s.k0_design.snapshot.seed = derive_seed(cfg.seed, "k0-snapshot");

  auto& a = s.allocation;
  a.n_target = cfg.n_target;
  a.bo = cfg.bo;
  a.design.structure = cfg.structure;
  a.design.synthesis = cfg.redesign;
  a.design.snapshot = cfg.redesign;
  a.early_stop_ratio = cfg.early_stop_ratio;
  a.early_stop_patience = cfg.early_stop_patience;
  a.seed = derive_seed(cfg.seed, "allocate");
  return s;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

// -- Commands ------------------------------------------------------------------

int cmd_synthesize(const RunConfig& cfg, std::ostream& log) {
  const PipelineSetup s = make_setup(cfg);
  fs::create_directories(cfg.out);
  const InitResult init = initialize(s.plant, cfg.cost, s.theta0, s.k0_design);
  write_file_atomic(cfg.out / "k0.json", Dump(json(init.design)));
  write_file_atomic(cfg.out / "selection0.json", Dump(json(init.selection)));
  double worst = 0.0;
  for (const auto& h : init.selection.history()) worst = std::max(worst, h.cost);
  log << "synthesize: K0 on " << init.selection.size() << " points, worst cost " << worst << "\n";
  return kExitOk;
}

int cmd_allocate(const RunConfig& cfg, std::ostream& log) {
  const PipelineSetup s = make_setup(cfg);
  fs::create_directories(cfg.out);
  write_file_atomic(cfg.out / "config.json", Dump(json(cfg)));
  const InitResult init = initialize(s.plant, cfg.cost, s.theta0, s.k0_design);
  write_file_atomic(cfg.out / "k0.json", Dump(json(init.design)));
  write_file_atomic(cfg.out / "selection0.json", Dump(json(init.selection)));
  log << "allocate: K0 designed on " << init.selection.size() << " points\n";
  const Eigen::Index dim = s.plant.structure().block_count();
  try {
    const AllocationResult r = allocate(s.plant, cfg.cost, init.selection, init.design, s.allocation);
    WriteAllocationArtifacts(cfg.out, r, dim);
    for (const auto& row : r.trace) {
      log << "  iteration " << row.iteration << ": J(theta*) " << row.j_before << " -> " << row.j_after << "\n";
    }
    log << "allocate: " << r.selection.size() << " points" << (r.stopped_early ? " (stopped early)" : "") << "\n";
    return kExitOk;
  } catch (const AllocationError& e) {
    WriteAllocationArtifacts(cfg.out, e.partial(), dim);
    log << "allocate: " << e.what() << "; partial results written\n";
    return kExitRuntime;
  }
}

int cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  const PipelineSetup s = make_setup(cfg);
  int found = 0;
  for (const auto& c : kControllers) {
    const auto design = LoadDesign(cfg.out / c.file);
    if (!design) continue;
    ++found;
    const SweepResult sweep = worst_case_sweep(s.plant, *design, cfg.cost, cfg.density);
    const std::string name = std::string(c.tag) == "k0" ? "sweep_k0.csv" : "sweep.csv";
    write_file_atomic(cfg.out / name, ToText([&](std::ostream& os) { write_sweep_csv(os, sweep); }));
    log << "analyze " << c.tag << ": " << sweep.points.size() << " points, worst J " << sweep.j_worst << ", "
        << sweep.unstable_count << " unstable\n";
  }
  if (found == 0) throw ConfigError("no controller artifacts in " + cfg.out.string());
  return kExitOk;
}

SimScenario make_sim_scenario(const RunConfig& cfg, const ControllerDesign& design, const std::string& reference,
                              const std::optional<RobotArmModels>& arm, std::uint64_t index) {
  SimScenario sc;
  sc.reference = builtin_reference(reference);
  sc.t_end = cfg.simulation.t_end > 0.0 ? cfg.simulation.t_end : sc.reference.end_time();
  sc.ode = cfg.simulation.ode;
  if (arm) {
    if (design.kind() != PlantKind::kLpv) throw ConfigError("the robot arm needs an LPV design");
    sc.model = arm->model;
    sc.controller = ScheduledController{design.field(), arm->scheduling_map};
    if (cfg.simulation.actuator) sc.actuator = arm->actuator;
  } else {
    if (design.kind() != PlantKind::kRobust) throw ConfigError("the unbalanced disk needs a robust design");
    sc.model = unbalanced_disk_model(cfg.simulation.mass);
    sc.controller = design.robust_controller();
    sc.disturbance.filter = unbalanced_disk_weights().wdi;
  }
  sc.disturbance.psd = cfg.simulation.noise_psd;
  sc.disturbance.sample_time = cfg.simulation.sample_time;
  sc.disturbance.seed = derive_seed(cfg.seed, "sim-noise", index);
  return sc;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.benchmark.empty()) throw ConfigError("simulation needs a built-in benchmark model");
  if (cfg.simulation.references.empty()) throw ConfigError("no simulation references configured");
  std::optional<RobotArmModels> arm;
  if (cfg.benchmark == "robot_arm") arm = robot_arm_models();

  struct Job {
    std::string tag, reference, file;
  };
  std::vector<Job> jobs;
  std::vector<SimScenario> scenarios;
  for (const auto& c : kControllers) {
    const auto design = LoadDesign(cfg.out / c.file);
    if (!design) continue;
    for (const auto& ref_name : cfg.simulation.references) {
      scenarios.push_back(make_sim_scenario(cfg, *design, ref_name, arm, scenarios.size()));
      jobs.push_back({c.tag, ref_name, "sim_" + std::string(c.tag) + "_" + ref_name + ".csv"});
    }
  }
  if (scenarios.empty()) throw ConfigError("no controller artifacts in " + cfg.out.string());

  const auto results = simulate_batch(scenarios);
  std::ostringstream index;
  index.precision(17);
  index << "file,controller,reference,t_end,t_last,diverged";
  const Eigen::Index channels = results.front().rmse.size();
  for (Eigen::Index i = 0; i < channels; ++i) index << ",rmse_" << i + 1;
  index << "\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    write_file_atomic(cfg.out / jobs[i].file, ToText([&](std::ostream& os) { write_sim_csv(os, r); }));
    index << jobs[i].file << ',' << jobs[i].tag << ',' << jobs[i].reference << ',' << scenarios[i].t_end << ','
          << (r.t.empty() ? 0.0 : r.t.back()) << ',' << (r.diverged ? 1 : 0);
    for (Eigen::Index c = 0; c < r.rmse.size(); ++c) index << ',' << r.rmse(c);
    index << "\n";
    log << "simulate " << jobs[i].tag << " on " << jobs[i].reference << ": "
        << (r.diverged ? "diverged" : "ok") << ", RMSE " << r.rmse.transpose() << "\n";
  }
  write_file_atomic(cfg.out / "sim_index.csv", index.str());
  return kExitOk;
}

int cmd_report(const fs::path& dir, std::ostream& log) {
  if (!fs::is_directory(dir)) throw ConfigError("no such directory: " + dir.string());
  json summary = json::object();

  if (fs::exists(dir / "trace.csv")) {
    const Table t = ReadCsv(dir / "trace.csv");
    json rows = json::array();
    const std::size_t jb = t.column("J_before"), ja = t.column("J_after"), nt = t.column("n_theta");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      rows.push_back({{"iteration", t.number(r, 0)},
                      {"J_before", Finite(t.number(r, jb))},
                      {"J_after", Finite(t.number(r, ja))},
                      {"n_theta", t.number(r, nt)}});
    }
    summary["allocation"] = {{"iterations", t.rows.size()}, {"trace", rows}};
  }

  json sweeps = json::object();
  for (const auto& [tag, file] : {std::pair{"k0", "sweep_k0.csv"}, std::pair{"kbo", "sweep.csv"}}) {
    if (fs::exists(dir / file)) sweeps[tag] = SweepSummary(ReadCsv(dir / file));
  }
  if (!sweeps.empty()) summary["sweep"] = sweeps;

  if (fs::exists(dir / "sim_index.csv")) {
    const Table index = ReadCsv(dir / "sim_index.csv");
    const std::size_t fc = index.column("file"), cc = index.column("controller"), rc = index.column("reference"),
                      dc = index.column("diverged");
    json table = json::array();
    for (std::size_t i = 0; i < index.rows.size(); ++i) {
      const Table sim = ReadCsv(dir / index.rows[i][fc]);
      const bool diverged = index.rows[i][dc] == "1";
      json rmse = json::array();
      for (std::size_t c = 1;; ++c) {
        const std::string y = "y_" + std::to_string(c), r = "r_" + std::to_string(c);
        if (std::find(sim.header.begin(), sim.header.end(), y) == sim.header.end()) break;
        if (diverged || sim.rows.empty()) {
          rmse.push_back(nullptr);
          continue;
        }
        const std::size_t yc = sim.column(y), refc = sim.column(r);
        double acc = 0.0;
        for (std::size_t k = 0; k < sim.rows.size(); ++k) acc += std::pow(sim.number(k, refc) - sim.number(k, yc), 2);
        rmse.push_back(std::sqrt(acc / static_cast<double>(sim.rows.size())));
      }
      table.push_back({{"controller", index.rows[i][cc]},
                       {"reference", index.rows[i][rc]},
                       {"diverged", diverged},
                       {"rmse", rmse}});
    }
    summary["simulation"] = table;
  }

  if (summary.empty()) throw ConfigError("no artifacts to report in " + dir.string());
  write_file_atomic(dir / "summary.json", Dump(summary));
  log << "report: wrote " << (dir / "summary.json").string() << "\n";
  return kExitOk;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log) {
  try {
    set_threads(cfg.jobs);
    if (name == "allocate") return cmd_allocate(cfg, log);
    if (name == "synthesize") return cmd_synthesize(cfg, log);
    if (name == "analyze") return cmd_analyze(cfg, log);
    if (name == "simulate") return cmd_simulate(cfg, log);
    if (name == "report") return cmd_report(cfg.out, log);
    log << "error: unknown command '" << name << "'\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace gridbo
