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
// Serial reference vs OpenMP path of the data-parallel kernels. Arg 0 is
// serial, arg 1 parallel; results are bit-identical between the two.

#include <benchmark/benchmark.h>

#include "gridbo/allocation.hpp"
#include "gridbo/benchmarks.hpp"
#include "gridbo/sim.hpp"

namespace {

using namespace gridbo;

Execution Exec(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

struct DiskFixture {
  LfrPlant plant = unbalanced_disk_genplant();
  CostSpec spec;
  ControllerDesign design;

  DiskFixture() {
    spec.terms.push_back({{"w_r", "w_di"}, {"z1", "z2"}, NormKind::kHinf, 1.0});
    DesignOptions d;
    d.structure = {3, 1, 1, true};
    d.synthesis.restarts = 1;
    d.synthesis.budget = 600;
    d.synthesis.seed = 7;
    design = design_controller(plant, spec, {GridPoint{-1.0, -1.0}, GridPoint{1.0, 1.0}}, d);
  }
};

const DiskFixture& Disk() {
  static const DiskFixture f;
  return f;
}

void BM_WorstCaseSweep(benchmark::State& state) {
  const auto& f = Disk();
  for (auto _ : state) {
    benchmark::DoNotOptimize(worst_case_sweep(f.plant, f.design, f.spec, 11, Exec(state)));
  }
  state.SetItemsProcessed(state.iterations() * 121);
}
BENCHMARK(BM_WorstCaseSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MultiModelSynthesis(benchmark::State& state) {
  const auto& f = Disk();
  const auto locals = local_models(f.plant, sweep_points(f.plant.domain(), 3));
  SynthesisOptions o;
  o.restarts = 4;
  o.budget = 200;
  o.seed = 3;
  o.execution = Exec(state);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(locals, {3, 1, 1, true}, f.spec, o));
}
BENCHMARK(BM_MultiModelSynthesis)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LocalModels(benchmark::State& state) {
  const auto arm = robot_arm_models();
  const auto points = sweep_points(arm.genplant.domain(), 8);
  for (auto _ : state) benchmark::DoNotOptimize(local_models(arm.genplant, points, Exec(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(points.size()));
}
BENCHMARK(BM_LocalModels)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimulateBatch(benchmark::State& state) {
  const auto& f = Disk();
  std::vector<SimScenario> batch(4);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].model = unbalanced_disk_model(DiskParameters{}.mass * (0.8 + 0.1 * static_cast<double>(i)));
    batch[i].controller = f.design.robust_controller();
    batch[i].reference = builtin_reference("disk_steps_v1");
    batch[i].t_end = 5.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(simulate_batch(batch, Exec(state)));
}
BENCHMARK(BM_SimulateBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
