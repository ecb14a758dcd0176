// Copyright 2026 The OpsArena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <string>

#include "benchmark/benchmark.h"
#include "opsarena/action.h"
#include "opsarena/baselines.h"
#include "opsarena/orchestrator.h"
#include "opsarena/problems.h"
#include "opsarena/simkernel.h"
#include "opsarena/telemetry.h"
#include "opsarena/topology.h"

namespace opsarena {
namespace {

// Simulated seconds of workload at the given rate.
void BM_KernelAdvance(benchmark::State& state) {
  const int rate = static_cast<int>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    ClusterState cluster = *LoadApp(AppName::kSocialNetwork);
    TelemetryStore store;
    SimKernel kernel(&cluster, &store, 7);
    WorkloadSpec spec;
    spec.rate = rate;
    spec.entry = "nginx-web-server";
    if (!kernel.StartWorkload(spec).ok()) state.SkipWithError("workload");
    state.ResumeTiming();
    benchmark::DoNotOptimize(kernel.AdvanceSeconds(60));
  }
  state.SetItemsProcessed(state.iterations() * rate * 60);
}
BENCHMARK(BM_KernelAdvance)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ParseAction(benchmark::State& state) {
  const std::string raw =
      "exec_shell(\"kubectl patch svc user-service -n test-social-network "
      "--type json -p '[{\\\"op\\\":\\\"replace\\\"}]'\")";
  for (auto _ : state) benchmark::DoNotOptimize(ParseAction(raw));
}
BENCHMARK(BM_ParseAction);

// A full random-agent session, warm-up cached after the first iteration.
void BM_Session(benchmark::State& state) {
  const Problem* p =
      *ProblemRegistry::Default().Find("network_loss_hotel_res-detection-1");
  SessionConfig config;
  config.out_dir = std::filesystem::temp_directory_path() / "opsarena-bench";
  for (auto _ : state) {
    RandomAgent agent(4);  // 7 steps, one small get_traces
    benchmark::DoNotOptimize(RunSession(*p, agent, config, 10));
  }
  std::filesystem::remove_all(config.out_dir);
}
BENCHMARK(BM_Session)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace opsarena

BENCHMARK_MAIN();
