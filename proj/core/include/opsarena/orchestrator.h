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

// Session lifecycle: deploys a problem, polls an agent for actions, runs
// them through the ACI, and grades the outcome.
//
//   Orchestrator orch;
//   orch.RegisterAgent("oracle", MakeBuiltinAgent("oracle", seed));
//   orch.InitProblem("misconfig_app_hotel_res-mitigation-1", config);
//   absl::StatusOr<SessionResult> r = orch.StartProblem("oracle", 10);

#ifndef OPSARENA_ORCHESTRATOR_H_
#define OPSARENA_ORCHESTRATOR_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/agents.h"
#include "opsarena/evaluator.h"
#include "opsarena/faultlib.h"
#include "opsarena/problems.h"
#include "opsarena/simkernel.h"
#include "opsarena/telemetry.h"
#include "opsarena/topology.h"

namespace opsarena {

inline constexpr int kDefaultMaxSteps = 10;
inline constexpr int64_t kDefaultStepStrideS = 30;
// Workload run between a mitigation submit and the health check.
inline constexpr int64_t kMitigationSettleS = 60;
inline constexpr std::string_view kTrajectoryFormat = "opsarena-trajectory";
inline constexpr int kTrajectoryFormatVersion = 1;
inline constexpr std::string_view kAllowTestAgentsEnv =
    "OPSARENA_ALLOW_TEST_AGENTS";

// A deployed problem: cluster, telemetry and kernel bound together, with
// the fault in place. Not copyable; use Clone().
struct Environment {
  ClusterState state;
  TelemetryStore store;
  SimKernel kernel{&state, &store, 0};
  FaultInjector injector;
  std::optional<InjectionRecord> injection;  // unset for Noop problems
  // Sim-time of injection; time metrics count from here.
  int64_t inject_ms = 0;

  Environment() = default;
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  std::unique_ptr<Environment> Clone() const;
  int64_t seconds_since_injection() const {
    return (kernel.now_ms() - inject_ms) / 1000;
  }
};

// Deploys the problem's app, runs the warm-up workload, then injects the
// fault. Warm-ups are cached per (app, seed, rate, warm-up length), so a
// sweep pays for each only once.
absl::StatusOr<std::unique_ptr<Environment>> DeployProblem(
    const Problem& problem, uint64_t seed,
    int64_t step_stride_s = kDefaultStepStrideS);
void ClearWarmupCache();

struct SessionConfig {
  uint64_t seed = 0;
  int64_t step_stride_s = kDefaultStepStrideS;
  // Session files go to <out_dir>/<pid>/.
  std::filesystem::path out_dir = "opsarena-out";
  bool allow_test_agents = false;
};

// True if OPSARENA_ALLOW_TEST_AGENTS is set to 1.
bool TestAgentsAllowedByEnv();

struct TrajectoryStep {
  int step = 0;
  int64_t sim_time_s = 0;  // since injection, after the clock advanced
  std::string action;
  std::string api;  // call name, or "invalid"
  std::string observation;
  int64_t input_tokens = 0;
  int64_t output_tokens = 0;

  bool operator==(const TrajectoryStep&) const = default;
};

nlohmann::json ToJson(const TrajectoryStep& step);

struct TrajectoryHeader {
  std::string pid;
  std::string agent;
  uint64_t seed = 0;
  int max_steps = 0;
  int64_t step_stride_s = 0;
  int64_t warmup_s = 0;
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<TrajectoryStep> steps;

  std::vector<std::string> actions() const;
};

std::string FormatTrajectory(const Trajectory& trajectory);
absl::StatusOr<Trajectory> ParseTrajectory(std::string_view jsonl);
absl::StatusOr<Trajectory> ReadTrajectoryFile(
    const std::filesystem::path& path);

struct SessionResult {
  EvalReport report;
  Trajectory trajectory;
  std::filesystem::path session_dir;
  std::filesystem::path report_path;
  std::filesystem::path trajectory_path;
};

class Orchestrator {
 public:
  explicit Orchestrator(
      const ProblemRegistry* registry = &ProblemRegistry::Default());
  ~Orchestrator();

  // Errors: DuplicateName.
  absl::Status RegisterAgent(std::string name, std::unique_ptr<Agent> agent);

  // Deploys the problem and returns what the agent will see.
  // Errors: UnknownProblem, SessionActive.
  absl::StatusOr<Information> InitProblem(std::string_view pid,
                                          const SessionConfig& config);

  // Runs the session to completion and closes the problem. Agent failures
  // do not surface as errors: they end the session as aborted.
  // Errors: NotFound for an unregistered agent, FailedPrecondition without
  // an initialized problem, and filesystem errors.
  absl::StatusOr<SessionResult> StartProblem(std::string_view agent_name,
                                             int max_steps = kDefaultMaxSteps);

  void CloseProblem();
  bool problem_active() const { return env_ != nullptr; }
  // The live environment of the active problem, for inspection.
  Environment* environment() { return env_.get(); }

 private:
  const ProblemRegistry* registry_;
  std::map<std::string, std::unique_ptr<Agent>, std::less<>> agents_;
  const Problem* problem_ = nullptr;
  SessionConfig config_;
  std::unique_ptr<Environment> env_;
};

// One-shot helper: InitProblem + StartProblem with a private orchestrator.
absl::StatusOr<SessionResult> RunSession(const Problem& problem, Agent& agent,
                                         const SessionConfig& config,
                                         int max_steps = kDefaultMaxSteps);

using AgentFactory = std::function<absl::StatusOr<std::unique_ptr<Agent>>()>;

// Runs every problem once per step limit, with a fresh agent per session.
// Sessions of limit N go under <out_dir>/max_steps_<N>/.
absl::StatusOr<std::vector<SweepRow>> RunStepLimitSweep(
    const std::vector<const Problem*>& problems, const AgentFactory& factory,
    const SessionConfig& config, const std::vector<int>& limits);

// Deploys the problem, runs `duration_s` of workload after injection, and
// writes the whole telemetry store as an offline dataset.
absl::Status ExportProblem(const Problem& problem, uint64_t seed,
                           int64_t duration_s,
                           const std::filesystem::path& dir,
                           bool redacted = true);

}  // namespace opsarena

#endif  // OPSARENA_ORCHESTRATOR_H_
