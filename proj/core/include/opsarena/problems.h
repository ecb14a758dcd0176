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

// The problem registry. A problem pairs one task level with one fault
// instance (app, fault, target) and carries the hidden oracle.

#ifndef OPSARENA_PROBLEMS_H_
#define OPSARENA_PROBLEMS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/faultlib.h"
#include "opsarena/simkernel.h"
#include "opsarena/topology.h"

namespace opsarena {

enum class TaskLevel {
  kDetection = 1,
  kLocalization = 2,
  kAnalysis = 3,
  kMitigation = 4,
};

inline constexpr std::array<TaskLevel, 4> kAllTaskLevels = {
    TaskLevel::kDetection, TaskLevel::kLocalization, TaskLevel::kAnalysis,
    TaskLevel::kMitigation};

std::string_view TaskName(TaskLevel level);  // "Detection", ...
std::string_view TaskSlug(TaskLevel level);  // "detection", ...
std::optional<TaskLevel> ParseTaskLevel(std::string_view name);
// Root cause analysis is graded on two parts; the other tasks on one.
std::vector<std::string_view> TaskSubtasks(TaskLevel level);

std::string_view AppSlug(AppName app);  // "hotel_res", "social_net"

// Sim-seconds of nominal traffic before the fault goes in, so detectors
// have a baseline. Task clocks start at injection.
inline constexpr int64_t kDefaultWarmupS = 900;
inline constexpr int kDefaultWorkloadRate = 100;

struct Solution {
  // Detection: "yes" or "no".
  std::string detection;
  // Localization: the faulty services.
  std::set<std::string> services;
  // Analysis: (system layer, fault type).
  std::optional<SystemLayer> layer;
  std::optional<std::string> fault_type;
};

// What the agent is shown.
struct Information {
  std::string description;
  std::string instructions;
  std::string api_docs;

  std::string Text() const;
  bool operator==(const Information&) const = default;
};

struct Problem {
  std::string pid;
  TaskLevel task = TaskLevel::kDetection;
  int index = 1;
  AppName app = AppName::kHotelReservation;
  FaultSpec fault;
  WorkloadSpec workload;
  int64_t warmup_s = kDefaultWarmupS;
  Solution solution;

  bool is_noop() const { return fault.name == FaultName::kNoop; }
  // Shown to the agent. Depends only on (app, task).
  Information information() const;
};

// The agent-facing description of an app's environment.
std::string DescribeApp(AppName app);
// Task instructions including the accepted submission formats.
std::string InstructionsFor(TaskLevel level);

struct ProblemFilter {
  std::optional<TaskLevel> task;
  std::optional<AppName> app;
  std::optional<int> fault_no;

  bool Matches(const Problem& p) const;
};

// Parses "task=Detection,app=SocialNetwork,fault=2" style filters.
absl::StatusOr<ProblemFilter> ParseProblemFilter(std::string_view text);

class ProblemRegistry {
 public:
  // The stock pool, ordered by (fault, level, index).
  static const ProblemRegistry& Default();

  // Validates ids and runs the information leak check.
  static absl::StatusOr<ProblemRegistry> Build(std::vector<Problem> problems);

  const std::vector<Problem>& problems() const { return problems_; }
  std::vector<const Problem*> List(const ProblemFilter& filter = {}) const;
  // Errors: UnknownProblem.
  absl::StatusOr<const Problem*> Find(std::string_view pid) const;

  // pid, app, fault, level, extensibility for each problem.
  nlohmann::json Catalog() const;

 private:
  std::vector<Problem> problems_;
};

// The stock injection targets of each fault.
std::vector<FaultSpec> StockFaultInstances(FaultName name);

// Non-empty when `info` gives away part of `solution`: the fault's name,
// or a localization answer as a whole token.
std::vector<std::string> FindLeaks(const Problem& problem,
                                   const Information& info);

}  // namespace opsarena

#endif  // OPSARENA_PROBLEMS_H_
