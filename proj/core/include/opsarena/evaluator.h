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

// Grading of submissions and aggregation of session reports.

#ifndef OPSARENA_EVALUATOR_H_
#define OPSARENA_EVALUATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/action.h"
#include "opsarena/health.h"
#include "opsarena/problems.h"

namespace opsarena {

enum class SessionStatus { kRunning, kSubmitted, kStepLimitReached, kAborted };

std::string_view SessionStatusName(SessionStatus status);
std::optional<SessionStatus> ParseSessionStatus(std::string_view name);

// Failure reasons. Empty on success.
inline constexpr std::string_view kReasonMalformed = "malformed";
inline constexpr std::string_view kReasonWrongAnswer = "wrong_answer";
inline constexpr std::string_view kReasonUnknownLabel = "unknown_label";
inline constexpr std::string_view kReasonMissingField = "missing_field";
inline constexpr std::string_view kReasonEmpty = "empty";
inline constexpr std::string_view kReasonUnhealthy = "unhealthy";
inline constexpr std::string_view kReasonNoSubmission = "no_submission";
inline constexpr std::string_view kReasonAborted = "aborted";

struct Grade {
  bool success = false;
  std::string reason;
  // Localization.
  std::optional<bool> acc_at_1;
  std::optional<bool> acc_at_3;
  // Analysis.
  std::optional<bool> level_correct;
  std::optional<bool> type_correct;
  // Mitigation.
  std::optional<HealthVerdict> health;
};

// The values passed to submit(), in order, keywords included.
std::vector<Value> SubmissionPayload(const Call& submit);

Grade EvalDetection(const std::vector<Value>& payload, const Solution& oracle);
// Accepts one string, one list of strings, or several strings; candidates
// are ranked in the order given.
Grade EvalLocalization(const std::vector<Value>& payload,
                       const Solution& oracle);
// Accepts (layer, fault_type) as two strings or one two-element list.
Grade EvalAnalysis(const std::vector<Value>& payload, const Solution& oracle);
Grade EvalMitigation(const HealthVerdict& verdict);

// A grade for a session that ended without a submission.
Grade NoSubmissionGrade(TaskLevel task, SessionStatus status);

// "TTD", "TTL", "TTA" or "TTM".
std::string_view TimeMetricName(TaskLevel task);

struct EvalReport {
  std::string pid;
  std::string agent;
  TaskLevel task = TaskLevel::kDetection;
  SessionStatus status = SessionStatus::kRunning;
  std::string abort_reason;
  std::string submission;  // the submit call as sent, if any
  Grade grade;
  // Sim-seconds from fault injection to the submit; unset without one.
  std::optional<int64_t> time_s;
  int steps = 0;
  int max_steps = 0;
  int64_t step_stride_s = 0;
  uint64_t seed = 0;
  int64_t input_tokens = 0;
  int64_t output_tokens = 0;
  std::string trajectory_ref;
  // Kept out of ToJson so reports stay byte-identical across runs.
  double wall_time_s = 0;

  bool success() const { return grade.success; }
};

nlohmann::json ToJson(const EvalReport& report);
absl::StatusOr<EvalReport> EvalReportFromJson(const nlohmann::json& doc);

struct ActionCounts {
  int64_t total = 0;
  std::map<std::string, int64_t> by_api;         // "invalid" if unparsable
  std::map<std::string, int64_t> by_shell_verb;  // exec_shell only
};

ActionCounts CountActions(const std::vector<std::string>& raw_actions);

struct ReportInput {
  EvalReport report;
  std::vector<std::string> actions;
};

struct TaskSummary {
  std::string agent;
  TaskLevel task = TaskLevel::kDetection;
  int count = 0;
  int successes = 0;
  double accuracy_pct = 0;
  std::optional<double> acc_at_3_pct;  // localization only
  std::optional<double> mean_time_s;   // over sessions that submitted
  double mean_steps = 0;
  double mean_input_tokens = 0;
  double mean_output_tokens = 0;
};

struct AggregateSummary {
  std::vector<TaskSummary> tasks;               // by (agent, task)
  std::map<std::string, ActionCounts> actions;  // by agent
};

// Deterministic: input order does not matter.
AggregateSummary Aggregate(const std::vector<ReportInput>& inputs);
std::string FormatAggregate(const AggregateSummary& summary);
nlohmann::json ToJson(const AggregateSummary& summary);

struct SweepRow {
  int max_steps = 0;
  int count = 0;
  int successes = 0;
  double accuracy_pct = 0;
  double mean_steps = 0;
};

inline constexpr int kSweepLimits[] = {5, 10, 15, 20};

SweepRow SummarizeSweep(int max_steps, const std::vector<EvalReport>& reports);
std::string FormatSweep(std::string_view agent,
                        const std::vector<SweepRow>& rows);
nlohmann::json ToJson(const std::vector<SweepRow>& rows);
bool AccuracyNondecreasing(const std::vector<SweepRow>& rows);

}  // namespace opsarena

#endif  // OPSARENA_EVALUATOR_H_
