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

// Deterministic discrete-event engine. Virtual time only: the clock moves
// when Advance() is called and never looks at the wall clock.

#ifndef OPSARENA_SIMKERNEL_H_
#define OPSARENA_SIMKERNEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/faultlib.h"
#include "opsarena/hashing.h"
#include "opsarena/telemetry.h"
#include "opsarena/topology.h"

namespace opsarena {

struct SimClock {
  int64_t now_ms = 0;
  int64_t step_stride_s = 30;

  int64_t now_s() const { return now_ms / 1000; }
};

struct WorkloadSpec {
  int rate = 100;            // requests per second
  int64_t duration_s = 0;    // 0 = until stopped
  std::string entry;         // the app's frontend service
  // Keys every stochastic draw; problems build their kernel from it.
  uint64_t seed = 0;
};

// One scheduled request.
struct ScheduledRequest {
  int64_t t_ms = 0;
  std::string entry;

  bool operator==(const ScheduledRequest&) const = default;
};

// Request-schedule files:
//   # opsarena-schedule v1
//   <timestamp_ms>,<entry service>
// one request per line, timestamps positive and non-decreasing. Blank lines
// and further '#' lines are ignored; an empty file is an empty schedule.
inline constexpr std::string_view kScheduleHeader = "# opsarena-schedule v1";

absl::StatusOr<std::vector<ScheduledRequest>> ParseSchedule(
    std::string_view text);
absl::StatusOr<std::vector<ScheduledRequest>> LoadScheduleFile(
    const std::string& path);
std::string FormatSchedule(const std::vector<ScheduledRequest>& schedule);

struct RequestOutcome {
  uint64_t request_id = 0;
  int64_t t_ms = 0;
  std::vector<std::pair<std::string, std::string>> path;  // (caller, callee)
  CallCode code = CallCode::kOk;
  std::string failing_service;  // empty when ok
  int64_t latency_us = 0;

  bool ok() const { return code == CallCode::kOk; }
  double latency_ms() const { return static_cast<double>(latency_us) / 1000.0; }
  bool operator==(const RequestOutcome&) const = default;
};

nlohmann::json ToJson(const RequestOutcome& outcome);

// Runs the workload against `state` and writes telemetry into `store`.
// Neither is owned; both must outlive the kernel. Single-threaded.
class SimKernel {
 public:
  static constexpr double kMaxLoadFactor = 3.0;  // latency multiplier <= 4x
  static constexpr int64_t kLossTimeoutUs = 50'000;
  static constexpr int64_t kFastFailUs = 200;

  SimKernel(ClusterState* state, TelemetryStore* store, uint64_t seed);

  // Points a copied kernel at copies of its state and store. Nothing else
  // changes, so the copy continues exactly where the original stands.
  void Rebind(ClusterState* state, TelemetryStore* store) {
    state_ = state;
    store_ = store;
  }

  // Open-loop constant-rate arrivals starting at the current clock: request
  // i arrives at start + floor((i + 1) * 1000 / rate) ms. Replaces any
  // earlier workload. Errors: UnknownEntryService, InvalidArgument.
  absl::Status StartWorkload(const WorkloadSpec& spec);
  // Subsequent advances draw arrivals from `schedule` (absolute sim-times).
  // Errors: UnknownEntryService.
  absl::Status ReplayWorkload(std::vector<ScheduledRequest> schedule);
  void StopWorkload();

  // Arrivals in (from_ms, to_ms] of the current workload.
  std::vector<ScheduledRequest> ScheduleWindow(int64_t from_ms,
                                               int64_t to_ms) const;

  // Processes every request due in (now, now + delta_ms], then finalizes
  // telemetry up to the new clock. Returns the number of requests run.
  // Outcomes are appended to `outcomes` when it is non-null.
  uint64_t Advance(int64_t delta_ms,
                   std::vector<RequestOutcome>* outcomes = nullptr);
  uint64_t AdvanceSeconds(int64_t delta_s,
                          std::vector<RequestOutcome>* outcomes = nullptr) {
    return Advance(delta_s * 1000, outcomes);
  }

  const SimClock& clock() const { return clock_; }
  SimClock& mutable_clock() { return clock_; }
  int64_t now_ms() const { return clock_.now_ms; }
  uint64_t requests_run() const { return next_request_; }

 private:
  struct Plan;
  struct Walk;

  void RunRequest(const Plan& plan, const ScheduledRequest& req,
                  int64_t horizon_ms, std::vector<RequestOutcome>* outcomes);
  int64_t Visit(const Plan& plan, Walk& walk, int callee, int caller,
                int caller_pod, std::optional<uint32_t> parent_span,
                int64_t start_us, bool& ok);

  ClusterState* state_;
  TelemetryStore* store_;
  SeededStream loss_rng_;
  SeededStream trace_rng_;
  SimClock clock_;

  enum class Mode { kNone, kRate, kReplay };
  Mode mode_ = Mode::kNone;
  WorkloadSpec spec_;
  int64_t workload_start_ms_ = 0;
  std::vector<ScheduledRequest> replay_;
  size_t replay_cursor_ = 0;

  uint64_t next_request_ = 0;
  // Per-service call counts of the current and previous 1-s bucket; the
  // previous one drives the load factor.
  int64_t load_bucket_ = -1;
  std::vector<uint64_t> calls_this_bucket_;
  std::vector<uint64_t> calls_last_bucket_;
  std::vector<uint64_t> round_robin_;
};

}  // namespace opsarena

#endif  // OPSARENA_SIMKERNEL_H_
