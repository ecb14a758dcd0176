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

#ifndef OPSARENA_HEALTH_H_
#define OPSARENA_HEALTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "opsarena/telemetry.h"
#include "opsarena/topology.h"

namespace opsarena {

inline constexpr double kErrorRateThreshold = 0.01;
inline constexpr int64_t kHealthWindowMs = 60'000;

struct HealthViolation {
  std::string service;  // empty for the workload-level check
  std::string check;    // "replicas", "pod_phase" or "error_rate"
  std::string detail;

  bool operator==(const HealthViolation&) const = default;
};

struct HealthVerdict {
  bool healthy = true;
  std::vector<HealthViolation> violations;
};

nlohmann::json ToJson(const HealthVerdict& verdict);

// Healthy iff every service runs exactly its deploy-time replica count, no
// pod is Pending/Failed/CrashLoopBackOff, and the workload error rate over
// the trailing `window_ms` is at most kErrorRateThreshold.
HealthVerdict HealthCheck(const ClusterState& state,
                          const TelemetryStore& store,
                          int64_t window_ms = kHealthWindowMs);

}  // namespace opsarena

#endif  // OPSARENA_HEALTH_H_
