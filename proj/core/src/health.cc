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

#include "opsarena/health.h"

#include "opsarena/strings.h"

namespace opsarena {

nlohmann::json ToJson(const HealthVerdict& verdict) {
  nlohmann::json violations = nlohmann::json::array();
  for (const HealthViolation& v : verdict.violations) {
    violations.push_back(
        {{"service", v.service}, {"check", v.check}, {"detail", v.detail}});
  }
  return {{"healthy", verdict.healthy}, {"violations", std::move(violations)}};
}

HealthVerdict HealthCheck(const ClusterState& state,
                          const TelemetryStore& store, int64_t window_ms) {
  HealthVerdict verdict;
  const std::string& ns = state.app_namespace();
  const NamespaceState* space = state.FindNamespace(ns);
  if (space != nullptr) {
    for (const auto& [name, spec] : space->services) {
      const int want = state.DeployReplicas(ns, name);
      const int running = state.RunningPods(ns, name);
      if (running != want) {
        verdict.violations.push_back(
            {name, "replicas",
             StrCat(running, " running pods, expected ", want)});
      }
    }
    for (const PodState& pod : space->pods) {
      if (pod.phase == PodPhase::kRunning) continue;
      verdict.violations.push_back(
          {pod.service, "pod_phase",
           StrCat(pod.pod_name, " is ", PodPhaseName(pod.phase))});
    }
  }
  const int64_t now = store.now_ms();
  const double rate = store.WorkloadErrorRate(now - window_ms, now);
  if (rate > kErrorRateThreshold) {
    verdict.violations.push_back(
        {"", "error_rate",
         fmt::format("workload error rate {:.4f} over the last {}s exceeds {}",
                     rate, window_ms / 1000, kErrorRateThreshold)});
  }
  verdict.healthy = verdict.violations.empty();
  return verdict;
}

}  // namespace opsarena
