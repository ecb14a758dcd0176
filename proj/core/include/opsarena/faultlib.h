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

// The fault library: ten injectable, recoverable state transforms and the
// per-call behavior rules the simulation kernel consults.

#ifndef OPSARENA_FAULTLIB_H_
#define OPSARENA_FAULTLIB_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/topology.h"

namespace opsarena {

enum class FaultName {
  kAuthenticationMissing = 1,
  kTargetPortMisconfig = 2,
  kRevokeAuth = 3,
  kUserUnregistered = 4,
  kBuggyAppImage = 5,
  kScalePod = 6,
  kAssignNonExistentNode = 7,
  kNetworkLoss = 8,
  kPodFailure = 9,
  kNoop = 10,
};

inline constexpr int kFaultCount = 10;

enum class FaultCategory { kFunctional, kSymptomatic, kNone };
enum class SystemLayer { kApplication, kVirtualization };
// How freely a fault can be pointed at new targets: any service, any
// database service, or only its one hard-wired target.
enum class Extensibility { kFull, kPartial, kFixed };

std::string_view FaultNameString(FaultName name);
std::optional<FaultName> ParseFaultName(std::string_view name);
std::string_view FaultCategoryName(FaultCategory category);
std::string_view SystemLayerName(SystemLayer layer);
std::optional<SystemLayer> ParseSystemLayer(std::string_view name);
std::string_view ExtensibilityName(Extensibility ext);

// Closed answer vocabulary for root-cause analysis.
inline constexpr std::array<std::string_view, 2> kLayerVocabulary = {
    "application", "virtualization"};
inline constexpr std::array<std::string_view, 7> kFaultTypeVocabulary = {
    "auth_missing",   "port_misconfig", "auth_revoked",       "user_unregistered",
    "buggy_image",    "bad_scale_op",   "bad_node_assignment"};

// Static, per-fault metadata.
struct FaultInfo {
  FaultName name;
  std::string_view slug;  // used in problem ids
  FaultCategory category;
  std::optional<SystemLayer> layer;          // functional faults only
  std::optional<std::string_view> fault_type;  // functional faults only
  std::vector<int> levels;
  Extensibility extensibility;
  std::vector<AppName> apps;
  std::string_view description;
};

const std::vector<FaultInfo>& FaultTable();
const FaultInfo& GetFaultInfo(FaultName name);
int FaultNumber(FaultName name);

struct FaultSpec {
  FaultName name = FaultName::kNoop;
  AppName app = AppName::kHotelReservation;
  std::vector<std::string> targets;
  std::map<std::string, double> params;

  const FaultInfo& info() const { return GetFaultInfo(name); }
  // Identity used for AlreadyInjected: name, app and targets.
  std::string Key() const;
  bool operator==(const FaultSpec&) const = default;
};

nlohmann::json ToJson(const FaultSpec& spec);
absl::StatusOr<FaultSpec> FaultSpecFromJson(const nlohmann::json& doc);

inline constexpr double kDefaultLossRate = 0.3;
inline constexpr int kMisconfiguredPortOffset = 1000;
inline constexpr std::string_view kNonExistentNode = "extra-node";
// The only target of the fixed-extensibility fault.
inline constexpr std::string_view kBuggyImageService = "geo";

// Image tags known to ship the connection bug.
bool IsDefectiveImage(std::string_view image);
std::string DefectiveImageFor(std::string_view image);

// ---------------------------------------------------------------------------
// Behavior rules.

enum class EffectKind {
  kRefuseConnection,
  kAuthError,
  kFailProbabilistically,
  kPodPhaseOverride,
  kReplicaOverride,
  kImageBug,
};

std::string_view EffectKindName(EffectKind kind);

struct EffectRule {
  EffectKind kind = EffectKind::kRefuseConnection;
  std::string service;
  std::string store;                  // kAuthError
  double probability = 0.0;           // kFailProbabilistically
  std::optional<PodPhase> phase;      // kPodPhaseOverride
  int replicas = 0;                   // kReplicaOverride

  bool operator==(const EffectRule&) const = default;
};

// The documented effect set of a fault. The kernel does not interpret these
// rules directly: it evaluates EvaluateCall() against the mutated state,
// which produces exactly these effects while the fault is in place.
std::vector<EffectRule> FaultSemantics(const FaultSpec& spec);

enum class CallCode {
  kOk,
  kConnectionRefused,
  kUnauthenticated,
  kUnavailable,
  kDeadlineExceeded,
  kConnectionReset,
  kInternal,
};

std::string_view CallCodeName(CallCode code);

// Outcome of one call edge before any downstream work.
struct CallVerdict {
  CallCode code = CallCode::kOk;
  // Log text at the caller / callee; empty when nothing is logged there.
  std::string caller_message;
  std::string callee_message;
};

// Request-independent checks of `caller_pod` (null for the external client)
// calling `callee`. Loss and per-pod phase are per-request and handled by
// the kernel via LossRate() and the chosen pod.
CallVerdict EvaluateCall(const ClusterState& state, const PodState* caller_pod,
                         const ServiceSpec& callee);

// Failure inside the callee itself (no downstream calls are made).
std::optional<std::string> InternalFailure(const ServiceSpec& callee);

// ---------------------------------------------------------------------------
// Injection.

struct InjectionRecord {
  uint64_t id = 0;
  FaultSpec spec;
  int64_t inject_ms = 0;
  // What recover() needs to restore, keyed by target.
  std::map<std::string, std::string> undo;
};

nlohmann::json ToJson(const InjectionRecord& record);

// Tracks active injections for one cluster. Inject and Recover are the only
// fault-side mutations of the state.
class FaultInjector {
 public:
  // Errors: UnknownTarget, AlreadyInjected, InvalidArgument for a spec that
  // does not fit the fault's extensibility.
  absl::StatusOr<InjectionRecord> Inject(ClusterState& state,
                                         const FaultSpec& spec);
  // Errors: NotInjected.
  absl::Status Recover(ClusterState& state, const InjectionRecord& record);

  const std::map<uint64_t, InjectionRecord>& active() const { return active_; }

 private:
  std::map<uint64_t, InjectionRecord> active_;
  uint64_t next_id_ = 1;
};

// Checks targets against the topology and the fault's extensibility.
absl::Status ValidateFaultSpec(const ClusterState& state,
                               const FaultSpec& spec);

// Fault schedule documents: [{"fault": ..., "targets": [...],
// "params": {...}, "inject_at_s": N}, ...].
struct ScheduledFault {
  FaultSpec spec;
  int64_t inject_at_s = 0;
};

nlohmann::json ToJson(const std::vector<ScheduledFault>& schedule);
absl::StatusOr<std::vector<ScheduledFault>> ParseFaultSchedule(
    const nlohmann::json& doc);

}  // namespace opsarena

#endif  // OPSARENA_FAULTLIB_H_
