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

#include "opsarena/faultlib.h"

#include <algorithm>

#include "opsarena/errors.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace {

using nlohmann::json;

constexpr std::string_view kDefectiveTags[] = {"1.1.0-rc1"};

std::string_view TagOf(std::string_view image) {
  size_t colon = image.rfind(':');
  return colon == std::string_view::npos ? std::string_view()
                                         : image.substr(colon + 1);
}

const AuthRequirement* AuthOf(const ClusterState& state,
                              std::string_view target) {
  const ServiceSpec* spec =
      state.FindService(state.app_namespace(), target);
  if (spec == nullptr || !spec->requires_auth) return nullptr;
  return &*spec->requires_auth;
}

absl::Status UnknownTarget(std::string_view target) {
  return TaggedError(absl::StatusCode::kNotFound, kUnknownTarget, target);
}

bool NeedsTargets(FaultName name) { return name != FaultName::kNoop; }

}  // namespace

std::string_view FaultNameString(FaultName name) {
  switch (name) {
    case FaultName::kAuthenticationMissing:
      return "AuthenticationMissing";
    case FaultName::kTargetPortMisconfig:
      return "TargetPortMisconfig";
    case FaultName::kRevokeAuth:
      return "RevokeAuth";
    case FaultName::kUserUnregistered:
      return "UserUnregistered";
    case FaultName::kBuggyAppImage:
      return "BuggyAppImage";
    case FaultName::kScalePod:
      return "ScalePod";
    case FaultName::kAssignNonExistentNode:
      return "AssignNonExistentNode";
    case FaultName::kNetworkLoss:
      return "NetworkLoss";
    case FaultName::kPodFailure:
      return "PodFailure";
    case FaultName::kNoop:
      return "Noop";
  }
  return "unknown";
}

std::optional<FaultName> ParseFaultName(std::string_view name) {
  for (const FaultInfo& info : FaultTable()) {
    if (FaultNameString(info.name) == name || info.slug == name) {
      return info.name;
    }
  }
  return std::nullopt;
}

std::string_view FaultCategoryName(FaultCategory category) {
  switch (category) {
    case FaultCategory::kFunctional:
      return "functional";
    case FaultCategory::kSymptomatic:
      return "symptomatic";
    case FaultCategory::kNone:
      return "none";
  }
  return "unknown";
}

std::string_view SystemLayerName(SystemLayer layer) {
  return layer == SystemLayer::kApplication ? "application" : "virtualization";
}

std::optional<SystemLayer> ParseSystemLayer(std::string_view name) {
  if (name == "application") return SystemLayer::kApplication;
  if (name == "virtualization") return SystemLayer::kVirtualization;
  return std::nullopt;
}

std::string_view ExtensibilityName(Extensibility ext) {
  switch (ext) {
    case Extensibility::kFull:
      return "full";
    case Extensibility::kPartial:
      return "partial";
    case Extensibility::kFixed:
      return "fixed";
  }
  return "unknown";
}

const std::vector<FaultInfo>& FaultTable() {
  using enum FaultName;
  constexpr auto kApp = SystemLayer::kApplication;
  constexpr auto kVirt = SystemLayer::kVirtualization;
  constexpr auto kHotel = AppName::kHotelReservation;
  constexpr auto kSocial = AppName::kSocialNetwork;
  static const auto* table = new std::vector<FaultInfo>{
      {kAuthenticationMissing, "auth_miss_mongodb", FaultCategory::kFunctional,
       kVirt, "auth_missing", {1, 2, 3, 4}, Extensibility::kPartial, {kHotel},
       "Missing authentication credentials cause access denial to MongoDB."},
      {kTargetPortMisconfig, "k8s_target_port_misconfig",
       FaultCategory::kFunctional, kVirt, "port_misconfig", {1, 2, 3, 4},
       Extensibility::kFull, {kSocial},
       "The service cannot connect to the specified port due to "
       "misconfiguration."},
      {kRevokeAuth, "revoke_auth_mongodb", FaultCategory::kFunctional, kApp,
       "auth_revoked", {1, 2, 3, 4}, Extensibility::kPartial, {kHotel},
       "Revoked authentication causes database connection failure."},
      {kUserUnregistered, "user_unregistered_mongodb",
       FaultCategory::kFunctional, kApp, "user_unregistered", {1, 2, 3, 4},
       Extensibility::kPartial, {kHotel},
       "The database service has access failures after the user was "
       "unregistered."},
      {kBuggyAppImage, "misconfig_app", FaultCategory::kFunctional, kApp,
       "buggy_image", {1, 2, 3, 4}, Extensibility::kFixed, {kHotel},
       "Connection code bug in the application image causes access issues."},
      {kScalePod, "scale_pod_zero", FaultCategory::kFunctional, kVirt,
       "bad_scale_op", {1, 2, 3, 4}, Extensibility::kFull, {kSocial},
       "Incorrect scaling operation makes the number of pod zero for a "
       "service."},
      {kAssignNonExistentNode, "assign_to_non_existent_node",
       FaultCategory::kFunctional, kVirt, "bad_node_assignment", {1, 2, 3, 4},
       Extensibility::kFull, {kSocial},
       "Pod in a pending a failure status due to wrong assignment to a "
       "non-existent node."},
      {kNetworkLoss, "network_loss", FaultCategory::kSymptomatic, std::nullopt,
       std::nullopt, {1, 2}, Extensibility::kFull, {kHotel},
       "Network loss causes communication failures for a specific service."},
      {kPodFailure, "pod_failure", FaultCategory::kSymptomatic, std::nullopt,
       std::nullopt, {1, 2}, Extensibility::kFull, {kHotel},
       "Service interruption due to a pod failure."},
      {kNoop, "noop", FaultCategory::kNone, std::nullopt, std::nullopt, {1},
       Extensibility::kFull, {kHotel, kSocial},
       "No faults injected into the system."},
  };
  return *table;
}

const FaultInfo& GetFaultInfo(FaultName name) {
  return FaultTable()[static_cast<int>(name) - 1];
}

int FaultNumber(FaultName name) { return static_cast<int>(name); }

std::string FaultSpec::Key() const {
  std::string key = StrCat(FaultNameString(name), "@", AppNameString(app));
  for (const std::string& t : targets) StrAppend(&key, "/", t);
  return key;
}

json ToJson(const FaultSpec& spec) {
  return json{{"fault", FaultNameString(spec.name)},
              {"app", AppNameString(spec.app)},
              {"targets", spec.targets},
              {"params", spec.params}};
}

absl::StatusOr<FaultSpec> FaultSpecFromJson(const json& doc) {
  if (!doc.is_object() || !doc.contains("fault")) {
    return absl::InvalidArgumentError("fault spec needs a \"fault\" field");
  }
  FaultSpec spec;
  auto name = ParseFaultName(doc["fault"].get<std::string>());
  if (!name) return absl::InvalidArgumentError("unknown fault name");
  spec.name = *name;
  auto app = ParseAppName(doc.value("app", std::string("HotelReservation")));
  if (!app) return TaggedError(absl::StatusCode::kNotFound, kUnknownApp,
                               doc.value("app", std::string()));
  spec.app = *app;
  spec.targets =
      doc.value("targets", std::vector<std::string>{});
  spec.params = doc.value("params", std::map<std::string, double>{});
  return spec;
}

bool IsDefectiveImage(std::string_view image) {
  std::string_view tag = TagOf(image);
  return std::find(std::begin(kDefectiveTags), std::end(kDefectiveTags),
                   tag) != std::end(kDefectiveTags);
}

std::string DefectiveImageFor(std::string_view image) {
  size_t colon = image.rfind(':');
  std::string_view repo =
      colon == std::string_view::npos ? image : image.substr(0, colon);
  return StrCat(repo, ":", kDefectiveTags[0]);
}

std::string_view EffectKindName(EffectKind kind) {
  switch (kind) {
    case EffectKind::kRefuseConnection:
      return "refuse_connection";
    case EffectKind::kAuthError:
      return "auth_error";
    case EffectKind::kFailProbabilistically:
      return "fail_probabilistically";
    case EffectKind::kPodPhaseOverride:
      return "pod_phase_override";
    case EffectKind::kReplicaOverride:
      return "replica_override";
    case EffectKind::kImageBug:
      return "image_bug";
  }
  return "unknown";
}

std::vector<EffectRule> FaultSemantics(const FaultSpec& spec) {
  std::vector<EffectRule> rules;
  for (const std::string& t : spec.targets) {
    EffectRule rule;
    rule.kind = EffectKind::kRefuseConnection;
    rule.service = t;
    switch (spec.name) {
      case FaultName::kAuthenticationMissing:
      case FaultName::kRevokeAuth:
      case FaultName::kUserUnregistered:
        rule.kind = EffectKind::kAuthError;
        rule.store = t;
        break;
      case FaultName::kTargetPortMisconfig:
        break;
      case FaultName::kBuggyAppImage:
        rule.kind = EffectKind::kImageBug;
        rules.push_back(rule);
        rule.kind = EffectKind::kRefuseConnection;
        break;
      case FaultName::kScalePod:
        rule.kind = EffectKind::kReplicaOverride;
        rule.replicas = 0;
        break;
      case FaultName::kAssignNonExistentNode:
        rule.kind = EffectKind::kPodPhaseOverride;
        rule.phase = PodPhase::kPending;
        break;
      case FaultName::kNetworkLoss: {
        auto p = spec.params.find("loss_rate");
        rule.kind = EffectKind::kFailProbabilistically;
        rule.probability = p == spec.params.end() ? kDefaultLossRate : p->second;
        break;
      }
      case FaultName::kPodFailure:
        rule.kind = EffectKind::kPodPhaseOverride;
        rule.phase = PodPhase::kFailed;
        break;
      case FaultName::kNoop:
        continue;
    }
    rules.push_back(rule);
  }
  return rules;
}

std::string_view CallCodeName(CallCode code) {
  switch (code) {
    case CallCode::kOk:
      return "OK";
    case CallCode::kConnectionRefused:
      return "ConnectionRefused";
    case CallCode::kUnauthenticated:
      return "Unauthenticated";
    case CallCode::kUnavailable:
      return "Unavailable";
    case CallCode::kDeadlineExceeded:
      return "DeadlineExceeded";
    case CallCode::kConnectionReset:
      return "ConnectionReset";
    case CallCode::kInternal:
      return "Internal";
  }
  return "unknown";
}

CallVerdict EvaluateCall(const ClusterState& state, const PodState* caller_pod,
                         const ServiceSpec& callee) {
  CallVerdict v;
  if (callee.svc_target_port != callee.container_port) {
    v.code = CallCode::kConnectionRefused;
    v.caller_message =
        StrCat(callee.operation, " failed: connection refused to ",
               callee.name, ":", callee.service_port);
    return v;
  }
  bool has_endpoint = false;
  for (const PodState* p : state.PodsOf(callee.ns, callee.name)) {
    if (p->phase != PodPhase::kPending && p->node.has_value()) {
      has_endpoint = true;
      break;
    }
  }
  if (!has_endpoint) {
    v.code = CallCode::kUnavailable;
    v.caller_message = StrCat(callee.operation,
                              " failed: no endpoints available for service \"",
                              callee.name, "\"");
    return v;
  }
  if (callee.requires_auth) {
    const AuthRequirement& req = *callee.requires_auth;
    std::string credentials;
    if (caller_pod != nullptr) {
      auto cm = caller_pod->mounted_config.find(req.config_map);
      if (cm != caller_pod->mounted_config.end()) {
        auto kv = cm->second.find("credentials");
        if (kv != cm->second.end()) credentials = kv->second;
      }
    }
    std::string principal = req.principal;
    std::string reason;
    if (credentials.empty()) {
      reason = "no credentials provided";
    } else {
      principal = credentials.substr(0, credentials.find(':'));
      const AuthStore* store = state.FindAuthStore(req.store);
      if (store == nullptr || !store->registered_users.contains(principal)) {
        reason = StrCat("user ", principal, " not found");
      } else {
        auto roles = store->principals.find(principal);
        if (roles == store->principals.end() ||
            !roles->second.contains(req.role)) {
          reason = StrCat("not authorized on ", req.store,
                          " to execute command");
        }
      }
    }
    if (!reason.empty()) {
      v.code = CallCode::kUnauthenticated;
      v.callee_message = StrCat(callee.operation,
                                " failed: authentication failed for ",
                                principal, ": ", reason);
      v.caller_message = StrCat(callee.operation,
                                " failed: authentication failed for ",
                                principal);
      return v;
    }
  }
  return v;
}

std::optional<std::string> InternalFailure(const ServiceSpec& callee) {
  if (!IsDefectiveImage(callee.image_tag)) return std::nullopt;
  std::string_view peer =
      callee.dependencies.empty() ? std::string_view("backend")
                                  : std::string_view(callee.dependencies[0]);
  return StrCat(callee.operation, " failed: dial tcp ", peer,
                ": connect: connection refused");
}

json ToJson(const InjectionRecord& record) {
  return json{{"id", record.id},
              {"spec", ToJson(record.spec)},
              {"inject_ms", record.inject_ms},
              {"undo", record.undo}};
}

absl::Status ValidateFaultSpec(const ClusterState& state,
                               const FaultSpec& spec) {
  const FaultInfo& info = spec.info();
  if (AppNameString(spec.app) != state.app_name()) {
    return absl::InvalidArgumentError(
        StrCat("fault targets app ", AppNameString(spec.app),
               " but the cluster runs ", state.app_name()));
  }
  if (NeedsTargets(spec.name) && spec.targets.empty()) {
    return absl::InvalidArgumentError(
        StrCat(FaultNameString(spec.name), " needs at least one target"));
  }
  if (!NeedsTargets(spec.name) && !spec.targets.empty()) {
    return absl::InvalidArgumentError("Noop takes no targets");
  }
  for (const std::string& t : spec.targets) {
    const ServiceSpec* svc = state.FindService(state.app_namespace(), t);
    if (svc == nullptr) return UnknownTarget(t);
    switch (info.extensibility) {
      case Extensibility::kFull:
        break;
      case Extensibility::kPartial:
        if (svc->kind != ServiceKind::kDatabase || !svc->requires_auth) {
          return absl::InvalidArgumentError(
              StrCat(FaultNameString(spec.name),
                     " needs an authenticated database target, got ", t));
        }
        break;
      case Extensibility::kFixed:
        if (t != kBuggyImageService) {
          return absl::InvalidArgumentError(
              StrCat(FaultNameString(spec.name), " is bound to ",
                     kBuggyImageService));
        }
        break;
    }
  }
  if (auto p = spec.params.find("loss_rate"); p != spec.params.end()) {
    if (!(p->second >= 0.0 && p->second <= 1.0)) {
      return absl::InvalidArgumentError("loss_rate must be within [0, 1]");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<InjectionRecord> FaultInjector::Inject(ClusterState& state,
                                                      const FaultSpec& spec) {
  if (absl::Status s = ValidateFaultSpec(state, spec); !s.ok()) return s;
  const std::string key = spec.Key();
  for (const auto& [id, rec] : active_) {
    if (rec.spec.Key() == key) {
      return TaggedError(absl::StatusCode::kFailedPrecondition,
                         kAlreadyInjected, key);
    }
  }
  constexpr ChangeSource kSrc = ChangeSource::kFault;
  const std::string& ns = state.app_namespace();
  InjectionRecord record;
  record.id = next_id_++;
  record.spec = spec;
  record.inject_ms = state.now_ms();
  state.AppendMarker(kSrc, "inject", FaultNameString(spec.name),
                     fmt::format("{}", fmt::join(spec.targets, ",")));
  for (const std::string& t : spec.targets) {
    const ServiceSpec& svc = *state.FindService(ns, t);
    absl::Status s;
    switch (spec.name) {
      case FaultName::kAuthenticationMissing: {
        const AuthRequirement& req = *AuthOf(state, t);
        auto old = state.EraseConfigKey(ns, req.config_map, "credentials", kSrc);
        if (!old.ok()) return old.status();
        record.undo[t] = old->value_or("");
        for (const std::string& c : state.Consumers(ns, req.config_map)) {
          s.Update(state.RestartService(ns, c, kSrc));
        }
        break;
      }
      case FaultName::kTargetPortMisconfig:
        record.undo[t] = std::to_string(svc.svc_target_port);
        s = state.SetTargetPort(
            ns, t, svc.container_port + kMisconfiguredPortOffset, kSrc);
        break;
      case FaultName::kRevokeAuth: {
        const AuthRequirement& req = *AuthOf(state, t);
        s = state.RevokeRole(req.store, req.principal, req.role, kSrc);
        break;
      }
      case FaultName::kUserUnregistered: {
        const AuthRequirement& req = *AuthOf(state, t);
        s = state.UnregisterUser(req.store, req.principal, kSrc);
        break;
      }
      case FaultName::kBuggyAppImage:
        record.undo[t] = svc.image_tag;
        s = state.SetImage(ns, t, DefectiveImageFor(svc.image_tag), kSrc);
        break;
      case FaultName::kScalePod:
        record.undo[t] = std::to_string(svc.desired_replicas);
        s = state.ScaleService(ns, t, 0, kSrc);
        break;
      case FaultName::kAssignNonExistentNode:
        record.undo[t] = svc.node_selector.value_or("");
        s = state.SetNodeSelector(ns, t, std::string(kNonExistentNode), kSrc);
        break;
      case FaultName::kNetworkLoss: {
        record.undo[t] = StrCat(state.LossRate(t));
        auto p = spec.params.find("loss_rate");
        s = state.SetLossRate(
            t, p == spec.params.end() ? kDefaultLossRate : p->second, kSrc);
        break;
      }
      case FaultName::kPodFailure: {
        std::vector<const PodState*> pods = state.PodsOf(ns, t);
        if (pods.empty()) {
          return absl::FailedPreconditionError(
              StrCat(t, " has no pod to fail"));
        }
        std::string pod = pods.front()->pod_name;
        record.undo[t] = pod;
        s = state.SetPodPhase(ns, pod, PodPhase::kFailed, kSrc);
        break;
      }
      case FaultName::kNoop:
        break;
    }
    if (!s.ok()) return s;
  }
  active_[record.id] = record;
  return record;
}

absl::Status FaultInjector::Recover(ClusterState& state,
                                    const InjectionRecord& record) {
  auto it = active_.find(record.id);
  if (it == active_.end()) {
    return TaggedError(absl::StatusCode::kFailedPrecondition, kNotInjected,
                       record.spec.Key());
  }
  constexpr ChangeSource kSrc = ChangeSource::kFault;
  const std::string& ns = state.app_namespace();
  const FaultSpec& spec = it->second.spec;
  for (const std::string& t : spec.targets) {
    const std::string undo = it->second.undo.count(t) ? it->second.undo.at(t)
                                                      : std::string();
    absl::Status s;
    switch (spec.name) {
      case FaultName::kAuthenticationMissing: {
        const AuthRequirement& req = *AuthOf(state, t);
        s = state.SetConfigValue(ns, req.config_map, "credentials", undo, kSrc);
        for (const std::string& c : state.Consumers(ns, req.config_map)) {
          s.Update(state.RestartService(ns, c, kSrc));
        }
        break;
      }
      case FaultName::kTargetPortMisconfig:
        s = state.SetTargetPort(ns, t, std::stoi(undo), kSrc);
        break;
      case FaultName::kRevokeAuth: {
        const AuthRequirement& req = *AuthOf(state, t);
        s = state.GrantRole(req.store, req.principal, req.role, kSrc);
        break;
      }
      case FaultName::kUserUnregistered: {
        const AuthRequirement& req = *AuthOf(state, t);
        s = state.RegisterUser(req.store, req.principal, kSrc);
        break;
      }
      case FaultName::kBuggyAppImage:
        s = state.SetImage(ns, t, undo, kSrc);
        break;
      case FaultName::kScalePod:
        s = state.ScaleService(ns, t, std::stoi(undo), kSrc);
        break;
      case FaultName::kAssignNonExistentNode:
        s = state.SetNodeSelector(
            ns, t, undo.empty() ? std::nullopt : std::optional(undo), kSrc);
        break;
      case FaultName::kNetworkLoss:
        s = state.SetLossRate(t, std::stod(undo), kSrc);
        break;
      case FaultName::kPodFailure:
        // The failed pod may already have been replaced by an operator.
        for (const PodState* p : state.PodsOf(ns, t)) {
          if (p->phase != PodPhase::kRunning) {
            s.Update(state.DeletePod(ns, std::string(p->pod_name), kSrc));
            break;
          }
        }
        break;
      case FaultName::kNoop:
        break;
    }
    if (!s.ok()) return s;
  }
  state.AppendMarker(kSrc, "recover", FaultNameString(spec.name),
                     fmt::format("{}", fmt::join(spec.targets, ",")));
  active_.erase(it);
  return absl::OkStatus();
}

json ToJson(const std::vector<ScheduledFault>& schedule) {
  json out = json::array();
  for (const ScheduledFault& f : schedule) {
    json j = ToJson(f.spec);
    j["inject_at_s"] = f.inject_at_s;
    out.push_back(std::move(j));
  }
  return out;
}

absl::StatusOr<std::vector<ScheduledFault>> ParseFaultSchedule(
    const json& doc) {
  if (!doc.is_array()) {
    return absl::InvalidArgumentError("fault schedule must be an array");
  }
  std::vector<ScheduledFault> out;
  for (const json& entry : doc) {
    auto spec = FaultSpecFromJson(entry);
    if (!spec.ok()) return spec.status();
    int64_t at = entry.value("inject_at_s", int64_t{0});
    if (at < 0) return absl::InvalidArgumentError("negative inject_at_s");
    out.push_back({*std::move(spec), at});
  }
  return out;
}

}  // namespace opsarena
