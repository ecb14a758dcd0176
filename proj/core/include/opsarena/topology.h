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

// Simulated cluster model: the two stock microservice applications and the
// mutable state that the simulation kernel, the fault library, and agent
// actions operate on.

#ifndef OPSARENA_TOPOLOGY_H_
#define OPSARENA_TOPOLOGY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace opsarena {

enum class ServiceKind { kStateless, kDatabase, kCache, kFrontend };

std::string_view ServiceKindName(ServiceKind kind);

// Access to a service guarded by an auth store. Callers present the
// `credentials` key of `config_map` as mounted into their pods; the
// principal must be registered in `store` and hold `role`.
struct AuthRequirement {
  std::string store;
  std::string principal;
  std::string role;
  std::string config_map;

  bool operator==(const AuthRequirement&) const = default;
};

struct ServiceSpec {
  std::string name;
  std::string ns;
  ServiceKind kind = ServiceKind::kStateless;
  int desired_replicas = 1;
  int container_port = 0;
  int svc_target_port = 0;
  int service_port = 0;
  std::vector<std::string> dependencies;
  std::optional<std::string> node_selector;
  std::string image_tag;
  std::optional<AuthRequirement> requires_auth;
  std::vector<std::string> mounted_config_maps;
  std::string operation;
  int base_latency_ms = 5;

  bool operator==(const ServiceSpec&) const = default;
};

enum class PodPhase { kRunning, kPending, kFailed, kCrashLoopBackOff };

std::string_view PodPhaseName(PodPhase phase);

using ConfigData = std::map<std::string, std::string>;

struct PodState {
  std::string pod_name;
  std::string service;
  PodPhase phase = PodPhase::kPending;
  std::optional<std::string> node;
  int restart_count = 0;
  // Replica slot within the owning service; a replacement pod reuses the
  // slot (and therefore the node) of the pod it replaces.
  int slot = 0;
  int64_t created_ms = 0;
  // Config maps as they were when the pod started.
  std::map<std::string, ConfigData> mounted_config;

  bool operator==(const PodState&) const = default;
};

struct NamespaceState {
  std::map<std::string, ServiceSpec> services;
  std::vector<PodState> pods;

  bool operator==(const NamespaceState&) const = default;
};

struct AuthStore {
  std::map<std::string, std::set<std::string>> principals;
  std::set<std::string> registered_users;

  bool operator==(const AuthStore&) const = default;
};

struct NetworkCondition {
  double loss_rate = 0.0;

  bool operator==(const NetworkCondition&) const = default;
};

enum class ChangeSource { kDeploy, kFault, kAgent, kSystem };

std::string_view ChangeSourceName(ChangeSource source);

struct ChangeRecord {
  uint64_t seq = 0;
  int64_t t_ms = 0;
  ChangeSource source = ChangeSource::kSystem;
  std::string action;
  std::string target;
  std::string detail;

  bool operator==(const ChangeRecord&) const = default;
};

nlohmann::json ToJson(const ChangeRecord& record);

// (namespace, config map name)
using ConfigMapKey = std::pair<std::string, std::string>;

class ClusterState {
 public:
  ClusterState() = default;

  const std::map<std::string, NamespaceState>& namespaces() const {
    return namespaces_;
  }
  const std::set<std::string>& nodes() const { return nodes_; }
  const std::map<ConfigMapKey, ConfigData>& config_maps() const {
    return config_maps_;
  }
  const std::map<std::string, AuthStore>& auth_stores() const {
    return auth_stores_;
  }
  const std::map<std::string, NetworkCondition>& network() const {
    return network_;
  }
  const std::vector<ChangeRecord>& change_log() const { return change_log_; }
  const std::string& app_name() const { return app_name_; }
  const std::string& app_namespace() const { return app_namespace_; }
  const std::string& entry_service() const { return entry_service_; }
  const std::string& description() const { return description_; }

  const NamespaceState* FindNamespace(std::string_view ns) const;
  const ServiceSpec* FindService(std::string_view ns,
                                 std::string_view name) const;
  const PodState* FindPod(std::string_view ns, std::string_view pod) const;
  const ConfigData* FindConfigMap(std::string_view ns,
                                  std::string_view name) const;
  const AuthStore* FindAuthStore(std::string_view name) const;
  std::vector<const PodState*> PodsOf(std::string_view ns,
                                      std::string_view service) const;
  int RunningPods(std::string_view ns, std::string_view service) const;
  double LossRate(std::string_view service) const;
  // Replica count recorded at deploy time; the "all services up" oracle.
  int DeployReplicas(std::string_view ns, std::string_view service) const;
  // Services (same namespace) that list `service` as a dependency.
  std::vector<std::string> Dependents(std::string_view ns,
                                      std::string_view service) const;
  // Services mounting the given config map.
  std::vector<std::string> Consumers(std::string_view ns,
                                     std::string_view config_map) const;

  int64_t now_ms() const { return now_ms_; }
  void set_now_ms(int64_t now_ms) { now_ms_ = now_ms; }

  // Mutations. Each one appends to the change log. Scaling, image changes,
  // selector changes and restarts replace pods the way a deployment
  // controller would.
  absl::Status ScaleService(std::string_view ns, std::string_view service,
                            int replicas, ChangeSource source);
  absl::Status SetTargetPort(std::string_view ns, std::string_view service,
                             int port, ChangeSource source);
  absl::Status SetImage(std::string_view ns, std::string_view service,
                        std::string_view image, ChangeSource source);
  absl::Status SetNodeSelector(std::string_view ns, std::string_view service,
                               std::optional<std::string> node,
                               ChangeSource source);
  absl::Status RestartService(std::string_view ns, std::string_view service,
                              ChangeSource source);
  // Deletes the pod; the owning deployment immediately creates a
  // replacement in the same slot.
  absl::Status DeletePod(std::string_view ns, std::string_view pod,
                         ChangeSource source);
  absl::Status SetPodPhase(std::string_view ns, std::string_view pod,
                           PodPhase phase, ChangeSource source);
  absl::Status SetConfigValue(std::string_view ns, std::string_view config_map,
                              std::string_view key, std::string_view value,
                              ChangeSource source);
  absl::StatusOr<std::optional<std::string>> EraseConfigKey(
      std::string_view ns, std::string_view config_map, std::string_view key,
      ChangeSource source);
  absl::Status GrantRole(std::string_view store, std::string_view principal,
                         std::string_view role, ChangeSource source);
  absl::Status RevokeRole(std::string_view store, std::string_view principal,
                          std::string_view role, ChangeSource source);
  absl::Status RegisterUser(std::string_view store, std::string_view user,
                            ChangeSource source);
  absl::Status UnregisterUser(std::string_view store, std::string_view user,
                              ChangeSource source);
  absl::Status SetLossRate(std::string_view service, double loss_rate,
                           ChangeSource source);
  // Log-only entry (fault injection markers and the like).
  void AppendMarker(ChangeSource source, std::string_view action,
                    std::string_view target, std::string_view detail);

  bool operator==(const ClusterState&) const = default;

 private:
  friend absl::StatusOr<ClusterState> BuildClusterState(
      const nlohmann::json& doc);

  void Log(ChangeSource source, std::string_view action,
           std::string_view target, std::string detail);
  NamespaceState* MutableNamespace(std::string_view ns);
  ServiceSpec* MutableService(std::string_view ns, std::string_view name);
  PodState* MutablePod(std::string_view ns, std::string_view pod);
  PodState MakePod(const ServiceSpec& spec, int slot);
  // Brings the pod set of `service` in line with its spec; with
  // `replace_all`, every existing pod is replaced (rolling restart).
  void Reconcile(std::string_view ns, std::string_view service,
                 bool replace_all);

  std::string app_name_;
  std::string app_namespace_;
  std::string entry_service_;
  std::string description_;
  std::map<std::string, NamespaceState> namespaces_;
  std::set<std::string> nodes_;
  std::map<ConfigMapKey, ConfigData> config_maps_;
  std::map<std::string, AuthStore> auth_stores_;
  std::map<std::string, NetworkCondition> network_;
  std::map<std::pair<std::string, std::string>, int> deploy_replicas_;
  std::map<std::string, uint64_t> pod_generation_;
  std::vector<ChangeRecord> change_log_;
  int64_t now_ms_ = 0;
};

// Stable, change-log-free view of a state for structural comparisons. Pod
// names and creation times are left out; everything else is kept.
nlohmann::json CanonicalSnapshot(const ClusterState& state);

enum class AppName { kHotelReservation, kSocialNetwork };

std::string_view AppNameString(AppName app);
std::optional<AppName> ParseAppName(std::string_view name);

struct AppCatalogEntry {
  AppName app_name;
  // "builtin:<file>" for topologies compiled into the library, otherwise a
  // filesystem path.
  std::string topology_source;
  std::string entry_service;
  std::string ns;
};

const std::vector<AppCatalogEntry>& AppCatalog();

// Deploys a stock application: every service at its declared replica
// count, nominal network, empty change log.
absl::StatusOr<ClusterState> LoadApp(AppName app);
// Catalog lookup by name ("HotelReservation", "SocialNetwork").
absl::StatusOr<ClusterState> LoadApp(std::string_view app_name);
absl::StatusOr<ClusterState> LoadTopologyFile(const std::string& path);
absl::StatusOr<ClusterState> LoadTopologyText(std::string_view text);
absl::StatusOr<ClusterState> BuildClusterState(const nlohmann::json& doc);

// Raw text of a builtin topology document.
std::string_view BuiltinTopologyText(AppName app);

// Line-delimited JSON, one change record per line.
std::string ExportChangeLog(const ClusterState& state);

}  // namespace opsarena

#endif  // OPSARENA_TOPOLOGY_H_
