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

#include "opsarena/topology.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "opsarena/errors.h"
#include "opsarena/strings.h"
#include "opsarena/hashing.h"

namespace opsarena {

namespace {

using nlohmann::json;

constexpr int kTopologySchemaVersion = 1;

absl::Status Malformed(std::string_view what) {
  return TaggedError(absl::StatusCode::kInvalidArgument, kMalformedTopology,
                     what);
}

absl::Status NotFoundIn(std::string_view kind, std::string_view name) {
  return absl::NotFoundError(
      StrCat(kind, " \"", name, "\" not found"));
}

std::optional<ServiceKind> ParseServiceKind(std::string_view s) {
  if (s == "stateless") return ServiceKind::kStateless;
  if (s == "database") return ServiceKind::kDatabase;
  if (s == "cache") return ServiceKind::kCache;
  if (s == "frontend") return ServiceKind::kFrontend;
  return std::nullopt;
}

int DefaultLatencyMs(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::kDatabase:
      return 10;
    case ServiceKind::kCache:
      return 2;
    case ServiceKind::kStateless:
    case ServiceKind::kFrontend:
      return 5;
  }
  return 5;
}

bool ValidPort(int port) { return port > 0 && port < 65536; }

// Kubernetes-style random suffix alphabet (no vowels, no ambiguous chars).
constexpr std::string_view kSuffixAlphabet = "bcdfghjklmnpqrstvwxz2456789";

std::string PodSuffix(uint64_t bits) {
  std::string out;
  for (int i = 0; i < 5; ++i) {
    out.push_back(kSuffixAlphabet[bits % kSuffixAlphabet.size()]);
    bits /= kSuffixAlphabet.size();
  }
  return out;
}

absl::Status CheckAcyclic(const std::map<std::string, ServiceSpec>& services) {
  enum Color { kWhite, kGrey, kBlack };
  std::map<std::string, Color> color;
  // Iterative DFS keeps deep graphs off the call stack.
  for (const auto& [root, _] : services) {
    if (color[root] != kWhite) continue;
    std::vector<std::pair<std::string, size_t>> work{{root, 0}};
    color[root] = kGrey;
    while (!work.empty()) {
      auto& [node, next] = work.back();
      const auto& deps = services.at(node).dependencies;
      if (next == deps.size()) {
        color[node] = kBlack;
        work.pop_back();
        continue;
      }
      const std::string& dep = deps[next++];
      if (color[dep] == kGrey) {
        return Malformed(
            StrCat("dependency cycle through ", node, " -> ", dep));
      }
      if (color[dep] == kWhite) {
        color[dep] = kGrey;
        work.emplace_back(dep, 0);
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string HexDigits(uint64_t value, int width) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(width, '0');
  for (int i = width - 1; i >= 0; --i) {
    out[i] = kHex[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string_view ServiceKindName(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::kStateless:
      return "stateless";
    case ServiceKind::kDatabase:
      return "database";
    case ServiceKind::kCache:
      return "cache";
    case ServiceKind::kFrontend:
      return "frontend";
  }
  return "unknown";
}

std::string_view PodPhaseName(PodPhase phase) {
  switch (phase) {
    case PodPhase::kRunning:
      return "Running";
    case PodPhase::kPending:
      return "Pending";
    case PodPhase::kFailed:
      return "Failed";
    case PodPhase::kCrashLoopBackOff:
      return "CrashLoopBackOff";
  }
  return "Unknown";
}

std::string_view ChangeSourceName(ChangeSource source) {
  switch (source) {
    case ChangeSource::kDeploy:
      return "deploy";
    case ChangeSource::kFault:
      return "fault";
    case ChangeSource::kAgent:
      return "agent";
    case ChangeSource::kSystem:
      return "system";
  }
  return "unknown";
}

json ToJson(const ChangeRecord& record) {
  return json{{"seq", record.seq},
              {"t_ms", record.t_ms},
              {"source", ChangeSourceName(record.source)},
              {"action", record.action},
              {"target", record.target},
              {"detail", record.detail}};
}

// ---------------------------------------------------------------------------
// Read accessors

const NamespaceState* ClusterState::FindNamespace(std::string_view ns) const {
  auto it = namespaces_.find(std::string(ns));
  return it == namespaces_.end() ? nullptr : &it->second;
}

const ServiceSpec* ClusterState::FindService(std::string_view ns,
                                             std::string_view name) const {
  const NamespaceState* space = FindNamespace(ns);
  if (space == nullptr) return nullptr;
  auto it = space->services.find(std::string(name));
  return it == space->services.end() ? nullptr : &it->second;
}

const PodState* ClusterState::FindPod(std::string_view ns,
                                      std::string_view pod) const {
  const NamespaceState* space = FindNamespace(ns);
  if (space == nullptr) return nullptr;
  for (const PodState& p : space->pods) {
    if (p.pod_name == pod) return &p;
  }
  return nullptr;
}

const ConfigData* ClusterState::FindConfigMap(std::string_view ns,
                                              std::string_view name) const {
  auto it = config_maps_.find({std::string(ns), std::string(name)});
  return it == config_maps_.end() ? nullptr : &it->second;
}

const AuthStore* ClusterState::FindAuthStore(std::string_view name) const {
  auto it = auth_stores_.find(std::string(name));
  return it == auth_stores_.end() ? nullptr : &it->second;
}

std::vector<const PodState*> ClusterState::PodsOf(
    std::string_view ns, std::string_view service) const {
  std::vector<const PodState*> out;
  const NamespaceState* space = FindNamespace(ns);
  if (space == nullptr) return out;
  for (const PodState& p : space->pods) {
    if (p.service == service) out.push_back(&p);
  }
  return out;
}

int ClusterState::RunningPods(std::string_view ns,
                              std::string_view service) const {
  int n = 0;
  for (const PodState* p : PodsOf(ns, service)) {
    if (p->phase == PodPhase::kRunning) ++n;
  }
  return n;
}

double ClusterState::LossRate(std::string_view service) const {
  auto it = network_.find(std::string(service));
  return it == network_.end() ? 0.0 : it->second.loss_rate;
}

int ClusterState::DeployReplicas(std::string_view ns,
                                 std::string_view service) const {
  auto it = deploy_replicas_.find({std::string(ns), std::string(service)});
  return it == deploy_replicas_.end() ? 0 : it->second;
}

std::vector<std::string> ClusterState::Dependents(
    std::string_view ns, std::string_view service) const {
  std::vector<std::string> out;
  const NamespaceState* space = FindNamespace(ns);
  if (space == nullptr) return out;
  for (const auto& [name, spec] : space->services) {
    if (std::find(spec.dependencies.begin(), spec.dependencies.end(),
                  service) != spec.dependencies.end()) {
      out.push_back(name);
    }
  }
  return out;
}

std::vector<std::string> ClusterState::Consumers(
    std::string_view ns, std::string_view config_map) const {
  std::vector<std::string> out;
  const NamespaceState* space = FindNamespace(ns);
  if (space == nullptr) return out;
  for (const auto& [name, spec] : space->services) {
    const auto& mounts = spec.mounted_config_maps;
    if (std::find(mounts.begin(), mounts.end(), config_map) != mounts.end()) {
      out.push_back(name);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mutations

void ClusterState::Log(ChangeSource source, std::string_view action,
                       std::string_view target, std::string detail) {
  ChangeRecord record;
  record.seq = change_log_.size() + 1;
  record.t_ms = now_ms_;
  record.source = source;
  record.action = std::string(action);
  record.target = std::string(target);
  record.detail = std::move(detail);
  change_log_.push_back(std::move(record));
}

void ClusterState::AppendMarker(ChangeSource source, std::string_view action,
                                std::string_view target,
                                std::string_view detail) {
  Log(source, action, target, std::string(detail));
}

NamespaceState* ClusterState::MutableNamespace(std::string_view ns) {
  auto it = namespaces_.find(std::string(ns));
  return it == namespaces_.end() ? nullptr : &it->second;
}

ServiceSpec* ClusterState::MutableService(std::string_view ns,
                                          std::string_view name) {
  NamespaceState* space = MutableNamespace(ns);
  if (space == nullptr) return nullptr;
  auto it = space->services.find(std::string(name));
  return it == space->services.end() ? nullptr : &it->second;
}

PodState* ClusterState::MutablePod(std::string_view ns, std::string_view pod) {
  NamespaceState* space = MutableNamespace(ns);
  if (space == nullptr) return nullptr;
  for (PodState& p : space->pods) {
    if (p.pod_name == pod) return &p;
  }
  return nullptr;
}

PodState ClusterState::MakePod(const ServiceSpec& spec, int slot) {
  // Like a ReplicaSet hash: changes whenever the pod template does.
  uint64_t template_hash = Fnv1a64(
      StrCat(spec.image_tag, "|", spec.node_selector.value_or("")),
      Fnv1a64(spec.name));
  uint64_t generation = pod_generation_[spec.name]++;
  PodState pod;
  pod.service = spec.name;
  pod.pod_name =
      StrCat(spec.name, "-", HexDigits(template_hash, 10).substr(0, 9),
                   "-", PodSuffix(MixKeys(Fnv1a64(spec.name), generation)));
  pod.slot = slot;
  pod.created_ms = now_ms_;
  if (spec.node_selector.has_value()) {
    if (nodes_.contains(*spec.node_selector)) pod.node = *spec.node_selector;
  } else if (!nodes_.empty()) {
    std::vector<std::string> ordered(nodes_.begin(), nodes_.end());
    pod.node = ordered[(Fnv1a64(spec.name) + slot) % ordered.size()];
  }
  pod.phase = pod.node.has_value() ? PodPhase::kRunning : PodPhase::kPending;
  for (const std::string& cm : spec.mounted_config_maps) {
    if (const ConfigData* data = FindConfigMap(spec.ns, cm)) {
      pod.mounted_config[cm] = *data;
    }
  }
  return pod;
}

void ClusterState::Reconcile(std::string_view ns, std::string_view service,
                             bool replace_all) {
  NamespaceState* space = MutableNamespace(ns);
  const ServiceSpec& spec = space->services.at(std::string(service));
  std::vector<PodState> kept;
  std::set<int> slots;
  for (PodState& pod : space->pods) {
    if (pod.service != service) {
      kept.push_back(std::move(pod));
      continue;
    }
    if (pod.slot >= spec.desired_replicas) continue;
    slots.insert(pod.slot);
    kept.push_back(replace_all ? MakePod(spec, pod.slot) : std::move(pod));
  }
  for (int slot = 0; slot < spec.desired_replicas; ++slot) {
    if (!slots.contains(slot)) kept.push_back(MakePod(spec, slot));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const PodState& a, const PodState& b) {
                     return std::tie(a.service, a.slot) <
                            std::tie(b.service, b.slot);
                   });
  space->pods = std::move(kept);
}

absl::Status ClusterState::ScaleService(std::string_view ns,
                                        std::string_view service, int replicas,
                                        ChangeSource source) {
  if (replicas < 0) {
    return absl::InvalidArgumentError("replicas must be non-negative");
  }
  ServiceSpec* spec = MutableService(ns, service);
  if (spec == nullptr) return NotFoundIn("deployments.apps", service);
  int before = spec->desired_replicas;
  spec->desired_replicas = replicas;
  Reconcile(ns, service, /*replace_all=*/false);
  Log(source, "scale", StrCat(ns, "/", service),
      StrCat("replicas ", before, " -> ", replicas));
  return absl::OkStatus();
}

absl::Status ClusterState::SetTargetPort(std::string_view ns,
                                         std::string_view service, int port,
                                         ChangeSource source) {
  if (!ValidPort(port)) return absl::InvalidArgumentError("invalid port");
  ServiceSpec* spec = MutableService(ns, service);
  if (spec == nullptr) return NotFoundIn("services", service);
  int before = spec->svc_target_port;
  spec->svc_target_port = port;
  Log(source, "patch-target-port", StrCat(ns, "/", service),
      StrCat("targetPort ", before, " -> ", port));
  return absl::OkStatus();
}

absl::Status ClusterState::SetImage(std::string_view ns,
                                    std::string_view service,
                                    std::string_view image,
                                    ChangeSource source) {
  if (image.empty()) return absl::InvalidArgumentError("empty image");
  ServiceSpec* spec = MutableService(ns, service);
  if (spec == nullptr) return NotFoundIn("deployments.apps", service);
  std::string before = spec->image_tag;
  spec->image_tag = std::string(image);
  Reconcile(ns, service, /*replace_all=*/true);
  Log(source, "set-image", StrCat(ns, "/", service),
      StrCat(before, " -> ", image));
  return absl::OkStatus();
}

absl::Status ClusterState::SetNodeSelector(std::string_view ns,
                                           std::string_view service,
                                           std::optional<std::string> node,
                                           ChangeSource source) {
  ServiceSpec* spec = MutableService(ns, service);
  if (spec == nullptr) return NotFoundIn("deployments.apps", service);
  std::string before = spec->node_selector.value_or("<none>");
  spec->node_selector = std::move(node);
  std::string after = spec->node_selector.value_or("<none>");
  Reconcile(ns, service, /*replace_all=*/true);
  Log(source, "set-node-selector", StrCat(ns, "/", service),
      StrCat(before, " -> ", after));
  return absl::OkStatus();
}

absl::Status ClusterState::RestartService(std::string_view ns,
                                          std::string_view service,
                                          ChangeSource source) {
  if (MutableService(ns, service) == nullptr) {
    return NotFoundIn("deployments.apps", service);
  }
  Reconcile(ns, service, /*replace_all=*/true);
  Log(source, "restart", StrCat(ns, "/", service), "rolling restart");
  return absl::OkStatus();
}

absl::Status ClusterState::DeletePod(std::string_view ns, std::string_view pod,
                                     ChangeSource source) {
  NamespaceState* space = MutableNamespace(ns);
  if (space == nullptr) return NotFoundIn("namespaces", ns);
  auto it = std::find_if(space->pods.begin(), space->pods.end(),
                         [&](const PodState& p) { return p.pod_name == pod; });
  if (it == space->pods.end()) return NotFoundIn("pods", pod);
  // `pod` may alias the name being replaced.
  const std::string target = StrCat(ns, "/", pod);
  const ServiceSpec& spec = space->services.at(it->service);
  if (it->slot < spec.desired_replicas) {
    *it = MakePod(spec, it->slot);
  } else {
    space->pods.erase(it);
  }
  Log(source, "delete-pod", target, "pod deleted");
  return absl::OkStatus();
}

absl::Status ClusterState::SetPodPhase(std::string_view ns,
                                       std::string_view pod, PodPhase phase,
                                       ChangeSource source) {
  PodState* p = MutablePod(ns, pod);
  if (p == nullptr) return NotFoundIn("pods", pod);
  std::string_view before = PodPhaseName(p->phase);
  p->phase = phase;
  if (phase == PodPhase::kPending) p->node.reset();
  Log(source, "set-pod-phase", StrCat(ns, "/", pod),
      StrCat(before, " -> ", PodPhaseName(phase)));
  return absl::OkStatus();
}

absl::Status ClusterState::SetConfigValue(std::string_view ns,
                                          std::string_view config_map,
                                          std::string_view key,
                                          std::string_view value,
                                          ChangeSource source) {
  auto it = config_maps_.find({std::string(ns), std::string(config_map)});
  if (it == config_maps_.end()) return NotFoundIn("configmaps", config_map);
  it->second[std::string(key)] = std::string(value);
  Log(source, "edit-configmap", StrCat(ns, "/", config_map),
      StrCat("set ", key));
  return absl::OkStatus();
}

absl::StatusOr<std::optional<std::string>> ClusterState::EraseConfigKey(
    std::string_view ns, std::string_view config_map, std::string_view key,
    ChangeSource source) {
  auto it = config_maps_.find({std::string(ns), std::string(config_map)});
  if (it == config_maps_.end()) return NotFoundIn("configmaps", config_map);
  std::optional<std::string> old;
  auto kv = it->second.find(std::string(key));
  if (kv != it->second.end()) {
    old = kv->second;
    it->second.erase(kv);
  }
  Log(source, "edit-configmap", StrCat(ns, "/", config_map),
      StrCat("unset ", key));
  return old;
}

absl::Status ClusterState::GrantRole(std::string_view store,
                                     std::string_view principal,
                                     std::string_view role,
                                     ChangeSource source) {
  auto it = auth_stores_.find(std::string(store));
  if (it == auth_stores_.end()) return NotFoundIn("auth store", store);
  it->second.principals[std::string(principal)].insert(std::string(role));
  Log(source, "grant-role", store, StrCat(principal, " +", role));
  return absl::OkStatus();
}

absl::Status ClusterState::RevokeRole(std::string_view store,
                                      std::string_view principal,
                                      std::string_view role,
                                      ChangeSource source) {
  auto it = auth_stores_.find(std::string(store));
  if (it == auth_stores_.end()) return NotFoundIn("auth store", store);
  auto p = it->second.principals.find(std::string(principal));
  if (p == it->second.principals.end()) {
    return NotFoundIn("principal", principal);
  }
  p->second.erase(std::string(role));
  Log(source, "revoke-role", store, StrCat(principal, " -", role));
  return absl::OkStatus();
}

absl::Status ClusterState::RegisterUser(std::string_view store,
                                        std::string_view user,
                                        ChangeSource source) {
  auto it = auth_stores_.find(std::string(store));
  if (it == auth_stores_.end()) return NotFoundIn("auth store", store);
  it->second.registered_users.insert(std::string(user));
  Log(source, "register-user", store, std::string(user));
  return absl::OkStatus();
}

absl::Status ClusterState::UnregisterUser(std::string_view store,
                                          std::string_view user,
                                          ChangeSource source) {
  auto it = auth_stores_.find(std::string(store));
  if (it == auth_stores_.end()) return NotFoundIn("auth store", store);
  if (it->second.registered_users.erase(std::string(user)) == 0) {
    return NotFoundIn("user", user);
  }
  Log(source, "unregister-user", store, std::string(user));
  return absl::OkStatus();
}

absl::Status ClusterState::SetLossRate(std::string_view service,
                                       double loss_rate, ChangeSource source) {
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
    return absl::InvalidArgumentError("loss rate must be within [0, 1]");
  }
  auto it = network_.find(std::string(service));
  if (it == network_.end()) return NotFoundIn("services", service);
  it->second.loss_rate = loss_rate;
  Log(source, "set-loss-rate", service, StrCat(loss_rate));
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// Loading

absl::StatusOr<ClusterState> BuildClusterState(const json& doc) {
  if (!doc.is_object()) return Malformed("document is not an object");
  if (doc.value("schema_version", 0) != kTopologySchemaVersion) {
    return Malformed("unsupported schema_version");
  }
  ClusterState state;
  state.app_name_ = doc.value("app", "");
  state.app_namespace_ = doc.value("namespace", "");
  state.description_ = doc.value("description", "");
  if (state.app_name_.empty() || state.app_namespace_.empty()) {
    return Malformed("missing app or namespace");
  }
  const std::string& ns = state.app_namespace_;
  for (const auto& node : doc.value("nodes", json::array())) {
    state.nodes_.insert(node.get<std::string>());
  }
  if (state.nodes_.empty()) return Malformed("no nodes declared");

  for (const auto& cm : doc.value("config_maps", json::array())) {
    ConfigData data;
    const json entries = cm.value("data", json::object());
    for (const auto& [k, v] : entries.items()) {
      data[k] = v.get<std::string>();
    }
    ConfigMapKey key{ns, cm.at("name").get<std::string>()};
    if (!state.config_maps_.emplace(key, std::move(data)).second) {
      return Malformed(StrCat("duplicate config map ", key.second));
    }
  }
  for (const auto& store : doc.value("auth_stores", json::array())) {
    AuthStore auth;
    const json principals = store.value("principals", json::object());
    for (const auto& [principal, roles] : principals.items()) {
      for (const auto& r : roles) {
        auth.principals[principal].insert(r.get<std::string>());
      }
    }
    for (const auto& u : store.value("registered_users", json::array())) {
      auth.registered_users.insert(u.get<std::string>());
    }
    state.auth_stores_[store.at("name").get<std::string>()] = std::move(auth);
  }

  NamespaceState space;
  int frontends = 0;
  for (const auto& s : doc.value("services", json::array())) {
    ServiceSpec spec;
    spec.name = s.value("name", "");
    spec.ns = ns;
    if (spec.name.empty()) return Malformed("service without a name");
    auto kind = ParseServiceKind(s.value("kind", ""));
    if (!kind) return Malformed(StrCat("bad kind for ", spec.name));
    spec.kind = *kind;
    if (spec.kind == ServiceKind::kFrontend) ++frontends;
    spec.desired_replicas = s.value("replicas", 1);
    if (spec.desired_replicas < 0) {
      return Malformed(StrCat("negative replicas for ", spec.name));
    }
    spec.container_port = s.value("port", 0);
    spec.service_port = s.value("service_port", spec.container_port);
    spec.svc_target_port = s.value("target_port", spec.container_port);
    if (!ValidPort(spec.container_port) || !ValidPort(spec.service_port) ||
        !ValidPort(spec.svc_target_port)) {
      return Malformed(StrCat("bad port for ", spec.name));
    }
    spec.image_tag = s.value("image", "");
    spec.operation = s.value("operation", StrCat(spec.name, ".Handle"));
    spec.base_latency_ms =
        s.value("base_latency_ms", DefaultLatencyMs(spec.kind));
    for (const auto& d : s.value("dependencies", json::array())) {
      spec.dependencies.push_back(d.get<std::string>());
    }
    for (const auto& cm : s.value("config_maps", json::array())) {
      std::string name = cm.get<std::string>();
      if (!state.config_maps_.contains({ns, name})) {
        return Malformed(
            StrCat(spec.name, " mounts unknown config map ", name));
      }
      spec.mounted_config_maps.push_back(std::move(name));
    }
    if (s.contains("node_selector")) {
      spec.node_selector = s.at("node_selector").get<std::string>();
    }
    if (s.contains("requires_auth")) {
      const json& a = s.at("requires_auth");
      AuthRequirement req{a.value("store", ""), a.value("principal", ""),
                          a.value("role", ""), a.value("config_map", "")};
      if (!state.auth_stores_.contains(req.store)) {
        return Malformed(
            StrCat(spec.name, " requires unknown auth store ", req.store));
      }
      if (!state.config_maps_.contains({ns, req.config_map})) {
        return Malformed(StrCat(spec.name,
                                      " requires unknown config map ",
                                      req.config_map));
      }
      spec.requires_auth = std::move(req);
    }
    if (space.services.contains(spec.name)) {
      return Malformed(StrCat("duplicate service name ", spec.name));
    }
    std::string name = spec.name;
    space.services.emplace(std::move(name), std::move(spec));
  }
  if (space.services.empty()) return Malformed("no services");
  if (frontends != 1) {
    return Malformed(StrCat("expected exactly one frontend service, got ",
                                  frontends));
  }
  for (const auto& [name, spec] : space.services) {
    for (const auto& dep : spec.dependencies) {
      if (!space.services.contains(dep)) {
        return Malformed(
            StrCat(name, " depends on missing service ", dep));
      }
    }
    if (spec.kind == ServiceKind::kFrontend) state.entry_service_ = name;
  }
  if (absl::Status s = CheckAcyclic(space.services); !s.ok()) return s;

  state.namespaces_.emplace(ns, std::move(space));
  for (const auto& [name, spec] : state.namespaces_.at(ns).services) {
    state.deploy_replicas_[{ns, name}] = spec.desired_replicas;
    state.network_[name] = NetworkCondition{};
  }
  std::vector<std::string> names;
  for (const auto& [name, _] : state.namespaces_.at(ns).services) {
    names.push_back(name);
  }
  for (const std::string& name : names) {
    state.Reconcile(ns, name, /*replace_all=*/false);
  }
  return state;
}

absl::StatusOr<ClusterState> LoadTopologyText(std::string_view text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return Malformed("not valid JSON");
  try {
    return BuildClusterState(doc);
  } catch (const json::exception& e) {
    return Malformed(e.what());
  }
}

absl::StatusOr<ClusterState> LoadTopologyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(StrCat("cannot open topology ", path));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return LoadTopologyText(buf.str());
}

std::string_view AppNameString(AppName app) {
  switch (app) {
    case AppName::kHotelReservation:
      return "HotelReservation";
    case AppName::kSocialNetwork:
      return "SocialNetwork";
  }
  return "unknown";
}

std::optional<AppName> ParseAppName(std::string_view name) {
  if (name == "HotelReservation") return AppName::kHotelReservation;
  if (name == "SocialNetwork") return AppName::kSocialNetwork;
  return std::nullopt;
}

const std::vector<AppCatalogEntry>& AppCatalog() {
  static const auto* catalog = new std::vector<AppCatalogEntry>{
      {AppName::kHotelReservation, "builtin:hotel_reservation.json",
       "frontend", "test-hotel-reservation"},
      {AppName::kSocialNetwork, "builtin:social_network.json",
       "nginx-web-server", "test-social-network"},
  };
  return *catalog;
}

absl::StatusOr<ClusterState> LoadApp(AppName app) {
  return LoadTopologyText(BuiltinTopologyText(app));
}

absl::StatusOr<ClusterState> LoadApp(std::string_view app_name) {
  auto app = ParseAppName(app_name);
  if (!app) {
    return TaggedError(absl::StatusCode::kNotFound, kUnknownApp, app_name);
  }
  return LoadApp(*app);
}

std::string ExportChangeLog(const ClusterState& state) {
  std::string out;
  for (const ChangeRecord& r : state.change_log()) {
    out += ToJson(r).dump();
    out += '\n';
  }
  return out;
}

json CanonicalSnapshot(const ClusterState& state) {
  json out;
  out["app"] = state.app_name();
  out["nodes"] = state.nodes();
  for (const auto& [ns, space] : state.namespaces()) {
    json& jns = out["namespaces"][ns];
    for (const auto& [name, s] : space.services) {
      json js{{"kind", ServiceKindName(s.kind)},
              {"replicas", s.desired_replicas},
              {"container_port", s.container_port},
              {"service_port", s.service_port},
              {"target_port", s.svc_target_port},
              {"dependencies", s.dependencies},
              {"node_selector", s.node_selector.value_or("")},
              {"image", s.image_tag},
              {"config_maps", s.mounted_config_maps},
              {"operation", s.operation},
              {"base_latency_ms", s.base_latency_ms}};
      if (s.requires_auth) {
        js["requires_auth"] = {{"store", s.requires_auth->store},
                               {"principal", s.requires_auth->principal},
                               {"role", s.requires_auth->role},
                               {"config_map", s.requires_auth->config_map}};
      }
      jns["services"][name] = std::move(js);
    }
    json pods = json::array();
    for (const PodState& p : space.pods) {
      pods.push_back({{"service", p.service},
                      {"slot", p.slot},
                      {"phase", PodPhaseName(p.phase)},
                      {"node", p.node.value_or("")},
                      {"restarts", p.restart_count},
                      {"mounted_config", p.mounted_config}});
    }
    jns["pods"] = std::move(pods);
  }
  for (const auto& [key, data] : state.config_maps()) {
    out["config_maps"][key.first + "/" + key.second] = data;
  }
  for (const auto& [name, store] : state.auth_stores()) {
    json principals = json::object();
    for (const auto& [p, roles] : store.principals) principals[p] = roles;
    out["auth_stores"][name] = {{"principals", principals},
                                {"registered_users", store.registered_users}};
  }
  for (const auto& [name, cond] : state.network()) {
    out["network"][name] = cond.loss_rate;
  }
  return out;
}

}  // namespace opsarena
