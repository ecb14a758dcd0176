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

#include "opsarena/shell.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "absl/status/status.h"
#include "opsarena/hashing.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kForbiddenChars = ";|&<>$`\n\r";
constexpr std::string_view kDefaultNamespace = "default";

// Left-aligned columns separated by three spaces, like kubectl.
std::string Table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::vector<size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      if (i + 1 == row.size()) {
        line += row[i];
      } else {
        line += fmt::format("{:<{}}   ", row[i], width[i]);
      }
    }
    out += line + "\n";
  }
  return out;
}

std::string Age(int64_t created_ms, int64_t now_ms) {
  int64_t s = std::max<int64_t>(0, (now_ms - created_ms) / 1000);
  if (s < 120) return StrCat(s, "s");
  if (s < 3 * 3600) return StrCat(s / 60, "m");
  if (s < 48 * 3600) return StrCat(s / 3600, "h");
  return StrCat(s / 86400, "d");
}

std::string ClusterIp(std::string_view service) {
  uint64_t h = Fnv1a64(service);
  return fmt::format("10.96.{}.{}", (h >> 8) % 256, h % 254 + 1);
}

std::string PodIp(const PodState& pod, const std::set<std::string>& nodes) {
  int subnet = 0;
  if (pod.node) {
    auto it = nodes.find(*pod.node);
    if (it != nodes.end()) {
      subnet = 1 + static_cast<int>(std::distance(nodes.begin(), it));
    }
  }
  return fmt::format("10.244.{}.{}", subnet, Fnv1a64(pod.pod_name) % 250 + 2);
}

std::string_view PodStatus(const PodState& pod) {
  if (pod.phase == PodPhase::kFailed) return "Error";
  return PodPhaseName(pod.phase);
}

std::string NotFound(std::string_view kind, std::string_view name) {
  return StrCat("Error from server (NotFound): ", kind, " \"", name,
                "\" not found");
}

std::string NoResources(std::string_view ns) {
  return StrCat("No resources found in ", ns, " namespace.");
}

// kubectl-style argv: positional words plus --flag[=value] / -n value.
struct ParsedArgs {
  std::vector<std::string> positional;
  std::map<std::string, std::string> flags;
  std::string error;

  std::string ns() const {
    auto it = flags.find("namespace");
    return it == flags.end() ? std::string(kDefaultNamespace) : it->second;
  }
  std::optional<std::string> flag(const std::string& name) const {
    auto it = flags.find(name);
    if (it == flags.end()) return std::nullopt;
    return it->second;
  }
};

ParsedArgs ParseArgs(const std::vector<std::string>& argv, size_t first,
                     const std::set<std::string>& valued,
                     const std::set<std::string>& boolean) {
  ParsedArgs out;
  for (size_t i = first; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    if (a.size() < 2 || a[0] != '-') {
      out.positional.push_back(a);
      continue;
    }
    std::string name;
    std::optional<std::string> value;
    if (a == "-n") {
      name = "namespace";
    } else if (a == "-o") {
      name = "output";
    } else if (a.rfind("--", 0) == 0) {
      std::string body = a.substr(2);
      size_t eq = body.find('=');
      if (eq != std::string::npos) {
        value = body.substr(eq + 1);
        body = body.substr(0, eq);
      }
      name = body;
    } else {
      out.error = StrCat("error: unknown shorthand flag: '", a.substr(1), "'");
      return out;
    }
    if (boolean.count(name) > 0) {
      if (value) {
        out.error = StrCat("error: flag --", name, " takes no value");
        return out;
      }
      out.flags[name] = "true";
      continue;
    }
    if (valued.count(name) == 0) {
      out.error = StrCat("error: unknown flag: ", a);
      return out;
    }
    if (!value) {
      if (i + 1 >= argv.size()) {
        out.error = StrCat("error: flag needs an argument: ", a);
        return out;
      }
      value = argv[++i];
    }
    out.flags[name] = *value;
  }
  return out;
}

std::string Usage(std::string_view prefix) {
  std::string out = "error: invalid arguments. Usage:\n";
  for (const std::string& line : ShellUsage()) {
    if (line.rfind(prefix, 0) == 0) out += "  " + line + "\n";
  }
  return out;
}

// "deployment/geo" or ("deployment", "geo").
bool TakeResourceName(const std::vector<std::string>& pos, size_t at,
                      const std::set<std::string>& kinds, std::string* name,
                      size_t* next) {
  if (at >= pos.size()) return false;
  const std::string& word = pos[at];
  size_t slash = word.find('/');
  if (slash != std::string::npos) {
    if (kinds.count(word.substr(0, slash)) == 0) return false;
    *name = word.substr(slash + 1);
    *next = at + 1;
    return !name->empty();
  }
  if (kinds.count(word) == 0 || at + 1 >= pos.size()) return false;
  *name = pos[at + 1];
  *next = at + 2;
  return true;
}

const std::set<std::string> kPodKinds = {"pod", "pods", "po"};
const std::set<std::string> kServiceKinds = {"service", "services", "svc"};
const std::set<std::string> kDeploymentKinds = {"deployment", "deployments",
                                                "deploy"};
const std::set<std::string> kConfigMapKinds = {"configmap", "configmaps",
                                               "cm"};
const std::set<std::string> kNodeKinds = {"node", "nodes", "no"};

std::string DescribeEvents(const PodState& pod, size_t node_count) {
  switch (pod.phase) {
    case PodPhase::kPending:
      return fmt::format(
          "  Warning  FailedScheduling  default-scheduler  0/{} nodes are "
          "available: {} node(s) didn't match Pod's node affinity/selector.\n",
          node_count, node_count);
    case PodPhase::kCrashLoopBackOff:
      return "  Warning  BackOff  kubelet  Back-off restarting failed "
             "container\n";
    case PodPhase::kFailed:
      return "  Warning  Failed  kubelet  Error: container exited with code "
             "1\n";
    case PodPhase::kRunning:
      break;
  }
  return "  <none>\n";
}

}  // namespace

const std::vector<std::string>& ShellUsage() {
  static const auto* usage = new std::vector<std::string>{
      "kubectl get pods|services|deployments|configmaps -n NS",
      "kubectl get nodes",
      "kubectl describe pod|service|deployment|configmap NAME -n NS",
      "kubectl logs POD -n NS",
      "kubectl scale deployment NAME --replicas=N -n NS",
      "kubectl patch service NAME -n NS --target-port=P",
      "kubectl patch deployment NAME -n NS --clear-node-selector",
      "kubectl set image deployment NAME IMAGE -n NS",
      "kubectl delete pod NAME -n NS",
      "kubectl edit configmap NAME set KEY=VALUE -n NS",
      "kubectl rollout restart deployment NAME -n NS",
      "mongo show-users --store S",
      "mongo grant-role --store S --principal P --role R",
      "mongo register-user --store S --user U",
      "cat PATH",
      "ls [PATH]",
  };
  return *usage;
}

absl::StatusOr<std::vector<std::string>> SplitCommandLine(
    std::string_view line) {
  std::vector<std::string> words;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < line.size()) {
        cur += line[++i];
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == '\\' && i + 1 < line.size()) {
      cur += line[++i];
      in_word = true;
    } else if (c == ' ' || c == '\t') {
      if (in_word) words.push_back(std::move(cur));
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (quote != 0) return absl::InvalidArgumentError("unterminated quote");
  if (in_word) words.push_back(std::move(cur));
  return words;
}

std::string ShellVerb(std::string_view command) {
  absl::StatusOr<std::vector<std::string>> argv = SplitCommandLine(command);
  if (!argv.ok() || argv->empty()) return "";
  const std::string& program = (*argv)[0];
  if (program != "kubectl" && program != "mongo") return program;
  for (size_t i = 1; i < argv->size(); ++i) {
    const std::string& w = (*argv)[i];
    if (w == "-n" || w == "-o") {
      ++i;
      continue;
    }
    if (!w.empty() && w[0] == '-') continue;
    return StrCat(program, " ", w);
  }
  return program;
}

ShellEmulator::ShellEmulator(ClusterState* state,
                             const TelemetryApi* telemetry)
    : state_(state), telemetry_(telemetry) {}

std::string ShellEmulator::Execute(std::string_view command) {
  if (command.find_first_of(kForbiddenChars) != std::string_view::npos) {
    return StrCat(kRefusalPrefix,
                  ": pipes, redirection, substitution and command chaining "
                  "are not allowed.");
  }
  absl::StatusOr<std::vector<std::string>> argv = SplitCommandLine(command);
  if (!argv.ok()) {
    return StrCat("Error: ", std::string(argv.status().message()));
  }
  if (argv->empty()) return "Error: empty command.";
  const std::string& program = (*argv)[0];
  if (program == "kubectl") return Kubectl(*argv);
  if (program == "mongo") return Mongo(*argv);
  if (program == "cat") return Cat(*argv);
  if (program == "ls") return Ls(*argv);
  return StrCat(kRefusalPrefix, ": '", program,
                "' is not an allowed program. Allowed programs: kubectl, "
                "mongo, cat, ls.");
}

std::string ShellEmulator::Kubectl(const std::vector<std::string>& argv) {
  ParsedArgs args = ParseArgs(
      argv, 1, {"namespace", "output", "replicas", "target-port"},
      {"clear-node-selector"});
  if (!args.error.empty()) return args.error;
  const auto& pos = args.positional;
  if (pos.empty()) return Usage("kubectl");
  const std::string& verb = pos[0];
  const std::string ns = args.ns();
  const NamespaceState* nss = state_->FindNamespace(ns);
  const int64_t now = state_->now_ms();
  const bool wide = args.flag("output") == std::optional<std::string>("wide");

  if (verb == "get") {
    if (pos.size() < 2 || pos.size() > 3) return Usage("kubectl get");
    const std::string& kind = pos[1];
    std::optional<std::string> only;
    if (pos.size() == 3) only = pos[2];
    if (kNodeKinds.count(kind) > 0) {
      std::vector<std::vector<std::string>> rows = {
          {"NAME", "STATUS", "ROLES", "AGE", "VERSION"}};
      for (const std::string& n : state_->nodes()) {
        if (only && *only != n) continue;
        rows.push_back({n, "Ready", "<none>", Age(0, now), "v1.29.2"});
      }
      if (rows.size() == 1) return NotFound("nodes", only.value_or(""));
      return Table(rows);
    }
    if (kPodKinds.count(kind) > 0) {
      std::vector<std::vector<std::string>> rows;
      if (wide) {
        rows.push_back(
            {"NAME", "READY", "STATUS", "RESTARTS", "AGE", "IP", "NODE"});
      } else {
        rows.push_back({"NAME", "READY", "STATUS", "RESTARTS", "AGE"});
      }
      if (nss != nullptr) {
        for (const PodState& p : nss->pods) {
          if (only && *only != p.pod_name) continue;
          std::vector<std::string> row = {
              p.pod_name, p.phase == PodPhase::kRunning ? "1/1" : "0/1",
              std::string(PodStatus(p)), StrCat(p.restart_count),
              Age(p.created_ms, now)};
          if (wide) {
            row.push_back(p.node ? PodIp(p, state_->nodes()) : "<none>");
            row.push_back(p.node.value_or("<none>"));
          }
          rows.push_back(std::move(row));
        }
      }
      if (rows.size() == 1) {
        return only ? NotFound("pods", *only) : NoResources(ns);
      }
      return Table(rows);
    }
    if (kServiceKinds.count(kind) > 0) {
      std::vector<std::vector<std::string>> rows = {
          {"NAME", "TYPE", "CLUSTER-IP", "EXTERNAL-IP", "PORT(S)", "AGE"}};
      if (nss != nullptr) {
        for (const auto& [name, spec] : nss->services) {
          if (only && *only != name) continue;
          rows.push_back({name, "ClusterIP", ClusterIp(name), "<none>",
                          StrCat(spec.service_port, "/TCP"), Age(0, now)});
        }
      }
      if (rows.size() == 1) {
        return only ? NotFound("services", *only) : NoResources(ns);
      }
      return Table(rows);
    }
    if (kDeploymentKinds.count(kind) > 0) {
      std::vector<std::vector<std::string>> rows = {
          {"NAME", "READY", "UP-TO-DATE", "AVAILABLE", "AGE"}};
      if (nss != nullptr) {
        for (const auto& [name, spec] : nss->services) {
          if (only && *only != name) continue;
          int running = state_->RunningPods(ns, name);
          rows.push_back(
              {name, StrCat(running, "/", spec.desired_replicas),
               StrCat(spec.desired_replicas), StrCat(running), Age(0, now)});
        }
      }
      if (rows.size() == 1) {
        return only ? NotFound("deployments.apps", *only) : NoResources(ns);
      }
      return Table(rows);
    }
    if (kConfigMapKinds.count(kind) > 0) {
      std::vector<std::vector<std::string>> rows = {{"NAME", "DATA", "AGE"}};
      for (const auto& [key, data] : state_->config_maps()) {
        if (key.first != ns) continue;
        if (only && *only != key.second) continue;
        rows.push_back({key.second, StrCat(data.size()), Age(0, now)});
      }
      if (rows.size() == 1) {
        return only ? NotFound("configmaps", *only) : NoResources(ns);
      }
      return Table(rows);
    }
    return StrCat("error: the server doesn't have a resource type \"", kind,
                  "\"");
  }

  if (verb == "describe") {
    if (pos.size() != 3) return Usage("kubectl describe");
    const std::string& kind = pos[1];
    const std::string& name = pos[2];
    if (kPodKinds.count(kind) > 0) {
      const PodState* p = state_->FindPod(ns, name);
      if (p == nullptr) return NotFound("pods", name);
      const ServiceSpec* spec = state_->FindService(ns, p->service);
      std::string out;
      StrAppend(&out, "Name:           ", p->pod_name, "\n");
      StrAppend(&out, "Namespace:      ", ns, "\n");
      StrAppend(&out, "Node:           ", p->node.value_or("<none>"), "\n");
      StrAppend(&out, "Labels:         app=", p->service, "\n");
      StrAppend(&out, "Status:         ",
                p->phase == PodPhase::kPending  ? "Pending"
                : p->phase == PodPhase::kFailed ? "Failed"
                                                : "Running",
                "\n");
      StrAppend(&out, "IP:             ",
                p->node ? PodIp(*p, state_->nodes()) : "<none>", "\n");
      StrAppend(&out, "Controlled By:  ReplicaSet/", p->service, "\n");
      StrAppend(&out, "Containers:\n  ", p->service, ":\n");
      if (spec != nullptr) {
        StrAppend(&out, "    Image:          ", spec->image_tag, "\n");
        StrAppend(&out, "    Port:           ", spec->container_port,
                  "/TCP\n");
      }
      switch (p->phase) {
        case PodPhase::kRunning:
          out += "    State:          Running\n";
          break;
        case PodPhase::kPending:
          out += "    State:          Waiting\n      Reason:       "
                 "ContainerCreating\n";
          break;
        case PodPhase::kCrashLoopBackOff:
          out += "    State:          Waiting\n      Reason:       "
                 "CrashLoopBackOff\n";
          break;
        case PodPhase::kFailed:
          out += "    State:          Terminated\n      Reason:       "
                 "Error\n      Exit Code:    1\n";
          break;
      }
      StrAppend(&out, "    Ready:          ",
                p->phase == PodPhase::kRunning ? "True" : "False", "\n");
      StrAppend(&out, "    Restart Count:  ", p->restart_count, "\n");
      if (spec != nullptr && !spec->mounted_config_maps.empty()) {
        out += "    Mounts:\n";
        for (const std::string& cm : spec->mounted_config_maps) {
          StrAppend(&out, "      /etc/config/", cm, " from ", cm, "\n");
        }
      }
      StrAppend(&out, "Node-Selectors:  ",
                spec != nullptr && spec->node_selector
                    ? StrCat("kubernetes.io/hostname=", *spec->node_selector)
                    : std::string("<none>"),
                "\n");
      out += "Events:\n";
      out += DescribeEvents(*p, state_->nodes().size());
      return out;
    }
    if (kServiceKinds.count(kind) > 0) {
      const ServiceSpec* spec = state_->FindService(ns, name);
      if (spec == nullptr) return NotFound("services", name);
      std::vector<std::string> endpoints;
      for (const PodState* p : state_->PodsOf(ns, name)) {
        if (p->phase != PodPhase::kRunning) continue;
        endpoints.push_back(
            StrCat(PodIp(*p, state_->nodes()), ":", spec->svc_target_port));
      }
      std::string eps = "<none>";
      if (!endpoints.empty()) {
        eps.clear();
        for (size_t i = 0; i < endpoints.size(); ++i) {
          if (i > 0) eps += ",";
          eps += endpoints[i];
        }
      }
      std::string out;
      StrAppend(&out, "Name:              ", name, "\n");
      StrAppend(&out, "Namespace:         ", ns, "\n");
      StrAppend(&out, "Selector:          app=", name, "\n");
      StrAppend(&out, "Type:              ClusterIP\n");
      StrAppend(&out, "IP:                ", ClusterIp(name), "\n");
      StrAppend(&out, "Port:              <unset>  ", spec->service_port,
                "/TCP\n");
      StrAppend(&out, "TargetPort:        ", spec->svc_target_port, "/TCP\n");
      StrAppend(&out, "Endpoints:         ", eps, "\n");
      StrAppend(&out, "Events:            <none>\n");
      return out;
    }
    if (kDeploymentKinds.count(kind) > 0) {
      const ServiceSpec* spec = state_->FindService(ns, name);
      if (spec == nullptr) return NotFound("deployments.apps", name);
      int running = state_->RunningPods(ns, name);
      int total = static_cast<int>(state_->PodsOf(ns, name).size());
      std::string out;
      StrAppend(&out, "Name:               ", name, "\n");
      StrAppend(&out, "Namespace:          ", ns, "\n");
      StrAppend(&out, "Selector:           app=", name, "\n");
      StrAppend(&out, "Replicas:           ", spec->desired_replicas,
                " desired | ", total, " total | ", running, " available | ",
                total - running, " unavailable\n");
      out += "Pod Template:\n  Containers:\n";
      StrAppend(&out, "   ", name, ":\n");
      StrAppend(&out, "    Image:      ", spec->image_tag, "\n");
      StrAppend(&out, "    Port:       ", spec->container_port, "/TCP\n");
      for (const std::string& cm : spec->mounted_config_maps) {
        StrAppend(&out, "    Mounts:     /etc/config/", cm, " from ", cm,
                  "\n");
      }
      StrAppend(&out, "  Node-Selectors:  ",
                spec->node_selector
                    ? StrCat("kubernetes.io/hostname=", *spec->node_selector)
                    : std::string("<none>"),
                "\n");
      return out;
    }
    if (kConfigMapKinds.count(kind) > 0) {
      const ConfigData* data = state_->FindConfigMap(ns, name);
      if (data == nullptr) return NotFound("configmaps", name);
      std::string out;
      StrAppend(&out, "Name:         ", name, "\n");
      StrAppend(&out, "Namespace:    ", ns, "\n\nData\n====\n");
      for (const auto& [k, v] : *data) {
        StrAppend(&out, k, ":\n----\n", v, "\n\n");
      }
      out += "Events:  <none>\n";
      return out;
    }
    return StrCat("error: the server doesn't have a resource type \"", kind,
                  "\"");
  }

  if (verb == "logs") {
    if (pos.size() != 2) return Usage("kubectl logs");
    std::string pod = pos[1];
    if (pod.rfind("pod/", 0) == 0) pod = pod.substr(4);
    if (state_->FindPod(ns, pod) == nullptr) return NotFound("pods", pod);
    std::string logs = telemetry_->GetPodLogs(ns, pod);
    return logs.empty() ? "(no log lines in the last 120 seconds)" : logs;
  }

  if (verb == "scale") {
    std::string name;
    size_t next = 0;
    auto replicas = args.flag("replicas");
    if (!TakeResourceName(pos, 1, kDeploymentKinds, &name, &next) ||
        next != pos.size() || !replicas) {
      return Usage("kubectl scale");
    }
    std::optional<int> n = ParseNumber<int>(*replicas);
    if (!n || *n < 0) {
      return "error: The --replicas=COUNT flag is required, and COUNT must be "
             "greater than or equal to 0";
    }
    if (state_->FindService(ns, name) == nullptr) {
      return NotFound("deployments.apps", name);
    }
    absl::Status s = state_->ScaleService(ns, name, *n, ChangeSource::kAgent);
    if (!s.ok()) return StrCat("error: ", std::string(s.message()));
    return StrCat("deployment.apps/", name, " scaled");
  }

  if (verb == "patch") {
    if (pos.size() >= 2 && (kServiceKinds.count(pos[1]) > 0 ||
                            pos[1].rfind("service/", 0) == 0 ||
                            pos[1].rfind("svc/", 0) == 0)) {
      std::string name;
      size_t next = 0;
      auto port = args.flag("target-port");
      if (!TakeResourceName(pos, 1, kServiceKinds, &name, &next) ||
          next != pos.size() || !port) {
        return Usage("kubectl patch service");
      }
      std::optional<int> p = ParseNumber<int>(*port);
      if (!p || *p <= 0 || *p > 65535) {
        return StrCat("error: invalid target port \"", *port, "\"");
      }
      if (state_->FindService(ns, name) == nullptr) {
        return NotFound("services", name);
      }
      absl::Status s = state_->SetTargetPort(ns, name, *p, ChangeSource::kAgent);
      if (!s.ok()) return StrCat("error: ", std::string(s.message()));
      return StrCat("service/", name, " patched");
    }
    std::string name;
    size_t next = 0;
    if (!TakeResourceName(pos, 1, kDeploymentKinds, &name, &next) ||
        next != pos.size() || !args.flag("clear-node-selector")) {
      return Usage("kubectl patch");
    }
    const ServiceSpec* spec = state_->FindService(ns, name);
    if (spec == nullptr) return NotFound("deployments.apps", name);
    if (!spec->node_selector) {
      return StrCat("deployment.apps/", name, " patched (no change)");
    }
    absl::Status s =
        state_->SetNodeSelector(ns, name, std::nullopt, ChangeSource::kAgent);
    if (!s.ok()) return StrCat("error: ", std::string(s.message()));
    return StrCat("deployment.apps/", name, " patched");
  }

  if (verb == "set") {
    std::string name;
    size_t next = 0;
    if (pos.size() < 2 || pos[1] != "image" ||
        !TakeResourceName(pos, 2, kDeploymentKinds, &name, &next) ||
        next + 1 != pos.size()) {
      return Usage("kubectl set image");
    }
    const ServiceSpec* spec = state_->FindService(ns, name);
    if (spec == nullptr) return NotFound("deployments.apps", name);
    std::string image = pos[next];
    // Accept CONTAINER=IMAGE and a bare tag.
    if (size_t eq = image.find('='); eq != std::string::npos) {
      image = image.substr(eq + 1);
    }
    if (image.empty()) return Usage("kubectl set image");
    if (image.find(':') == std::string::npos &&
        image.find('/') == std::string::npos) {
      const std::string& cur = spec->image_tag;
      size_t colon = cur.rfind(':');
      image = StrCat(cur.substr(0, colon), ":", image);
    }
    absl::Status s = state_->SetImage(ns, name, image, ChangeSource::kAgent);
    if (!s.ok()) return StrCat("error: ", std::string(s.message()));
    return StrCat("deployment.apps/", name, " image updated");
  }

  if (verb == "delete") {
    std::string name;
    size_t next = 0;
    if (!TakeResourceName(pos, 1, kPodKinds, &name, &next) ||
        next != pos.size()) {
      return Usage("kubectl delete");
    }
    if (state_->FindPod(ns, name) == nullptr) return NotFound("pods", name);
    absl::Status s = state_->DeletePod(ns, name, ChangeSource::kAgent);
    if (!s.ok()) return StrCat("error: ", std::string(s.message()));
    return StrCat("pod \"", name, "\" deleted");
  }

  if (verb == "edit") {
    std::string name;
    size_t next = 0;
    if (!TakeResourceName(pos, 1, kConfigMapKinds, &name, &next) ||
        next + 2 != pos.size() || pos[next] != "set") {
      return Usage("kubectl edit");
    }
    const std::string& kv = pos[next + 1];
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) return Usage("kubectl edit");
    if (state_->FindConfigMap(ns, name) == nullptr) {
      return NotFound("configmaps", name);
    }
    absl::Status s = state_->SetConfigValue(ns, name, kv.substr(0, eq),
                                            kv.substr(eq + 1),
                                            ChangeSource::kAgent);
    if (!s.ok()) return StrCat("error: ", std::string(s.message()));
    return StrCat("configmap/", name, " edited");
  }

  if (verb == "rollout") {
    std::string name;
    size_t next = 0;
    if (pos.size() < 2 || pos[1] != "restart" ||
        !TakeResourceName(pos, 2, kDeploymentKinds, &name, &next) ||
        next != pos.size()) {
      return Usage("kubectl rollout");
    }
    if (state_->FindService(ns, name) == nullptr) {
      return NotFound("deployments.apps", name);
    }
    absl::Status s = state_->RestartService(ns, name, ChangeSource::kAgent);
    if (!s.ok()) return StrCat("error: ", std::string(s.message()));
    return StrCat("deployment.apps/", name, " restarted");
  }

  return StrCat("error: unknown command \"", verb, "\" for \"kubectl\"\n",
                Usage("kubectl"));
}

std::string ShellEmulator::Mongo(const std::vector<std::string>& argv) {
  ParsedArgs args =
      ParseArgs(argv, 1, {"store", "principal", "role", "user"}, {});
  if (!args.error.empty()) return args.error;
  if (args.positional.size() != 1) return Usage("mongo");
  const std::string& verb = args.positional[0];
  auto store = args.flag("store");
  if (!store) return Usage(StrCat("mongo ", verb));
  const AuthStore* auth = state_->FindAuthStore(*store);
  if (auth == nullptr) {
    return StrCat("Error: couldn't connect to server ", *store,
                  ": no such database store");
  }
  if (verb == "show-users") {
    std::string out;
    for (const std::string& user : auth->registered_users) {
      std::string roles;
      auto it = auth->principals.find(user);
      if (it != auth->principals.end()) {
        for (const std::string& r : it->second) {
          if (!roles.empty()) roles += ",";
          roles += r;
        }
      }
      StrAppend(&out, "user: ", user, "  roles: [", roles, "]\n");
    }
    return out.empty() ? "(no users)" : out;
  }
  if (verb == "grant-role") {
    auto principal = args.flag("principal");
    auto role = args.flag("role");
    if (!principal || !role) return Usage("mongo grant-role");
    absl::Status s =
        state_->GrantRole(*store, *principal, *role, ChangeSource::kAgent);
    if (!s.ok()) return StrCat("Error: ", std::string(s.message()));
    return StrCat("Successfully granted role ", *role, " to ", *principal,
                  " on ", *store);
  }
  if (verb == "register-user") {
    auto user = args.flag("user");
    if (!user) return Usage("mongo register-user");
    absl::Status s = state_->RegisterUser(*store, *user, ChangeSource::kAgent);
    if (!s.ok()) return StrCat("Error: ", std::string(s.message()));
    return StrCat("Successfully added user: ", *user, " on ", *store);
  }
  return Usage("mongo");
}

std::string ShellEmulator::Cat(const std::vector<std::string>& argv) {
  if (argv.size() != 2) return Usage("cat");
  std::optional<fs::path> path = telemetry_->Resolve(argv[1]);
  if (!path) {
    return StrCat("cat: ", argv[1], ": Permission denied (only ",
                  telemetry_->virtual_root(), " is readable)");
  }
  std::error_code ec;
  if (fs::is_directory(*path, ec)) {
    return StrCat("cat: ", argv[1], ": Is a directory");
  }
  std::ifstream in(*path, std::ios::binary);
  if (!in) return StrCat("cat: ", argv[1], ": No such file or directory");
  std::string buf(kMaxCatBytes + 1, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  buf.resize(static_cast<size_t>(in.gcount()));
  if (buf.size() > kMaxCatBytes) {
    buf.resize(kMaxCatBytes);
    StrAppend(&buf, "\n", kTruncationMarkerPrefix, "output truncated at ",
              kMaxCatBytes, " bytes)");
  }
  return buf;
}

std::string ShellEmulator::Ls(const std::vector<std::string>& argv) {
  if (argv.size() > 2) return Usage("ls");
  const std::string target =
      argv.size() == 2 ? argv[1] : telemetry_->virtual_root();
  std::optional<fs::path> path = telemetry_->Resolve(target);
  if (!path) {
    return StrCat("ls: cannot open directory '", target,
                  "': Permission denied (only ", telemetry_->virtual_root(),
                  " is readable)");
  }
  std::error_code ec;
  if (!fs::exists(*path, ec)) {
    // The export root only appears once something has been exported.
    if (fs::path(target).lexically_normal() ==
        fs::path(telemetry_->virtual_root())) {
      return "";
    }
    return StrCat("ls: cannot access '", target,
                  "': No such file or directory");
  }
  if (!fs::is_directory(*path, ec)) return target;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(*path, ec)) {
    std::string name = entry.path().filename().string();
    if (entry.is_directory()) name += "/";
    names.push_back(std::move(name));
  }
  std::sort(names.begin(), names.end());
  std::string out;
  for (const std::string& n : names) out += n + "\n";
  return out;
}

}  // namespace opsarena
