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

#include "opsarena/baselines.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "opsarena/aci.h"
#include "opsarena/action.h"
#include "opsarena/faultlib.h"
#include "opsarena/strings.h"
#include "opsarena/topology.h"

namespace opsarena {

namespace {

std::string Submit(std::vector<Value> values) {
  Call call{std::string(kSubmitApi), {}};
  for (Value& v : values) call.args.push_back({std::nullopt, std::move(v)});
  return FormatCall(call);
}

Value Str(std::string s) { return Value{std::move(s)}; }

// Text after "<prefix>" up to the end of its line.
std::string LineValue(std::string_view text, std::string_view prefix) {
  size_t at = text.find(prefix);
  if (at == std::string_view::npos) return "";
  text.remove_prefix(at + prefix.size());
  return std::string(Trim(text.substr(0, text.find('\n'))));
}

std::optional<TaskLevel> TaskOf(const Information& info) {
  std::string name = LineValue(info.instructions, "Task: ");
  return ParseTaskLevel(name.substr(0, name.find('.')));
}

std::vector<std::string> MitigationSteps(const Problem& problem) {
  std::vector<std::string> out;
  absl::StatusOr<ClusterState> fresh = LoadApp(problem.app);
  if (!fresh.ok()) return out;
  const std::string& ns = fresh->app_namespace();
  for (const std::string& t : problem.fault.targets) {
    const ServiceSpec* svc = fresh->FindService(ns, t);
    if (svc == nullptr) continue;
    const std::optional<AuthRequirement>& auth = svc->requires_auth;
    switch (problem.fault.name) {
      case FaultName::kAuthenticationMissing: {
        if (!auth) break;
        const ConfigData* cm = fresh->FindConfigMap(ns, auth->config_map);
        std::string creds;
        if (cm != nullptr && cm->count("credentials")) {
          creds = cm->at("credentials");
        }
        out.push_back(ShellAction(StrCat("kubectl edit configmap ",
                                         auth->config_map, " set credentials=",
                                         creds, " -n ", ns)));
        for (const std::string& c : fresh->Consumers(ns, auth->config_map)) {
          out.push_back(ShellAction(
              StrCat("kubectl rollout restart deployment ", c, " -n ", ns)));
        }
        break;
      }
      case FaultName::kTargetPortMisconfig:
        out.push_back(ShellAction(StrCat("kubectl patch service ", t, " -n ",
                                         ns, " --target-port=",
                                         svc->svc_target_port)));
        break;
      case FaultName::kRevokeAuth:
        if (!auth) break;
        out.push_back(ShellAction(StrCat("mongo grant-role --store ",
                                         auth->store, " --principal ",
                                         auth->principal, " --role ",
                                         auth->role)));
        break;
      case FaultName::kUserUnregistered:
        if (!auth) break;
        out.push_back(ShellAction(StrCat("mongo register-user --store ",
                                         auth->store, " --user ",
                                         auth->principal)));
        break;
      case FaultName::kBuggyAppImage:
        out.push_back(ShellAction(StrCat("kubectl set image deployment ", t,
                                         " ", t, "=", svc->image_tag, " -n ",
                                         ns)));
        break;
      case FaultName::kScalePod:
        out.push_back(ShellAction(StrCat("kubectl scale deployment ", t,
                                         " --replicas=", svc->desired_replicas,
                                         " -n ", ns)));
        break;
      case FaultName::kAssignNonExistentNode:
        out.push_back(ShellAction(StrCat("kubectl patch deployment ", t,
                                         " -n ", ns,
                                         " --clear-node-selector")));
        break;
      case FaultName::kNetworkLoss:
      case FaultName::kPodFailure:
      case FaultName::kNoop:
        break;
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string_view>& BuiltinAgentNames() {
  static const auto* names = new std::vector<std::string_view>{
      "oracle", "bad_fixer", "random", "always_yes", "k_sigma"};
  return *names;
}

absl::StatusOr<std::unique_ptr<Agent>> MakeBuiltinAgent(std::string_view name,
                                                        uint64_t seed) {
  if (name == "oracle") return std::make_unique<OracleAgent>();
  if (name == "bad_fixer") return std::make_unique<BadFixerAgent>(seed);
  if (name == "random") return std::make_unique<RandomAgent>(seed);
  if (name == "always_yes") return std::make_unique<AlwaysYesAgent>();
  if (name == "k_sigma") return std::make_unique<KSigmaAgent>();
  std::string known;
  for (std::string_view n : BuiltinAgentNames()) {
    StrAppend(&known, known.empty() ? "" : ", ", n);
  }
  return absl::NotFoundError(
      StrCat("no builtin agent '", name, "'; known: ", known));
}

absl::StatusOr<std::unique_ptr<Agent>> MakeAgent(
    std::string_view spec, uint64_t seed,
    std::chrono::milliseconds step_timeout) {
  constexpr std::string_view kBuiltin = "builtin:";
  constexpr std::string_view kExec = "exec:";
  if (spec.substr(0, kBuiltin.size()) == kBuiltin) {
    return MakeBuiltinAgent(spec.substr(kBuiltin.size()), seed);
  }
  if (spec.substr(0, kExec.size()) == kExec) {
    std::string_view command = Trim(spec.substr(kExec.size()));
    if (command.empty()) {
      return absl::InvalidArgumentError("exec: needs a command line");
    }
    return std::make_unique<ExecAgent>(std::string(command), step_timeout);
  }
  if (spec == "human") return std::make_unique<HumanAgent>(std::cin, std::cout);
  return absl::InvalidArgumentError(
      StrCat("bad agent spec '", spec,
             "'; use builtin:<name>, exec:<command> or human"));
}

std::string ShellAction(std::string_view command) {
  return FormatCall(Call{"exec_shell", {{std::nullopt, Str(std::string(command))}}});
}

std::vector<std::string> OracleActions(const Problem& problem) {
  const Solution& s = problem.solution;
  switch (problem.task) {
    case TaskLevel::kDetection:
      return {Submit({Str(s.detection)})};
    case TaskLevel::kLocalization: {
      std::vector<Value> list;
      for (const std::string& svc : s.services) list.push_back(Str(svc));
      return {Submit({Value{std::move(list)}})};
    }
    case TaskLevel::kAnalysis:
      return {Submit({Str(std::string(SystemLayerName(*s.layer))),
                      Str(*s.fault_type)})};
    case TaskLevel::kMitigation: {
      std::vector<std::string> out = MitigationSteps(problem);
      out.push_back("submit()");
      return out;
    }
  }
  return {"submit()"};
}

absl::Status OracleAgent::Init(const Information&) {
  if (plan_.empty()) {
    return absl::FailedPreconditionError(
        "the oracle needs the hidden problem and was not given it");
  }
  next_ = 0;
  return absl::OkStatus();
}

absl::StatusOr<AgentTurn> OracleAgent::GetAction(const StateMessage&) {
  if (next_ < plan_.size()) return AgentTurn{plan_[next_++], {}};
  return AgentTurn{plan_.back(), {}};
}

void OracleAgent::OnBackdoor(const Problem& problem) {
  plan_ = OracleActions(problem);
}

void BadFixerAgent::OnBackdoor(const Problem& problem) {
  OracleAgent::OnBackdoor(problem);
  bystander_.clear();
  if (problem.task != TaskLevel::kMitigation) return;
  absl::StatusOr<ClusterState> fresh = LoadApp(problem.app);
  if (!fresh.ok()) return;
  const std::string& ns = fresh->app_namespace();
  std::vector<std::string> candidates;
  for (const auto& [name, svc] : fresh->FindNamespace(ns)->services) {
    bool is_target = false;
    for (const std::string& t : problem.fault.targets) is_target |= t == name;
    if (!is_target) candidates.push_back(name);
  }
  if (candidates.empty()) return;
  SeededSequence rng(MixKeys(seed_, Fnv1a64(problem.pid)));
  bystander_ = candidates[rng.Below(candidates.size())];
  plan_.insert(plan_.end() - 1,
               ShellAction(StrCat("kubectl scale deployment ", bystander_,
                                  " --replicas=0 -n ", ns)));
}

absl::Status RandomAgent::Init(const Information& info) {
  rng_ = SeededSequence(MixKeys(seed_, Fnv1a64(info.Text())));
  ns_ = LineValue(info.description, "Namespace: ");
  task_ = TaskOf(info);
  services_.clear();
  pods_.clear();
  std::optional<AppName> app =
      ParseAppName(LineValue(info.description, "Service Name: "));
  if (app) {
    absl::StatusOr<ClusterState> state = LoadApp(*app);
    if (state.ok()) {
      if (const NamespaceState* n = state->FindNamespace(ns_)) {
        for (const auto& [name, svc] : n->services) services_.push_back(name);
        for (const PodState& pod : n->pods) pods_.push_back(pod.pod_name);
      }
    }
  }
  if (services_.empty()) services_.push_back("frontend");
  if (pods_.empty()) pods_.push_back("frontend");
  return absl::OkStatus();
}

std::string RandomAgent::Pick(const std::vector<std::string>& options) {
  return options[rng_.Below(options.size())];
}

std::string RandomAgent::RandomSubmit() {
  switch (task_.value_or(TaskLevel::kMitigation)) {
    case TaskLevel::kDetection:
      return Submit({Str(rng_.Below(2) == 0 ? "yes" : "no")});
    case TaskLevel::kLocalization:
      return Submit({Str(Pick(services_))});
    case TaskLevel::kAnalysis:
      return Submit(
          {Str(std::string(kLayerVocabulary[rng_.Below(kLayerVocabulary.size())])),
           Str(std::string(
               kFaultTypeVocabulary[rng_.Below(kFaultTypeVocabulary.size())]))});
    case TaskLevel::kMitigation:
      return "submit()";
  }
  return "submit()";
}

absl::StatusOr<AgentTurn> RandomAgent::GetAction(const StateMessage&) {
  static constexpr int64_t kDurations[] = {5, 10, 30, 60};
  const std::string& ns = ns_;
  std::string action;
  switch (rng_.Below(5)) {
    case 0:
      action = FormatCall(Call{"get_logs", {{std::nullopt, Str(ns)},
                                            {std::nullopt, Str(Pick(services_))}}});
      break;
    case 1:
      action = FormatCall(
          Call{"get_metrics", {{std::nullopt, Str(ns)},
                               {std::nullopt, Value{kDurations[rng_.Below(4)]}}}});
      break;
    case 2:
      action = FormatCall(
          Call{"get_traces", {{std::nullopt, Str(ns)},
                              {std::nullopt, Value{kDurations[rng_.Below(4)]}}}});
      break;
    case 3: {
      std::vector<std::string> commands = {
          StrCat("kubectl get pods -n ", ns),
          StrCat("kubectl get services -n ", ns),
          StrCat("kubectl get deployments -n ", ns),
          StrCat("kubectl describe service ", Pick(services_), " -n ", ns),
          StrCat("kubectl describe pod ", Pick(pods_), " -n ", ns),
          StrCat("kubectl logs ", Pick(pods_), " -n ", ns),
          "ls",
      };
      action = ShellAction(Pick(commands));
      break;
    }
    default:
      action = RandomSubmit();
      break;
  }
  return AgentTurn{action, {}};
}

bool KSigmaDetect(const MetricTable& table, double k, int recent) {
  const size_t n = table.values.size();
  if (recent <= 0 || n <= static_cast<size_t>(recent)) return false;
  const size_t split = n - static_cast<size_t>(recent);
  for (size_t c = 0; c < table.services.size(); ++c) {
    double sum = 0;
    for (size_t r = 0; r < split; ++r) sum += table.values[r][c];
    const double mean = sum / static_cast<double>(split);
    double var = 0;
    for (size_t r = 0; r < split; ++r) {
      var += (table.values[r][c] - mean) * (table.values[r][c] - mean);
    }
    const double sigma = std::sqrt(var / static_cast<double>(split));
    double recent_sum = 0;
    for (size_t r = split; r < n; ++r) recent_sum += table.values[r][c];
    const double recent_mean = recent_sum / static_cast<double>(recent);
    if (recent_mean > mean + k * sigma) return true;
  }
  return false;
}

absl::StatusOr<bool> KSigmaDetectDir(const std::string& metrics_dir, double k,
                                     int recent) {
  std::ifstream in(metrics_dir + "/error_rate.csv", std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        StrCat("no error_rate.csv under ", metrics_dir));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<MetricTable> table = ParseMetricTable(buffer.str());
  if (!table.ok()) return table.status();
  return KSigmaDetect(*table, k, recent);
}

absl::Status KSigmaAgent::Init(const Information& info) {
  ns_ = LineValue(info.description, "Namespace: ");
  phase_ = 0;
  metrics_dir_.clear();
  return absl::OkStatus();
}

absl::StatusOr<AgentTurn> KSigmaAgent::GetAction(const StateMessage& state) {
  switch (phase_++) {
    case 0:
      return AgentTurn{
          FormatCall(Call{"get_metrics", {{std::nullopt, Str(ns_)},
                                          {std::nullopt, Value{kWindowS}}}}),
          {}};
    case 1:
      metrics_dir_ = std::string(Trim(state.observation));
      return AgentTurn{ShellAction(StrCat("cat ", metrics_dir_,
                                          "/error_rate.csv")),
                       {}};
    default: {
      // A truncated listing ends in a marker and maybe a partial row.
      std::string csv = state.observation;
      size_t marker = csv.find(StrCat("\n", kTruncationMarkerPrefix));
      if (marker != std::string::npos) {
        csv.resize(marker);
        csv.resize(csv.rfind('\n') == std::string::npos ? 0 : csv.rfind('\n'));
      }
      absl::StatusOr<MetricTable> table = ParseMetricTable(csv);
      bool anomalous = table.ok() && KSigmaDetect(*table, k_);
      return AgentTurn{Submit({Str(anomalous ? "yes" : "no")}), {}};
    }
  }
}

}  // namespace opsarena
