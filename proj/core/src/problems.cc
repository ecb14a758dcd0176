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

#include "opsarena/problems.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>

#include "opsarena/aci.h"
#include "opsarena/errors.h"
#include "opsarena/strings.h"

namespace opsarena {

using json = nlohmann::json;

std::string_view TaskName(TaskLevel level) {
  switch (level) {
    case TaskLevel::kDetection:
      return "Detection";
    case TaskLevel::kLocalization:
      return "Localization";
    case TaskLevel::kAnalysis:
      return "Analysis";
    case TaskLevel::kMitigation:
      return "Mitigation";
  }
  return "unknown";
}

std::string_view TaskSlug(TaskLevel level) {
  switch (level) {
    case TaskLevel::kDetection:
      return "detection";
    case TaskLevel::kLocalization:
      return "localization";
    case TaskLevel::kAnalysis:
      return "analysis";
    case TaskLevel::kMitigation:
      return "mitigation";
  }
  return "unknown";
}

std::optional<TaskLevel> ParseTaskLevel(std::string_view name) {
  const std::string lower = ToLower(Trim(name));
  for (TaskLevel level : kAllTaskLevels) {
    if (lower == TaskSlug(level) ||
        lower == std::to_string(static_cast<int>(level))) {
      return level;
    }
  }
  if (lower == "rca") return TaskLevel::kAnalysis;
  return std::nullopt;
}

std::vector<std::string_view> TaskSubtasks(TaskLevel level) {
  if (level == TaskLevel::kAnalysis) return {"system_level", "fault_type"};
  return {TaskSlug(level)};
}

std::string_view AppSlug(AppName app) {
  switch (app) {
    case AppName::kHotelReservation:
      return "hotel_res";
    case AppName::kSocialNetwork:
      return "social_net";
  }
  return "unknown";
}

std::string Information::Text() const {
  return StrCat(description, "\n\n", instructions, "\n\nAvailable APIs:\n\n",
                api_docs);
}

Information Problem::information() const {
  return {DescribeApp(app), InstructionsFor(task), FormatApiDocs()};
}

std::string DescribeApp(AppName app) {
  const AppCatalogEntry* entry = nullptr;
  for (const AppCatalogEntry& e : AppCatalog()) {
    if (e.app_name == app) entry = &e;
  }
  absl::StatusOr<ClusterState> state = LoadApp(app);
  std::string out;
  StrAppend(&out, "Service Name: ", AppNameString(app), "\n");
  StrAppend(&out, "Namespace: ", entry != nullptr ? entry->ns : "", "\n");
  if (state.ok()) {
    StrAppend(&out, "Description: ", state->description(), "\n");
  }
  out +=
      "The application runs on a Kubernetes cluster and a steady workload "
      "generator is sending it requests. Use the APIs below to inspect "
      "logs, metrics, traces and cluster state.";
  return out;
}

std::string InstructionsFor(TaskLevel level) {
  std::string out;
  switch (level) {
    case TaskLevel::kDetection:
      out =
          "Task: Detection. Decide whether there is a fault in the "
          "application right now.\n"
          "Respond either \"yes\" if a fault is present or \"no\" if the "
          "system is operating normally:\n"
          "    submit(\"yes\")  or  submit(\"no\")\n"
          "Only these two strings are accepted; case and surrounding "
          "whitespace are ignored.";
      break;
    case TaskLevel::kLocalization:
      out =
          "Task: Localization. A fault has been injected. Specify the exact "
          "location of the fault, as service names.\n"
          "Submit an ordered list of up to 3 candidates, most likely first:\n"
          "    submit([\"<service>\", \"<service>\", \"<service>\"])\n"
          "A single candidate may be submitted as submit(\"<service>\"). The "
          "first candidate is graded as your answer; whether the fault is "
          "among the top 3 is recorded too.";
      break;
    case TaskLevel::kAnalysis: {
      std::string layers;
      for (std::string_view l : kLayerVocabulary) {
        StrAppend(&layers, layers.empty() ? "" : ", ", l);
      }
      std::string types;
      for (std::string_view t : kFaultTypeVocabulary) {
        StrAppend(&types, types.empty() ? "" : ", ", t);
      }
      out = StrCat(
          "Task: Analysis. A fault has been injected. Identify (1) the "
          "system layer the fault affects and (2) the type of the fault.\n"
          "Submit both labels:\n"
          "    submit(\"<layer>\", \"<fault_type>\")\n"
          "Layers: ",
          layers, "\nFault types: ", types,
          "\nBoth labels must be correct for the answer to count; labels "
          "outside these lists are rejected.");
      break;
    }
    case TaskLevel::kMitigation:
      out =
          "Task: Mitigation. A fault has been injected. Interact with the "
          "environment to fix the fault, then call submit() with no "
          "arguments.\n"
          "After you submit, the workload runs for another 60 seconds and "
          "the whole system is checked: every service must run its "
          "deployed number of replicas with no failing pods, and at most 1% "
          "of requests may fail. Changes that break other services count "
          "against you.";
      break;
  }
  out +=
      "\n\nEach turn, respond with exactly one API call, for example "
      "exec_shell(\"kubectl get pods -n <namespace>\"). Strings must be "
      "quoted. Every call counts as one step, and the session ends when "
      "you submit or run out of steps.";
  return out;
}

bool ProblemFilter::Matches(const Problem& p) const {
  if (task && p.task != *task) return false;
  if (app && p.app != *app) return false;
  if (fault_no && FaultNumber(p.fault.name) != *fault_no) return false;
  return true;
}

absl::StatusOr<ProblemFilter> ParseProblemFilter(std::string_view text) {
  ProblemFilter filter;
  for (std::string_view part : Split(text, ',', /*skip_empty=*/true)) {
    part = Trim(part);
    if (part.empty()) continue;
    size_t eq = part.find('=');
    if (eq == std::string_view::npos) {
      return absl::InvalidArgumentError(
          StrCat("filter term '", part, "' is not key=value"));
    }
    const std::string key = ToLower(Trim(part.substr(0, eq)));
    const std::string_view value = Trim(part.substr(eq + 1));
    if (key == "task") {
      filter.task = ParseTaskLevel(value);
      if (!filter.task) {
        return absl::InvalidArgumentError(StrCat("unknown task '", value, "'"));
      }
    } else if (key == "app") {
      filter.app = ParseAppName(value);
      for (AppName a : {AppName::kHotelReservation, AppName::kSocialNetwork}) {
        if (value == AppSlug(a)) filter.app = a;
      }
      if (!filter.app) {
        return absl::InvalidArgumentError(StrCat("unknown app '", value, "'"));
      }
    } else if (key == "fault") {
      if (std::optional<int> n = ParseNumber<int>(value)) {
        if (*n < 1 || *n > kFaultCount) {
          return absl::InvalidArgumentError(
              StrCat("fault number ", *n, " out of range 1..", kFaultCount));
        }
        filter.fault_no = *n;
      } else if (std::optional<FaultName> f = ParseFaultName(value)) {
        filter.fault_no = FaultNumber(*f);
      } else {
        return absl::InvalidArgumentError(
            StrCat("unknown fault '", value, "'"));
      }
    } else {
      return absl::InvalidArgumentError(
          StrCat("unknown filter key '", key, "'; use task, app or fault"));
    }
  }
  return filter;
}

std::vector<FaultSpec> StockFaultInstances(FaultName name) {
  constexpr auto kHotel = AppName::kHotelReservation;
  constexpr auto kSocial = AppName::kSocialNetwork;
  auto make = [name](AppName app, std::string target) {
    FaultSpec spec;
    spec.name = name;
    spec.app = app;
    if (!target.empty()) spec.targets = {std::move(target)};
    return spec;
  };
  switch (name) {
    case FaultName::kAuthenticationMissing:
      return {make(kHotel, "mongodb-geo")};
    case FaultName::kTargetPortMisconfig:
      return {make(kSocial, "user-service"), make(kSocial, "text-service"),
              make(kSocial, "post-storage-service")};
    case FaultName::kRevokeAuth:
    case FaultName::kUserUnregistered:
      return {make(kHotel, "mongodb-geo"), make(kHotel, "mongodb-rate")};
    case FaultName::kBuggyAppImage:
      return {make(kHotel, "geo")};
    case FaultName::kScalePod:
    case FaultName::kAssignNonExistentNode:
      return {make(kSocial, "user-service")};
    case FaultName::kNetworkLoss: {
      FaultSpec spec = make(kHotel, "geo");
      spec.params["loss_rate"] = kDefaultLossRate;
      return {spec};
    }
    case FaultName::kPodFailure:
      return {make(kHotel, "user")};
    case FaultName::kNoop:
      return {make(kHotel, ""), make(kSocial, "")};
  }
  return {};
}

namespace {

bool IsTokenChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool ContainsToken(std::string_view text, std::string_view token) {
  if (token.empty()) return false;
  size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string_view::npos) {
    bool left = pos == 0 || !IsTokenChar(text[pos - 1]);
    size_t end = pos + token.size();
    bool right = end == text.size() || !IsTokenChar(text[end]);
    if (left && right) return true;
    ++pos;
  }
  return false;
}

Problem MakeProblem(const FaultSpec& spec, TaskLevel level, int index) {
  const FaultInfo& info = spec.info();
  Problem p;
  p.pid = StrCat(info.slug, "_", AppSlug(spec.app), "-", TaskSlug(level), "-",
                 index);
  p.task = level;
  p.index = index;
  p.app = spec.app;
  p.fault = spec;
  p.workload.rate = kDefaultWorkloadRate;
  for (const AppCatalogEntry& e : AppCatalog()) {
    if (e.app_name == spec.app) p.workload.entry = e.entry_service;
  }
  p.solution.detection = spec.name == FaultName::kNoop ? "no" : "yes";
  p.solution.services.insert(spec.targets.begin(), spec.targets.end());
  if (info.layer) p.solution.layer = *info.layer;
  if (info.fault_type) p.solution.fault_type = std::string(*info.fault_type);
  return p;
}

std::vector<Problem> StockProblems() {
  std::vector<Problem> out;
  for (const FaultInfo& info : FaultTable()) {
    std::vector<FaultSpec> instances = StockFaultInstances(info.name);
    for (int level : info.levels) {
      int index = 0;
      for (const FaultSpec& spec : instances) {
        // Noop pids already differ by app.
        index = info.name == FaultName::kNoop ? 1 : index + 1;
        out.push_back(MakeProblem(spec, static_cast<TaskLevel>(level), index));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> FindLeaks(const Problem& problem,
                                   const Information& info) {
  std::vector<std::string> leaks;
  const std::string text = info.Text();
  const std::string lower = ToLower(text);
  const FaultInfo& fi = problem.fault.info();
  if (problem.is_noop()) return leaks;
  if (lower.find(ToLower(FaultNameString(problem.fault.name))) !=
      std::string::npos) {
    leaks.push_back(StrCat("fault name ", FaultNameString(problem.fault.name)));
  }
  if (lower.find(fi.slug) != std::string::npos) {
    leaks.push_back(StrCat("fault slug ", fi.slug));
  }
  if (problem.task == TaskLevel::kLocalization) {
    for (const std::string& s : problem.solution.services) {
      if (ContainsToken(text, s)) leaks.push_back(StrCat("service ", s));
    }
  }
  if (problem.task == TaskLevel::kAnalysis && problem.solution.layer &&
      problem.solution.fault_type) {
    const std::string layer(SystemLayerName(*problem.solution.layer));
    const std::string& type = *problem.solution.fault_type;
    for (const std::string& form :
         {StrCat("\"", layer, "\", \"", type, "\""),
          StrCat(layer, "/", type), StrCat(layer, " ", type)}) {
      if (text.find(form) != std::string::npos) {
        leaks.push_back(StrCat("analysis answer ", form));
      }
    }
  }
  return leaks;
}

const ProblemRegistry& ProblemRegistry::Default() {
  static const ProblemRegistry* registry = [] {
    absl::StatusOr<ProblemRegistry> r = Build(StockProblems());
    if (!r.ok()) {
      std::fprintf(stderr, "stock problem pool is invalid: %s\n",
                   std::string(r.status().message()).c_str());
      std::abort();
    }
    return new ProblemRegistry(*std::move(r));
  }();
  return *registry;
}

absl::StatusOr<ProblemRegistry> ProblemRegistry::Build(
    std::vector<Problem> problems) {
  std::set<std::string> pids;
  for (const Problem& p : problems) {
    if (p.pid.empty()) return absl::InvalidArgumentError("empty pid");
    if (!pids.insert(p.pid).second) {
      return TaggedError(absl::StatusCode::kAlreadyExists, kDuplicateName,
                         p.pid);
    }
    const FaultInfo& info = p.fault.info();
    const int level = static_cast<int>(p.task);
    if (std::find(info.levels.begin(), info.levels.end(), level) ==
        info.levels.end()) {
      return absl::InvalidArgumentError(
          StrCat(p.pid, ": ", FaultNameString(p.fault.name),
                 " does not support task level ", level));
    }
    for (const std::string& s : p.solution.services) {
      if (std::find(p.fault.targets.begin(), p.fault.targets.end(), s) ==
          p.fault.targets.end()) {
        return absl::InvalidArgumentError(
            StrCat(p.pid, ": localization answer ", s,
                   " is not an injection target"));
      }
    }
    std::vector<std::string> leaks = FindLeaks(p, p.information());
    if (!leaks.empty()) {
      return absl::InvalidArgumentError(
          StrCat(p.pid, ": agent-facing information leaks ", leaks[0]));
    }
  }
  ProblemRegistry r;
  r.problems_ = std::move(problems);
  return r;
}

std::vector<const Problem*> ProblemRegistry::List(
    const ProblemFilter& filter) const {
  std::vector<const Problem*> out;
  for (const Problem& p : problems_) {
    if (filter.Matches(p)) out.push_back(&p);
  }
  return out;
}

absl::StatusOr<const Problem*> ProblemRegistry::Find(
    std::string_view pid) const {
  for (const Problem& p : problems_) {
    if (p.pid == pid) return &p;
  }
  return TaggedError(absl::StatusCode::kNotFound, kUnknownProblem, pid);
}

json ProblemRegistry::Catalog() const {
  json out = json::array();
  for (const Problem& p : problems_) {
    const FaultInfo& info = p.fault.info();
    out.push_back({{"pid", p.pid},
                   {"app", AppNameString(p.app)},
                   {"fault", FaultNameString(p.fault.name)},
                   {"fault_no", FaultNumber(p.fault.name)},
                   {"category", FaultCategoryName(info.category)},
                   {"level", static_cast<int>(p.task)},
                   {"task", TaskName(p.task)},
                   {"extensibility", ExtensibilityName(info.extensibility)}});
  }
  return out;
}

}  // namespace opsarena
