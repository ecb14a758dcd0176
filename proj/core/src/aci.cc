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

#include "opsarena/aci.h"

#include "absl/status/status.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace {

std::string_view TypeName(ParamType type) {
  switch (type) {
    case ParamType::kString:
      return "str";
    case ParamType::kInt:
      return "int";
    case ParamType::kAny:
      return "str | list[str]";
  }
  return "?";
}

bool TypeMatches(ParamType type, const Value& v) {
  switch (type) {
    case ParamType::kString:
      return v.is_string();
    case ParamType::kInt:
      return v.is_int();
    case ParamType::kAny:
      return true;
  }
  return false;
}

std::string ShellDoc() {
  std::string doc =
      "Execute a shell command against the cluster after applying the "
      "security policy. Pipes, redirection and command chaining are "
      "refused. Supported commands:";
  for (const std::string& line : ShellUsage()) StrAppend(&doc, "\n    ", line);
  return doc;
}

}  // namespace

const std::vector<ApiSpec>& AciApis() {
  static const auto* apis = new std::vector<ApiSpec>{
      {"get_logs",
       {{"namespace", ParamType::kString, std::nullopt, "The K8S namespace.",
         "ns"},
        {"service", ParamType::kString, Value{std::string()},
         "The service name; empty for every service.", std::nullopt}},
       false,
       "Collects the application logs of the last 120 seconds.",
       "The log lines, oldest first, or an error message."},
      {"get_metrics",
       {{"namespace", ParamType::kString, std::nullopt, "The K8S namespace.",
         "ns"},
        {"duration", ParamType::kInt, std::nullopt,
         "Seconds of metrics to collect, counted back from now.",
         std::nullopt}},
       false,
       "Collects per-service metrics (qps, error rate, latency, cpu, "
       "memory) in 1-second buckets.",
       "Path to the directory where the metrics were saved, one CSV per "
       "metric."},
      {"get_traces",
       {{"namespace", ParamType::kString, std::nullopt, "The K8S namespace.",
         "ns"},
        {"duration", ParamType::kInt, Value{int64_t{5}},
         "Seconds of traces to collect.", std::nullopt}},
       false,
       "Collects trace data of the services.",
       "Path to the directory where the traces were saved."},
      {"exec_shell",
       {{"command", ParamType::kString, std::nullopt,
         "The command line to run.", std::nullopt}},
       false,
       ShellDoc(),
       "The command output or an error message."},
      {std::string(kSubmitApi),
       {{"solution", ParamType::kAny, Value{std::string()},
         "The answer, in the format the task instructions ask for.",
         std::nullopt}},
       true,
       "Submits the solution and ends the session.",
       "Nothing; the session is evaluated."},
  };
  return *apis;
}

const ApiSpec* FindApi(std::string_view name) {
  for (const ApiSpec& api : AciApis()) {
    if (api.name == name) return &api;
  }
  return nullptr;
}

std::string FormatApiDocs() {
  std::string out;
  for (const ApiSpec& api : AciApis()) {
    std::string sig = api.name + "(";
    for (size_t i = 0; i < api.params.size(); ++i) {
      const ApiParam& p = api.params[i];
      if (i > 0) sig += ", ";
      StrAppend(&sig, p.name, ": ", TypeName(p.type));
      if (p.default_value) StrAppend(&sig, " = ", FormatLiteral(*p.default_value));
    }
    if (api.variadic) sig += ", ...";
    sig += ") -> str";
    StrAppend(&out, sig, "\n    ", api.summary, "\n");
    if (!api.params.empty()) {
      out += "    Args:\n";
      for (const ApiParam& p : api.params) {
        StrAppend(&out, "        ", p.name, " (", TypeName(p.type), "): ",
                  p.doc, "\n");
      }
    }
    StrAppend(&out, "    Returns:\n        ", api.returns, "\n\n");
  }
  return out;
}

std::string UnknownApiMessage(std::string_view name) {
  std::string out = StrCat("Error: unknown API '", name, "'. Available APIs: ");
  for (size_t i = 0; i < AciApis().size(); ++i) {
    if (i > 0) out += ", ";
    out += AciApis()[i].name;
  }
  return out + ".";
}

absl::StatusOr<BoundArgs> BindArgs(const ApiSpec& api, const Call& call) {
  BoundArgs out;
  size_t positional = 0;
  bool saw_keyword = false;
  for (const Arg& arg : call.args) {
    if (!arg.keyword) {
      if (saw_keyword) {
        return absl::InvalidArgumentError(StrCat(
            "Error: ", api.name,
            "() positional argument follows keyword argument"));
      }
      if (positional < api.params.size()) {
        out.named[api.params[positional].name] = arg.value;
      } else if (api.variadic) {
        out.rest.push_back(arg.value);
      } else {
        return absl::InvalidArgumentError(StrCat(
            "Error: ", api.name, "() takes at most ", api.params.size(),
            " arguments (", call.args.size(), " given)"));
      }
      ++positional;
      continue;
    }
    saw_keyword = true;
    const ApiParam* param = nullptr;
    for (const ApiParam& p : api.params) {
      if (p.name == *arg.keyword || p.alias == *arg.keyword) param = &p;
    }
    if (param == nullptr) {
      return absl::InvalidArgumentError(
          StrCat("Error: ", api.name, "() got an unexpected keyword argument '",
                 *arg.keyword, "'"));
    }
    if (out.named.count(param->name) > 0) {
      return absl::InvalidArgumentError(
          StrCat("Error: ", api.name, "() got multiple values for argument '",
                 param->name, "'"));
    }
    out.named[param->name] = arg.value;
  }
  for (const ApiParam& p : api.params) {
    auto it = out.named.find(p.name);
    if (it == out.named.end()) {
      if (!p.default_value) {
        return absl::InvalidArgumentError(
            StrCat("Error: ", api.name, "() missing required argument '",
                   p.name, "'"));
      }
      out.named[p.name] = *p.default_value;
      continue;
    }
    if (!TypeMatches(p.type, it->second)) {
      return absl::InvalidArgumentError(
          StrCat("Error: ", api.name, "() argument '", p.name, "' must be ",
                 TypeName(p.type) == "int" ? "an int" : "a str", ", got ",
                 FormatLiteral(it->second)));
    }
  }
  return out;
}

AciDispatcher::AciDispatcher(ClusterState* state, TelemetryApi* telemetry)
    : state_(state), telemetry_(telemetry), shell_(state, telemetry) {}

std::string AciDispatcher::Dispatch(const Call& call) {
  const ApiSpec* api = FindApi(call.name);
  if (api == nullptr) return UnknownApiMessage(call.name);
  if (api->name == kSubmitApi) {
    return "Error: submit() is handled by the session.";
  }
  absl::StatusOr<BoundArgs> bound = BindArgs(*api, call);
  if (!bound.ok()) return std::string(bound.status().message());
  const auto& a = bound->named;
  if (api->name == "get_logs") {
    const std::string& service = a.at("service").str();
    return telemetry_->GetLogs(
        a.at("namespace").str(),
        service.empty() ? std::nullopt
                        : std::optional<std::string_view>(service));
  }
  if (api->name == "get_metrics") {
    return telemetry_->GetMetrics(a.at("namespace").str(),
                                  a.at("duration").integer());
  }
  if (api->name == "get_traces") {
    return telemetry_->GetTraces(a.at("namespace").str(),
                                 a.at("duration").integer());
  }
  if (api->name == "exec_shell") {
    return shell_.Execute(a.at("command").str());
  }
  return UnknownApiMessage(call.name);
}

}  // namespace opsarena
