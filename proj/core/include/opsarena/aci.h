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

// The agent-cloud interface: the APIs an agent may call, their docstrings,
// and the dispatcher that runs them against a simulated cluster.

#ifndef OPSARENA_ACI_H_
#define OPSARENA_ACI_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "opsarena/action.h"
#include "opsarena/shell.h"
#include "opsarena/telemetry.h"
#include "opsarena/topology.h"

namespace opsarena {

enum class ParamType { kString, kInt, kAny };

struct ApiParam {
  std::string name;
  ParamType type = ParamType::kString;
  std::optional<Value> default_value;
  std::string doc;
  // Keyword spelled another way, e.g. "ns" for "namespace".
  std::optional<std::string> alias;
};

struct ApiSpec {
  std::string name;
  std::vector<ApiParam> params;
  // Extra positional arguments are collected instead of rejected.
  bool variadic = false;
  std::string summary;
  std::string returns;
};

inline constexpr std::string_view kSubmitApi = "submit";

// In the order they are documented to agents.
const std::vector<ApiSpec>& AciApis();
const ApiSpec* FindApi(std::string_view name);

// Signature plus docstring for every API, generated from AciApis().
std::string FormatApiDocs();

struct BoundArgs {
  std::map<std::string, Value> named;
  // Positional arguments past the declared ones (variadic APIs only).
  std::vector<Value> rest;
};

// Matches positional and keyword arguments to parameters and fills in
// defaults. The error text is shown to the agent as-is.
absl::StatusOr<BoundArgs> BindArgs(const ApiSpec& api, const Call& call);

std::string UnknownApiMessage(std::string_view name);

// Runs every API except submit, which belongs to the session.
class AciDispatcher {
 public:
  // None of the pointers are owned.
  AciDispatcher(ClusterState* state, TelemetryApi* telemetry);

  std::string Dispatch(const Call& call);

 private:
  ClusterState* state_;
  TelemetryApi* telemetry_;
  ShellEmulator shell_;
};

}  // namespace opsarena

#endif  // OPSARENA_ACI_H_
