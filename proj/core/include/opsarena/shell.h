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

// A restricted shell over the simulated cluster. Nothing here touches the
// host except cat/ls, which are confined to the telemetry export root.

#ifndef OPSARENA_SHELL_H_
#define OPSARENA_SHELL_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "opsarena/telemetry.h"
#include "opsarena/topology.h"

namespace opsarena {

// Every command the shell accepts, one usage line each.
const std::vector<std::string>& ShellUsage();

// Splits a command line into words. Single and double quotes group;
// backslash escapes the next character. Errors on unbalanced quotes.
absl::StatusOr<std::vector<std::string>> SplitCommandLine(
    std::string_view line);

// The verb an action-distribution report files a command under, e.g.
// "kubectl get", "mongo grant-role", "cat". Empty when unparsable.
std::string ShellVerb(std::string_view command);

class ShellEmulator {
 public:
  static constexpr size_t kMaxCatBytes = 64 * 1024;
  static constexpr std::string_view kRefusalPrefix =
      "Error: command refused by security policy";

  // Neither pointer is owned.
  ShellEmulator(ClusterState* state, const TelemetryApi* telemetry);

  // Never fails: errors come back as text, the way a terminal shows them.
  std::string Execute(std::string_view command);

 private:
  std::string Kubectl(const std::vector<std::string>& argv);
  std::string Mongo(const std::vector<std::string>& argv);
  std::string Cat(const std::vector<std::string>& argv);
  std::string Ls(const std::vector<std::string>& argv);

  ClusterState* state_;
  const TelemetryApi* telemetry_;
};

}  // namespace opsarena

#endif  // OPSARENA_SHELL_H_
