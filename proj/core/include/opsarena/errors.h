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

#ifndef OPSARENA_ERRORS_H_
#define OPSARENA_ERRORS_H_

#include <string_view>

#include "absl/status/status.h"
#include "opsarena/strings.h"

namespace opsarena {

// Every named failure in the library is an absl::Status whose message starts
// with a stable tag ("UnknownApp: ..."), so callers can match on the tag
// without parsing free text.
inline constexpr std::string_view kUnknownApp = "UnknownApp";
inline constexpr std::string_view kMalformedTopology = "MalformedTopology";
inline constexpr std::string_view kUnknownEntryService = "UnknownEntryService";
inline constexpr std::string_view kMalformedTrace = "MalformedTrace";
inline constexpr std::string_view kUnknownTarget = "UnknownTarget";
inline constexpr std::string_view kAlreadyInjected = "AlreadyInjected";
inline constexpr std::string_view kNotInjected = "NotInjected";
inline constexpr std::string_view kUnknownProblem = "UnknownProblem";
inline constexpr std::string_view kSessionActive = "SessionActive";
inline constexpr std::string_view kDuplicateName = "DuplicateName";
inline constexpr std::string_view kAgentProtocolError = "AgentProtocolError";

template <typename... Args>
absl::Status TaggedError(absl::StatusCode code, std::string_view tag,
                         const Args&... args) {
  return absl::Status(code, StrCat(tag, ": ", args...));
}

// True when `status` carries `tag` as its leading error name.
inline bool HasErrorTag(const absl::Status& status, std::string_view tag) {
  std::string_view msg(status.message().data(), status.message().size());
  return !status.ok() && msg.size() > tag.size() &&
         msg.substr(0, tag.size()) == tag && msg[tag.size()] == ':';
}

}  // namespace opsarena

#endif  // OPSARENA_ERRORS_H_
