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

// Agent wire protocol: one JSON object per line over the agent's stdio.
//
//   arena -> agent   {"type":"hello","version":1,"role":"arena"}
//   agent -> arena   {"type":"hello","version":1,"name":"my-agent"}
//   arena -> agent   {"type":"init","description":..,"instructions":..,
//                     "api_docs":..}
//   arena -> agent   {"type":"state","step":1,"observation":..}
//   agent -> arena   {"type":"action","action":"get_logs(\"ns\")",
//                     "usage":{"input_tokens":12,"output_tokens":3}}
//   ... one action per state ...
//   arena -> agent   {"type":"result","report":{..}}
//
// Unknown fields are ignored. Anything else that does not match is an
// AgentProtocolError.

#ifndef OPSARENA_PROTOCOL_H_
#define OPSARENA_PROTOCOL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace opsarena {

inline constexpr int kProtocolVersion = 1;

struct HelloMessage {
  int version = kProtocolVersion;
  std::string role;  // set by the arena
  std::string name;  // set by agents
  bool operator==(const HelloMessage&) const = default;
};

struct InitMessage {
  std::string description;
  std::string instructions;
  std::string api_docs;
  bool operator==(const InitMessage&) const = default;
};

struct StateMessage {
  int step = 0;
  std::string observation;
  bool operator==(const StateMessage&) const = default;
};

struct TokenUsage {
  std::optional<int64_t> input_tokens;
  std::optional<int64_t> output_tokens;
  bool operator==(const TokenUsage&) const = default;
};

struct ActionMessage {
  std::string action;
  TokenUsage usage;
  bool operator==(const ActionMessage&) const = default;
};

struct ResultMessage {
  nlohmann::json report;
  bool operator==(const ResultMessage&) const = default;
};

using Message = std::variant<HelloMessage, InitMessage, StateMessage,
                             ActionMessage, ResultMessage>;

std::string_view MessageType(const Message& message);

// One line, without the trailing newline.
std::string EncodeMessage(const Message& message);
// Errors: AgentProtocolError.
absl::StatusOr<Message> DecodeMessage(std::string_view line);

// ceil(chars / 4): the token estimate used when an agent reports none.
int64_t EstimateTokens(std::string_view text);

}  // namespace opsarena

#endif  // OPSARENA_PROTOCOL_H_
