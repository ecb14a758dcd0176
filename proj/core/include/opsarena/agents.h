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

// Agent endpoints. An agent sees the problem information once, then
// answers each state with one action string.

#ifndef OPSARENA_AGENTS_H_
#define OPSARENA_AGENTS_H_

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <sys/types.h>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/problems.h"
#include "opsarena/protocol.h"

namespace opsarena {

struct AgentTurn {
  std::string action;
  TokenUsage usage;
};

class Agent {
 public:
  virtual ~Agent() = default;

  // e.g. "builtin:random", "exec:python3 agent.py", "human".
  virtual std::string spec() const = 0;

  // Errors end the session as aborted.
  virtual absl::Status Init(const Information& info) = 0;
  virtual absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) = 0;
  virtual void OnResult(const nlohmann::json& /*report*/) {}

  // Test-only agents read the hidden problem through this hook. The
  // orchestrator refuses them unless test agents are allowed.
  virtual bool needs_backdoor() const { return false; }
  virtual void OnBackdoor(const Problem& /*problem*/) {}
};

// Replays a fixed list of actions. Once the list runs out it sends
// submit() if `submit_when_done` is set and repeats the last action
// otherwise.
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(std::vector<std::string> actions,
                         bool submit_when_done = false);

  std::string spec() const override { return "scripted"; }
  absl::Status Init(const Information& info) override;
  absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) override;

 private:
  std::vector<std::string> actions_;
  bool submit_when_done_;
  size_t next_ = 0;
};

// Runs `command` under /bin/sh and speaks the wire protocol over its
// stdin/stdout. stderr is inherited.
class ExecAgent : public Agent {
 public:
  static constexpr std::chrono::seconds kDefaultStepTimeout{120};

  explicit ExecAgent(std::string command,
                     std::chrono::milliseconds step_timeout =
                         kDefaultStepTimeout);
  ~ExecAgent() override;

  std::string spec() const override { return "exec:" + command_; }
  const std::string& agent_name() const { return name_; }

  // Starts the process and exchanges hellos. Idempotent.
  absl::Status Start();
  absl::Status Init(const Information& info) override;
  absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) override;
  void OnResult(const nlohmann::json& report) override;

 private:
  absl::Status Send(const Message& message);
  absl::StatusOr<Message> Receive();
  void Stop();

  std::string command_;
  std::chrono::milliseconds step_timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::string name_;
};

// A person typing actions. Observations go to `out`, actions come from
// `in`, one per line.
class HumanAgent : public Agent {
 public:
  HumanAgent(std::istream& in, std::ostream& out);

  std::string spec() const override { return "human"; }
  absl::Status Init(const Information& info) override;
  absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) override;
  void OnResult(const nlohmann::json& report) override;

 private:
  std::istream& in_;
  std::ostream& out_;
};

}  // namespace opsarena

#endif  // OPSARENA_AGENTS_H_
