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

#include "opsarena/agents.h"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "opsarena/errors.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace {

constexpr size_t kMaxLineBytes = 16 << 20;

absl::Status ProtocolError(std::string_view detail) {
  return TaggedError(absl::StatusCode::kFailedPrecondition,
                     kAgentProtocolError, detail);
}

}  // namespace

ScriptedAgent::ScriptedAgent(std::vector<std::string> actions,
                             bool submit_when_done)
    : actions_(std::move(actions)), submit_when_done_(submit_when_done) {}

absl::Status ScriptedAgent::Init(const Information&) {
  next_ = 0;
  return absl::OkStatus();
}

absl::StatusOr<AgentTurn> ScriptedAgent::GetAction(const StateMessage&) {
  if (next_ < actions_.size()) return AgentTurn{actions_[next_++], {}};
  if (submit_when_done_ || actions_.empty()) return AgentTurn{"submit()", {}};
  return AgentTurn{actions_.back(), {}};
}

ExecAgent::ExecAgent(std::string command,
                     std::chrono::milliseconds step_timeout)
    : command_(std::move(command)), step_timeout_(step_timeout) {}

ExecAgent::~ExecAgent() { Stop(); }

absl::Status ExecAgent::Start() {
  if (pid_ > 0) return absl::OkStatus();
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    return absl::InternalError(StrCat("pipe: ", std::strerror(errno)));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    return absl::InternalError(StrCat("pipe: ", std::strerror(errno)));
  }
  // A dead agent must surface as EPIPE, not kill the arena.
  std::signal(SIGPIPE, SIG_IGN);
  pid_t pid = fork();
  if (pid < 0) {
    return absl::InternalError(StrCat("fork: ", std::strerror(errno)));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  HelloMessage hello;
  hello.role = "arena";
  if (absl::Status s = Send(hello); !s.ok()) return s;
  absl::StatusOr<Message> reply = Receive();
  if (!reply.ok()) return reply.status();
  const auto* agent_hello = std::get_if<HelloMessage>(&*reply);
  if (agent_hello == nullptr) {
    return ProtocolError(StrCat("expected a hello message, got ",
                                MessageType(*reply)));
  }
  name_ = agent_hello->name;
  return absl::OkStatus();
}

absl::Status ExecAgent::Send(const Message& message) {
  if (to_child_ < 0) return ProtocolError("agent is not running");
  std::string line = EncodeMessage(message) + "\n";
  size_t done = 0;
  while (done < line.size()) {
    ssize_t n = write(to_child_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      return ProtocolError(StrCat("agent closed its input (",
                                  std::strerror(errno), ")"));
    }
    done += static_cast<size_t>(n);
  }
  return absl::OkStatus();
}

absl::StatusOr<Message> ExecAgent::Receive() {
  if (from_child_ < 0) return ProtocolError("agent is not running");
  const auto deadline = std::chrono::steady_clock::now() + step_timeout_;
  while (true) {
    size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (Trim(line).empty()) continue;
      return DecodeMessage(line);
    }
    if (buffer_.size() > kMaxLineBytes) {
      return ProtocolError("agent message exceeds 16 MiB");
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      return ProtocolError(StrCat("agent did not answer within ",
                                  step_timeout_.count() / 1000.0, " s"));
    }
    pollfd pfd{from_child_, POLLIN, 0};
    int ready = poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return absl::InternalError(StrCat("poll: ", std::strerror(errno)));
    }
    if (ready == 0) continue;
    char chunk[65536];
    ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      return ProtocolError(StrCat("read: ", std::strerror(errno)));
    }
    if (n == 0) return ProtocolError("agent closed its output");
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

absl::Status ExecAgent::Init(const Information& info) {
  if (absl::Status s = Start(); !s.ok()) return s;
  return Send(InitMessage{info.description, info.instructions, info.api_docs});
}

absl::StatusOr<AgentTurn> ExecAgent::GetAction(const StateMessage& state) {
  if (absl::Status s = Send(state); !s.ok()) return s;
  absl::StatusOr<Message> reply = Receive();
  if (!reply.ok()) return reply.status();
  const auto* action = std::get_if<ActionMessage>(&*reply);
  if (action == nullptr) {
    return ProtocolError(StrCat("expected an action message, got ",
                                MessageType(*reply)));
  }
  return AgentTurn{action->action, action->usage};
}

void ExecAgent::OnResult(const nlohmann::json& report) {
  if (to_child_ >= 0) Send(ResultMessage{report}).IgnoreError();
  Stop();
}

void ExecAgent::Stop() {
  if (to_child_ >= 0) close(to_child_);
  to_child_ = -1;
  if (pid_ > 0) {
    // Give the agent a moment to exit on EOF before killing it.
    int status = 0;
    bool reaped = false;
    for (int i = 0; i < 100 && !reaped; ++i) {
      reaped = waitpid(pid_, &status, WNOHANG) == pid_;
      if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    if (!reaped) {
      kill(pid_, SIGKILL);
      waitpid(pid_, &status, 0);
    }
    pid_ = -1;
  }
  if (from_child_ >= 0) close(from_child_);
  from_child_ = -1;
  buffer_.clear();
}

HumanAgent::HumanAgent(std::istream& in, std::ostream& out)
    : in_(in), out_(out) {}

absl::Status HumanAgent::Init(const Information&) {
  out_ << "Actions are API calls such as get_logs(\"<namespace>\"); one per "
          "line.\n";
  return absl::OkStatus();
}

absl::StatusOr<AgentTurn> HumanAgent::GetAction(const StateMessage& state) {
  out_ << "\n" << state.observation << "\n\n[step " << state.step << "] > "
       << std::flush;
  std::string line;
  if (!std::getline(in_, line)) return ProtocolError("input closed");
  return AgentTurn{line, {}};
}

void HumanAgent::OnResult(const nlohmann::json& report) {
  out_ << "\n" << report.dump(2) << "\n";
}

}  // namespace opsarena
