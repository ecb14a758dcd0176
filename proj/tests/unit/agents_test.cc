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

#include <sstream>

#include "gtest/gtest.h"
#include "opsarena/orchestrator.h"
#include "test_util.h"

namespace opsarena {
namespace {

using ::opsarena::testing::ScratchDir;
using namespace std::chrono_literals;

// A protocol-speaking stub in plain sh: says hello, then answers every
// state with the given action until stdin closes.
std::string StubAgent(std::string_view action) {
  std::string escaped;
  for (char c : action) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c;
  }
  return StrCat(
      "read hello; echo '{\"type\":\"hello\",\"version\":1,\"name\":\"stub\"}';"
      " while read line; do case \"$line\" in *'\"type\":\"state\"'*)"
      " printf '%s\\n' '{\"type\":\"action\",\"action\":\"",
      escaped, "\"}';; esac; done");
}

const Problem& Noop() {
  return **ProblemRegistry::Default().Find("noop_hotel_res-detection-1");
}

TEST(ScriptedAgentTest, RepeatsOrSubmits) {
  ScriptedAgent repeat({"a", "b"});
  ASSERT_TRUE(repeat.Init({}).ok());
  EXPECT_EQ(repeat.GetAction({1, ""})->action, "a");
  EXPECT_EQ(repeat.GetAction({2, ""})->action, "b");
  EXPECT_EQ(repeat.GetAction({3, ""})->action, "b");
  ScriptedAgent submit({"a"}, true);
  ASSERT_TRUE(submit.Init({}).ok());
  submit.GetAction({1, ""}).IgnoreError();
  EXPECT_EQ(submit.GetAction({2, ""})->action, "submit()");
}

TEST(ExecAgentTest, HandshakeAndAction) {
  ExecAgent agent(StubAgent("submit(\"no\")"), 5s);
  ASSERT_TRUE(agent.Start().ok());
  EXPECT_EQ(agent.agent_name(), "stub");
  ASSERT_TRUE(agent.Init({"d", "i", "a"}).ok());
  absl::StatusOr<AgentTurn> turn = agent.GetAction({1, "hello"});
  ASSERT_TRUE(turn.ok()) << turn.status();
  EXPECT_EQ(turn->action, "submit(\"no\")");
}

TEST(ExecAgentTest, StubSolvesNoop) {
  ExecAgent agent(StubAgent("submit(\"no\")"), 5s);
  SessionConfig c;
  c.out_dir = ScratchDir("o");
  absl::StatusOr<SessionResult> r = RunSession(Noop(), agent, c);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_TRUE(r->report.success());
  EXPECT_EQ(r->report.agent, agent.spec());
}

TEST(ExecAgentTest, GarbageIsProtocolError) {
  ExecAgent agent("read hello; echo 'not json'", 5s);
  absl::Status s = agent.Start();
  EXPECT_ERROR_TAG(s, kAgentProtocolError);
}

TEST(ExecAgentTest, ExitIsProtocolError) {
  ExecAgent agent("exit 0", 5s);
  absl::Status s = agent.Start();
  EXPECT_ERROR_TAG(s, kAgentProtocolError);
  EXPECT_NE(std::string(s.message()).find("closed"), std::string::npos);
}

TEST(ExecAgentTest, SilenceTimesOut) {
  ExecAgent agent("read hello; sleep 5", 200ms);
  absl::Status s = agent.Start();
  EXPECT_ERROR_TAG(s, kAgentProtocolError);
  EXPECT_NE(std::string(s.message()).find("did not answer"), std::string::npos);
}

TEST(ExecAgentTest, MidSessionFailureAborts) {
  // Answers one state, then sends a hello where an action belongs.
  ExecAgent agent(
      "read h; echo '{\"type\":\"hello\",\"version\":1}'; read i; read s;"
      " echo '{\"type\":\"action\",\"action\":\"get_logs(\\\"x\\\")\"}';"
      " read s; echo '{\"type\":\"hello\",\"version\":1}'; sleep 1",
      5s);
  SessionConfig c;
  c.out_dir = ScratchDir("o");
  absl::StatusOr<SessionResult> r = RunSession(Noop(), agent, c);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->report.status, SessionStatus::kAborted);
  EXPECT_EQ(r->report.steps, 1);
  EXPECT_NE(r->report.abort_reason.find("expected an action"),
            std::string::npos);
}

TEST(HumanAgentTest, ReadsLinesAndEndsOnEof) {
  std::istringstream in("get_logs(\"ns\")\n");
  std::ostringstream out;
  HumanAgent human(in, out);
  ASSERT_TRUE(human.Init({}).ok());
  EXPECT_EQ(human.GetAction({1, "first obs"})->action, "get_logs(\"ns\")");
  EXPECT_NE(out.str().find("[step 1] > "), std::string::npos);
  EXPECT_NE(out.str().find("first obs"), std::string::npos);
  EXPECT_ERROR_TAG(human.GetAction({2, "x"}).status(), kAgentProtocolError);
}

}  // namespace
}  // namespace opsarena
