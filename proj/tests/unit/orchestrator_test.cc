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

#include "opsarena/orchestrator.h"

#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "opsarena/aci.h"
#include "opsarena/baselines.h"
#include "opsarena/health.h"
#include "test_util.h"

namespace opsarena {
namespace {

using ::opsarena::testing::ScratchDir;

constexpr char kMitigationPid[] = "misconfig_app_hotel_res-mitigation-1";
constexpr char kScalePodLocalization[] = "scale_pod_zero_social_net-localization-1";

const Problem& Find(std::string_view pid) {
  return **ProblemRegistry::Default().Find(pid);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

SessionConfig Config(const std::filesystem::path& out, uint64_t seed = 1) {
  SessionConfig c;
  c.seed = seed;
  c.out_dir = out;
  c.allow_test_agents = true;
  return c;
}

TEST(OrchestratorTest, RegisterAgentTwiceIsDuplicate) {
  Orchestrator orch;
  EXPECT_TRUE(orch.RegisterAgent("oracle", std::make_unique<OracleAgent>())
                  .ok());
  EXPECT_ERROR_TAG(
      orch.RegisterAgent("oracle", std::make_unique<OracleAgent>()),
      kDuplicateName);
}

TEST(OrchestratorTest, InitUnknownProblem) {
  Orchestrator orch;
  EXPECT_ERROR_TAG(orch.InitProblem("nope", Config(ScratchDir("out"))).status(),
                   kUnknownProblem);
}

TEST(OrchestratorTest, InitTwiceWithoutClosing) {
  Orchestrator orch;
  auto dir = ScratchDir("out");
  absl::StatusOr<Information> info = orch.InitProblem(kMitigationPid,
                                                      Config(dir));
  ASSERT_TRUE(info.ok()) << info.status();
  EXPECT_NE(info->instructions.find("Mitigation"), std::string::npos);
  EXPECT_NE(info->description.find("HotelReservation"), std::string::npos);
  EXPECT_ERROR_TAG(orch.InitProblem(kMitigationPid, Config(dir)).status(),
                   kSessionActive);
  orch.CloseProblem();
  EXPECT_TRUE(orch.InitProblem(kMitigationPid, Config(dir)).ok());
}

TEST(OrchestratorTest, FaultIsInPlaceAfterInit) {
  Orchestrator orch;
  ASSERT_TRUE(orch.InitProblem(kMitigationPid, Config(ScratchDir("o"))).ok());
  Environment* env = orch.environment();
  ASSERT_NE(env, nullptr);
  EXPECT_EQ(env->inject_ms, kDefaultWarmupS * 1000);
  EXPECT_TRUE(env->injection.has_value());
  env->kernel.AdvanceSeconds(60);
  EXPECT_FALSE(HealthCheck(env->state, env->store).healthy);
}

TEST(OrchestratorTest, OracleSolvesMitigationThroughRegistry) {
  Orchestrator orch;
  ASSERT_TRUE(orch.RegisterAgent("oracle", std::make_unique<OracleAgent>())
                  .ok());
  auto dir = ScratchDir("out");
  ASSERT_TRUE(orch.InitProblem(kMitigationPid, Config(dir)).ok());
  absl::StatusOr<SessionResult> r = orch.StartProblem("oracle", 10);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->report.status, SessionStatus::kSubmitted);
  EXPECT_TRUE(r->report.success()) << ToJson(r->report).dump(2);
  EXPECT_FALSE(orch.problem_active());
  EXPECT_TRUE(std::filesystem::exists(dir / kMitigationPid / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / kMitigationPid / "timing.json"));
  EXPECT_TRUE(std::filesystem::is_directory(dir / kMitigationPid / "telemetry"));
}

TEST(OrchestratorTest, StartWithoutInit) {
  Orchestrator orch;
  ASSERT_TRUE(orch.RegisterAgent("a", std::make_unique<AlwaysYesAgent>()).ok());
  EXPECT_EQ(orch.StartProblem("a").status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(SessionTest, NeverSubmittingHitsStepLimit) {
  ScriptedAgent agent({"get_logs(\"test-hotel-reservation\")"});
  absl::StatusOr<SessionResult> r =
      RunSession(Find(kMitigationPid), agent, Config(ScratchDir("o")), 10);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->trajectory.steps.size(), 10u);
  EXPECT_EQ(r->report.steps, 10);
  EXPECT_EQ(r->report.status, SessionStatus::kStepLimitReached);
  EXPECT_FALSE(r->report.success());
  EXPECT_EQ(r->report.grade.reason, "no_submission");
  EXPECT_FALSE(r->report.time_s.has_value());
}

TEST(SessionTest, ZeroStepsEndsImmediately) {
  ScriptedAgent agent({"submit()"});
  absl::StatusOr<SessionResult> r =
      RunSession(Find(kMitigationPid), agent, Config(ScratchDir("o")), 0);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->report.status, SessionStatus::kStepLimitReached);
  EXPECT_EQ(r->report.steps, 0);
}

TEST(SessionTest, ParseErrorConsumesStep) {
  ScriptedAgent agent({"get_logs(", "submit(\"yes\")"});
  absl::StatusOr<SessionResult> r = RunSession(
      Find("misconfig_app_hotel_res-detection-1"), agent,
      Config(ScratchDir("o")));
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r->trajectory.steps.size(), 2u);
  EXPECT_EQ(r->trajectory.steps[0].api, "invalid");
  EXPECT_NE(r->trajectory.steps[0].observation.find("could not parse"),
            std::string::npos);
  EXPECT_TRUE(r->report.success());
  EXPECT_EQ(r->report.steps, 2);
}

TEST(SessionTest, UnknownApiIsAnObservation) {
  ScriptedAgent agent({"restart_everything()"}, /*submit_when_done=*/true);
  absl::StatusOr<SessionResult> r = RunSession(
      Find(kMitigationPid), agent, Config(ScratchDir("o")), 3);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->trajectory.steps[0].observation,
            UnknownApiMessage("restart_everything"));
}

TEST(SessionTest, SubmitAtStepKTimesStride) {
  const Problem& p = Find("misconfig_app_hotel_res-detection-1");
  for (int k : {1, 5, 10}) {
    std::vector<std::string> actions(k - 1, "get_logs(\"test-hotel-reservation\")");
    actions.push_back("submit(\"yes\")");
    ScriptedAgent agent(actions);
    SessionConfig c = Config(ScratchDir(std::to_string(k)));
    c.step_stride_s = 20;
    absl::StatusOr<SessionResult> r = RunSession(p, agent, c, 10);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->report.steps, k);
    ASSERT_TRUE(r->report.time_s.has_value());
    EXPECT_EQ(*r->report.time_s, k * 20);
    EXPECT_EQ(r->trajectory.steps.back().sim_time_s, k * 20);
  }
}

TEST(SessionTest, TokensEstimatedFromPayloads) {
  ScriptedAgent agent({"submit(\"yes\")"});
  const Problem& p = Find("misconfig_app_hotel_res-detection-1");
  absl::StatusOr<SessionResult> r =
      RunSession(p, agent, Config(ScratchDir("o")));
  ASSERT_TRUE(r.ok());
  const std::string first = p.information().Text();
  EXPECT_EQ(r->report.input_tokens,
            static_cast<int64_t>((first.size() + 3) / 4));
  EXPECT_EQ(r->report.output_tokens, 4);  // 13 chars
}

TEST(SessionTest, TestAgentsNeedPermission) {
  if (TestAgentsAllowedByEnv()) GTEST_SKIP() << "allowed by environment";
  OracleAgent oracle;
  SessionConfig c = Config(ScratchDir("o"));
  c.allow_test_agents = false;
  absl::StatusOr<SessionResult> r = RunSession(Find(kMitigationPid), oracle, c);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->report.status, SessionStatus::kAborted);
  EXPECT_NE(r->report.abort_reason.find("--allow-test-agents"),
            std::string::npos);
  EXPECT_EQ(r->report.steps, 0);
}

class FailingAgent : public Agent {
 public:
  std::string spec() const override { return "failing"; }
  absl::Status Init(const Information&) override { return absl::OkStatus(); }
  absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) override {
    if (state.step == 1) return AgentTurn{"get_logs(\"x\")", {}};
    return absl::FailedPreconditionError("AgentProtocolError: bad line");
  }
};

TEST(SessionTest, AgentErrorAborts) {
  FailingAgent agent;
  absl::StatusOr<SessionResult> r =
      RunSession(Find(kMitigationPid), agent, Config(ScratchDir("o")));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->report.status, SessionStatus::kAborted);
  EXPECT_EQ(r->report.grade.reason, "aborted");
  EXPECT_EQ(r->report.steps, 1);
}

TEST(SessionTest, NoActionThenSubmitFailsMitigation) {
  ScriptedAgent agent({"submit()"});
  absl::StatusOr<SessionResult> r =
      RunSession(Find(kMitigationPid), agent, Config(ScratchDir("o")));
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->report.success());
  EXPECT_EQ(r->report.grade.reason, "unhealthy");
  ASSERT_TRUE(r->report.grade.health.has_value());
}

TEST(SessionTest, OracleLocalizationSucceeds) {
  OracleAgent oracle;
  absl::StatusOr<SessionResult> r = RunSession(
      Find(kScalePodLocalization), oracle, Config(ScratchDir("o")));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->report.status, SessionStatus::kSubmitted);
  EXPECT_TRUE(r->report.success());
  EXPECT_TRUE(*r->report.grade.acc_at_1);
}

TEST(SessionTest, TrajectoryFileRoundTripsAndReplays) {
  RandomAgent agent(5);
  const Problem& p = Find(kScalePodLocalization);
  auto dir = ScratchDir("o");
  absl::StatusOr<SessionResult> r = RunSession(p, agent, Config(dir, 5), 8);
  ASSERT_TRUE(r.ok());
  absl::StatusOr<Trajectory> back = ReadTrajectoryFile(r->trajectory_path);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->steps, r->trajectory.steps);
  EXPECT_EQ(back->header.pid, p.pid);
  EXPECT_EQ(back->header.seed, 5u);
  EXPECT_EQ(back->header.max_steps, 8);

  ScriptedAgent replay(back->actions());
  absl::StatusOr<SessionResult> again =
      RunSession(p, replay, Config(ScratchDir("replay"), 5), 8);
  ASSERT_TRUE(again.ok());
  ASSERT_EQ(again->trajectory.steps.size(), back->steps.size());
  for (size_t i = 0; i < back->steps.size(); ++i) {
    EXPECT_EQ(again->trajectory.steps[i].observation,
              back->steps[i].observation)
        << "step " << i + 1;
  }
}

TEST(SessionTest, ReportIsReproducible) {
  const Problem& p = Find(kScalePodLocalization);
  auto a = ScratchDir("a");
  auto b = ScratchDir("b");
  RandomAgent first(9);
  RandomAgent second(9);
  ASSERT_TRUE(RunSession(p, first, Config(a, 9), 10).ok());
  ClearWarmupCache();
  ASSERT_TRUE(RunSession(p, second, Config(b, 9), 10).ok());
  EXPECT_EQ(ReadFile(a / p.pid / "report.json"),
            ReadFile(b / p.pid / "report.json"));
  EXPECT_EQ(ReadFile(a / p.pid / "trajectory.jsonl"),
            ReadFile(b / p.pid / "trajectory.jsonl"));
  EXPECT_EQ(*DirectoryDigest(a / p.pid / "telemetry"),
            *DirectoryDigest(b / p.pid / "telemetry"));
}

TEST(WarmupTest, CachedDeployMatchesFresh) {
  const Problem& p = Find(kMitigationPid);
  ClearWarmupCache();
  auto fresh = DeployProblem(p, 3);
  auto cached = DeployProblem(p, 3);
  ASSERT_TRUE(fresh.ok() && cached.ok());
  (*fresh)->kernel.AdvanceSeconds(30);
  (*cached)->kernel.AdvanceSeconds(30);
  EXPECT_EQ((*fresh)->state, (*cached)->state);
  EXPECT_EQ((*fresh)->store.all_traces(), (*cached)->store.all_traces());
  EXPECT_EQ((*fresh)->store.all_logs(), (*cached)->store.all_logs());
}

TEST(ExportTest, ManifestRedaction) {
  const Problem& p = Find("network_loss_hotel_res-detection-1");
  auto dir = ScratchDir("x");
  ASSERT_TRUE(ExportProblem(p, 2, 30, dir / "r").ok());
  ASSERT_TRUE(ExportProblem(p, 2, 30, dir / "u", /*redacted=*/false).ok());
  nlohmann::json r = nlohmann::json::parse(ReadFile(dir / "r/manifest.json"));
  nlohmann::json u = nlohmann::json::parse(ReadFile(dir / "u/manifest.json"));
  EXPECT_FALSE(r.contains("fault_schedule"));
  ASSERT_TRUE(u.contains("fault_schedule"));
  EXPECT_EQ(u["fault_schedule"].size(), 1u);
  EXPECT_EQ(r["metric_buckets"], kDefaultWarmupS + 30);
}

}  // namespace
}  // namespace opsarena
