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

#include "opsarena/evaluator.h"

#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace opsarena {
namespace {

Value S(std::string s) { return Value{std::move(s)}; }
Value L(std::vector<std::string> items) {
  std::vector<Value> out;
  for (auto& s : items) out.push_back(S(std::move(s)));
  return Value{std::move(out)};
}

Solution YesOracle() {
  Solution s;
  s.detection = "yes";
  return s;
}

Solution UserServiceOracle() {
  Solution s;
  s.services = {"user-service"};
  return s;
}

Solution PortMisconfigOracle() {
  Solution s;
  s.layer = SystemLayer::kVirtualization;
  s.fault_type = "port_misconfig";
  return s;
}

TEST(EvalDetectionTest, AcceptedStrings) {
  struct Case {
    std::string answer;
    bool success;
    std::string reason;
  };
  // Only trimming and case are lenient.
  const std::vector<Case> cases = {
      {"yes", true, ""},          {"YES", true, ""},
      {"  Yes\n", true, ""},      {"no", false, "wrong_answer"},
      {"Yes.", false, "malformed"}, {"y", false, "malformed"},
      {"true", false, "malformed"}, {"", false, "malformed"},
      {"yes no", false, "malformed"},
  };
  for (const Case& c : cases) {
    Grade g = EvalDetection({S(c.answer)}, YesOracle());
    EXPECT_EQ(g.success, c.success) << "'" << c.answer << "'";
    EXPECT_EQ(g.reason, c.reason) << "'" << c.answer << "'";
  }
}

TEST(EvalDetectionTest, NoopScoresNo) {
  Solution noop;
  noop.detection = "no";
  EXPECT_TRUE(EvalDetection({S("no")}, noop).success);
  EXPECT_FALSE(EvalDetection({S("yes")}, noop).success);
}

TEST(EvalDetectionTest, WrongShapeIsMalformed) {
  EXPECT_EQ(EvalDetection({}, YesOracle()).reason, "malformed");
  EXPECT_EQ(EvalDetection({S("yes"), S("yes")}, YesOracle()).reason,
            "malformed");
  EXPECT_EQ(EvalDetection({Value{int64_t{1}}}, YesOracle()).reason,
            "malformed");
  EXPECT_EQ(EvalDetection({L({"yes"})}, YesOracle()).reason, "malformed");
}

TEST(EvalLocalizationTest, ExactTopOne) {
  Grade g = EvalLocalization({L({"user-service"})}, UserServiceOracle());
  EXPECT_TRUE(g.success);
  EXPECT_TRUE(*g.acc_at_1);
  EXPECT_TRUE(*g.acc_at_3);
  EXPECT_TRUE(EvalLocalization({S("user-service")}, UserServiceOracle())
                  .success);
}

TEST(EvalLocalizationTest, SecondPlaceCountsOnlyForTopThree) {
  Grade g = EvalLocalization({L({"a", "user-service", "b"})},
                             UserServiceOracle());
  EXPECT_FALSE(g.success);
  EXPECT_FALSE(*g.acc_at_1);
  EXPECT_TRUE(*g.acc_at_3);
  EXPECT_EQ(g.reason, "wrong_answer");
}

TEST(EvalLocalizationTest, EveryPosition) {
  for (int pos = 0; pos < 5; ++pos) {
    std::vector<std::string> list = {"a", "b", "c", "d", "e"};
    list[pos] = "user-service";
    Grade g = EvalLocalization({L(list)}, UserServiceOracle());
    EXPECT_EQ(*g.acc_at_1, pos == 0) << pos;
    EXPECT_EQ(*g.acc_at_3, pos < 3) << pos;
    EXPECT_TRUE(!*g.acc_at_1 || *g.acc_at_3);
  }
}

TEST(EvalLocalizationTest, EmptyAndMalformed) {
  EXPECT_EQ(EvalLocalization({L({})}, UserServiceOracle()).reason, "empty");
  EXPECT_EQ(EvalLocalization({}, UserServiceOracle()).reason, "empty");
  Grade g = EvalLocalization({Value{int64_t{3}}}, UserServiceOracle());
  EXPECT_EQ(g.reason, "malformed");
  EXPECT_FALSE(*g.acc_at_3);
}

TEST(EvalLocalizationTest, TrimsAndIgnoresCase) {
  EXPECT_TRUE(
      EvalLocalization({S(" User-Service ")}, UserServiceOracle()).success);
}

TEST(EvalAnalysisTest, BothLabelsRight) {
  Grade g = EvalAnalysis({S("virtualization"), S("port_misconfig")},
                         PortMisconfigOracle());
  EXPECT_TRUE(g.success);
  EXPECT_TRUE(*g.level_correct);
  EXPECT_TRUE(*g.type_correct);
  EXPECT_TRUE(EvalAnalysis({L({"Virtualization", "PORT_MISCONFIG"})},
                           PortMisconfigOracle())
                  .success);
}

TEST(EvalAnalysisTest, WrongLayer) {
  Grade g = EvalAnalysis({S("application"), S("port_misconfig")},
                         PortMisconfigOracle());
  EXPECT_FALSE(g.success);
  EXPECT_FALSE(*g.level_correct);
  EXPECT_TRUE(*g.type_correct);
  EXPECT_EQ(g.reason, "wrong_answer");
}

TEST(EvalAnalysisTest, UnknownLabel) {
  Grade g = EvalAnalysis({S("virtualization"), S("misconfiguration")},
                         PortMisconfigOracle());
  EXPECT_FALSE(g.success);
  EXPECT_TRUE(*g.level_correct);
  EXPECT_FALSE(*g.type_correct);
  EXPECT_EQ(g.reason, "unknown_label");
  EXPECT_EQ(EvalAnalysis({S("network"), S("port_misconfig")},
                         PortMisconfigOracle())
                .reason,
            "unknown_label");
}

TEST(EvalAnalysisTest, EveryVocabularyPair) {
  for (std::string_view layer : kLayerVocabulary) {
    for (std::string_view type : kFaultTypeVocabulary) {
      Grade g = EvalAnalysis({S(std::string(layer)), S(std::string(type))},
                             PortMisconfigOracle());
      bool want = layer == "virtualization" && type == "port_misconfig";
      EXPECT_EQ(g.success, want) << layer << "/" << type;
      EXPECT_NE(g.reason, "unknown_label");
    }
  }
}

TEST(EvalAnalysisTest, MissingFieldIsFalse) {
  Grade g = EvalAnalysis({S("virtualization")}, PortMisconfigOracle());
  EXPECT_FALSE(g.success);
  EXPECT_TRUE(*g.level_correct);
  EXPECT_FALSE(*g.type_correct);
  EXPECT_EQ(g.reason, "missing_field");
  EXPECT_EQ(EvalAnalysis({S("a"), S("b"), S("c")}, PortMisconfigOracle())
                .reason,
            "malformed");
}

TEST(EvalMitigationTest, FollowsHealth) {
  HealthVerdict ok;
  EXPECT_TRUE(EvalMitigation(ok).success);
  HealthVerdict bad;
  bad.healthy = false;
  bad.violations.push_back({"geo", "replicas", "0/1"});
  Grade g = EvalMitigation(bad);
  EXPECT_FALSE(g.success);
  EXPECT_EQ(g.reason, "unhealthy");
  ASSERT_TRUE(g.health.has_value());
  EXPECT_EQ(g.health->violations.size(), 1u);
}

TEST(EvalReportTest, JsonRoundTrip) {
  EvalReport r;
  r.pid = "p";
  r.agent = "builtin:oracle";
  r.task = TaskLevel::kLocalization;
  r.status = SessionStatus::kSubmitted;
  r.submission = "submit([\"x\"])";
  r.grade = EvalLocalization({L({"x"})}, UserServiceOracle());
  r.time_s = 60;
  r.steps = 2;
  r.max_steps = 10;
  r.step_stride_s = 30;
  r.seed = 4;
  r.input_tokens = 100;
  r.output_tokens = 5;
  r.trajectory_ref = "trajectory.jsonl";
  r.wall_time_s = 1.5;
  nlohmann::json doc = ToJson(r);
  EXPECT_FALSE(doc.contains("wall_time_s"));
  EXPECT_EQ(doc["time_metric"], "TTL");
  absl::StatusOr<EvalReport> back = EvalReportFromJson(doc);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(ToJson(*back), doc);
}

TEST(EvalReportTest, UnsubmittedHasNullTime) {
  EvalReport r;
  r.task = TaskLevel::kMitigation;
  r.status = SessionStatus::kStepLimitReached;
  r.grade = NoSubmissionGrade(r.task, r.status);
  nlohmann::json doc = ToJson(r);
  EXPECT_TRUE(doc["time_s"].is_null());
  EXPECT_EQ(doc["reason"], "no_submission");
  EXPECT_EQ(NoSubmissionGrade(TaskLevel::kDetection, SessionStatus::kAborted)
                .reason,
            "aborted");
}

EvalReport Report(std::string agent, TaskLevel task, bool success, int steps,
                  std::optional<int64_t> time_s) {
  EvalReport r;
  r.agent = std::move(agent);
  r.task = task;
  r.grade.success = success;
  r.steps = steps;
  r.time_s = time_s;
  r.input_tokens = 10 * steps;
  r.output_tokens = steps;
  return r;
}

TEST(AggregateTest, OneOfTwoIsFiftyPercent) {
  AggregateSummary s = Aggregate(
      {{Report("a", TaskLevel::kDetection, true, 2, 60), {}},
       {Report("a", TaskLevel::kDetection, false, 4, std::nullopt), {}}});
  ASSERT_EQ(s.tasks.size(), 1u);
  EXPECT_DOUBLE_EQ(s.tasks[0].accuracy_pct, 50.0);
  EXPECT_DOUBLE_EQ(s.tasks[0].mean_steps, 3.0);
  EXPECT_DOUBLE_EQ(*s.tasks[0].mean_time_s, 60.0);
  EXPECT_DOUBLE_EQ(s.tasks[0].mean_input_tokens, 30.0);
}

TEST(AggregateTest, OrderIndependent) {
  std::vector<ReportInput> in = {
      {Report("b", TaskLevel::kMitigation, true, 3, 90), {"submit()"}},
      {Report("a", TaskLevel::kDetection, true, 1, 30), {"submit(\"yes\")"}},
      {Report("a", TaskLevel::kAnalysis, false, 5, std::nullopt),
       {"get_logs(\"ns\")"}},
  };
  std::vector<ReportInput> reversed(in.rbegin(), in.rend());
  EXPECT_EQ(ToJson(Aggregate(in)), ToJson(Aggregate(reversed)));
  EXPECT_EQ(FormatAggregate(Aggregate(in)),
            FormatAggregate(Aggregate(reversed)));
}

TEST(ActionCountsTest, ThreeLogsAndSubmit) {
  ActionCounts c = CountActions({"get_logs(\"ns\")", "get_logs(\"ns\", \"x\")",
                                 "get_logs(ns=\"ns\")", "submit()"});
  EXPECT_EQ(c.total, 4);
  EXPECT_EQ(c.by_api["get_logs"], 3);
  EXPECT_DOUBLE_EQ(100.0 * c.by_api["get_logs"] / c.total, 75.0);
  std::string table = FormatAggregate(
      Aggregate({{Report("a", TaskLevel::kDetection, true, 4, 120),
                  {"get_logs(\"ns\")", "get_logs(\"ns\")", "get_logs(\"ns\")",
                   "submit()"}}}));
  EXPECT_NE(table.find("75.0%"), std::string::npos) << table;
}

TEST(ActionCountsTest, InvalidAndShellVerbs) {
  ActionCounts c = CountActions(
      {"get_logs(", "frobnicate()",
       "exec_shell(\"kubectl get pods -n ns\")",
       "exec_shell(\"kubectl -n ns describe pod x\")", "exec_shell(\"ls\")"});
  EXPECT_EQ(c.by_api["invalid"], 2);
  EXPECT_EQ(c.by_api["exec_shell"], 3);
  EXPECT_EQ(c.by_shell_verb["kubectl get"], 1);
  EXPECT_EQ(c.by_shell_verb["kubectl describe"], 1);
  EXPECT_EQ(c.by_shell_verb["ls"], 1);
}

TEST(SweepTest, MonotoneCheck) {
  std::vector<SweepRow> rows;
  for (int limit : kSweepLimits) {
    rows.push_back(SummarizeSweep(
        limit, {Report("a", TaskLevel::kDetection, limit >= 10, 1, 30),
                Report("a", TaskLevel::kDetection, true, 1, 30)}));
  }
  EXPECT_TRUE(AccuracyNondecreasing(rows));
  EXPECT_DOUBLE_EQ(rows[0].accuracy_pct, 50.0);
  EXPECT_DOUBLE_EQ(rows[3].accuracy_pct, 100.0);
  std::swap(rows[0], rows[3]);
  EXPECT_FALSE(AccuracyNondecreasing(rows));
  std::string table = FormatSweep("builtin:random", rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 6) << table;
  EXPECT_EQ(ToJson(rows).size(), 4u);
}

}  // namespace
}  // namespace opsarena
