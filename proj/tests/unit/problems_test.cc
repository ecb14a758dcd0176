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

#include "opsarena/problems.h"

#include <map>
#include <string>

#include "gtest/gtest.h"
#include "test_util.h"

namespace opsarena {
namespace {

const ProblemRegistry& Pool() { return ProblemRegistry::Default(); }

TEST(ProblemPoolTest, CountsPerFault) {
  EXPECT_EQ(Pool().problems().size(), 50u);
  const int expected[kFaultCount] = {4, 12, 8, 8, 4, 4, 4, 2, 2, 2};
  for (int f = 1; f <= kFaultCount; ++f) {
    ProblemFilter filter;
    filter.fault_no = f;
    EXPECT_EQ(Pool().List(filter).size(), static_cast<size_t>(expected[f - 1]))
        << "fault " << f;
  }
}

TEST(ProblemPoolTest, TargetPortCoversThreeServicesAtEveryLevel) {
  auto filter = ParseProblemFilter("fault=2");
  ASSERT_TRUE(filter.ok());
  std::map<std::string, std::set<TaskLevel>> seen;
  for (const Problem* p : Pool().List(*filter)) {
    ASSERT_EQ(p->fault.targets.size(), 1u);
    EXPECT_EQ(p->app, AppName::kSocialNetwork);
    seen[p->fault.targets[0]].insert(p->task);
  }
  ASSERT_EQ(seen.size(), 3u);
  for (const char* s : {"user-service", "text-service", "post-storage-service"}) {
    EXPECT_EQ(seen[s].size(), 4u) << s;
  }
}

TEST(ProblemPoolTest, DetectionIncludesBothNoops) {
  auto filter = ParseProblemFilter("task=Detection");
  ASSERT_TRUE(filter.ok());
  std::vector<std::string> noops;
  for (const Problem* p : Pool().List(*filter)) {
    EXPECT_EQ(p->task, TaskLevel::kDetection);
    if (p->is_noop()) noops.push_back(p->pid);
  }
  EXPECT_EQ(noops, (std::vector<std::string>{"noop_hotel_res-detection-1",
                                             "noop_social_net-detection-1"}));
}

TEST(ProblemPoolTest, LevelsFollowFaultCategory) {
  for (const Problem& p : Pool().problems()) {
    const FaultInfo& info = p.fault.info();
    int level = static_cast<int>(p.task);
    switch (info.category) {
      case FaultCategory::kFunctional:
        EXPECT_GE(level, 1);
        EXPECT_LE(level, 4);
        break;
      case FaultCategory::kSymptomatic:
        EXPECT_LE(level, 2) << p.pid;
        break;
      case FaultCategory::kNone:
        EXPECT_EQ(level, 1) << p.pid;
        break;
    }
  }
  for (FaultName f : {FaultName::kAuthenticationMissing,
                      FaultName::kTargetPortMisconfig, FaultName::kRevokeAuth,
                      FaultName::kUserUnregistered, FaultName::kBuggyAppImage,
                      FaultName::kScalePod,
                      FaultName::kAssignNonExistentNode}) {
    std::set<TaskLevel> levels;
    for (const Problem& p : Pool().problems()) {
      if (p.fault.name == f) levels.insert(p.task);
    }
    EXPECT_EQ(levels.size(), 4u) << FaultNameString(f);
  }
}

TEST(ProblemPoolTest, OrderingIsFaultThenLevelThenIndex) {
  const auto& ps = Pool().problems();
  for (size_t i = 1; i < ps.size(); ++i) {
    auto key = [](const Problem& p) {
      return std::make_tuple(FaultNumber(p.fault.name),
                             static_cast<int>(p.task), p.index, p.pid);
    };
    EXPECT_LT(key(ps[i - 1]), key(ps[i]));
  }
  EXPECT_EQ(ps.front().pid, "auth_miss_mongodb_hotel_res-detection-1");
}

TEST(ProblemPoolTest, PidsAreUniqueAndStable) {
  std::set<std::string> pids;
  for (const Problem& p : Pool().problems()) {
    EXPECT_TRUE(pids.insert(p.pid).second) << p.pid;
  }
  auto rebuilt = ProblemRegistry::Build(Pool().problems());
  ASSERT_TRUE(rebuilt.ok());
  EXPECT_EQ(rebuilt->Catalog(), Pool().Catalog());
}

TEST(ProblemPoolTest, FindsExamplePids) {
  auto p = Pool().Find("misconfig_app_hotel_res-mitigation-1");
  ASSERT_TRUE(p.ok());
  EXPECT_EQ((*p)->task, TaskLevel::kMitigation);
  EXPECT_EQ((*p)->app, AppName::kHotelReservation);
  EXPECT_EQ((*p)->fault.name, FaultName::kBuggyAppImage);
  Information info = (*p)->information();
  EXPECT_NE(info.instructions.find("Mitigation"), std::string::npos);
  EXPECT_NE(info.description.find("HotelReservation"), std::string::npos);

  auto loc = Pool().Find("k8s_target_port_misconfig_social_net-localization-1");
  ASSERT_TRUE(loc.ok());
  EXPECT_EQ((*loc)->solution.services, std::set<std::string>{"user-service"});

  EXPECT_ERROR_TAG(Pool().Find("nope").status(), kUnknownProblem);
}

TEST(ProblemPoolTest, Oracles) {
  for (const Problem& p : Pool().problems()) {
    EXPECT_EQ(p.solution.detection, p.is_noop() ? "no" : "yes");
    EXPECT_EQ(p.solution.services,
              std::set<std::string>(p.fault.targets.begin(),
                                    p.fault.targets.end()));
    if (p.task == TaskLevel::kAnalysis) {
      EXPECT_TRUE(p.solution.layer.has_value());
      EXPECT_TRUE(p.solution.fault_type.has_value());
    }
  }
  auto p = Pool().Find("k8s_target_port_misconfig_social_net-analysis-1");
  ASSERT_TRUE(p.ok());
  EXPECT_EQ((*p)->solution.layer, SystemLayer::kVirtualization);
  EXPECT_EQ((*p)->solution.fault_type, "port_misconfig");
}

TEST(ProblemPoolTest, InformationDependsOnlyOnAppAndTask) {
  std::map<std::pair<AppName, TaskLevel>, Information> seen;
  for (const Problem& p : Pool().problems()) {
    Information info = p.information();
    auto [it, inserted] = seen.emplace(std::make_pair(p.app, p.task), info);
    if (!inserted) EXPECT_EQ(it->second, info) << p.pid;
    EXPECT_TRUE(FindLeaks(p, info).empty()) << p.pid;
    EXPECT_EQ(info.Text().find(p.pid), std::string::npos);
  }
}

TEST(ProblemPoolTest, LeakCheckRejectsGiveaways) {
  Problem p = **Pool().Find("k8s_target_port_misconfig_social_net-localization-1");
  Information info = p.information();
  info.description += " Hint: look at user-service.";
  EXPECT_FALSE(FindLeaks(p, info).empty());
  // Substrings of longer names are not answers.
  info = p.information();
  info.description += " compose-user-service-x";
  EXPECT_TRUE(FindLeaks(p, info).empty());

  Problem a = **Pool().Find("k8s_target_port_misconfig_social_net-analysis-1");
  info = a.information();
  info.instructions += " e.g. submit(\"virtualization\", \"port_misconfig\")";
  EXPECT_FALSE(FindLeaks(a, info).empty());
  info = a.information();
  info.description += " TargetPortMisconfig";
  EXPECT_FALSE(FindLeaks(a, info).empty());
}

TEST(ProblemPoolTest, BuildValidates) {
  std::vector<Problem> ps = Pool().problems();
  ps.push_back(ps.front());
  EXPECT_ERROR_TAG(ProblemRegistry::Build(ps).status(), kDuplicateName);

  Problem bad = Pool().problems().back();  // a Noop detection problem
  bad.pid = "noop_custom-mitigation-1";
  bad.task = TaskLevel::kMitigation;
  EXPECT_FALSE(ProblemRegistry::Build({bad}).ok());

  Problem wrong = **Pool().Find("scale_pod_zero_social_net-localization-1");
  wrong.pid = "custom";
  wrong.solution.services = {"media-service"};
  EXPECT_FALSE(ProblemRegistry::Build({wrong}).ok());
}

TEST(InstructionsTest, MentionFormats) {
  std::string d = InstructionsFor(TaskLevel::kDetection);
  EXPECT_NE(d.find("submit(\"yes\")"), std::string::npos);
  EXPECT_NE(d.find("submit(\"no\")"), std::string::npos);
  std::string l = InstructionsFor(TaskLevel::kLocalization);
  EXPECT_NE(l.find("up to 3"), std::string::npos);
  std::string a = InstructionsFor(TaskLevel::kAnalysis);
  for (std::string_view v : kLayerVocabulary) {
    EXPECT_NE(a.find(v), std::string::npos) << v;
  }
  for (std::string_view v : kFaultTypeVocabulary) {
    EXPECT_NE(a.find(v), std::string::npos) << v;
  }
  std::string m = InstructionsFor(TaskLevel::kMitigation);
  EXPECT_NE(m.find("break other services"), std::string::npos);
  EXPECT_NE(m.find("submit()"), std::string::npos);
}

TEST(ProblemFilterTest, Parses) {
  auto f = ParseProblemFilter("task=Analysis, app=SocialNetwork ,fault=ScalePod");
  ASSERT_TRUE(f.ok()) << f.status();
  EXPECT_EQ(f->task, TaskLevel::kAnalysis);
  EXPECT_EQ(f->app, AppName::kSocialNetwork);
  EXPECT_EQ(f->fault_no, 6);
  EXPECT_EQ(Pool().List(*f).size(), 1u);

  auto slug = ParseProblemFilter("app=hotel_res,task=4");
  ASSERT_TRUE(slug.ok());
  // Faults 1, 3, 4 and 5 on HotelReservation.
  EXPECT_EQ(Pool().List(*slug).size(), 6u);
  EXPECT_TRUE(ParseProblemFilter("").ok());
  for (const char* bad : {"task=Triage", "app=x", "fault=11", "fault=zzz",
                          "color=red", "task"}) {
    EXPECT_FALSE(ParseProblemFilter(bad).ok()) << bad;
  }
}

}  // namespace
}  // namespace opsarena
