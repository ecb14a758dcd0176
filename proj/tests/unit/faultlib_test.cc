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

#include "opsarena/faultlib.h"

#include <set>

#include "gtest/gtest.h"
#include "opsarena/health.h"
#include "test_util.h"

namespace opsarena {
namespace {

using testing::Sim;

// A representative target for each fault.
FaultSpec SpecFor(FaultName name) {
  FaultSpec spec;
  spec.name = name;
  switch (name) {
    case FaultName::kAuthenticationMissing:
      spec.app = AppName::kHotelReservation;
      spec.targets = {"mongodb-geo"};
      break;
    case FaultName::kTargetPortMisconfig:
      spec.app = AppName::kSocialNetwork;
      spec.targets = {"user-service"};
      break;
    case FaultName::kRevokeAuth:
    case FaultName::kUserUnregistered:
      spec.app = AppName::kHotelReservation;
      spec.targets = {"mongodb-rate"};
      break;
    case FaultName::kBuggyAppImage:
      spec.app = AppName::kHotelReservation;
      spec.targets = {"geo"};
      break;
    case FaultName::kScalePod:
    case FaultName::kAssignNonExistentNode:
      spec.app = AppName::kSocialNetwork;
      spec.targets = {"user-service"};
      break;
    case FaultName::kNetworkLoss:
      spec.app = AppName::kHotelReservation;
      spec.targets = {"geo"};
      break;
    case FaultName::kPodFailure:
      spec.app = AppName::kHotelReservation;
      spec.targets = {"user"};
      break;
    case FaultName::kNoop:
      spec.app = AppName::kHotelReservation;
      break;
  }
  return spec;
}

std::vector<FaultName> AllFaults() {
  std::vector<FaultName> out;
  for (const FaultInfo& info : FaultTable()) out.push_back(info.name);
  return out;
}

bool IsFunctional(FaultName name) {
  return GetFaultInfo(name).category == FaultCategory::kFunctional;
}

TEST(FaultTableTest, MetadataMatchesPublishedTable) {
  ASSERT_EQ(FaultTable().size(), static_cast<size_t>(kFaultCount));
  for (int i = 1; i <= kFaultCount; ++i) {
    const FaultInfo& info = GetFaultInfo(static_cast<FaultName>(i));
    EXPECT_EQ(FaultNumber(info.name), i);
    EXPECT_EQ(ParseFaultName(FaultNameString(info.name)), info.name);
    EXPECT_EQ(ParseFaultName(info.slug), info.name);
  }
  using L = std::vector<int>;
  EXPECT_EQ(GetFaultInfo(FaultName::kRevokeAuth).levels, (L{1, 2, 3, 4}));
  EXPECT_EQ(GetFaultInfo(FaultName::kNetworkLoss).levels, (L{1, 2}));
  EXPECT_EQ(GetFaultInfo(FaultName::kPodFailure).levels, (L{1, 2}));
  EXPECT_EQ(GetFaultInfo(FaultName::kNoop).levels, (L{1}));

  EXPECT_EQ(GetFaultInfo(FaultName::kTargetPortMisconfig).layer,
            SystemLayer::kVirtualization);
  EXPECT_EQ(GetFaultInfo(FaultName::kRevokeAuth).layer,
            SystemLayer::kApplication);
  EXPECT_EQ(GetFaultInfo(FaultName::kAuthenticationMissing).layer,
            SystemLayer::kVirtualization);
  EXPECT_EQ(GetFaultInfo(FaultName::kBuggyAppImage).extensibility,
            Extensibility::kFixed);
  EXPECT_EQ(GetFaultInfo(FaultName::kUserUnregistered).extensibility,
            Extensibility::kPartial);
  EXPECT_EQ(GetFaultInfo(FaultName::kScalePod).extensibility,
            Extensibility::kFull);
}

TEST(FaultTableTest, OnlyFunctionalFaultsCarryRootCauseLabel) {
  std::set<std::string_view> types;
  for (const FaultInfo& info : FaultTable()) {
    if (info.category == FaultCategory::kFunctional) {
      ASSERT_TRUE(info.layer.has_value());
      ASSERT_TRUE(info.fault_type.has_value());
      EXPECT_NE(std::find(kFaultTypeVocabulary.begin(),
                          kFaultTypeVocabulary.end(), *info.fault_type),
                kFaultTypeVocabulary.end());
      EXPECT_TRUE(types.insert(*info.fault_type).second);
    } else {
      EXPECT_FALSE(info.layer.has_value());
      EXPECT_FALSE(info.fault_type.has_value());
    }
  }
  EXPECT_EQ(types.size(), kFaultTypeVocabulary.size());
}

TEST(FaultSemanticsTest, DocumentedEffects) {
  EXPECT_TRUE(FaultSemantics(SpecFor(FaultName::kNoop)).empty());

  auto pod = FaultSemantics(SpecFor(FaultName::kPodFailure));
  ASSERT_EQ(pod.size(), 1u);
  EXPECT_EQ(pod[0].kind, EffectKind::kPodPhaseOverride);
  EXPECT_EQ(pod[0].service, "user");
  EXPECT_EQ(pod[0].phase, PodPhase::kFailed);

  FaultSpec loss = SpecFor(FaultName::kNetworkLoss);
  loss.params["loss_rate"] = 0.3;
  auto rules = FaultSemantics(loss);
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules[0].kind, EffectKind::kFailProbabilistically);
  EXPECT_EQ(rules[0].probability, 0.3);

  auto scale = FaultSemantics(SpecFor(FaultName::kScalePod));
  EXPECT_EQ(scale[0].kind, EffectKind::kReplicaOverride);
  EXPECT_EQ(scale[0].replicas, 0);

  auto port = FaultSemantics(SpecFor(FaultName::kTargetPortMisconfig));
  EXPECT_EQ(port[0].kind, EffectKind::kRefuseConnection);

  auto revoke = FaultSemantics(SpecFor(FaultName::kRevokeAuth));
  EXPECT_EQ(revoke[0].kind, EffectKind::kAuthError);
  EXPECT_EQ(revoke[0].store, "mongodb-rate");
}

TEST(FaultInjectorTest, RevokeAuthDropsRoleAndGeoLogsAuthErrors) {
  Sim sim(AppName::kHotelReservation);
  FaultInjector injector;
  FaultSpec spec = SpecFor(FaultName::kRevokeAuth);
  spec.targets = {"mongodb-geo"};
  ASSERT_TRUE(injector.Inject(sim.state, spec).ok());
  const AuthStore* store = sim.state.FindAuthStore("mongodb-geo");
  ASSERT_NE(store, nullptr);
  EXPECT_FALSE(store->principals.contains("admin") &&
               store->principals.at("admin").contains("admin"));

  ASSERT_TRUE(sim.Start().ok());
  sim.kernel.AdvanceSeconds(5);
  TelemetryApi api(&sim.state, &sim.store,
                   testing::ScratchDir("export"));
  const std::string logs = api.GetLogs(sim.ns(), "geo");
  EXPECT_NE(logs.find("ERROR"), std::string::npos);
  EXPECT_NE(logs.find("authentication failed for admin"), std::string::npos);
  const std::string db_logs = api.GetLogs(sim.ns(), "mongodb-geo");
  EXPECT_NE(db_logs.find("not authorized on mongodb-geo"), std::string::npos);
}

TEST(FaultInjectorTest, UserUnregisteredUsesUserNotFoundTemplate) {
  Sim sim(AppName::kHotelReservation);
  FaultInjector injector;
  ASSERT_TRUE(
      injector.Inject(sim.state, SpecFor(FaultName::kUserUnregistered)).ok());
  ASSERT_TRUE(sim.Start().ok());
  sim.kernel.AdvanceSeconds(2);
  TelemetryApi api(&sim.state, &sim.store, testing::ScratchDir("export"));
  EXPECT_NE(api.GetLogs(sim.ns(), "mongodb-rate").find("user admin not found"),
            std::string::npos);
}

TEST(FaultInjectorTest, AuthenticationMissingErasesCredentialsAndRestarts) {
  Sim sim(AppName::kHotelReservation);
  FaultInjector injector;
  const std::string before = sim.state.PodsOf(sim.ns(), "geo")[0]->pod_name;
  ASSERT_TRUE(injector
                  .Inject(sim.state,
                          SpecFor(FaultName::kAuthenticationMissing))
                  .ok());
  EXPECT_FALSE(sim.state.FindConfigMap(sim.ns(), "mongodb-geo-conn")
                   ->contains("credentials"));
  EXPECT_NE(sim.state.PodsOf(sim.ns(), "geo")[0]->pod_name, before);
  const CallVerdict v =
      EvaluateCall(sim.state, sim.state.PodsOf(sim.ns(), "geo")[0],
                   *sim.state.FindService(sim.ns(), "mongodb-geo"));
  EXPECT_EQ(v.code, CallCode::kUnauthenticated);
  EXPECT_NE(v.callee_message.find("no credentials provided"),
            std::string::npos);
}

TEST(FaultInjectorTest, NoopOnlyAddsMarker) {
  Sim sim(AppName::kHotelReservation);
  const auto snapshot = CanonicalSnapshot(sim.state);
  FaultInjector injector;
  auto rec = injector.Inject(sim.state, SpecFor(FaultName::kNoop));
  ASSERT_TRUE(rec.ok());
  EXPECT_EQ(CanonicalSnapshot(sim.state), snapshot);
  ASSERT_EQ(sim.state.change_log().size(), 1u);
  EXPECT_EQ(sim.state.change_log()[0].action, "inject");
  EXPECT_TRUE(injector.Recover(sim.state, *rec).ok());
}

TEST(FaultInjectorTest, ScalePodZeroesReplicas) {
  Sim sim(AppName::kSocialNetwork);
  FaultInjector injector;
  FaultSpec spec = SpecFor(FaultName::kScalePod);
  spec.targets = {"text-service"};
  ASSERT_TRUE(injector.Inject(sim.state, spec).ok());
  EXPECT_EQ(sim.state.FindService(sim.ns(), "text-service")->desired_replicas,
            0);
  EXPECT_EQ(sim.state.RunningPods(sim.ns(), "text-service"), 0);
}

TEST(FaultInjectorTest, TargetPortRoundTrip) {
  Sim sim(AppName::kSocialNetwork);
  FaultInjector injector;
  auto rec =
      injector.Inject(sim.state, SpecFor(FaultName::kTargetPortMisconfig));
  ASSERT_TRUE(rec.ok());
  const ServiceSpec* svc = sim.state.FindService(sim.ns(), "user-service");
  EXPECT_EQ(svc->svc_target_port,
            svc->container_port + kMisconfiguredPortOffset);
  ASSERT_TRUE(injector.Recover(sim.state, *rec).ok());
  EXPECT_EQ(svc->svc_target_port, svc->container_port);
}

TEST(FaultInjectorTest, Errors) {
  Sim sim(AppName::kHotelReservation);
  FaultInjector injector;
  FaultSpec bad = SpecFor(FaultName::kPodFailure);
  bad.targets = {"no-such-service"};
  EXPECT_ERROR_TAG(injector.Inject(sim.state, bad).status(), kUnknownTarget);

  FaultSpec spec = SpecFor(FaultName::kRevokeAuth);
  auto rec = injector.Inject(sim.state, spec);
  ASSERT_TRUE(rec.ok());
  EXPECT_ERROR_TAG(injector.Inject(sim.state, spec).status(), kAlreadyInjected);
  ASSERT_TRUE(injector.Recover(sim.state, *rec).ok());
  EXPECT_ERROR_TAG(injector.Recover(sim.state, *rec), kNotInjected);
  // Re-injecting after recovery is allowed.
  EXPECT_TRUE(injector.Inject(sim.state, spec).ok());

  FaultSpec partial = SpecFor(FaultName::kRevokeAuth);
  partial.targets = {"geo"};
  EXPECT_FALSE(injector.Inject(sim.state, partial).ok());
  FaultSpec fixed = SpecFor(FaultName::kBuggyAppImage);
  fixed.targets = {"rate"};
  EXPECT_FALSE(injector.Inject(sim.state, fixed).ok());
  FaultSpec wrong_app = SpecFor(FaultName::kPodFailure);
  wrong_app.app = AppName::kSocialNetwork;
  EXPECT_FALSE(injector.Inject(sim.state, wrong_app).ok());
}

TEST(FaultInjectorTest, SymptomaticFaultsLeaveNoRootCause) {
  for (FaultName name : {FaultName::kNetworkLoss, FaultName::kPodFailure}) {
    Sim sim(AppName::kHotelReservation);
    const auto config = sim.state.config_maps();
    const auto auth = sim.state.auth_stores();
    std::map<std::string, std::string> images;
    for (const auto& [n, s] : sim.state.FindNamespace(sim.ns())->services) {
      images[n] = s.image_tag;
    }
    FaultInjector injector;
    ASSERT_TRUE(injector.Inject(sim.state, SpecFor(name)).ok());
    EXPECT_EQ(sim.state.config_maps(), config);
    EXPECT_EQ(sim.state.auth_stores(), auth);
    for (const auto& [n, s] : sim.state.FindNamespace(sim.ns())->services) {
      EXPECT_EQ(s.image_tag, images[n]);
    }
  }
}

class EveryFaultTest : public ::testing::TestWithParam<FaultName> {};

TEST_P(EveryFaultTest, InjectThenRecoverIsIdentity) {
  const FaultSpec spec = SpecFor(GetParam());
  Sim sim(spec.app);
  const auto before = CanonicalSnapshot(sim.state);
  FaultInjector injector;
  auto rec = injector.Inject(sim.state, spec);
  ASSERT_TRUE(rec.ok()) << rec.status();
  if (GetParam() != FaultName::kNoop) {
    EXPECT_NE(CanonicalSnapshot(sim.state), before);
  }
  ASSERT_TRUE(injector.Recover(sim.state, *rec).ok());
  EXPECT_EQ(CanonicalSnapshot(sim.state), before);
  EXPECT_EQ(sim.state.change_log().back().action, "recover");
  EXPECT_TRUE(injector.active().empty());
}

TEST_P(EveryFaultTest, HealthyAfterRecoverAndOneWindow) {
  const FaultSpec spec = SpecFor(GetParam());
  Sim sim(spec.app);
  ASSERT_TRUE(sim.Start().ok());
  sim.kernel.AdvanceSeconds(30);
  FaultInjector injector;
  auto rec = injector.Inject(sim.state, spec);
  ASSERT_TRUE(rec.ok());
  sim.kernel.AdvanceSeconds(30);
  if (IsFunctional(GetParam())) {
    EXPECT_FALSE(HealthCheck(sim.state, sim.store).healthy);
  }
  ASSERT_TRUE(injector.Recover(sim.state, *rec).ok());
  sim.kernel.AdvanceSeconds(60);
  HealthVerdict verdict = HealthCheck(sim.state, sim.store);
  EXPECT_TRUE(verdict.healthy) << ToJson(verdict).dump();
}

TEST_P(EveryFaultTest, FunctionalFaultsBreakRequests) {
  const FaultSpec spec = SpecFor(GetParam());
  Sim sim(spec.app);
  FaultInjector injector;
  ASSERT_TRUE(injector.Inject(sim.state, spec).ok());
  ASSERT_TRUE(sim.Start().ok());
  std::vector<RequestOutcome> outcomes;
  sim.kernel.AdvanceSeconds(5, &outcomes);
  size_t failed = 0;
  for (const RequestOutcome& o : outcomes) failed += !o.ok();
  if (GetParam() == FaultName::kNoop) {
    EXPECT_EQ(failed, 0u);
  } else {
    EXPECT_GT(failed, 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllFaults, EveryFaultTest, ::testing::ValuesIn(AllFaults()),
    [](const ::testing::TestParamInfo<FaultName>& info) {
      return std::string(FaultNameString(info.param));
    });

TEST(FaultScheduleTest, RoundTrip) {
  std::vector<ScheduledFault> schedule;
  FaultSpec loss = SpecFor(FaultName::kNetworkLoss);
  loss.params["loss_rate"] = 0.25;
  schedule.push_back({loss, 900});
  schedule.push_back({SpecFor(FaultName::kScalePod), 30});
  auto parsed = ParseFaultSchedule(ToJson(schedule));
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  ASSERT_EQ(parsed->size(), 2u);
  EXPECT_EQ((*parsed)[0].spec, loss);
  EXPECT_EQ((*parsed)[0].inject_at_s, 900);
  EXPECT_EQ((*parsed)[1].spec, SpecFor(FaultName::kScalePod));

  EXPECT_FALSE(ParseFaultSchedule(nlohmann::json::object()).ok());
  EXPECT_FALSE(
      ParseFaultSchedule(nlohmann::json::parse(R"([{"fault": "Bogus"}])"))
          .ok());
}

}  // namespace
}  // namespace opsarena
