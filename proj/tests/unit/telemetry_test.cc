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

#include "opsarena/telemetry.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gtest/gtest.h"
#include "nlohmann/json.hpp"
#include "opsarena/faultlib.h"
#include "opsarena/strings.h"
#include "test_util.h"

namespace opsarena {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::ScratchDir;
using testing::Sim;

size_t CountFiles(const fs::path& dir) {
  size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) ++n;
  }
  return n;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(TelemetryApiTest, UnknownServiceIsVerbatimError) {
  Sim sim(AppName::kSocialNetwork);
  TelemetryApi api(&sim.state, &sim.store, ScratchDir("export"));
  EXPECT_EQ(api.GetLogs("test-social-network", "Social Network"),
            "Error: Your service/namespace does not exist.");
  EXPECT_EQ(api.GetLogs("no-such-ns", std::nullopt),
            "Error: Your service/namespace does not exist.");
  EXPECT_EQ(api.GetTraces("no-such-ns"),
            "Error: Your service/namespace does not exist.");
  EXPECT_EQ(api.GetMetrics("no-such-ns", 10),
            "Error: Your service/namespace does not exist.");
}

TEST(TelemetryApiTest, FreshDeployHasNoLogs) {
  Sim sim(AppName::kHotelReservation);
  TelemetryApi api(&sim.state, &sim.store, ScratchDir("export"));
  EXPECT_EQ(api.GetLogs(sim.ns(), std::nullopt), "");
  EXPECT_EQ(api.GetLogs(sim.ns(), "geo"), "");
}

TEST(TelemetryApiTest, TracesCountIsRateTimesDuration) {
  Sim sim(AppName::kHotelReservation);
  ASSERT_TRUE(sim.Start(100).ok());
  sim.kernel.AdvanceSeconds(10);
  const fs::path root = ScratchDir("export");
  TelemetryApi api(&sim.state, &sim.store, root, "/telemetry");
  const std::string path = api.GetTraces(sim.ns(), 5);
  ASSERT_EQ(path.rfind("/telemetry/", 0), 0u) << path;
  auto dir = api.Resolve(path);
  ASSERT_TRUE(dir.has_value());
  EXPECT_EQ(CountFiles(*dir), 500u);
}

TEST(TelemetryApiTest, EmptyTraceWindowStillSucceeds) {
  Sim sim(AppName::kHotelReservation);
  sim.kernel.AdvanceSeconds(10);
  TelemetryApi api(&sim.state, &sim.store, ScratchDir("export"));
  const std::string path = api.GetTraces(sim.ns(), 5);
  auto dir = api.Resolve(path);
  ASSERT_TRUE(dir.has_value()) << path;
  ASSERT_TRUE(fs::is_directory(*dir));
  EXPECT_EQ(CountFiles(*dir), 0u);
}

TEST(TelemetryApiTest, MetricsCardinality) {
  Sim sim(AppName::kSocialNetwork);
  ASSERT_TRUE(sim.Start(100).ok());
  sim.kernel.AdvanceSeconds(30);
  TelemetryApi api(&sim.state, &sim.store, ScratchDir("export"));
  auto dir = api.Resolve(api.GetMetrics(sim.ns(), 10));
  ASSERT_TRUE(dir.has_value());
  EXPECT_EQ(CountFiles(*dir), static_cast<size_t>(kMetricKindCount));
  size_t points = 0;
  for (MetricKind kind : kAllMetricKinds) {
    auto table = ParseMetricTable(
        ReadAll(*dir / StrCat(MetricKindName(kind), ".csv")));
    ASSERT_TRUE(table.ok()) << table.status();
    EXPECT_EQ(table->buckets.size(), 10u);
    EXPECT_EQ(table->buckets.front(), 20);
    EXPECT_EQ(table->buckets.back(), 29);
    for (const auto& row : table->values) points += row.size();
  }
  EXPECT_EQ(points, 10u * 28u * 6u);
  // The store agrees with the files.
  EXPECT_EQ(sim.store.Metrics(20, 29).size(), 10u * 28u * 6u);
}

TEST(TelemetryApiTest, BadDurationIsRejected) {
  Sim sim(AppName::kHotelReservation);
  TelemetryApi api(&sim.state, &sim.store, ScratchDir("export"));
  EXPECT_EQ(api.GetMetrics(sim.ns(), 0).rfind("Error:", 0), 0u);
  EXPECT_EQ(api.GetTraces(sim.ns(), -1).rfind("Error:", 0), 0u);
}

TEST(TelemetryApiTest, RepeatedQueriesAreByteIdentical) {
  Sim sim(AppName::kHotelReservation);
  ASSERT_TRUE(sim.Start(100).ok());
  FaultInjector injector;
  FaultSpec spec;
  spec.name = FaultName::kRevokeAuth;
  spec.targets = {"mongodb-geo"};
  ASSERT_TRUE(injector.Inject(sim.state, spec).ok());
  sim.kernel.AdvanceSeconds(20);
  const fs::path root = ScratchDir("export");
  TelemetryApi api(&sim.state, &sim.store, root);
  EXPECT_EQ(api.GetLogs(sim.ns(), "geo"), api.GetLogs(sim.ns(), "geo"));
  auto a = api.Resolve(api.GetMetrics(sim.ns(), 10));
  auto b = api.Resolve(api.GetMetrics(sim.ns(), 10));
  ASSERT_TRUE(a && b);
  EXPECT_NE(*a, *b);
  EXPECT_EQ(*DirectoryDigest(*a), *DirectoryDigest(*b));
  auto c = api.Resolve(api.GetTraces(sim.ns(), 3));
  auto d = api.Resolve(api.GetTraces(sim.ns(), 3));
  EXPECT_EQ(*DirectoryDigest(*c), *DirectoryDigest(*d));
}

TEST(TelemetryApiTest, ResolveStaysInsideExportRoot) {
  Sim sim(AppName::kHotelReservation);
  const fs::path root = ScratchDir("export");
  TelemetryApi api(&sim.state, &sim.store, root, "/telemetry");
  EXPECT_EQ(api.Resolve("/telemetry"), root);
  EXPECT_EQ(api.Resolve("/telemetry/traces_0001/a.json"),
            root / "traces_0001/a.json");
  EXPECT_FALSE(api.Resolve("/telemetry/../etc/passwd").has_value());
  EXPECT_FALSE(api.Resolve("/etc/passwd").has_value());
  EXPECT_FALSE(api.Resolve("/telemetryx/a").has_value());
}

TEST(TelemetryTest, LogLinesAreCappedWithMarker) {
  std::vector<LogEntry> entries;
  for (int i = 1; i <= 5; ++i) {
    entries.push_back(LogEntry{i * 1000, "ns", "svc", "svc-0",
                               LogLevel::kError, StrCat("line ", i)});
  }
  std::vector<const LogEntry*> ptrs;
  for (const LogEntry& e : entries) ptrs.push_back(&e);
  const std::string all = FormatLogLines(ptrs, 10);
  EXPECT_EQ(std::count(all.begin(), all.end(), '\n'), 5);
  const std::string capped = FormatLogLines(ptrs, 2);
  std::vector<std::string_view> lines = Split(capped, '\n', true);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].substr(0, kTruncationMarkerPrefix.size()),
            kTruncationMarkerPrefix);
  EXPECT_NE(lines[1].find("line 4"), std::string_view::npos);
  EXPECT_NE(lines[2].find("line 5"), std::string_view::npos);
  EXPECT_NE(lines[2].find("ERROR"), std::string_view::npos);
}

TEST(TelemetryTest, TraceSpansFormTreeWithNestedIntervals) {
  Sim sim(AppName::kSocialNetwork);
  ASSERT_TRUE(sim.Start(100).ok());
  sim.kernel.AdvanceSeconds(5);
  ASSERT_EQ(sim.store.all_traces().size(), 500u);
  for (const Trace& t : sim.store.all_traces()) {
    ASSERT_FALSE(t.spans.empty());
    EXPECT_FALSE(t.spans[0].parent_span_id.has_value());
    EXPECT_EQ(t.spans[0].service, "nginx-web-server");
    std::map<uint32_t, const TraceSpan*> by_id;
    for (const TraceSpan& s : t.spans) by_id[s.span_id] = &s;
    EXPECT_EQ(by_id.size(), t.spans.size());
    for (const TraceSpan& s : t.spans) {
      if (!s.parent_span_id) continue;
      ASSERT_TRUE(by_id.contains(*s.parent_span_id));
      const TraceSpan& p = *by_id[*s.parent_span_id];
      EXPECT_GE(s.start_us, p.start_us);
      EXPECT_LE(s.start_us + s.duration_us, p.start_us + p.duration_us);
      // Span tree shape follows the dependency graph.
      const ServiceSpec* parent = sim.state.FindService(sim.ns(), p.service);
      EXPECT_NE(std::find(parent->dependencies.begin(),
                          parent->dependencies.end(), s.service),
                parent->dependencies.end());
    }
  }
}

TEST(TelemetryTest, QpsConservation) {
  Sim sim(AppName::kHotelReservation);
  ASSERT_TRUE(sim.Start(100).ok());
  sim.kernel.AdvanceSeconds(10);
  ASSERT_EQ(sim.store.finalized_buckets(), 10);
  for (const MetricPoint& p : sim.store.Metrics(0, 9)) {
    if (p.service == "frontend" && p.metric == MetricKind::kQps) {
      EXPECT_EQ(p.value, 100.0) << "bucket " << p.t_s;
      EXPECT_EQ(sim.store.RequestCount(p.t_s * 1000, (p.t_s + 1) * 1000),
                100u);
    }
    if (p.metric == MetricKind::kErrorRate) EXPECT_EQ(p.value, 0.0);
  }
}

TEST(TelemetryTest, RetentionEvictsOldTraces) {
  RetentionPolicy retention;
  retention.trace_retention_ms = 10'000;
  retention.log_retention_ms = 10'000;
  Sim sim(AppName::kHotelReservation, 7, retention);
  ASSERT_TRUE(sim.Start(10).ok());
  sim.kernel.AdvanceSeconds(60);
  EXPECT_EQ(sim.store.all_traces().size(), 100u);
  EXPECT_EQ(sim.store.all_traces().front().start_us() / 1000, 50'100);
  EXPECT_EQ(sim.store.finalized_buckets(), 60);
}

TEST(TelemetryTest, MetricTableRoundTrip) {
  const std::string csv = "t_s,a,b\n0,1.0000,0.5000\n1,2.0000,0.2500\n";
  auto table = ParseMetricTable(csv);
  ASSERT_TRUE(table.ok());
  EXPECT_EQ(table->services, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(table->values[1][1], 0.25);
  std::vector<MetricPoint> points;
  for (size_t r = 0; r < table->buckets.size(); ++r) {
    for (size_t c = 0; c < table->services.size(); ++c) {
      points.push_back(MetricPoint{table->buckets[r], table->services[c],
                                   MetricKind::kQps, table->values[r][c]});
    }
  }
  EXPECT_EQ(FormatMetricTable(points, table->services, MetricKind::kQps), csv);
  EXPECT_FALSE(ParseMetricTable("x,a\n0,1\n").ok());
  EXPECT_FALSE(ParseMetricTable("t_s,a\n0,1,2\n").ok());
  EXPECT_FALSE(ParseMetricTable("t_s,a\n0,abc\n").ok());
}

DatasetManifest Manifest() {
  DatasetManifest m;
  m.problem_id = "test";
  m.app = "HotelReservation";
  m.ns = "test-hotel-reservation";
  m.seed = 7;
  m.step_stride_s = 30;
  return m;
}

std::string ExportRun(const fs::path& dir, FaultName fault) {
  Sim sim(AppName::kHotelReservation, 11);
  EXPECT_TRUE(sim.Start(50).ok());
  sim.kernel.AdvanceSeconds(20);
  if (fault != FaultName::kNoop) {
    FaultInjector injector;
    FaultSpec spec;
    spec.name = fault;
    spec.targets = {"user"};
    EXPECT_TRUE(injector.Inject(sim.state, spec).ok());
  }
  sim.kernel.AdvanceSeconds(20);
  DatasetManifest m = Manifest();
  m.end_ms = sim.kernel.now_ms();
  EXPECT_TRUE(ExportDataset(dir, sim.store, m).ok());
  return *DirectoryDigest(dir);
}

TEST(ExportTest, SameSeedSameDigest) {
  const fs::path root = ScratchDir("runs");
  const std::string a = ExportRun(root / "a", FaultName::kNetworkLoss);
  const std::string b = ExportRun(root / "b", FaultName::kNetworkLoss);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 32u);
  const std::string c = ExportRun(root / "c", FaultName::kPodFailure);
  EXPECT_NE(a, c);
}

TEST(ExportTest, NoopExportHasZeroErrorRate) {
  const fs::path dir = ScratchDir("noop");
  ExportRun(dir, FaultName::kNoop);
  auto table = ParseMetricTable(ReadAll(dir / "metrics" / "error_rate.csv"));
  ASSERT_TRUE(table.ok());
  EXPECT_EQ(table->buckets.size(), 40u);
  for (const auto& row : table->values) {
    for (double v : row) EXPECT_EQ(v, 0.0);
  }
  json manifest = json::parse(ReadAll(dir / "manifest.json"));
  EXPECT_EQ(manifest["fault_schedule_redacted"], true);
  EXPECT_FALSE(manifest.contains("fault_schedule"));
}

TEST(ExportTest, PodFailureRaisesErrorRateOfDependents) {
  const fs::path dir = ScratchDir("podfail");
  ExportRun(dir, FaultName::kPodFailure);
  auto table = ParseMetricTable(ReadAll(dir / "metrics" / "error_rate.csv"));
  ASSERT_TRUE(table.ok());
  // Oracle: services that reach "user" over dependency edges.
  Sim sim(AppName::kHotelReservation);
  std::set<std::string> upstream;
  std::vector<std::string> frontier = {"user"};
  while (!frontier.empty()) {
    std::string s = frontier.back();
    frontier.pop_back();
    for (const std::string& d : sim.state.Dependents(sim.ns(), s)) {
      if (upstream.insert(d).second) frontier.push_back(d);
    }
  }
  ASSERT_FALSE(upstream.empty());
  for (size_t c = 0; c < table->services.size(); ++c) {
    const bool dependent = upstream.contains(table->services[c]);
    for (size_t r = 0; r < table->buckets.size(); ++r) {
      const double v = table->values[r][c];
      if (table->buckets[r] < 20) {
        EXPECT_EQ(v, 0.0);
      } else if (dependent) {
        EXPECT_GT(v, 0.0) << table->services[c] << " @" << table->buckets[r];
      } else if (table->services[c] != "user") {
        EXPECT_EQ(v, 0.0) << table->services[c];
      }
    }
  }
}

TEST(ExportTest, TelemetryNeverNamesTheFault) {
  const fs::path dir = ScratchDir("leak");
  ExportRun(dir, FaultName::kNetworkLoss);
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string text = ToLower(ReadAll(e.path()));
    for (const FaultInfo& info : FaultTable()) {
      EXPECT_EQ(text.find(ToLower(FaultNameString(info.name))),
                std::string::npos)
          << e.path();
      EXPECT_EQ(text.find(info.slug), std::string::npos) << e.path();
    }
  }
}

}  // namespace
}  // namespace opsarena
