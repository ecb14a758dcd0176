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

#ifndef OPSARENA_TELEMETRY_H_
#define OPSARENA_TELEMETRY_H_

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/topology.h"

namespace opsarena {

enum class LogLevel { kInfo, kWarn, kError };

std::string_view LogLevelName(LogLevel level);

struct LogEntry {
  int64_t t_ms = 0;
  std::string ns;
  std::string service;
  std::string pod;
  LogLevel level = LogLevel::kInfo;
  std::string message;

  bool operator==(const LogEntry&) const = default;
};

enum class MetricKind {
  kQps,
  kErrorRate,
  kLatencyP50Ms,
  kLatencyP99Ms,
  kCpuPct,
  kMemPct,
};

inline constexpr int kMetricKindCount = 6;
inline constexpr std::array<MetricKind, kMetricKindCount> kAllMetricKinds = {
    MetricKind::kQps,          MetricKind::kErrorRate,
    MetricKind::kLatencyP50Ms, MetricKind::kLatencyP99Ms,
    MetricKind::kCpuPct,       MetricKind::kMemPct,
};

std::string_view MetricKindName(MetricKind kind);

// One value per (bucket, service, metric). Bucket `t_s` covers the
// half-open sim-time interval (t_s * 1000, (t_s + 1) * 1000] in ms.
struct MetricPoint {
  int64_t t_s = 0;
  std::string service;
  MetricKind metric = MetricKind::kQps;
  double value = 0.0;
};

struct TraceSpan {
  uint32_t span_id = 0;
  std::optional<uint32_t> parent_span_id;
  std::string service;
  std::string operation;
  int64_t start_us = 0;
  int64_t duration_us = 0;
  bool ok = true;

  bool operator==(const TraceSpan&) const = default;
};

struct Trace {
  uint64_t trace_id = 0;
  std::string ns;
  std::vector<TraceSpan> spans;  // spans[0] is the root

  int64_t start_us() const { return spans.empty() ? 0 : spans[0].start_us; }
  bool operator==(const Trace&) const = default;
};

nlohmann::json ToJson(const LogEntry& entry);
nlohmann::json ToJson(const Trace& trace);

// Bucket index for a sim-time in ms (see MetricPoint).
constexpr int64_t BucketOf(int64_t t_ms) {
  return t_ms <= 0 ? 0 : (t_ms - 1) / 1000;
}

struct RetentionPolicy {
  // Traces and logs older than these horizons (relative to the store's
  // clock) are evicted. Metrics are kept for the whole run.
  int64_t trace_retention_ms = 60'000;
  int64_t log_retention_ms = 300'000;
};

// Append-only store of the telemetry one application emits. Single writer
// (the simulation kernel); readers only see finalized data.
class TelemetryStore {
 public:
  TelemetryStore() = default;
  explicit TelemetryStore(RetentionPolicy retention) : retention_(retention) {}

  // Declares the namespace and its services; metrics rows follow this order.
  void Bind(const ClusterState& state);

  const std::string& ns() const { return ns_; }
  const std::vector<std::string>& services() const { return services_; }
  const RetentionPolicy& retention() const { return retention_; }

  void AddTrace(Trace trace);
  void AddLog(LogEntry entry);
  // One call observed at `service`, attributed to the bucket of `t_ms`.
  void RecordCall(int service_index, int64_t t_ms, int64_t duration_us,
                  int64_t self_us, bool ok);

  // Finalizes every bucket that ends at or before `now_ms` using the pod
  // counts in `state`, then evicts expired traces and logs.
  void Advance(int64_t now_ms, const ClusterState& state);
  int64_t now_ms() const { return now_ms_; }

  // Whether traces/logs for a request arriving at `t_ms` would survive
  // retention once the store clock reaches `horizon_ms`.
  bool RetainsTraceAt(int64_t t_ms, int64_t horizon_ms) const {
    return t_ms > horizon_ms - retention_.trace_retention_ms;
  }
  bool RetainsLogAt(int64_t t_ms, int64_t horizon_ms) const {
    return t_ms > horizon_ms - retention_.log_retention_ms;
  }

  // Records with time in (from_ms, to_ms], oldest first.
  std::vector<const LogEntry*> Logs(std::optional<std::string_view> service,
                                    std::optional<std::string_view> pod,
                                    int64_t from_ms, int64_t to_ms) const;
  std::vector<const Trace*> Traces(int64_t from_ms, int64_t to_ms) const;
  // Finalized buckets with first_bucket <= t_s <= last_bucket.
  std::vector<MetricPoint> Metrics(int64_t first_bucket,
                                   int64_t last_bucket) const;
  // Number of finalized buckets (buckets 0 .. count-1 exist).
  int64_t finalized_buckets() const {
    return static_cast<int64_t>(rows_.size());
  }
  // Error fraction of requests arriving at the entry service in
  // (from_ms, to_ms]; 0 when no requests arrived.
  double WorkloadErrorRate(int64_t from_ms, int64_t to_ms) const;
  uint64_t RequestCount(int64_t from_ms, int64_t to_ms) const;
  // Entry service accounting, fed by the kernel per request.
  void RecordRequest(int64_t t_ms, bool ok);

  const std::deque<Trace>& all_traces() const { return traces_; }
  const std::deque<LogEntry>& all_logs() const { return logs_; }

 private:
  struct Accumulator {
    uint64_t calls = 0;
    uint64_t errors = 0;
    int64_t busy_us = 0;
    std::vector<int64_t> latencies_us;
  };
  using Row = std::vector<std::array<double, kMetricKindCount>>;

  RetentionPolicy retention_;
  std::string ns_;
  std::vector<std::string> services_;
  std::vector<ServiceKind> kinds_;
  int64_t now_ms_ = 0;
  std::deque<Trace> traces_;
  std::deque<LogEntry> logs_;
  std::map<int64_t, std::vector<Accumulator>> pending_;
  std::vector<Row> rows_;
  // bucket -> (requests, failed requests) at the entry service
  std::map<int64_t, std::pair<uint64_t, uint64_t>> requests_;
};

// ---------------------------------------------------------------------------
// Serialization. Formats are part of the dataset contract (version 1).

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr std::string_view kTruncationMarkerPrefix = "... (";

// One entry per line, oldest first. When more than `max_lines` entries are
// given, only the newest `max_lines` are kept and a marker line is placed
// first.
std::string FormatLogLines(const std::vector<const LogEntry*>& entries,
                           size_t max_lines);
// Wide CSV: header "t_s,<service>,...", one row per bucket.
std::string FormatMetricTable(const std::vector<MetricPoint>& points,
                              const std::vector<std::string>& services,
                              MetricKind metric);
// Writes one "<metric>.csv" per metric kind.
absl::Status WriteMetricsDir(const std::filesystem::path& dir,
                             const std::vector<MetricPoint>& points,
                             const std::vector<std::string>& services);
// Writes one "trace-<id>.json" document per trace.
absl::Status WriteTracesDir(const std::filesystem::path& dir,
                            const std::vector<const Trace*>& traces);

absl::Status WriteTextFile(const std::filesystem::path& path,
                           std::string_view contents);

// Agent-facing telemetry queries (the get_logs / get_metrics / get_traces
// actions). Files are written below `export_root` and reported under the
// virtual prefix `virtual_root`, so observations do not depend on where a
// session keeps its files.
class TelemetryApi {
 public:
  static constexpr std::string_view kNoSuchTarget =
      "Error: Your service/namespace does not exist.";
  static constexpr int64_t kLogWindowMs = 120'000;
  static constexpr size_t kLogLineCap = 2000;

  TelemetryApi(const ClusterState* state, const TelemetryStore* store,
               std::filesystem::path export_root,
               std::string virtual_root = "/telemetry");

  std::string GetLogs(std::string_view ns,
                      std::optional<std::string_view> service) const;
  std::string GetPodLogs(std::string_view ns, std::string_view pod) const;
  std::string GetMetrics(std::string_view ns, int64_t duration_s);
  std::string GetTraces(std::string_view ns, int64_t duration_s = 5);

  // Maps a virtual path into the export root; nullopt if it escapes.
  std::optional<std::filesystem::path> Resolve(std::string_view path) const;
  const std::string& virtual_root() const { return virtual_root_; }
  const std::filesystem::path& export_root() const { return export_root_; }

 private:
  std::string NextDir(std::string_view kind);

  const ClusterState* state_;
  const TelemetryStore* store_;
  std::filesystem::path export_root_;
  std::string virtual_root_;
  int counter_ = 0;
};

struct DatasetManifest {
  std::string problem_id;
  std::string app;
  std::string ns;
  uint64_t seed = 0;
  int64_t step_stride_s = 0;
  int64_t end_ms = 0;
  bool redacted = true;
  // Present only when not redacted.
  nlohmann::json fault_schedule;
};

// Writes the offline dataset: manifest.json, metrics/<metric>.csv,
// logs.jsonl, traces.jsonl (one trace document per line).
absl::Status ExportDataset(const std::filesystem::path& dir,
                           const TelemetryStore& store,
                           const DatasetManifest& manifest);

// Reads back metrics/<metric>.csv of an exported dataset (or of a
// get_metrics directory): rows of (t_s, per-service values).
struct MetricTable {
  std::vector<std::string> services;
  std::vector<int64_t> buckets;
  std::vector<std::vector<double>> values;  // [bucket][service]
};
absl::StatusOr<MetricTable> ParseMetricTable(std::string_view csv);

// Non-cryptographic content digest of a directory tree (relative path + bytes),
// stable across runs; used to compare exports.
absl::StatusOr<std::string> DirectoryDigest(const std::filesystem::path& dir);

}  // namespace opsarena

#endif  // OPSARENA_TELEMETRY_H_
