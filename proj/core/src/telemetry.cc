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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "opsarena/hashing.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double BaseMemoryPct(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::kDatabase:
      return 38.0;
    case ServiceKind::kCache:
      return 24.0;
    case ServiceKind::kFrontend:
      return 12.0;
    case ServiceKind::kStateless:
      return 9.0;
  }
  return 10.0;
}

// Nearest-rank percentile over sorted values.
int64_t Percentile(const std::vector<int64_t>& sorted, double q) {
  if (sorted.empty()) return 0;
  size_t rank = static_cast<size_t>(std::ceil(q * sorted.size()));
  rank = std::clamp<size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::string FormatMs(int64_t us) {
  return fmt::format("{:.3f}", static_cast<double>(us) / 1000.0);
}

std::string FormatValue(double v) {
  // Fixed precision keeps tables byte-stable.
  std::string s = fmt::format("{:.4f}", v);
  return s;
}

}  // namespace

std::string_view LogLevelName(LogLevel level) {
  switch (level) {
    case LogLevel::kInfo:
      return "INFO";
    case LogLevel::kWarn:
      return "WARN";
    case LogLevel::kError:
      return "ERROR";
  }
  return "INFO";
}

std::string_view MetricKindName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kQps:
      return "qps";
    case MetricKind::kErrorRate:
      return "error_rate";
    case MetricKind::kLatencyP50Ms:
      return "latency_p50_ms";
    case MetricKind::kLatencyP99Ms:
      return "latency_p99_ms";
    case MetricKind::kCpuPct:
      return "cpu_pct";
    case MetricKind::kMemPct:
      return "mem_pct";
  }
  return "unknown";
}

json ToJson(const LogEntry& e) {
  return json{{"t_ms", e.t_ms},          {"namespace", e.ns},
              {"service", e.service},    {"pod", e.pod},
              {"level", LogLevelName(e.level)}, {"message", e.message}};
}

json ToJson(const Trace& trace) {
  json spans = json::array();
  for (const TraceSpan& s : trace.spans) {
    json js{{"span_id", HexDigits(s.span_id, 8)},
            {"service", s.service},
            {"operation", s.operation},
            {"start_ms", FormatMs(s.start_us)},
            {"duration_ms", FormatMs(s.duration_us)},
            {"status", s.ok ? "ok" : "error"}};
    js["parent_span_id"] =
        s.parent_span_id ? json(HexDigits(*s.parent_span_id, 8)) : json();
    spans.push_back(std::move(js));
  }
  return json{{"trace_id", HexDigits(trace.trace_id, 16)},
              {"namespace", trace.ns},
              {"spans", std::move(spans)}};
}

// ---------------------------------------------------------------------------
// TelemetryStore

void TelemetryStore::Bind(const ClusterState& state) {
  ns_ = state.app_namespace();
  services_.clear();
  kinds_.clear();
  if (const NamespaceState* space = state.FindNamespace(ns_)) {
    for (const auto& [name, spec] : space->services) {
      services_.push_back(name);
      kinds_.push_back(spec.kind);
    }
  }
}

void TelemetryStore::AddTrace(Trace trace) {
  traces_.push_back(std::move(trace));
}

void TelemetryStore::AddLog(LogEntry entry) { logs_.push_back(std::move(entry)); }

void TelemetryStore::RecordCall(int service_index, int64_t t_ms,
                                int64_t duration_us, int64_t self_us,
                                bool ok) {
  auto& accs = pending_[BucketOf(t_ms)];
  if (accs.empty()) accs.resize(services_.size());
  Accumulator& acc = accs[service_index];
  ++acc.calls;
  if (!ok) ++acc.errors;
  acc.busy_us += self_us;
  acc.latencies_us.push_back(duration_us);
}

void TelemetryStore::RecordRequest(int64_t t_ms, bool ok) {
  auto& [count, failed] = requests_[BucketOf(t_ms)];
  ++count;
  if (!ok) ++failed;
}

void TelemetryStore::Advance(int64_t now_ms, const ClusterState& state) {
  now_ms_ = std::max(now_ms_, now_ms);
  const int64_t complete = now_ms_ / 1000;  // buckets [0, complete) are done
  while (static_cast<int64_t>(rows_.size()) < complete) {
    const int64_t bucket = rows_.size();
    Row row(services_.size());
    auto it = pending_.find(bucket);
    for (size_t i = 0; i < services_.size(); ++i) {
      Accumulator empty;
      Accumulator& acc = it == pending_.end() ? empty : it->second[i];
      std::sort(acc.latencies_us.begin(), acc.latencies_us.end());
      const int running = state.RunningPods(ns_, services_[i]);
      auto& v = row[i];
      v[static_cast<int>(MetricKind::kQps)] = static_cast<double>(acc.calls);
      v[static_cast<int>(MetricKind::kErrorRate)] =
          acc.calls == 0 ? 0.0
                         : static_cast<double>(acc.errors) /
                               static_cast<double>(acc.calls);
      v[static_cast<int>(MetricKind::kLatencyP50Ms)] =
          Percentile(acc.latencies_us, 0.50) / 1000.0;
      v[static_cast<int>(MetricKind::kLatencyP99Ms)] =
          Percentile(acc.latencies_us, 0.99) / 1000.0;
      if (running == 0) {
        v[static_cast<int>(MetricKind::kCpuPct)] = 0.0;
        v[static_cast<int>(MetricKind::kMemPct)] = 0.0;
      } else {
        // Busy time over available pod-seconds, plus a small idle floor.
        const double busy = static_cast<double>(acc.busy_us) /
                            (1e6 * static_cast<double>(running));
        v[static_cast<int>(MetricKind::kCpuPct)] =
            std::min(100.0, 1.5 + 100.0 * busy);
        v[static_cast<int>(MetricKind::kMemPct)] = std::min(
            100.0, BaseMemoryPct(kinds_[i]) +
                       0.02 * static_cast<double>(acc.calls) / running);
      }
    }
    if (it != pending_.end()) pending_.erase(it);
    rows_.push_back(std::move(row));
  }
  while (!traces_.empty() &&
         !RetainsTraceAt(traces_.front().start_us() / 1000, now_ms_)) {
    traces_.pop_front();
  }
  while (!logs_.empty() && !RetainsLogAt(logs_.front().t_ms, now_ms_)) {
    logs_.pop_front();
  }
}

std::vector<const LogEntry*> TelemetryStore::Logs(
    std::optional<std::string_view> service,
    std::optional<std::string_view> pod, int64_t from_ms,
    int64_t to_ms) const {
  std::vector<const LogEntry*> out;
  for (const LogEntry& e : logs_) {
    if (e.t_ms <= from_ms || e.t_ms > to_ms) continue;
    if (service && e.service != *service) continue;
    if (pod && e.pod != *pod) continue;
    out.push_back(&e);
  }
  // Entries are appended per request and may interleave slightly; present
  // them in time order.
  std::stable_sort(out.begin(), out.end(),
                   [](const LogEntry* a, const LogEntry* b) {
                     return a->t_ms < b->t_ms;
                   });
  return out;
}

std::vector<const Trace*> TelemetryStore::Traces(int64_t from_ms,
                                                 int64_t to_ms) const {
  std::vector<const Trace*> out;
  for (const Trace& t : traces_) {
    const int64_t start_ms = t.start_us() / 1000;
    if (start_ms > from_ms && start_ms <= to_ms) out.push_back(&t);
  }
  return out;
}

std::vector<MetricPoint> TelemetryStore::Metrics(int64_t first_bucket,
                                                 int64_t last_bucket) const {
  std::vector<MetricPoint> out;
  first_bucket = std::max<int64_t>(first_bucket, 0);
  last_bucket = std::min<int64_t>(last_bucket, finalized_buckets() - 1);
  for (int64_t b = first_bucket; b <= last_bucket; ++b) {
    const Row& row = rows_[b];
    for (size_t i = 0; i < services_.size(); ++i) {
      for (MetricKind kind : kAllMetricKinds) {
        out.push_back(
            MetricPoint{b, services_[i], kind, row[i][static_cast<int>(kind)]});
      }
    }
  }
  return out;
}

double TelemetryStore::WorkloadErrorRate(int64_t from_ms, int64_t to_ms) const {
  uint64_t total = 0;
  uint64_t failed = 0;
  for (auto it = requests_.lower_bound(BucketOf(from_ms + 1));
       it != requests_.end() && it->first <= BucketOf(to_ms); ++it) {
    total += it->second.first;
    failed += it->second.second;
  }
  return total == 0 ? 0.0
                    : static_cast<double>(failed) / static_cast<double>(total);
}

uint64_t TelemetryStore::RequestCount(int64_t from_ms, int64_t to_ms) const {
  uint64_t total = 0;
  for (auto it = requests_.lower_bound(BucketOf(from_ms + 1));
       it != requests_.end() && it->first <= BucketOf(to_ms); ++it) {
    total += it->second.first;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Serialization

std::string FormatLogLines(const std::vector<const LogEntry*>& entries,
                           size_t max_lines) {
  std::string out;
  size_t skip = 0;
  if (entries.size() > max_lines) {
    skip = entries.size() - max_lines;
    StrAppend(&out, kTruncationMarkerPrefix, skip,
                    " earlier lines truncated; showing the newest ", max_lines,
                    ")\n");
  }
  for (size_t i = skip; i < entries.size(); ++i) {
    const LogEntry& e = *entries[i];
    StrAppend(&out,
                    fmt::format("[{:10.3f}s] {:<5} {}: {}\n",
                                    static_cast<double>(e.t_ms) / 1000.0,
                                    LogLevelName(e.level), e.pod, e.message));
  }
  return out;
}

std::string FormatMetricTable(const std::vector<MetricPoint>& points,
                              const std::vector<std::string>& services,
                              MetricKind metric) {
  std::map<std::string, size_t> column;
  for (size_t i = 0; i < services.size(); ++i) column[services[i]] = i;
  std::map<int64_t, std::vector<double>> rows;
  for (const MetricPoint& p : points) {
    if (p.metric != metric) continue;
    auto& row = rows[p.t_s];
    if (row.empty()) row.assign(services.size(), 0.0);
    row[column.at(p.service)] = p.value;
  }
  std::string out = "t_s";
  for (const auto& s : services) StrAppend(&out, ",", s);
  out += '\n';
  for (const auto& [t, row] : rows) {
    StrAppend(&out, t);
    for (double v : row) StrAppend(&out, ",", FormatValue(v));
    out += '\n';
  }
  return out;
}

absl::Status WriteTextFile(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::InternalError(StrCat("cannot write ", path.string()));
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  return out ? absl::OkStatus()
             : absl::InternalError(StrCat("write failed ", path.string()));
}

absl::Status WriteMetricsDir(const fs::path& dir,
                             const std::vector<MetricPoint>& points,
                             const std::vector<std::string>& services) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return absl::InternalError(ec.message());
  for (MetricKind kind : kAllMetricKinds) {
    absl::Status s =
        WriteTextFile(dir / StrCat(MetricKindName(kind), ".csv"),
                      FormatMetricTable(points, services, kind));
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::Status WriteTracesDir(const fs::path& dir,
                            const std::vector<const Trace*>& traces) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return absl::InternalError(ec.message());
  for (const Trace* t : traces) {
    absl::Status s =
        WriteTextFile(dir / StrCat("trace-", HexDigits(t->trace_id, 16),
                                         ".json"),
                      ToJson(*t).dump(2) + "\n");
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::StatusOr<MetricTable> ParseMetricTable(std::string_view csv) {
  MetricTable table;
  std::vector<std::string_view> lines =
      Split(csv, '\n', /*skip_empty=*/true);
  if (lines.empty()) return absl::InvalidArgumentError("empty metric table");
  std::vector<std::string_view> header = Split(lines[0], ',');
  if (header.empty() || header[0] != "t_s") {
    return absl::InvalidArgumentError("metric table header must start with t_s");
  }
  table.services.assign(header.begin() + 1, header.end());
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string_view> cells = Split(lines[i], ',');
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(
          StrCat("row ", i, " has ", cells.size(), " cells"));
    }
    std::optional<int64_t> t = ParseNumber<int64_t>(cells[0]);
    if (!t) {
      return absl::InvalidArgumentError("bad bucket index");
    }
    std::vector<double> row;
    for (size_t c = 1; c < cells.size(); ++c) {
      std::optional<double> v = ParseNumber<double>(cells[c]);
      if (!v) {
        return absl::InvalidArgumentError("bad metric value");
      }
      row.push_back(*v);
    }
    table.buckets.push_back(*t);
    table.values.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// TelemetryApi

TelemetryApi::TelemetryApi(const ClusterState* state,
                           const TelemetryStore* store, fs::path export_root,
                           std::string virtual_root)
    : state_(state),
      store_(store),
      export_root_(std::move(export_root)),
      virtual_root_(std::move(virtual_root)) {}

std::string TelemetryApi::GetLogs(
    std::string_view ns, std::optional<std::string_view> service) const {
  if (state_->FindNamespace(ns) == nullptr ||
      (service && state_->FindService(ns, *service) == nullptr)) {
    return std::string(kNoSuchTarget);
  }
  const int64_t now = store_->now_ms();
  return FormatLogLines(
      store_->Logs(service, std::nullopt, now - kLogWindowMs, now),
      kLogLineCap);
}

std::string TelemetryApi::GetPodLogs(std::string_view ns,
                                     std::string_view pod) const {
  if (state_->FindNamespace(ns) == nullptr) return std::string(kNoSuchTarget);
  const int64_t now = store_->now_ms();
  return FormatLogLines(
      store_->Logs(std::nullopt, pod, now - kLogWindowMs, now), kLogLineCap);
}

std::string TelemetryApi::NextDir(std::string_view kind) {
  return fmt::format("{}_{:04d}", kind, ++counter_);
}

std::string TelemetryApi::GetMetrics(std::string_view ns, int64_t duration_s) {
  if (state_->FindNamespace(ns) == nullptr) return std::string(kNoSuchTarget);
  if (duration_s <= 0) return "Error: duration must be a positive integer.";
  const int64_t last = store_->finalized_buckets() - 1;
  std::vector<MetricPoint> points =
      store_->Metrics(last - duration_s + 1, last);
  std::string name = NextDir("metrics");
  absl::Status s =
      WriteMetricsDir(export_root_ / name, points, store_->services());
  if (!s.ok()) return StrCat("Error: ", std::string(s.message()));
  return StrCat(virtual_root_, "/", name);
}

std::string TelemetryApi::GetTraces(std::string_view ns, int64_t duration_s) {
  if (state_->FindNamespace(ns) == nullptr) return std::string(kNoSuchTarget);
  if (duration_s <= 0) return "Error: duration must be a positive integer.";
  const int64_t now = store_->now_ms();
  std::string name = NextDir("traces");
  absl::Status s = WriteTracesDir(export_root_ / name,
                                  store_->Traces(now - duration_s * 1000, now));
  if (!s.ok()) return StrCat("Error: ", std::string(s.message()));
  return StrCat(virtual_root_, "/", name);
}

std::optional<fs::path> TelemetryApi::Resolve(std::string_view path) const {
  if (path.substr(0, virtual_root_.size()) != virtual_root_) {
    return std::nullopt;
  }
  path.remove_prefix(virtual_root_.size());
  if (!path.empty() && path.front() != '/') return std::nullopt;
  const fs::path raw{std::string(path)};
  for (const auto& part : raw) {
    if (part == "..") return std::nullopt;
  }
  fs::path rel = raw.lexically_normal().relative_path();
  return rel.empty() ? export_root_ : export_root_ / rel;
}

// ---------------------------------------------------------------------------
// Offline export

absl::Status ExportDataset(const fs::path& dir, const TelemetryStore& store,
                           const DatasetManifest& manifest) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return absl::InternalError(ec.message());
  json m{{"format", "opsarena-dataset"},
         {"version", kDatasetFormatVersion},
         {"problem_id", manifest.problem_id},
         {"app", manifest.app},
         {"namespace", manifest.ns},
         {"seed", manifest.seed},
         {"step_stride_s", manifest.step_stride_s},
         {"end_ms", manifest.end_ms},
         {"metric_buckets", store.finalized_buckets()},
         {"services", store.services()},
         {"retention",
          {{"trace_ms", store.retention().trace_retention_ms},
           {"log_ms", store.retention().log_retention_ms}}},
         {"fault_schedule_redacted", manifest.redacted}};
  if (!manifest.redacted) m["fault_schedule"] = manifest.fault_schedule;
  if (auto s = WriteTextFile(dir / "manifest.json", m.dump(2) + "\n"); !s.ok()) {
    return s;
  }
  if (auto s = WriteMetricsDir(
          dir / "metrics", store.Metrics(0, store.finalized_buckets() - 1),
          store.services());
      !s.ok()) {
    return s;
  }
  std::string logs;
  for (const LogEntry* e :
       store.Logs(std::nullopt, std::nullopt, INT64_MIN, INT64_MAX)) {
    StrAppend(&logs, ToJson(*e).dump(), "\n");
  }
  if (auto s = WriteTextFile(dir / "logs.jsonl", logs); !s.ok()) return s;
  std::string traces;
  for (const Trace& t : store.all_traces()) {
    StrAppend(&traces, ToJson(t).dump(), "\n");
  }
  return WriteTextFile(dir / "traces.jsonl", traces);
}

absl::StatusOr<std::string> DirectoryDigest(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    return absl::NotFoundError(StrCat("not a directory: ", dir.string()));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  uint64_t h = Fnv1a64("opsarena-digest");
  uint64_t h2 = Fnv1a64("opsarena-digest-2");
  for (const fs::path& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string rel = fs::relative(f, dir).generic_string();
    h = Fnv1a64(rel, h);
    h = Fnv1a64(buf.str(), h);
    h2 = MixKeys(h2, Fnv1a64(buf.str(), Fnv1a64(rel)));
  }
  return HexDigits(h, 16) + HexDigits(h2, 16);
}

}  // namespace opsarena
