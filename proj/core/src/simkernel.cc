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

#include "opsarena/simkernel.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "opsarena/errors.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace {

using nlohmann::json;

absl::Status MalformedTrace(std::string_view what) {
  return TaggedError(absl::StatusCode::kInvalidArgument, kMalformedTrace,
                     what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Request schedules

absl::StatusOr<std::vector<ScheduledRequest>> ParseSchedule(
    std::string_view text) {
  std::vector<ScheduledRequest> out;
  bool first = true;
  int64_t last = 0;
  int line_no = 0;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (first && line.substr(0, 19) == "# opsarena-schedule" &&
          line != kScheduleHeader) {
        return MalformedTrace(StrCat("unsupported schedule version: ", line));
      }
      first = false;
      continue;
    }
    first = false;
    std::vector<std::string_view> cells = Split(line, ',');
    if (cells.size() != 2) {
      return MalformedTrace(
          StrCat("line ", line_no, ": expected <timestamp_ms>,<entry>"));
    }
    auto t = ParseNumber<int64_t>(Trim(cells[0]));
    if (!t || *t <= 0) {
      return MalformedTrace(
          StrCat("line ", line_no, ": timestamp must be a positive integer"));
    }
    if (*t < last) {
      return MalformedTrace(
          StrCat("line ", line_no, ": timestamps must be non-decreasing"));
    }
    std::string_view entry = Trim(cells[1]);
    if (entry.empty()) {
      return MalformedTrace(StrCat("line ", line_no, ": empty entry service"));
    }
    last = *t;
    out.push_back({*t, std::string(entry)});
  }
  return out;
}

absl::StatusOr<std::vector<ScheduledRequest>> LoadScheduleFile(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) return MalformedTrace(StrCat("cannot open ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseSchedule(buf.str());
}

std::string FormatSchedule(const std::vector<ScheduledRequest>& schedule) {
  std::string out = StrCat(kScheduleHeader, "\n");
  for (const ScheduledRequest& r : schedule) {
    StrAppend(&out, r.t_ms, ",", r.entry, "\n");
  }
  return out;
}

json ToJson(const RequestOutcome& o) {
  json path = json::array();
  for (const auto& [caller, callee] : o.path) path.push_back({caller, callee});
  json out{{"request_id", o.request_id},
           {"t_ms", o.t_ms},
           {"path", std::move(path)},
           {"status", o.ok() ? "ok" : "error"},
           {"latency_us", o.latency_us}};
  if (!o.ok()) {
    out["code"] = CallCodeName(o.code);
    out["failing_service"] = o.failing_service;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel

// Everything about the cluster that is fixed for the duration of one
// Advance() call, indexed by the telemetry store's service order.
struct SimKernel::Plan {
  struct Service {
    const ServiceSpec* spec = nullptr;
    std::vector<int> deps;
    std::vector<const PodState*> endpoints;
    int running = 0;
    double loss = 0.0;
    std::optional<std::string> internal_failure;
    // verdicts[endpoint index][dependency position]
    std::vector<std::vector<CallVerdict>> verdicts;
  };
  std::vector<Service> services;
  int entry = -1;
  CallVerdict entry_verdict;
  std::vector<int64_t> latency_us;
};

struct SimKernel::Walk {
  uint64_t request_id = 0;
  int64_t t_ms = 0;
  bool build_trace = false;
  bool build_logs = false;
  bool collect_path = false;
  Trace trace;
  std::vector<LogEntry> logs;
  std::vector<std::pair<std::string, std::string>> path;
  CallCode code = CallCode::kOk;
  int origin = -1;
  uint32_t next_span = 0;
  uint64_t edge = 0;
};

SimKernel::SimKernel(ClusterState* state, TelemetryStore* store, uint64_t seed)
    : state_(state),
      store_(store),
      loss_rng_(SeededStream(seed).Split("loss")),
      trace_rng_(SeededStream(seed).Split("trace")) {
  store_->Bind(*state_);
  clock_.now_ms = state_->now_ms();
  const size_t n = store_->services().size();
  calls_this_bucket_.assign(n, 0);
  calls_last_bucket_.assign(n, 0);
  round_robin_.assign(n, 0);
}

absl::Status SimKernel::StartWorkload(const WorkloadSpec& spec) {
  if (spec.entry != state_->entry_service() ||
      state_->FindService(state_->app_namespace(), spec.entry) == nullptr) {
    return TaggedError(absl::StatusCode::kInvalidArgument,
                       kUnknownEntryService, spec.entry);
  }
  if (spec.rate <= 0) {
    return absl::InvalidArgumentError("workload rate must be positive");
  }
  if (spec.duration_s < 0) {
    return absl::InvalidArgumentError("workload duration must be >= 0");
  }
  mode_ = Mode::kRate;
  spec_ = spec;
  workload_start_ms_ = clock_.now_ms;
  replay_.clear();
  return absl::OkStatus();
}

absl::Status SimKernel::ReplayWorkload(std::vector<ScheduledRequest> schedule) {
  for (const ScheduledRequest& r : schedule) {
    if (r.entry != state_->entry_service()) {
      return TaggedError(absl::StatusCode::kInvalidArgument,
                         kUnknownEntryService, r.entry);
    }
  }
  mode_ = Mode::kReplay;
  replay_ = std::move(schedule);
  replay_cursor_ = 0;
  // Entries at or before the current clock can never be processed.
  while (replay_cursor_ < replay_.size() &&
         replay_[replay_cursor_].t_ms <= clock_.now_ms) {
    ++replay_cursor_;
  }
  return absl::OkStatus();
}

void SimKernel::StopWorkload() {
  mode_ = Mode::kNone;
  replay_.clear();
}

std::vector<ScheduledRequest> SimKernel::ScheduleWindow(int64_t from_ms,
                                                        int64_t to_ms) const {
  std::vector<ScheduledRequest> out;
  if (to_ms <= from_ms) return out;
  if (mode_ == Mode::kRate) {
    const int64_t rate = spec_.rate;
    const int64_t start = workload_start_ms_;
    const int64_t total = spec_.duration_s == 0
                              ? INT64_MAX
                              : spec_.duration_s * rate;
    // First i with start + floor((i+1)*1000/rate) > from_ms.
    int64_t i = 0;
    if (from_ms > start) {
      i = std::max<int64_t>(0, (from_ms - start) * rate / 1000 - 1);
    }
    for (; i < total; ++i) {
      const int64_t t = start + (i + 1) * 1000 / rate;
      if (t <= from_ms) continue;
      if (t > to_ms) break;
      out.push_back({t, spec_.entry});
    }
  } else if (mode_ == Mode::kReplay) {
    for (const ScheduledRequest& r : replay_) {
      if (r.t_ms > from_ms && r.t_ms <= to_ms) out.push_back(r);
    }
  }
  return out;
}

uint64_t SimKernel::Advance(int64_t delta_ms,
                            std::vector<RequestOutcome>* outcomes) {
  if (delta_ms < 0) delta_ms = 0;
  const int64_t from = clock_.now_ms;
  const int64_t to = from + delta_ms;

  Plan plan;
  const std::string& ns = state_->app_namespace();
  const std::vector<std::string>& names = store_->services();
  std::map<std::string_view, int> index;
  for (size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
  plan.services.resize(names.size());
  for (size_t i = 0; i < names.size(); ++i) {
    Plan::Service& s = plan.services[i];
    s.spec = state_->FindService(ns, names[i]);
    for (const std::string& d : s.spec->dependencies) s.deps.push_back(index[d]);
    for (const PodState* p : state_->PodsOf(ns, names[i])) {
      if (p->phase != PodPhase::kPending && p->node.has_value()) {
        s.endpoints.push_back(p);
      }
    }
    s.running = state_->RunningPods(ns, names[i]);
    s.loss = state_->LossRate(names[i]);
    s.internal_failure = InternalFailure(*s.spec);
  }
  for (Plan::Service& s : plan.services) {
    for (const PodState* p : s.endpoints) {
      std::vector<CallVerdict> row;
      for (int d : s.deps) {
        row.push_back(EvaluateCall(*state_, p, *plan.services[d].spec));
      }
      s.verdicts.push_back(std::move(row));
    }
  }
  plan.entry = index.count(state_->entry_service())
                   ? index[state_->entry_service()]
                   : -1;
  if (plan.entry >= 0) {
    plan.entry_verdict =
        EvaluateCall(*state_, nullptr, *plan.services[plan.entry].spec);
  }

  uint64_t count = 0;
  if (plan.entry >= 0) {
    std::vector<ScheduledRequest> due;
    if (mode_ == Mode::kReplay) {
      while (replay_cursor_ < replay_.size() &&
             replay_[replay_cursor_].t_ms <= to) {
        if (replay_[replay_cursor_].t_ms > from) {
          due.push_back(replay_[replay_cursor_]);
        }
        ++replay_cursor_;
      }
    } else {
      due = ScheduleWindow(from, to);
    }
    plan.latency_us.assign(names.size(), 0);
    int64_t latency_bucket = -1;
    for (const ScheduledRequest& req : due) {
      const int64_t bucket = BucketOf(req.t_ms);
      if (bucket != load_bucket_) {
        if (bucket == load_bucket_ + 1) {
          calls_last_bucket_.swap(calls_this_bucket_);
        } else {
          std::fill(calls_last_bucket_.begin(), calls_last_bucket_.end(), 0);
        }
        std::fill(calls_this_bucket_.begin(), calls_this_bucket_.end(), 0);
        load_bucket_ = bucket;
      }
      if (bucket != latency_bucket) {
        // Load factor: estimated in-flight calls per running pod over the
        // previous second, capped.
        for (size_t i = 0; i < names.size(); ++i) {
          const Plan::Service& s = plan.services[i];
          const double base_us = 1000.0 * s.spec->base_latency_ms;
          double factor = 0.0;
          if (s.running > 0) {
            factor = static_cast<double>(calls_last_bucket_[i]) * base_us /
                     1e6 / s.running;
          }
          factor = std::min(factor, kMaxLoadFactor);
          plan.latency_us[i] = static_cast<int64_t>(base_us * (1.0 + factor));
        }
        latency_bucket = bucket;
      }
      RunRequest(plan, req, to, outcomes);
      ++count;
    }
  }
  clock_.now_ms = to;
  state_->set_now_ms(to);
  store_->Advance(to, *state_);
  return count;
}

void SimKernel::RunRequest(const Plan& plan, const ScheduledRequest& req,
                           int64_t horizon_ms,
                           std::vector<RequestOutcome>* outcomes) {
  Walk walk;
  walk.request_id = next_request_++;
  walk.t_ms = req.t_ms;
  walk.build_trace = store_->RetainsTraceAt(req.t_ms, horizon_ms);
  walk.build_logs = store_->RetainsLogAt(req.t_ms, horizon_ms);
  walk.collect_path = outcomes != nullptr;
  if (walk.build_trace) {
    walk.trace.trace_id = trace_rng_.Bits(walk.request_id);
    walk.trace.ns = store_->ns();
  }
  bool ok = true;
  const int64_t latency_us =
      Visit(plan, walk, plan.entry, -1, 0, std::nullopt, req.t_ms * 1000, ok);
  store_->RecordRequest(req.t_ms, ok);

  if (walk.build_logs) {
    const Plan::Service& entry = plan.services[plan.entry];
    if (!entry.endpoints.empty()) {
      LogEntry access;
      access.t_ms = req.t_ms;
      access.ns = store_->ns();
      access.service = entry.spec->name;
      access.pod = entry.endpoints[walk.request_id % entry.endpoints.size()]
                       ->pod_name;
      access.level = LogLevel::kInfo;
      access.message = fmt::format("{} status={} latency={:.3f}ms",
                                   entry.spec->operation, ok ? 200 : 500,
                                   static_cast<double>(latency_us) / 1000.0);
      store_->AddLog(std::move(access));
    }
    for (LogEntry& e : walk.logs) store_->AddLog(std::move(e));
  }
  if (walk.build_trace) store_->AddTrace(std::move(walk.trace));
  if (outcomes != nullptr) {
    RequestOutcome o;
    o.request_id = walk.request_id;
    o.t_ms = req.t_ms;
    o.path = std::move(walk.path);
    o.code = walk.code;
    if (walk.origin >= 0) {
      o.failing_service = plan.services[walk.origin].spec->name;
    }
    o.latency_us = latency_us;
    outcomes->push_back(std::move(o));
  }
}

int64_t SimKernel::Visit(const Plan& plan, Walk& walk, int callee, int caller,
                         int caller_pod, std::optional<uint32_t> parent_span,
                         int64_t start_us, bool& ok) {
  const Plan::Service& svc = plan.services[callee];
  const Plan::Service* from = caller >= 0 ? &plan.services[caller] : nullptr;
  const std::string& ns = store_->ns();
  ++calls_this_bucket_[callee];
  if (walk.collect_path) {
    walk.path.emplace_back(from ? from->spec->name : "client", svc.spec->name);
  }
  const uint32_t span_id = ++walk.next_span;
  const uint64_t edge = walk.edge++;

  auto log = [&](const Plan::Service& at, const PodState* pod,
                 std::string message) {
    if (!walk.build_logs || pod == nullptr || message.empty()) return;
    walk.logs.push_back(LogEntry{walk.t_ms, ns, at.spec->name, pod->pod_name,
                                 LogLevel::kError, std::move(message)});
  };
  auto fail = [&](CallCode code, int64_t duration_us, int64_t self_us) {
    if (walk.origin < 0) {
      walk.origin = callee;
      walk.code = code;
    }
    ok = false;
    store_->RecordCall(callee, walk.t_ms, duration_us, self_us, false);
    if (walk.build_trace) {
      walk.trace.spans.push_back(TraceSpan{span_id, parent_span,
                                           svc.spec->name, svc.spec->operation,
                                           start_us, duration_us, false});
    }
    return duration_us;
  };
  const PodState* caller_pod_state =
      from != nullptr ? from->endpoints[caller_pod] : nullptr;

  const CallVerdict& verdict =
      from == nullptr
          ? plan.entry_verdict
          : from->verdicts[caller_pod][std::find(from->deps.begin(),
                                                 from->deps.end(), callee) -
                                       from->deps.begin()];
  if (verdict.code != CallCode::kOk) {
    log(*from, caller_pod_state, verdict.caller_message);
    if (!verdict.callee_message.empty() && !svc.endpoints.empty()) {
      log(svc,
          svc.endpoints[round_robin_[callee] % svc.endpoints.size()],
          verdict.callee_message);
    }
    return fail(verdict.code, kFastFailUs, 0);
  }

  const size_t pod_index = round_robin_[callee]++ % svc.endpoints.size();
  const PodState* pod = svc.endpoints[pod_index];
  if (pod->phase != PodPhase::kRunning) {
    if (from != nullptr) {
      log(*from, caller_pod_state,
          StrCat(svc.spec->operation, " failed: connection reset by peer ",
                 pod->pod_name));
    }
    return fail(CallCode::kConnectionReset, kFastFailUs, 0);
  }
  if (svc.loss > 0.0 &&
      loss_rng_.Unit(MixKeys(walk.request_id, edge)) < svc.loss) {
    if (from != nullptr) {
      log(*from, caller_pod_state,
          StrCat(svc.spec->operation,
                 " failed: context deadline exceeded after ",
                 kLossTimeoutUs / 1000, "ms"));
    }
    return fail(CallCode::kDeadlineExceeded, kLossTimeoutUs, 0);
  }
  const int64_t self_us = plan.latency_us[callee];
  if (svc.internal_failure) {
    log(svc, pod, *svc.internal_failure);
    return fail(CallCode::kInternal, self_us, self_us);
  }

  size_t span_slot = 0;
  if (walk.build_trace) {
    span_slot = walk.trace.spans.size();
    walk.trace.spans.push_back(TraceSpan{span_id, parent_span, svc.spec->name,
                                         svc.spec->operation, start_us, 0,
                                         true});
  }
  int64_t cursor = start_us + self_us / 2;
  int64_t children_us = 0;
  std::string_view first_failed;
  for (int dep : svc.deps) {
    bool child_ok = true;
    const int64_t d = Visit(plan, walk, dep, callee, pod_index, span_id,
                            cursor, child_ok);
    cursor += d;
    children_us += d;
    if (!child_ok && first_failed.empty()) {
      first_failed = plan.services[dep].spec->name;
    }
  }
  const int64_t duration = self_us + children_us;
  const bool self_ok = first_failed.empty();
  if (!self_ok) {
    ok = false;
    log(svc, pod,
        StrCat(svc.spec->operation, " failed: downstream call to ",
               first_failed, " returned an error"));
  }
  store_->RecordCall(callee, walk.t_ms, duration, self_us, self_ok);
  if (walk.build_trace) {
    walk.trace.spans[span_slot].duration_us = duration;
    walk.trace.spans[span_slot].ok = self_ok;
  }
  return duration;
}

}  // namespace opsarena
