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

#include <algorithm>

#include "opsarena/aci.h"
#include "opsarena/shell.h"
#include "opsarena/strings.h"

namespace opsarena {

using json = nlohmann::json;

namespace {

std::string Normalize(std::string_view s) { return ToLower(Trim(s)); }

Grade Fail(std::string_view reason) {
  Grade g;
  g.reason = std::string(reason);
  return g;
}

// Flattens the payload into strings. Fails on anything but strings or a
// single list of strings.
std::optional<std::vector<std::string>> StringList(
    const std::vector<Value>& payload) {
  std::vector<std::string> out;
  const std::vector<Value>* items = &payload;
  if (payload.size() == 1 && payload[0].is_list()) items = &payload[0].list();
  for (const Value& v : *items) {
    if (!v.is_string()) return std::nullopt;
    out.push_back(v.str());
  }
  return out;
}

double Pct(int num, int den) {
  return den == 0 ? 0.0 : 100.0 * num / den;
}

std::string FormatOptional(const std::optional<double>& v, int precision) {
  if (!v) return "-";
  return fmt::format("{:.{}f}", *v, precision);
}

}  // namespace

std::string_view SessionStatusName(SessionStatus status) {
  switch (status) {
    case SessionStatus::kRunning:
      return "running";
    case SessionStatus::kSubmitted:
      return "submitted";
    case SessionStatus::kStepLimitReached:
      return "step_limit_reached";
    case SessionStatus::kAborted:
      return "aborted";
  }
  return "unknown";
}

std::optional<SessionStatus> ParseSessionStatus(std::string_view name) {
  for (SessionStatus s :
       {SessionStatus::kRunning, SessionStatus::kSubmitted,
        SessionStatus::kStepLimitReached, SessionStatus::kAborted}) {
    if (SessionStatusName(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<Value> SubmissionPayload(const Call& submit) {
  std::vector<Value> out;
  out.reserve(submit.args.size());
  for (const Arg& a : submit.args) out.push_back(a.value);
  return out;
}

Grade EvalDetection(const std::vector<Value>& payload,
                    const Solution& oracle) {
  if (payload.size() != 1 || !payload[0].is_string()) {
    return Fail(kReasonMalformed);
  }
  std::string answer = Normalize(payload[0].str());
  if (answer != "yes" && answer != "no") return Fail(kReasonMalformed);
  if (answer != oracle.detection) return Fail(kReasonWrongAnswer);
  Grade g;
  g.success = true;
  return g;
}

Grade EvalLocalization(const std::vector<Value>& payload,
                       const Solution& oracle) {
  Grade g;
  g.acc_at_1 = false;
  g.acc_at_3 = false;
  auto candidates = StringList(payload);
  if (!candidates) {
    g.reason = kReasonMalformed;
    return g;
  }
  if (candidates->empty()) {
    g.reason = kReasonEmpty;
    return g;
  }
  auto in_oracle = [&](const std::string& c) {
    std::string n = Normalize(c);
    return std::any_of(oracle.services.begin(), oracle.services.end(),
                       [&](const std::string& s) { return ToLower(s) == n; });
  };
  g.acc_at_1 = in_oracle((*candidates)[0]);
  size_t top = std::min<size_t>(3, candidates->size());
  g.acc_at_3 = std::any_of(candidates->begin(), candidates->begin() + top,
                           in_oracle);
  g.success = *g.acc_at_1;
  if (!g.success) g.reason = kReasonWrongAnswer;
  return g;
}

Grade EvalAnalysis(const std::vector<Value>& payload, const Solution& oracle) {
  Grade g;
  g.level_correct = false;
  g.type_correct = false;
  auto labels = StringList(payload);
  if (!labels || labels->size() > 2) {
    g.reason = kReasonMalformed;
    return g;
  }
  std::optional<std::string> layer;
  std::optional<std::string> type;
  if (labels->size() > 0) layer = Normalize((*labels)[0]);
  if (labels->size() > 1) type = Normalize((*labels)[1]);

  bool unknown = false;
  if (layer) {
    auto parsed = ParseSystemLayer(*layer);
    if (!parsed) {
      unknown = true;
    } else {
      g.level_correct = oracle.layer == parsed;
    }
  }
  if (type) {
    bool known = std::find(kFaultTypeVocabulary.begin(),
                           kFaultTypeVocabulary.end(),
                           *type) != kFaultTypeVocabulary.end();
    if (!known) {
      unknown = true;
    } else {
      g.type_correct = oracle.fault_type == *type;
    }
  }
  g.success = *g.level_correct && *g.type_correct;
  if (g.success) return g;
  if (unknown) {
    g.reason = kReasonUnknownLabel;
  } else if (!layer || !type) {
    g.reason = kReasonMissingField;
  } else {
    g.reason = kReasonWrongAnswer;
  }
  return g;
}

Grade EvalMitigation(const HealthVerdict& verdict) {
  Grade g;
  g.health = verdict;
  g.success = verdict.healthy;
  if (!g.success) g.reason = kReasonUnhealthy;
  return g;
}

Grade NoSubmissionGrade(TaskLevel task, SessionStatus status) {
  Grade g = Fail(status == SessionStatus::kAborted ? kReasonAborted
                                                   : kReasonNoSubmission);
  if (task == TaskLevel::kLocalization) {
    g.acc_at_1 = false;
    g.acc_at_3 = false;
  } else if (task == TaskLevel::kAnalysis) {
    g.level_correct = false;
    g.type_correct = false;
  }
  return g;
}

std::string_view TimeMetricName(TaskLevel task) {
  switch (task) {
    case TaskLevel::kDetection:
      return "TTD";
    case TaskLevel::kLocalization:
      return "TTL";
    case TaskLevel::kAnalysis:
      return "TTA";
    case TaskLevel::kMitigation:
      return "TTM";
  }
  return "TT";
}

json ToJson(const EvalReport& r) {
  json doc = {
      {"pid", r.pid},
      {"agent", r.agent},
      {"task", TaskSlug(r.task)},
      {"status", SessionStatusName(r.status)},
      {"success", r.grade.success},
      {"reason", r.grade.reason},
      {"submission", r.submission},
      {"steps", r.steps},
      {"max_steps", r.max_steps},
      {"step_stride_s", r.step_stride_s},
      {"seed", r.seed},
      {"input_tokens", r.input_tokens},
      {"output_tokens", r.output_tokens},
      {"trajectory", r.trajectory_ref},
  };
  if (!r.abort_reason.empty()) doc["abort_reason"] = r.abort_reason;
  doc["time_metric"] = TimeMetricName(r.task);
  doc["time_s"] = r.time_s ? json(*r.time_s) : json(nullptr);
  if (r.grade.acc_at_1) doc["acc_at_1"] = *r.grade.acc_at_1;
  if (r.grade.acc_at_3) doc["acc_at_3"] = *r.grade.acc_at_3;
  if (r.grade.level_correct) doc["level_correct"] = *r.grade.level_correct;
  if (r.grade.type_correct) doc["type_correct"] = *r.grade.type_correct;
  if (r.grade.health) doc["health"] = ToJson(*r.grade.health);
  return doc;
}

absl::StatusOr<EvalReport> EvalReportFromJson(const json& doc) {
  try {
    EvalReport r;
    r.pid = doc.at("pid").get<std::string>();
    r.agent = doc.at("agent").get<std::string>();
    auto task = ParseTaskLevel(doc.at("task").get<std::string>());
    auto status = ParseSessionStatus(doc.at("status").get<std::string>());
    if (!task || !status) {
      return absl::InvalidArgumentError("report has a bad task or status");
    }
    r.task = *task;
    r.status = *status;
    r.abort_reason = doc.value("abort_reason", "");
    r.submission = doc.value("submission", "");
    r.grade.success = doc.at("success").get<bool>();
    r.grade.reason = doc.value("reason", "");
    if (doc.contains("acc_at_1")) r.grade.acc_at_1 = doc["acc_at_1"].get<bool>();
    if (doc.contains("acc_at_3")) r.grade.acc_at_3 = doc["acc_at_3"].get<bool>();
    if (doc.contains("level_correct")) {
      r.grade.level_correct = doc["level_correct"].get<bool>();
    }
    if (doc.contains("type_correct")) {
      r.grade.type_correct = doc["type_correct"].get<bool>();
    }
    if (doc.contains("health")) {
      HealthVerdict v;
      v.healthy = doc["health"].at("healthy").get<bool>();
      r.grade.health = v;
    }
    if (doc.contains("time_s") && !doc["time_s"].is_null()) {
      r.time_s = doc["time_s"].get<int64_t>();
    }
    r.steps = doc.at("steps").get<int>();
    r.max_steps = doc.value("max_steps", 0);
    r.step_stride_s = doc.value("step_stride_s", int64_t{0});
    r.seed = doc.value("seed", uint64_t{0});
    r.input_tokens = doc.value("input_tokens", int64_t{0});
    r.output_tokens = doc.value("output_tokens", int64_t{0});
    r.trajectory_ref = doc.value("trajectory", "");
    return r;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(StrCat("bad report: ", e.what()));
  }
}

ActionCounts CountActions(const std::vector<std::string>& raw_actions) {
  ActionCounts counts;
  for (const std::string& raw : raw_actions) {
    ++counts.total;
    absl::StatusOr<Call> call = ParseAction(raw);
    if (!call.ok() || FindApi(call->name) == nullptr) {
      ++counts.by_api["invalid"];
      continue;
    }
    ++counts.by_api[call->name];
    if (call->name == "exec_shell" && !call->args.empty() &&
        call->args[0].value.is_string()) {
      std::string verb = ShellVerb(call->args[0].value.str());
      ++counts.by_shell_verb[verb.empty() ? "other" : verb];
    }
  }
  return counts;
}

AggregateSummary Aggregate(const std::vector<ReportInput>& inputs) {
  struct Acc {
    int count = 0;
    int successes = 0;
    int acc3 = 0;
    bool has_acc3 = false;
    int timed = 0;
    double time_sum = 0;
    double steps = 0;
    double in = 0;
    double out = 0;
  };
  std::map<std::pair<std::string, int>, Acc> groups;
  std::map<std::string, std::vector<std::string>> actions;
  for (const ReportInput& in : inputs) {
    const EvalReport& r = in.report;
    Acc& a = groups[{r.agent, static_cast<int>(r.task)}];
    ++a.count;
    a.successes += r.grade.success ? 1 : 0;
    if (r.task == TaskLevel::kLocalization) {
      a.has_acc3 = true;
      a.acc3 += r.grade.acc_at_3.value_or(false) ? 1 : 0;
    }
    if (r.time_s) {
      ++a.timed;
      a.time_sum += static_cast<double>(*r.time_s);
    }
    a.steps += r.steps;
    a.in += static_cast<double>(r.input_tokens);
    a.out += static_cast<double>(r.output_tokens);
    auto& list = actions[r.agent];
    list.insert(list.end(), in.actions.begin(), in.actions.end());
  }

  AggregateSummary summary;
  for (const auto& [key, a] : groups) {
    TaskSummary t;
    t.agent = key.first;
    t.task = static_cast<TaskLevel>(key.second);
    t.count = a.count;
    t.successes = a.successes;
    t.accuracy_pct = Pct(a.successes, a.count);
    if (a.has_acc3) t.acc_at_3_pct = Pct(a.acc3, a.count);
    if (a.timed > 0) t.mean_time_s = a.time_sum / a.timed;
    t.mean_steps = a.steps / a.count;
    t.mean_input_tokens = a.in / a.count;
    t.mean_output_tokens = a.out / a.count;
    summary.tasks.push_back(std::move(t));
  }
  for (auto& [agent, list] : actions) {
    summary.actions[agent] = CountActions(list);
  }
  return summary;
}

std::string FormatAggregate(const AggregateSummary& summary) {
  std::string out = fmt::format(
      "{:<28} {:<13} {:>5} {:>7} {:>7} {:>8} {:>6} {:>9} {:>9}\n", "agent",
      "task", "n", "acc%", "acc@3%", "time_s", "steps", "in_tok", "out_tok");
  for (const TaskSummary& t : summary.tasks) {
    StrAppend(&out,
              fmt::format("{:<28} {:<13} {:>5} {:>7.1f} {:>7} {:>8} {:>6.1f} "
                          "{:>9.0f} {:>9.0f}\n",
                          t.agent, TaskName(t.task), t.count, t.accuracy_pct,
                          FormatOptional(t.acc_at_3_pct, 1),
                          FormatOptional(t.mean_time_s, 1), t.mean_steps,
                          t.mean_input_tokens, t.mean_output_tokens));
  }
  for (const auto& [agent, counts] : summary.actions) {
    StrAppend(&out, "\nactions of ", agent, " (", counts.total, " total)\n");
    for (const auto& [api, n] : counts.by_api) {
      StrAppend(&out, fmt::format("  {:<24} {:>6} {:>6.1f}%\n", api, n,
                                  100.0 * n / std::max<int64_t>(1, counts.total)));
    }
    for (const auto& [verb, n] : counts.by_shell_verb) {
      StrAppend(&out, fmt::format("    exec_shell {:<20} {:>6}\n", verb, n));
    }
  }
  return out;
}

json ToJson(const AggregateSummary& summary) {
  json tasks = json::array();
  for (const TaskSummary& t : summary.tasks) {
    tasks.push_back({
        {"agent", t.agent},
        {"task", TaskSlug(t.task)},
        {"count", t.count},
        {"successes", t.successes},
        {"accuracy_pct", t.accuracy_pct},
        {"acc_at_3_pct", t.acc_at_3_pct ? json(*t.acc_at_3_pct) : json()},
        {"mean_time_s", t.mean_time_s ? json(*t.mean_time_s) : json()},
        {"mean_steps", t.mean_steps},
        {"mean_input_tokens", t.mean_input_tokens},
        {"mean_output_tokens", t.mean_output_tokens},
    });
  }
  json actions = json::object();
  for (const auto& [agent, counts] : summary.actions) {
    actions[agent] = {{"total", counts.total},
                      {"by_api", counts.by_api},
                      {"by_shell_verb", counts.by_shell_verb}};
  }
  return {{"tasks", tasks}, {"actions", actions}};
}

SweepRow SummarizeSweep(int max_steps, const std::vector<EvalReport>& reports) {
  SweepRow row;
  row.max_steps = max_steps;
  double steps = 0;
  for (const EvalReport& r : reports) {
    ++row.count;
    row.successes += r.grade.success ? 1 : 0;
    steps += r.steps;
  }
  row.accuracy_pct = Pct(row.successes, row.count);
  row.mean_steps = row.count == 0 ? 0 : steps / row.count;
  return row;
}

std::string FormatSweep(std::string_view agent,
                        const std::vector<SweepRow>& rows) {
  std::string out = StrCat("agent: ", agent, "\n");
  StrAppend(&out, fmt::format("{:>9} {:>5} {:>8} {:>7} {:>6}\n", "max_steps",
                              "n", "success", "acc%", "steps"));
  for (const SweepRow& r : rows) {
    StrAppend(&out, fmt::format("{:>9} {:>5} {:>8} {:>7.1f} {:>6.1f}\n",
                                r.max_steps, r.count, r.successes,
                                r.accuracy_pct, r.mean_steps));
  }
  return out;
}

json ToJson(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const SweepRow& r : rows) {
    out.push_back({{"max_steps", r.max_steps},
                   {"count", r.count},
                   {"successes", r.successes},
                   {"accuracy_pct", r.accuracy_pct},
                   {"mean_steps", r.mean_steps}});
  }
  return out;
}

bool AccuracyNondecreasing(const std::vector<SweepRow>& rows) {
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].max_steps < rows[i - 1].max_steps) return false;
    if (rows[i].successes < rows[i - 1].successes) return false;
  }
  return true;
}

}  // namespace opsarena
