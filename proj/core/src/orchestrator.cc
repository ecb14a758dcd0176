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

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <tuple>

#include "opsarena/aci.h"
#include "opsarena/errors.h"
#include "opsarena/health.h"
#include "opsarena/protocol.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Warmed, fault-free environments. A handful of seeds covers any sweep.
constexpr size_t kWarmupCacheSize = 8;

using WarmupKey = std::tuple<int, uint64_t, int, int64_t, std::string>;

struct WarmupCache {
  std::mutex mu;
  std::vector<std::pair<WarmupKey, std::unique_ptr<Environment>>> entries;
};

WarmupCache& Cache() {
  static auto* cache = new WarmupCache;
  return *cache;
}

absl::StatusOr<std::unique_ptr<Environment>> WarmUp(const Problem& problem,
                                                    uint64_t seed) {
  WarmupKey key{static_cast<int>(problem.app), seed, problem.workload.rate,
                problem.warmup_s, problem.workload.entry};
  WarmupCache& cache = Cache();
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    for (const auto& [k, env] : cache.entries) {
      if (k == key) return env->Clone();
    }
  }
  absl::StatusOr<ClusterState> state = LoadApp(problem.app);
  if (!state.ok()) return state.status();
  auto env = std::make_unique<Environment>();
  env->state = *std::move(state);
  env->kernel = SimKernel(&env->state, &env->store, seed);
  WorkloadSpec workload = problem.workload;
  workload.seed = seed;
  if (workload.entry.empty()) workload.entry = env->state.entry_service();
  if (absl::Status s = env->kernel.StartWorkload(workload); !s.ok()) return s;
  env->kernel.AdvanceSeconds(problem.warmup_s);

  std::lock_guard<std::mutex> lock(cache.mu);
  if (cache.entries.size() >= kWarmupCacheSize) {
    cache.entries.erase(cache.entries.begin());
  }
  cache.entries.emplace_back(key, env->Clone());
  return env;
}

std::string ParseErrorObservation(const absl::Status& status) {
  std::string_view msg(status.message().data(), status.message().size());
  return StrCat("Error: could not parse action: ", msg,
                "\nRespond with exactly one API call, for example "
                "get_logs(\"<namespace>\", \"<service>\").");
}

json HeaderJson(const TrajectoryHeader& h) {
  return {{"format", kTrajectoryFormat},
          {"version", kTrajectoryFormatVersion},
          {"pid", h.pid},
          {"agent", h.agent},
          {"seed", h.seed},
          {"max_steps", h.max_steps},
          {"step_stride_s", h.step_stride_s},
          {"warmup_s", h.warmup_s}};
}

struct SessionOutcome {
  SessionStatus status = SessionStatus::kRunning;
  std::string abort_reason;
  std::optional<Call> submission;
  std::string submission_raw;
};

// The step loop. Fills `trajectory` and the token counts of `report`.
SessionOutcome RunLoop(const Problem& problem, Agent& agent, Environment& env,
                       TelemetryApi& telemetry, int max_steps,
                       Trajectory& trajectory, EvalReport& report) {
  SessionOutcome out;
  const Information info = problem.information();
  if (absl::Status s = agent.Init(info); !s.ok()) {
    out.status = SessionStatus::kAborted;
    out.abort_reason = std::string(s.message());
    return out;
  }
  AciDispatcher dispatcher(&env.state, &telemetry);
  const int64_t stride_s = env.kernel.clock().step_stride_s;
  std::string observation = info.Text();
  for (int step = 1; step <= max_steps; ++step) {
    StateMessage state{step, observation};
    absl::StatusOr<AgentTurn> turn = agent.GetAction(state);
    if (!turn.ok()) {
      out.status = SessionStatus::kAborted;
      out.abort_reason = std::string(turn.status().message());
      return out;
    }
    TrajectoryStep record;
    record.step = step;
    record.action = turn->action;
    record.input_tokens =
        turn->usage.input_tokens.value_or(EstimateTokens(observation));
    record.output_tokens =
        turn->usage.output_tokens.value_or(EstimateTokens(turn->action));
    report.input_tokens += record.input_tokens;
    report.output_tokens += record.output_tokens;

    // The agent's turn takes one stride of sim-time, submit included.
    env.kernel.AdvanceSeconds(stride_s);
    record.sim_time_s = env.seconds_since_injection();

    absl::StatusOr<Call> call = ParseAction(turn->action);
    bool submitted = false;
    if (!call.ok()) {
      record.api = "invalid";
      observation = ParseErrorObservation(call.status());
    } else if (call->name == kSubmitApi) {
      record.api = call->name;
      absl::StatusOr<BoundArgs> bound = BindArgs(*FindApi(kSubmitApi), *call);
      if (!bound.ok()) {
        observation = std::string(bound.status().message());
      } else {
        observation = "Submission received.";
        submitted = true;
      }
    } else {
      record.api = FindApi(call->name) ? call->name : "invalid";
      observation = dispatcher.Dispatch(*call);
    }
    record.observation = observation;
    trajectory.steps.push_back(std::move(record));
    if (submitted) {
      out.status = SessionStatus::kSubmitted;
      out.submission = *call;
      out.submission_raw = turn->action;
      return out;
    }
  }
  out.status = SessionStatus::kStepLimitReached;
  return out;
}

absl::StatusOr<SessionResult> RunOnEnvironment(const Problem& problem,
                                               Agent& agent,
                                               std::unique_ptr<Environment> env,
                                               const SessionConfig& config,
                                               int max_steps) {
  const auto wall_start = std::chrono::steady_clock::now();
  SessionResult result;
  result.session_dir = config.out_dir / problem.pid;
  std::error_code ec;
  fs::remove_all(result.session_dir, ec);
  fs::create_directories(result.session_dir / "telemetry", ec);
  if (ec) {
    return absl::InternalError(StrCat("cannot create ",
                                      result.session_dir.string(), ": ",
                                      ec.message()));
  }
  result.trajectory_path = result.session_dir / "trajectory.jsonl";
  result.report_path = result.session_dir / "report.json";

  EvalReport& report = result.report;
  report.pid = problem.pid;
  report.agent = agent.spec();
  report.task = problem.task;
  report.max_steps = max_steps;
  report.step_stride_s = config.step_stride_s;
  report.seed = config.seed;
  report.trajectory_ref = "trajectory.jsonl";

  Trajectory& trajectory = result.trajectory;
  trajectory.header = {problem.pid,  report.agent,
                       config.seed,  max_steps,
                       config.step_stride_s, problem.warmup_s};

  SessionOutcome outcome;
  if (agent.needs_backdoor() && !config.allow_test_agents &&
      !TestAgentsAllowedByEnv()) {
    outcome.status = SessionStatus::kAborted;
    outcome.abort_reason = StrCat(
        "agent ", report.agent,
        " reads the hidden problem and runs only with --allow-test-agents "
        "or ", kAllowTestAgentsEnv, "=1");
  } else {
    if (agent.needs_backdoor()) agent.OnBackdoor(problem);
    TelemetryApi telemetry(&env->state, &env->store,
                           result.session_dir / "telemetry");
    outcome = RunLoop(problem, agent, *env, telemetry, max_steps, trajectory,
                      report);
  }
  report.status = outcome.status;
  report.abort_reason = outcome.abort_reason;
  report.steps = static_cast<int>(trajectory.steps.size());

  // Persist before grading.
  if (absl::Status s =
          WriteTextFile(result.trajectory_path, FormatTrajectory(trajectory));
      !s.ok()) {
    return s;
  }

  if (outcome.submission) {
    report.submission = outcome.submission_raw;
    report.time_s = env->seconds_since_injection();
    std::vector<Value> payload = SubmissionPayload(*outcome.submission);
    switch (problem.task) {
      case TaskLevel::kDetection:
        report.grade = EvalDetection(payload, problem.solution);
        break;
      case TaskLevel::kLocalization:
        report.grade = EvalLocalization(payload, problem.solution);
        break;
      case TaskLevel::kAnalysis:
        report.grade = EvalAnalysis(payload, problem.solution);
        break;
      case TaskLevel::kMitigation:
        env->kernel.AdvanceSeconds(kMitigationSettleS);
        report.grade = EvalMitigation(HealthCheck(env->state, env->store));
        break;
    }
  } else {
    report.grade = NoSubmissionGrade(problem.task, outcome.status);
  }

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    wall_start)
          .count();
  json report_json = ToJson(report);
  if (absl::Status s =
          WriteTextFile(result.report_path, report_json.dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  json timing = {{"wall_time_s", report.wall_time_s}};
  if (absl::Status s = WriteTextFile(result.session_dir / "timing.json",
                                 timing.dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  agent.OnResult(report_json);
  return result;
}

}  // namespace

std::unique_ptr<Environment> Environment::Clone() const {
  auto copy = std::make_unique<Environment>();
  copy->state = state;
  copy->store = store;
  copy->kernel = kernel;
  copy->kernel.Rebind(&copy->state, &copy->store);
  copy->injector = injector;
  copy->injection = injection;
  copy->inject_ms = inject_ms;
  return copy;
}

absl::StatusOr<std::unique_ptr<Environment>> DeployProblem(
    const Problem& problem, uint64_t seed, int64_t step_stride_s) {
  absl::StatusOr<std::unique_ptr<Environment>> env = WarmUp(problem, seed);
  if (!env.ok()) return env.status();
  Environment& e = **env;
  e.kernel.mutable_clock().step_stride_s = step_stride_s;
  e.inject_ms = e.kernel.now_ms();
  if (!problem.is_noop()) {
    absl::StatusOr<InjectionRecord> record =
        e.injector.Inject(e.state, problem.fault);
    if (!record.ok()) return record.status();
    e.injection = *std::move(record);
  }
  return env;
}

void ClearWarmupCache() {
  WarmupCache& cache = Cache();
  std::lock_guard<std::mutex> lock(cache.mu);
  cache.entries.clear();
}

bool TestAgentsAllowedByEnv() {
  const char* v = std::getenv(std::string(kAllowTestAgentsEnv).c_str());
  return v != nullptr && std::string_view(v) == "1";
}

json ToJson(const TrajectoryStep& s) {
  return {{"step", s.step},
          {"sim_time_s", s.sim_time_s},
          {"action", s.action},
          {"api", s.api},
          {"observation", s.observation},
          {"input_tokens", s.input_tokens},
          {"output_tokens", s.output_tokens}};
}

std::vector<std::string> Trajectory::actions() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const TrajectoryStep& s : steps) out.push_back(s.action);
  return out;
}

std::string FormatTrajectory(const Trajectory& trajectory) {
  std::string out = HeaderJson(trajectory.header).dump(
                        -1, ' ', false, json::error_handler_t::replace) +
                    "\n";
  for (const TrajectoryStep& s : trajectory.steps) {
    StrAppend(&out,
              ToJson(s).dump(-1, ' ', false, json::error_handler_t::replace),
              "\n");
  }
  return out;
}

absl::StatusOr<Trajectory> ParseTrajectory(std::string_view jsonl) {
  Trajectory t;
  bool have_header = false;
  int line_no = 0;
  for (std::string_view line : Split(jsonl, '\n', /*skip_empty=*/true)) {
    ++line_no;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
      return absl::InvalidArgumentError(
          StrCat("trajectory line ", line_no, " is not a JSON object"));
    }
    try {
      if (!have_header) {
        if (doc.value("format", "") != kTrajectoryFormat) {
          return absl::InvalidArgumentError("not a trajectory file");
        }
        t.header.pid = doc.at("pid").get<std::string>();
        t.header.agent = doc.at("agent").get<std::string>();
        t.header.seed = doc.at("seed").get<uint64_t>();
        t.header.max_steps = doc.at("max_steps").get<int>();
        t.header.step_stride_s = doc.at("step_stride_s").get<int64_t>();
        t.header.warmup_s = doc.at("warmup_s").get<int64_t>();
        have_header = true;
        continue;
      }
      TrajectoryStep s;
      s.step = doc.at("step").get<int>();
      s.sim_time_s = doc.at("sim_time_s").get<int64_t>();
      s.action = doc.at("action").get<std::string>();
      s.api = doc.at("api").get<std::string>();
      s.observation = doc.at("observation").get<std::string>();
      s.input_tokens = doc.at("input_tokens").get<int64_t>();
      s.output_tokens = doc.at("output_tokens").get<int64_t>();
      t.steps.push_back(std::move(s));
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          StrCat("trajectory line ", line_no, ": ", e.what()));
    }
  }
  if (!have_header) return absl::InvalidArgumentError("empty trajectory");
  return t;
}

absl::StatusOr<Trajectory> ReadTrajectoryFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(StrCat("cannot read ", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseTrajectory(buffer.str());
}

Orchestrator::Orchestrator(const ProblemRegistry* registry)
    : registry_(registry) {}

Orchestrator::~Orchestrator() = default;

absl::Status Orchestrator::RegisterAgent(std::string name,
                                         std::unique_ptr<Agent> agent) {
  if (agents_.count(name) > 0) {
    return TaggedError(absl::StatusCode::kAlreadyExists, kDuplicateName,
                       "agent ", name, " is already registered");
  }
  agents_.emplace(std::move(name), std::move(agent));
  return absl::OkStatus();
}

absl::StatusOr<Information> Orchestrator::InitProblem(
    std::string_view pid, const SessionConfig& config) {
  if (env_ != nullptr) {
    return TaggedError(absl::StatusCode::kFailedPrecondition, kSessionActive,
                       "problem ", problem_->pid,
                       " is still active; close it first");
  }
  absl::StatusOr<const Problem*> problem = registry_->Find(pid);
  if (!problem.ok()) return problem.status();
  absl::StatusOr<std::unique_ptr<Environment>> env =
      DeployProblem(**problem, config.seed, config.step_stride_s);
  if (!env.ok()) return env.status();
  problem_ = *problem;
  config_ = config;
  env_ = *std::move(env);
  return problem_->information();
}

absl::StatusOr<SessionResult> Orchestrator::StartProblem(
    std::string_view agent_name, int max_steps) {
  if (env_ == nullptr) {
    return absl::FailedPreconditionError("no problem is initialized");
  }
  auto it = agents_.find(agent_name);
  if (it == agents_.end()) {
    return absl::NotFoundError(StrCat("no agent named ", agent_name));
  }
  std::unique_ptr<Environment> env = std::move(env_);
  const Problem& problem = *problem_;
  CloseProblem();
  return RunOnEnvironment(problem, *it->second, std::move(env), config_,
                          max_steps);
}

void Orchestrator::CloseProblem() {
  env_.reset();
  problem_ = nullptr;
}

absl::StatusOr<SessionResult> RunSession(const Problem& problem, Agent& agent,
                                         const SessionConfig& config,
                                         int max_steps) {
  absl::StatusOr<std::unique_ptr<Environment>> env =
      DeployProblem(problem, config.seed, config.step_stride_s);
  if (!env.ok()) return env.status();
  return RunOnEnvironment(problem, agent, *std::move(env), config, max_steps);
}

absl::StatusOr<std::vector<SweepRow>> RunStepLimitSweep(
    const std::vector<const Problem*>& problems, const AgentFactory& factory,
    const SessionConfig& config, const std::vector<int>& limits) {
  std::vector<SweepRow> rows;
  for (int limit : limits) {
    SessionConfig c = config;
    c.out_dir = config.out_dir / StrCat("max_steps_", limit);
    std::vector<EvalReport> reports;
    for (const Problem* p : problems) {
      absl::StatusOr<std::unique_ptr<Agent>> agent = factory();
      if (!agent.ok()) return agent.status();
      absl::StatusOr<SessionResult> r = RunSession(*p, **agent, c, limit);
      if (!r.ok()) return r.status();
      reports.push_back(std::move(r->report));
    }
    rows.push_back(SummarizeSweep(limit, reports));
  }
  return rows;
}

absl::Status ExportProblem(const Problem& problem, uint64_t seed,
                           int64_t duration_s, const fs::path& dir,
                           bool redacted) {
  absl::StatusOr<std::unique_ptr<Environment>> env =
      DeployProblem(problem, seed);
  if (!env.ok()) return env.status();
  Environment& e = **env;
  e.kernel.AdvanceSeconds(duration_s);
  DatasetManifest manifest;
  manifest.problem_id = problem.pid;
  manifest.app = e.state.app_name();
  manifest.ns = e.state.app_namespace();
  manifest.seed = seed;
  manifest.step_stride_s = e.kernel.clock().step_stride_s;
  manifest.end_ms = e.kernel.now_ms();
  manifest.redacted = redacted;
  if (!redacted) {
    manifest.fault_schedule = json::array();
    if (e.injection) manifest.fault_schedule.push_back(ToJson(*e.injection));
  }
  return ExportDataset(dir, e.store, manifest);
}

}  // namespace opsarena
