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

// opsarena: list problems, run sessions, export telemetry, aggregate
// reports.
//
//   opsarena list --filter task=Detection
//   opsarena run --pid misconfig_app_hotel_res-mitigation-1
//       --agent builtin:oracle --allow-test-agents
//   opsarena export --pid network_loss_hotel_res-detection-1 --duration 300
//   opsarena report 'opsarena-out/*/report.json'
//   opsarena report --sweep --agent builtin:random --filter task=Detection
//
// Defaults can be set in a TOML file named by $OPSARENA_CONFIG, with one
// table per subcommand ([run], [report], ...). Flags win over the file.

#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fmt/format.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "opsarena/baselines.h"
#include "opsarena/evaluator.h"
#include "opsarena/orchestrator.h"
#include "opsarena/problems.h"
#include "opsarena/strings.h"

namespace opsarena {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kMaxStepsLimit = 30;
constexpr int kExitFailure = 1;
// Usage errors, unknown ids, protocol failures and aborted sessions.
constexpr int kExitError = 2;

struct Flags {
  std::string pid;
  std::string agent = "builtin:random";
  int max_steps = kDefaultMaxSteps;
  uint64_t seed = 0;
  int64_t step_stride_s = kDefaultStepStrideS;
  std::string out;
  std::string filter;
  int64_t duration_s = 300;
  bool allow_test_agents = false;
  int step_timeout_s = 120;
  bool sweep = false;
  bool unredacted = false;
  bool json = false;
  std::vector<std::string> inputs;
};

int Fail(const absl::Status& status) {
  std::cerr << "opsarena: " << status.message() << "\n";
  return kExitError;
}

absl::StatusOr<std::vector<const Problem*>> SelectProblems(const Flags& f) {
  const ProblemRegistry& registry = ProblemRegistry::Default();
  if (!f.pid.empty()) {
    absl::StatusOr<const Problem*> p = registry.Find(f.pid);
    if (!p.ok()) return p.status();
    return std::vector<const Problem*>{*p};
  }
  absl::StatusOr<ProblemFilter> filter = ParseProblemFilter(f.filter);
  if (!filter.ok()) return filter.status();
  return registry.List(*filter);
}

SessionConfig ConfigFrom(const Flags& f, std::string_view default_out) {
  SessionConfig c;
  c.seed = f.seed;
  c.step_stride_s = f.step_stride_s;
  c.out_dir = f.out.empty() ? fs::path(default_out) : fs::path(f.out);
  c.allow_test_agents = f.allow_test_agents || TestAgentsAllowedByEnv();
  return c;
}

int CmdList(const Flags& f) {
  absl::StatusOr<std::vector<const Problem*>> problems = SelectProblems(f);
  if (!problems.ok()) return Fail(problems.status());
  if (f.json) {
    json out = json::array();
    json catalog = ProblemRegistry::Default().Catalog();
    for (const Problem* p : *problems) {
      for (const json& row : catalog) {
        if (row["pid"] == p->pid) out.push_back(row);
      }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::string table = fmt::format("{:<48} {:<14} {:<4} {:<12}\n", "pid", "app",
                             "fault", "task");
  for (const Problem* p : *problems) {
    StrAppend(&table,
              fmt::format("{:<48} {:<14} {:<4} {:<12}\n", p->pid,
                     AppNameString(p->app), FaultNumber(p->fault.name),
                     TaskName(p->task)));
  }
  StrAppend(&table, fmt::format("{} problems\n", problems->size()));
  std::cout << table;
  return 0;
}

int CmdRun(const Flags& f) {
  if (f.max_steps < 0 || f.max_steps > kMaxStepsLimit) {
    return Fail(absl::InvalidArgumentError(
        StrCat("--max-steps must be in [0, ", kMaxStepsLimit, "]")));
  }
  absl::StatusOr<std::vector<const Problem*>> problems = SelectProblems(f);
  if (!problems.ok()) return Fail(problems.status());
  if (problems->empty()) {
    return Fail(absl::InvalidArgumentError("no problem matches"));
  }
  SessionConfig config = ConfigFrom(f, "opsarena-out");
  bool all_ok = true;
  bool aborted = false;
  for (const Problem* p : *problems) {
    absl::StatusOr<std::unique_ptr<Agent>> agent =
        MakeAgent(f.agent, f.seed, std::chrono::seconds(f.step_timeout_s));
    if (!agent.ok()) return Fail(agent.status());
    absl::StatusOr<SessionResult> r = RunSession(*p, **agent, config,
                                                 f.max_steps);
    if (!r.ok()) return Fail(r.status());
    const EvalReport& report = r->report;
    std::cout << fmt::format("{} {} status={} success={} reason={} steps={}\n",
                        report.pid, report.agent,
                        SessionStatusName(report.status),
                        report.success() ? "true" : "false",
                        report.grade.reason.empty() ? "-" : report.grade.reason,
                        report.steps);
    std::cout << "  report: " << r->report_path.string() << "\n"
              << "  trajectory: " << r->trajectory_path.string() << "\n";
    if (report.status == SessionStatus::kAborted) {
      std::cerr << "opsarena: session aborted: " << report.abort_reason
                << "\n";
      aborted = true;
    }
    all_ok = all_ok && report.success();
  }
  if (aborted) return kExitError;
  return all_ok ? 0 : kExitFailure;
}

int CmdExport(const Flags& f) {
  if (f.pid.empty()) {
    return Fail(absl::InvalidArgumentError("export needs --pid"));
  }
  absl::StatusOr<const Problem*> p = ProblemRegistry::Default().Find(f.pid);
  if (!p.ok()) return Fail(p.status());
  fs::path dir = f.out.empty() ? fs::path("opsarena-export") / f.pid
                               : fs::path(f.out);
  absl::Status s =
      ExportProblem(**p, f.seed, f.duration_s, dir, !f.unredacted);
  if (!s.ok()) return Fail(s);
  std::cout << "dataset: " << dir.string() << "\n";
  return 0;
}

// Expands shell-style patterns; directories are searched for report.json.
absl::StatusOr<std::vector<fs::path>> ExpandReportPaths(
    const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& pattern : inputs) {
    glob_t g;
    int rc = glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == GLOB_NOMATCH) {
      globfree(&g);
      return absl::NotFoundError(StrCat("no match for '", pattern, "'"));
    }
    if (rc != 0) {
      globfree(&g);
      return absl::InvalidArgumentError(StrCat("bad pattern '", pattern, "'"));
    }
    for (size_t i = 0; i < g.gl_pathc; ++i) {
      fs::path path = g.gl_pathv[i];
      if (fs::is_directory(path)) {
        for (const auto& entry : fs::recursive_directory_iterator(path)) {
          if (entry.path().filename() == "report.json") {
            out.push_back(entry.path());
          }
        }
      } else {
        out.push_back(path);
      }
    }
    globfree(&g);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

absl::StatusOr<ReportInput> LoadReport(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(StrCat("cannot read ", path.string()));
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(StrCat(path.string(), ": not JSON"));
  }
  absl::StatusOr<EvalReport> report = EvalReportFromJson(doc);
  if (!report.ok()) return report.status();
  ReportInput input{std::move(*report), {}};
  fs::path trajectory = path.parent_path() / input.report.trajectory_ref;
  if (!input.report.trajectory_ref.empty() && fs::exists(trajectory)) {
    absl::StatusOr<Trajectory> t = ReadTrajectoryFile(trajectory);
    if (!t.ok()) return t.status();
    input.actions = t->actions();
  }
  return input;
}

int CmdSweep(const Flags& f) {
  absl::StatusOr<std::vector<const Problem*>> problems = SelectProblems(f);
  if (!problems.ok()) return Fail(problems.status());
  SessionConfig config = ConfigFrom(f, "opsarena-sweep");
  AgentFactory factory = [&f]() {
    return MakeAgent(f.agent, f.seed, std::chrono::seconds(f.step_timeout_s));
  };
  std::vector<int> limits(std::begin(kSweepLimits), std::end(kSweepLimits));
  absl::StatusOr<std::vector<SweepRow>> rows =
      RunStepLimitSweep(*problems, factory, config, limits);
  if (!rows.ok()) return Fail(rows.status());
  std::cout << FormatSweep(f.agent, *rows);
  json doc = {{"agent", f.agent}, {"seed", f.seed}, {"rows", ToJson(*rows)}};
  fs::path json_path = config.out_dir / "sweep.json";
  std::ofstream(json_path) << doc.dump(2) << "\n";
  std::cout << "sweep: " << json_path.string() << "\n";
  return 0;
}

int CmdReport(const Flags& f) {
  if (f.sweep) return CmdSweep(f);
  std::vector<std::string> inputs = f.inputs;
  if (inputs.empty()) inputs.push_back("opsarena-out");
  absl::StatusOr<std::vector<fs::path>> paths = ExpandReportPaths(inputs);
  if (!paths.ok()) return Fail(paths.status());
  std::vector<ReportInput> reports;
  for (const fs::path& path : *paths) {
    absl::StatusOr<ReportInput> r = LoadReport(path);
    if (!r.ok()) return Fail(r.status());
    reports.push_back(std::move(*r));
  }
  AggregateSummary summary = Aggregate(reports);
  std::cout << FormatAggregate(summary);
  if (!f.out.empty()) {
    std::ofstream out(f.out);
    if (!out) {
      return Fail(absl::PermissionDeniedError(StrCat("cannot write ", f.out)));
    }
    out << ToJson(summary).dump(2) << "\n";
  }
  return 0;
}

void AddSessionFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--agent", f.agent,
                  "builtin:<name>, exec:<command line> or human")
      ->capture_default_str();
  cmd->add_option("--max-steps", f.max_steps, "step limit")
      ->check(CLI::Range(0, kMaxStepsLimit))
      ->capture_default_str();
  cmd->add_option("--step-stride", f.step_stride_s,
                  "sim-seconds the clock advances per step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--allow-test-agents", f.allow_test_agents,
                "permit builtin:oracle and builtin:bad_fixer");
  cmd->add_option("--step-timeout", f.step_timeout_s,
                  "seconds to wait for an exec agent's reply")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

int Main(int argc, char** argv) {
  CLI::App app{"Evaluation arena for operations agents", "opsarena"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML defaults file")
      ->envname("OPSARENA_CONFIG");
  Flags f;

  CLI::App* list = app.add_subcommand("list", "list the problem pool");
  list->add_option("--filter", f.filter, "e.g. task=Detection,app=HotelReservation,fault=2");
  list->add_option("--pid", f.pid, "a single problem");
  list->add_flag("--json", f.json, "print the catalog as JSON");

  CLI::App* run = app.add_subcommand("run", "run sessions");
  run->add_option("--pid", f.pid, "problem id");
  run->add_option("--filter", f.filter, "run every matching problem");
  run->add_option("--seed", f.seed, "environment and agent seed");
  run->add_option("--out", f.out, "output directory [opsarena-out]");
  AddSessionFlags(run, f);

  CLI::App* exp = app.add_subcommand("export", "export a telemetry dataset");
  exp->add_option("--pid", f.pid, "problem id")->required();
  exp->add_option("--duration", f.duration_s,
                  "sim-seconds of workload after injection")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  exp->add_option("--seed", f.seed, "environment seed");
  exp->add_option("--out", f.out, "dataset directory");
  exp->add_flag("--unredacted", f.unredacted,
                "include the fault schedule in the manifest");

  CLI::App* report = app.add_subcommand("report", "aggregate session reports");
  report->add_option("inputs", f.inputs,
                     "report.json files, directories or glob patterns");
  report->add_option("--out", f.out,
                     "JSON summary file; with --sweep, the session directory");
  report->add_flag("--sweep", f.sweep,
                   "rerun --agent at step limits 5, 10, 15 and 20");
  report->add_option("--filter", f.filter, "problems for --sweep");
  report->add_option("--pid", f.pid, "a single problem for --sweep");
  report->add_option("--seed", f.seed, "seed for --sweep");
  AddSessionFlags(report, f);

  CLI11_PARSE(app, argc, argv);
  if (*list) return CmdList(f);
  if (*run) {
    if (f.pid.empty() && f.filter.empty()) {
      return Fail(absl::InvalidArgumentError("run needs --pid or --filter"));
    }
    return CmdRun(f);
  }
  if (*exp) return CmdExport(f);
  return CmdReport(f);
}

}  // namespace
}  // namespace opsarena

int main(int argc, char** argv) { return opsarena::Main(argc, argv); }
