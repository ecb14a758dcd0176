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

// Builtin agents used to exercise the harness:
//
//   oracle      reads the hidden problem and answers it (test agent)
//   bad_fixer   oracle, plus a collateral scale-to-zero (test agent)
//   random      uniformly random API calls, seeded
//   always_yes  submit("yes") on the first step
//   k_sigma     metric-threshold detector over get_metrics output

#ifndef OPSARENA_BASELINES_H_
#define OPSARENA_BASELINES_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "opsarena/agents.h"
#include "opsarena/hashing.h"
#include "opsarena/problems.h"
#include "opsarena/telemetry.h"

namespace opsarena {

const std::vector<std::string_view>& BuiltinAgentNames();

// `name` without the "builtin:" prefix. Errors: NotFound.
absl::StatusOr<std::unique_ptr<Agent>> MakeBuiltinAgent(std::string_view name,
                                                        uint64_t seed = 0);

// "builtin:<name>", "exec:<command line>" or "human" (stdin/stdout).
// Errors: InvalidArgument, NotFound.
absl::StatusOr<std::unique_ptr<Agent>> MakeAgent(
    std::string_view spec, uint64_t seed,
    std::chrono::milliseconds step_timeout = ExecAgent::kDefaultStepTimeout);

// exec_shell("<command>") with proper quoting.
std::string ShellAction(std::string_view command);

// The action sequence that solves `problem`, ending in submit.
std::vector<std::string> OracleActions(const Problem& problem);

class OracleAgent : public Agent {
 public:
  std::string spec() const override { return "builtin:oracle"; }
  absl::Status Init(const Information& info) override;
  absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) override;
  bool needs_backdoor() const override { return true; }
  void OnBackdoor(const Problem& problem) override;

 protected:
  std::vector<std::string> plan_;
  size_t next_ = 0;
};

// Fixes the fault like the oracle, then scales a random bystander service
// to zero before submitting. Answers other tasks like the oracle.
class BadFixerAgent : public OracleAgent {
 public:
  explicit BadFixerAgent(uint64_t seed) : seed_(seed) {}
  std::string spec() const override { return "builtin:bad_fixer"; }
  void OnBackdoor(const Problem& problem) override;

  const std::string& bystander() const { return bystander_; }

 private:
  uint64_t seed_;
  std::string bystander_;
};

// Uniform over the five APIs with random, read-only arguments. The stream
// is keyed by the seed and the problem text it was initialized with.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string spec() const override { return "builtin:random"; }
  absl::Status Init(const Information& info) override;
  absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) override;

 private:
  std::string Pick(const std::vector<std::string>& options);
  std::string RandomSubmit();

  uint64_t seed_;
  SeededSequence rng_;
  std::string ns_;
  std::optional<TaskLevel> task_;
  std::vector<std::string> services_;
  std::vector<std::string> pods_;
};

class AlwaysYesAgent : public Agent {
 public:
  std::string spec() const override { return "builtin:always_yes"; }
  absl::Status Init(const Information&) override { return absl::OkStatus(); }
  absl::StatusOr<AgentTurn> GetAction(const StateMessage&) override {
    return AgentTurn{"submit(\"yes\")", {}};
  }
};

inline constexpr double kDefaultSigmaK = 3.0;
inline constexpr int kDefaultRecentBuckets = 30;

// True if some service's mean over the last `recent` buckets exceeds the
// mean of the earlier buckets by more than k standard deviations of them.
bool KSigmaDetect(const MetricTable& table, double k = kDefaultSigmaK,
                  int recent = kDefaultRecentBuckets);

// Reads error_rate.csv of a metrics directory and runs KSigmaDetect.
absl::StatusOr<bool> KSigmaDetectDir(const std::string& metrics_dir,
                                     double k = kDefaultSigmaK,
                                     int recent = kDefaultRecentBuckets);

// get_metrics over a short window, cat error_rate.csv, then answer.
class KSigmaAgent : public Agent {
 public:
  static constexpr int64_t kWindowS = 240;

  explicit KSigmaAgent(double k = kDefaultSigmaK) : k_(k) {}
  std::string spec() const override { return "builtin:k_sigma"; }
  absl::Status Init(const Information& info) override;
  absl::StatusOr<AgentTurn> GetAction(const StateMessage& state) override;

 private:
  double k_;
  std::string ns_;
  int phase_ = 0;
  std::string metrics_dir_;
};

}  // namespace opsarena

#endif  // OPSARENA_BASELINES_H_
