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

#ifndef OPSARENA_TESTS_UNIT_TEST_UTIL_H_
#define OPSARENA_TESTS_UNIT_TEST_UTIL_H_

#include <cstdlib>
#include <filesystem>
#include <string>

#include "gtest/gtest.h"
#include "opsarena/errors.h"
#include "opsarena/hashing.h"
#include "opsarena/simkernel.h"
#include "opsarena/telemetry.h"
#include "opsarena/topology.h"

namespace opsarena::testing {

// Fresh scratch directory under the gtest temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  std::filesystem::path dir =
      std::filesystem::path(::testing::TempDir()) / "opsarena_tests" /
      (std::string(info->test_suite_name()) + "." + info->name() + "." + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// A loaded app with a bound store and kernel.
struct Sim {
  explicit Sim(AppName app, uint64_t seed = 7,
               RetentionPolicy retention = RetentionPolicy())
      : state(*LoadApp(app)), store(retention), kernel(&state, &store, seed) {}

  const std::string& ns() const { return state.app_namespace(); }

  absl::Status Start(int rate = 100, int64_t duration_s = 0) {
    WorkloadSpec spec;
    spec.rate = rate;
    spec.duration_s = duration_s;
    spec.entry = state.entry_service();
    return kernel.StartWorkload(spec);
  }

  ClusterState state;
  TelemetryStore store;
  SimKernel kernel;
};

}  // namespace opsarena::testing

#define EXPECT_ERROR_TAG(expr, tag)                                        \
  do {                                                                     \
    const auto& _status = (expr);                                          \
    EXPECT_TRUE(::opsarena::HasErrorTag(_status, tag))                     \
        << "expected tag " << tag << ", got: " << _status.ToString();      \
  } while (0)

#endif  // OPSARENA_TESTS_UNIT_TEST_UTIL_H_
