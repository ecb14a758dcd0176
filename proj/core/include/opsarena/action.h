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

// Agent action grammar:
//
//   action  := ident "(" [ arg { "," arg } ] ")"
//   arg     := [ ident "=" ] literal
//   literal := string | integer | "[" [ literal { "," literal } ] "]"
//
// Strings take single or double quotes with backslash escapes. Exactly one
// call per action; surrounding whitespace is ignored.

#ifndef OPSARENA_ACTION_H_
#define OPSARENA_ACTION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace opsarena {

struct Value {
  std::variant<std::string, int64_t, std::vector<Value>> v;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_int() const { return std::holds_alternative<int64_t>(v); }
  bool is_list() const { return std::holds_alternative<std::vector<Value>>(v); }
  const std::string& str() const { return std::get<std::string>(v); }
  int64_t integer() const { return std::get<int64_t>(v); }
  const std::vector<Value>& list() const {
    return std::get<std::vector<Value>>(v);
  }
  bool operator==(const Value&) const = default;
};

// Source-form rendering, e.g. ["a", 3].
std::string FormatLiteral(const Value& value);
nlohmann::json ToJson(const Value& value);

struct Arg {
  std::optional<std::string> keyword;
  Value value;

  bool operator==(const Arg&) const = default;
};

struct Call {
  std::string name;
  std::vector<Arg> args;

  bool operator==(const Call&) const = default;
};

// Parse errors are InvalidArgument with a message naming the offset.
absl::StatusOr<Call> ParseAction(std::string_view raw);
std::string FormatCall(const Call& call);
nlohmann::json ToJson(const Call& call);

// Quotes `s` as an action string literal.
std::string QuoteString(std::string_view s);

}  // namespace opsarena

#endif  // OPSARENA_ACTION_H_
