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

#include "opsarena/protocol.h"

#include "opsarena/errors.h"
#include "opsarena/strings.h"

namespace opsarena {

using json = nlohmann::json;

namespace {

absl::Status ProtocolError(std::string_view detail) {
  return TaggedError(absl::StatusCode::kInvalidArgument, kAgentProtocolError,
                     detail);
}

// Fetches a required field of the given JSON kind.
template <typename T>
absl::Status Field(const json& doc, const char* key, T* out) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    return ProtocolError(StrCat("missing field '", key, "'"));
  }
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) {
      return ProtocolError(StrCat("field '", key, "' must be a string"));
    }
  } else {
    if (!it->is_number_integer()) {
      return ProtocolError(StrCat("field '", key, "' must be an integer"));
    }
  }
  *out = it->get<T>();
  return absl::OkStatus();
}

absl::StatusOr<std::optional<int64_t>> OptionalCount(const json& usage,
                                                     const char* key) {
  auto it = usage.find(key);
  if (it == usage.end() || it->is_null()) return std::optional<int64_t>();
  if (!it->is_number_integer() || it->get<int64_t>() < 0) {
    return ProtocolError(
        StrCat("usage.", key, " must be a non-negative integer"));
  }
  return std::optional<int64_t>(it->get<int64_t>());
}

}  // namespace

std::string_view MessageType(const Message& message) {
  switch (message.index()) {
    case 0:
      return "hello";
    case 1:
      return "init";
    case 2:
      return "state";
    case 3:
      return "action";
    case 4:
      return "result";
  }
  return "unknown";
}

std::string EncodeMessage(const Message& message) {
  json doc = {{"type", MessageType(message)}};
  if (const auto* m = std::get_if<HelloMessage>(&message)) {
    doc["version"] = m->version;
    if (!m->role.empty()) doc["role"] = m->role;
    if (!m->name.empty()) doc["name"] = m->name;
  } else if (const auto* m = std::get_if<InitMessage>(&message)) {
    doc["description"] = m->description;
    doc["instructions"] = m->instructions;
    doc["api_docs"] = m->api_docs;
  } else if (const auto* m = std::get_if<StateMessage>(&message)) {
    doc["step"] = m->step;
    doc["observation"] = m->observation;
  } else if (const auto* m = std::get_if<ActionMessage>(&message)) {
    doc["action"] = m->action;
    if (m->usage.input_tokens || m->usage.output_tokens) {
      json usage = json::object();
      if (m->usage.input_tokens) usage["input_tokens"] = *m->usage.input_tokens;
      if (m->usage.output_tokens) {
        usage["output_tokens"] = *m->usage.output_tokens;
      }
      doc["usage"] = std::move(usage);
    }
  } else if (const auto* m = std::get_if<ResultMessage>(&message)) {
    doc["report"] = m->report;
  }
  // Invalid UTF-8 in observations is replaced rather than thrown on.
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

absl::StatusOr<Message> DecodeMessage(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return ProtocolError("line is not valid JSON");
  if (!doc.is_object()) return ProtocolError("message must be a JSON object");
  std::string type;
  if (absl::Status s = Field(doc, "type", &type); !s.ok()) return s;

  if (type == "hello") {
    HelloMessage m;
    if (absl::Status s = Field(doc, "version", &m.version); !s.ok()) return s;
    if (m.version != kProtocolVersion) {
      return ProtocolError(StrCat("unsupported protocol version ", m.version,
                                  "; expected ", kProtocolVersion));
    }
    m.role = doc.value("role", "");
    m.name = doc.value("name", "");
    return m;
  }
  if (type == "init") {
    InitMessage m;
    for (auto [key, out] : {std::pair{"description", &m.description},
                            std::pair{"instructions", &m.instructions},
                            std::pair{"api_docs", &m.api_docs}}) {
      if (absl::Status s = Field(doc, key, out); !s.ok()) return s;
    }
    return m;
  }
  if (type == "state") {
    StateMessage m;
    if (absl::Status s = Field(doc, "step", &m.step); !s.ok()) return s;
    if (absl::Status s = Field(doc, "observation", &m.observation); !s.ok()) {
      return s;
    }
    return m;
  }
  if (type == "action") {
    ActionMessage m;
    if (absl::Status s = Field(doc, "action", &m.action); !s.ok()) return s;
    auto usage = doc.find("usage");
    if (usage != doc.end() && !usage->is_null()) {
      if (!usage->is_object()) return ProtocolError("usage must be an object");
      auto in = OptionalCount(*usage, "input_tokens");
      if (!in.ok()) return in.status();
      auto out = OptionalCount(*usage, "output_tokens");
      if (!out.ok()) return out.status();
      m.usage = {*in, *out};
    }
    return m;
  }
  if (type == "result") {
    ResultMessage m;
    auto report = doc.find("report");
    if (report == doc.end() || !report->is_object()) {
      return ProtocolError("field 'report' must be an object");
    }
    m.report = *report;
    return m;
  }
  return ProtocolError(StrCat("unknown message type '", type, "'"));
}

int64_t EstimateTokens(std::string_view text) {
  return static_cast<int64_t>((text.size() + 3) / 4);
}

}  // namespace opsarena
