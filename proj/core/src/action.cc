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

#include "opsarena/action.h"

#include <cctype>
#include <charconv>

#include "absl/status/status.h"
#include "opsarena/strings.h"

namespace opsarena {

namespace {

constexpr int kMaxListDepth = 8;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  absl::StatusOr<Call> Parse() {
    SkipSpace();
    Call call;
    if (!Ident(&call.name)) return Error("expected an API name");
    SkipSpace();
    if (!Eat('(')) return Error("expected '(' after API name");
    SkipSpace();
    if (!Eat(')')) {
      while (true) {
        Arg arg;
        const size_t mark = pos_;
        std::string kw;
        if (Ident(&kw)) {
          SkipSpace();
          if (Eat('=')) {
            arg.keyword = std::move(kw);
            SkipSpace();
          } else {
            pos_ = mark;
          }
        }
        absl::Status s = Literal(&arg.value, 0);
        if (!s.ok()) return s;
        call.args.push_back(std::move(arg));
        SkipSpace();
        if (Eat(')')) break;
        if (!Eat(',')) return Error("expected ',' or ')'");
        SkipSpace();
      }
    }
    SkipSpace();
    if (pos_ != text_.size()) {
      return Error("unexpected text after ')'; send one call per action");
    }
    return call;
  }

 private:
  absl::Status Error(std::string_view what) const {
    return absl::InvalidArgumentError(
        StrCat(what, " at offset ", pos_));
  }

  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool Eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool Ident(std::string* out) {
    const size_t start = pos_;
    if (pos_ >= text_.size()) return false;
    char c = text_[pos_];
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) {
      return false;
    }
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    *out = std::string(text_.substr(start, pos_ - start));
    return true;
  }

  absl::Status Literal(Value* out, int depth) {
    if (pos_ >= text_.size()) return Error("expected a value");
    const char c = text_[pos_];
    if (c == '"' || c == '\'') return String(out);
    if (c == '[') {
      if (depth >= kMaxListDepth) return Error("lists nested too deeply");
      ++pos_;
      std::vector<Value> items;
      SkipSpace();
      if (!Eat(']')) {
        while (true) {
          Value item;
          absl::Status s = Literal(&item, depth + 1);
          if (!s.ok()) return s;
          items.push_back(std::move(item));
          SkipSpace();
          if (Eat(']')) break;
          if (!Eat(',')) return Error("expected ',' or ']'");
          SkipSpace();
        }
      }
      out->v = std::move(items);
      return absl::OkStatus();
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      int64_t n = 0;
      auto [end, ec] =
          std::from_chars(text_.data() + pos_, text_.data() + text_.size(), n);
      if (ec != std::errc()) return Error("bad integer");
      pos_ = end - text_.data();
      out->v = n;
      return absl::OkStatus();
    }
    return Error(
        "expected a quoted string, an integer or a list (strings need quotes)");
  }

  absl::Status String(Value* out) {
    const char quote = text_[pos_++];
    std::string s;
    while (pos_ < text_.size() && text_[pos_] != quote) {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) break;
        char e = text_[pos_++];
        switch (e) {
          case 'n':
            s += '\n';
            break;
          case 't':
            s += '\t';
            break;
          default:
            s += e;
        }
      } else {
        s += c;
      }
    }
    if (!Eat(quote)) return Error("unterminated string");
    out->v = std::move(s);
    return absl::OkStatus();
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

std::string QuoteString(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  out += '"';
  return out;
}

std::string FormatLiteral(const Value& value) {
  if (value.is_string()) return QuoteString(value.str());
  if (value.is_int()) return StrCat(value.integer());
  std::string out = "[";
  for (size_t i = 0; i < value.list().size(); ++i) {
    if (i > 0) out += ", ";
    out += FormatLiteral(value.list()[i]);
  }
  return out + "]";
}

nlohmann::json ToJson(const Value& value) {
  if (value.is_string()) return value.str();
  if (value.is_int()) return value.integer();
  nlohmann::json out = nlohmann::json::array();
  for (const Value& v : value.list()) out.push_back(ToJson(v));
  return out;
}

absl::StatusOr<Call> ParseAction(std::string_view raw) {
  return Parser(raw).Parse();
}

std::string FormatCall(const Call& call) {
  std::string out = call.name + "(";
  for (size_t i = 0; i < call.args.size(); ++i) {
    if (i > 0) out += ", ";
    if (call.args[i].keyword) StrAppend(&out, *call.args[i].keyword, "=");
    out += FormatLiteral(call.args[i].value);
  }
  return out + ")";
}

nlohmann::json ToJson(const Call& call) {
  nlohmann::json args = nlohmann::json::array();
  for (const Arg& a : call.args) {
    nlohmann::json j{{"value", ToJson(a.value)}};
    if (a.keyword) j["keyword"] = *a.keyword;
    args.push_back(std::move(j));
  }
  return {{"name", call.name}, {"args", std::move(args)}};
}

}  // namespace opsarena
