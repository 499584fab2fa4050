// Copyright 2026 The susforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "susforge/kvconfig.hpp"

#include <cctype>
#include <charconv>

#include "susforge/error.hpp"
#include "susforge/fs.hpp"

namespace susforge {

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  char take() { return text_[pos_++]; }
  std::size_t line() const { return line_; }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  // Skips whitespace, newlines and comments.
  void skip_all() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  void expect_line_end() {
    skip_inline_space();
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') throw ParseError("trailing characters after value", line_);
  }
  std::string_view rest_of_line() const {
    std::size_t e = text_.find('\n', pos_);
    return text_.substr(pos_, e == std::string_view::npos ? text_.size() - pos_ : e - pos_);
  }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string parse_key(Cursor& cur) {
  std::string key;
  while (!cur.eof() && is_bare_key_char(cur.peek())) key += cur.take();
  if (key.empty()) throw ParseError("expected key", cur.line());
  return key;
}

std::string parse_basic_string(Cursor& cur) {
  cur.take();  // opening quote
  std::string out;
  while (true) {
    if (cur.eof() || cur.peek() == '\n') throw ParseError("unterminated string", cur.line());
    char c = cur.take();
    if (c == '"') break;
    if (c == '\\') {
      if (cur.eof()) throw ParseError("dangling escape", cur.line());
      char e = cur.take();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ParseError(std::string("unknown escape \\") + e, cur.line());
      }
    } else {
      out += c;
    }
  }
  return out;
}

std::string parse_literal_string(Cursor& cur) {
  cur.take();
  std::string out;
  while (true) {
    if (cur.eof() || cur.peek() == '\n') throw ParseError("unterminated string", cur.line());
    char c = cur.take();
    if (c == '\'') break;
    out += c;
  }
  return out;
}

KvConfig::Scalar parse_scalar(Cursor& cur) {
  char c = cur.peek();
  if (c == '"') return parse_basic_string(cur);
  if (c == '\'') return parse_literal_string(cur);
  std::string token;
  while (!cur.eof()) {
    char d = cur.peek();
    if (d == ',' || d == ']' || d == '#' || d == '\n' || d == ' ' || d == '\t' || d == '\r') break;
    token += cur.take();
  }
  if (token == "true") return true;
  if (token == "false") return false;
  if (token.empty()) throw ParseError("expected value", cur.line());
  std::string digits;
  for (char d : token) {
    if (d != '_') digits += d;
  }
  std::int64_t iv = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), iv);
  if (ec == std::errc() && p == digits.data() + digits.size()) return iv;
  try {
    std::size_t used = 0;
    double dv = std::stod(digits, &used);
    if (used == digits.size()) return dv;
  } catch (const std::exception&) {
  }
  throw ParseError("cannot interpret value '" + token + "'", cur.line());
}

KvConfig::Value parse_value(Cursor& cur) {
  if (cur.peek() != '[') return KvConfig::Value{parse_scalar(cur)};
  cur.take();
  std::vector<KvConfig::Scalar> items;
  while (true) {
    cur.skip_all();
    if (cur.eof()) throw ParseError("unterminated array", cur.line());
    if (cur.peek() == ']') {
      cur.take();
      break;
    }
    items.push_back(parse_scalar(cur));
    cur.skip_all();
    if (cur.peek() == ',') {
      cur.take();
    } else if (cur.peek() != ']') {
      throw ParseError("expected ',' or ']' in array", cur.line());
    }
  }
  return KvConfig::Value{std::move(items)};
}

std::optional<std::string> scalar_as_string(const KvConfig::Scalar& s) {
  if (const auto* str = std::get_if<std::string>(&s)) return *str;
  return std::nullopt;
}

}  // namespace

KvConfig KvConfig::parse(std::string_view text) {
  KvConfig cfg;
  Cursor cur(text);
  std::string table;
  while (true) {
    cur.skip_all();
    if (cur.eof()) break;
    if (cur.peek() == '[') {
      cur.take();
      cur.skip_inline_space();
      table = parse_key(cur);
      cur.skip_inline_space();
      if (cur.peek() != ']') throw ParseError("expected ']' after table name", cur.line());
      cur.take();
      cur.expect_line_end();
      continue;
    }
    std::string key = parse_key(cur);
    cur.skip_inline_space();
    if (cur.peek() != '=') throw ParseError("expected '=' after key", cur.line());
    cur.take();
    cur.skip_inline_space();
    Value v = parse_value(cur);
    cur.expect_line_end();
    std::string full = table.empty() ? key : table + "." + key;
    if (cfg.values_.count(full) != 0) {
      throw ParseError("duplicate key '" + full + "'", cur.line());
    }
    cfg.values_[full] = std::move(v);
  }
  return cfg;
}

KvConfig KvConfig::load(const std::string& path) {
  try {
    return parse(read_file(path));
  } catch (const ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> KvConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_) out.push_back(k);
  return out;
}

std::optional<std::string> KvConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<Scalar>(&it->second.data)) {
    if (auto str = scalar_as_string(*s)) return str;
  }
  throw ConfigError("key '" + key + "' must be a string");
}

std::optional<std::int64_t> KvConfig::get_int(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<Scalar>(&it->second.data)) {
    if (const auto* i = std::get_if<std::int64_t>(s)) return *i;
  }
  throw ConfigError("key '" + key + "' must be an integer");
}

std::optional<double> KvConfig::get_double(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<Scalar>(&it->second.data)) {
    if (const auto* d = std::get_if<double>(s)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(s)) return static_cast<double>(*i);
  }
  throw ConfigError("key '" + key + "' must be a number");
}

std::optional<bool> KvConfig::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<Scalar>(&it->second.data)) {
    if (const auto* b = std::get_if<bool>(s)) return *b;
  }
  throw ConfigError("key '" + key + "' must be a boolean");
}

std::optional<std::vector<std::string>> KvConfig::get_string_list(
    const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto* list = std::get_if<std::vector<Scalar>>(&it->second.data);
  if (list == nullptr) throw ConfigError("key '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& s : *list) {
    auto str = scalar_as_string(s);
    if (!str) throw ConfigError("key '" + key + "' must be an array of strings");
    out.push_back(*str);
  }
  return out;
}

void KvConfig::set_raw(const std::string& key, const std::string& raw) {
  try {
    Cursor cur(raw);
    cur.skip_inline_space();
    Value v = parse_value(cur);
    cur.expect_line_end();
    values_[key] = std::move(v);
  } catch (const ParseError&) {
    values_[key] = Value{Scalar{raw}};
  }
}

}  // namespace susforge
