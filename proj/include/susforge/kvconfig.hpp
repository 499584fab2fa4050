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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace susforge {

// The subset of TOML used by `env.toml` and the forge config: `[table]`
// headers, `key = value` pairs, basic/literal strings, integers, floats,
// booleans and (possibly multi-line) arrays of scalars. Keys are flattened to
// dotted form ("table.key").
class KvConfig {
 public:
  using Scalar = std::variant<std::string, std::int64_t, double, bool>;
  struct Value {
    std::variant<Scalar, std::vector<Scalar>> data;
  };

  static KvConfig parse(std::string_view text);
  static KvConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<std::string> keys() const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_string_list(const std::string& key) const;

  // Later sets win; used for env-var and flag overrides. The raw text is
  // interpreted as a TOML value when it parses as one, else as a string.
  void set_raw(const std::string& key, const std::string& raw);

 private:
  std::map<std::string, Value> values_;
};

}  // namespace susforge
