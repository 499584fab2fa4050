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

#include "susforge/external.hpp"

#include "susforge/error.hpp"
#include "susforge/fs.hpp"

namespace susforge {

std::vector<std::string> split_command_line(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote == '\'') {
      if (c == '\'') {
        quote = 0;
      } else {
        cur += c;
      }
      continue;
    }
    if (quote == '"') {
      if (c == '"') {
        quote = 0;
      } else if (c == '\\' && i + 1 < text.size() &&
                 (text[i + 1] == '"' || text[i + 1] == '\\')) {
        cur += text[++i];
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (c == '\\' && i + 1 < text.size()) {
      cur += text[++i];
      have = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (quote != 0) throw ConfigError("unterminated quote in command: " + text);
  if (have) out.push_back(cur);
  return out;
}

ExternalCommand parse_external(const std::string& spec) {
  std::string body = starts_with(spec, "external:") ? spec.substr(9) : spec;
  ExternalCommand cmd;
  cmd.argv = split_command_line(body);
  if (cmd.argv.empty()) throw ConfigError("empty external command: '" + spec + "'");
  return cmd;
}

std::string expand_placeholders(const std::string& text,
                                const std::map<std::string, std::string>& vars) {
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '{') {
      std::size_t close = text.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = vars.find(text.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

ProcessResult run_external(const ExternalCommand& cmd,
                           const std::map<std::string, std::string>& vars,
                           const std::filesystem::path& cwd) {
  std::vector<std::string> argv;
  argv.reserve(cmd.argv.size());
  for (const auto& a : cmd.argv) argv.push_back(expand_placeholders(a, vars));
  ProcessOptions opts;
  opts.cwd = cwd;
  opts.timeout = cmd.timeout;
  for (const auto& [k, v] : vars) {
    std::string key = "SUSFORGE_" + k;
    for (char& c : key) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    opts.env[key] = v;
  }
  return run_process(argv, opts);
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 2, "{{") == 0) {
      std::size_t close = tmpl.find("}}", i + 2);
      if (close != std::string::npos) {
        std::string key = trim(tmpl.substr(i + 2, close - i - 2));
        auto it = slots.find(key);
        if (it != slots.end()) {
          out += it->second;
          i = close + 2;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace susforge
