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

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "susforge/process.hpp"

namespace susforge {

// A configured command-line generator ("external:<cmd>"). Arguments may
// contain {name} placeholders, expanded per invocation.
struct ExternalCommand {
  std::vector<std::string> argv;
  std::chrono::milliseconds timeout{std::chrono::minutes(30)};

  bool empty() const { return argv.empty(); }
};

// Splits a command line with POSIX-shell-like quoting (no expansion).
std::vector<std::string> split_command_line(const std::string& text);

// Accepts "external:<cmd>" or a bare command line.
ExternalCommand parse_external(const std::string& spec);

std::string expand_placeholders(const std::string& text,
                                const std::map<std::string, std::string>& vars);

ProcessResult run_external(const ExternalCommand& cmd,
                           const std::map<std::string, std::string>& vars,
                           const std::filesystem::path& cwd = {});

// Substitutes {{ name }} slots in a prompt template.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots);

}  // namespace susforge
