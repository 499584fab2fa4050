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
#include <optional>
#include <string>
#include <vector>

namespace susforge {

struct ProcessOptions {
  std::filesystem::path cwd;
  // Added on top of the inherited environment.
  std::map<std::string, std::string> env;
  std::optional<std::chrono::milliseconds> timeout;
  std::string stdin_data;
};

struct ProcessResult {
  int exit_code = -1;
  // stdout and stderr, interleaved in arrival order.
  std::string output;
  bool timed_out = false;
  // exec() itself failed (binary missing, not executable, ...).
  bool spawn_failed = false;

  bool ok() const { return !timed_out && !spawn_failed && exit_code == 0; }
};

// Runs argv[0] (PATH lookup) in its own process group. On timeout the whole
// group is killed and whatever output arrived so far is returned.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& options = {});

// True if `program` resolves through PATH (or is an executable path).
bool program_available(const std::string& program);

// Shell-style quoting for logging and `sh -c` composition.
std::string shell_quote(const std::string& word);
std::string shell_join(const std::vector<std::string>& argv);

}  // namespace susforge
