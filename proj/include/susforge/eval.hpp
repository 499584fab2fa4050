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
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "susforge/env.hpp"
#include "susforge/external.hpp"
#include "susforge/forge.hpp"
#include "susforge/metrics.hpp"
#include "susforge/patch.hpp"

namespace susforge::eval {

enum class StrategyKind { kGeneric, kSelfSelection, kOracle };
std::string kind_name(StrategyKind k);  // "generic", "self_selection", "oracle"
StrategyKind parse_kind(const std::string& name);  // ConfigError when unknown

struct CweEntry {
  std::string id;  // "CWE-79"
  std::string definition;
};

const std::vector<CweEntry>& default_cwe_catalog();
// Lines of "CWE-<n><tab or space><definition>"; '#' starts a comment.
std::vector<CweEntry> load_cwe_catalog(const fs::path& path);

struct Strategy {
  std::string name;
  StrategyKind kind = StrategyKind::kGeneric;
  std::vector<CweEntry> cwe_catalog;     // self_selection
  std::vector<std::string> oracle_cwes;  // oracle, filled per task
  std::string selection_file_name = "selected_cwes.json";

  // Throws PreconditionError on an empty catalog or oracle list.
  void check() const;
  // Oracle strategies take the task's gold CWEs.
  Strategy for_task(const std::vector<std::string>& gold_cwes) const;
  static Strategy builtin(StrategyKind kind);
};

// The task text, unchanged, followed by the strategy's instructions.
std::string prepare_prompt(const std::string& task_markdown, const Strategy& strategy);
std::string prepare_prompt(const forge::TaskInstance& task, const Strategy& strategy);

// A JSON list of ids or an object with a "cwes" list; ids are normalized to
// "CWE-<n>" and unparseable entries dropped. Nullopt when the text is not
// one of those shapes.
std::optional<std::vector<std::string>> parse_selection(const std::string& text);

struct AgentLimits {
  int max_steps = 200;
  std::chrono::seconds timeout{3600};
};

struct AgentRun {
  std::string task_id;
  std::string strategy;
  patch::Patch solution;
  int steps_used = 0;
  std::string transcript_ref;
  std::optional<std::vector<std::string>> selected_cwes;
  std::string reason;                        // agent-crash, agent-timeout, step-budget
  bool failed = false;                       // crash or timeout
  std::vector<std::string> dropped_test_paths;

  nlohmann::json to_json() const;
};

// Files never part of a solution besides test paths: the selection file,
// byte-code caches and VCS metadata.
bool excluded_from_solution(const std::string& path, const std::string& selection_file);

// Copies the masked tree into `work_dir/workspace`, writes the prompt, runs
// the agent command there and diffs the result against the pristine tree.
// Placeholders: {workspace} {prompt_file} {max_steps} {image} {task_dir}
// {status_file}. The agent may write {"steps": n} to the status file.
AgentRun run_agent(const forge::TaskInstance& task, const ExternalCommand& agent, const Strategy& strategy,
                   const AgentLimits& limits, const fs::path& work_dir);

// Applies the solution to a fresh masked tree, runs the functional suite,
// then the tests patch and the security tests.
metrics::Outcome score_solution(const forge::TaskInstance& task, const AgentRun& run, env::Runtime& runtime,
                                const std::string& setting,
                                std::optional<std::chrono::seconds> timeout = std::nullopt);

// Appends outcomes to a JSON-lines file, one writer per file. Task ids
// already present for the setting are reported by `has` so runs resume.
class OutcomesWriter {
 public:
  OutcomesWriter(fs::path path, std::string setting);

  bool has(const std::string& task_id) const;
  void append(const metrics::Outcome& o);
  std::size_t existing() const { return done_.size(); }

 private:
  fs::path path_;
  std::string setting_;
  std::set<std::string> done_;
  mutable std::mutex mu_;
};

}  // namespace susforge::eval
