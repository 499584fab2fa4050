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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "susforge/corpus.hpp"
#include "susforge/eval.hpp"
#include "susforge/external.hpp"
#include "susforge/forge.hpp"
#include "susforge/kvconfig.hpp"

namespace susforge::app {

enum ExitCode { kExitOk = 0, kExitNegative = 1, kExitUsage = 2, kExitSystemic = 3 };

struct StrategyConfig {
  std::string name;
  std::string kind;
  std::string catalog;         // CWE catalog file, default catalog when empty
  std::string selection_file;  // default "selected_cwes.json"
};

// One config file, `SUSFORGE_<TABLE>_<KEY>` environment overrides and
// `key=value` flag overrides, in increasing precedence. Tables:
//   [paths] cache out store work     [filter] min_relevance language
//   require_test_modification max_cwes   [tests] rules
//   [mask] ratio max_iters            [synth] description_retries leak_min deny_terms
//   [generators] mask description verifier env toolchain parser
//   [runtime] kind slots python       [timeouts] probe cell generator agent
//   [validate] double_check           [eval] agent max_steps selection_file
//   [strategy.<name>] kind catalog selection_file
struct ForgeConfig {
  fs::path cache_dir;
  fs::path out_dir;
  fs::path store_dir;
  fs::path work_dir;
  corpus::FilterPolicy filter;
  std::vector<std::string> test_rules;
  double mask_ratio = 2.0;
  int max_iters = 3;
  int description_retries = 1;
  int leak_min = 40;
  std::vector<std::string> deny_terms;
  std::string gen_mask;
  std::string gen_description;
  std::string gen_verifier;
  std::string gen_env;
  std::string gen_toolchain;
  std::string gen_parser;
  std::string runtime_kind;
  int slots = 1;
  std::string default_python;
  std::chrono::seconds probe_timeout{0};
  std::chrono::seconds cell_timeout{0};
  std::chrono::seconds generator_timeout{1800};
  std::chrono::seconds agent_timeout{3600};
  bool double_check = false;
  std::string agent;
  int max_steps = 200;
  std::string selection_file;
  std::map<std::string, StrategyConfig> strategies;

  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
  static EnvLookup process_env();

  // Throws ConfigError on unknown keys, wrong types and bad bounds.
  static ForgeConfig load(const std::optional<fs::path>& file,
                          const std::vector<std::pair<std::string, std::string>>& overrides = {},
                          const EnvLookup& env = process_env());
  static ForgeConfig from_kv(const KvConfig& kv);
  static const std::vector<std::pair<std::string, std::string>>& defaults();

  // External commands must resolve through PATH.
  void check_commands() const;
  patch::TestPathClassifier classifier() const;
  synth::SynthConfig synth_config() const;
  // Built-in kinds by name, else a [strategy.<name>] table; ConfigError when
  // neither exists.
  eval::Strategy strategy(const std::string& name) const;
};

// "SUSFORGE_" + key upper-cased with '.' as '_'.
std::string env_var_for(const std::string& key);

struct GeneratorSet {
  std::unique_ptr<mask::MaskGenerator> mask;
  std::unique_ptr<synth::DescriptionGenerator> description;
  std::unique_ptr<synth::CoverageVerifier> verifier;
  std::optional<ExternalCommand> toolchain;
  std::optional<ExternalCommand> env;
  std::unique_ptr<oracle::ParserSynth> parser;

  forge::ForgeGenerators view();
};

GeneratorSet make_generators(const ForgeConfig& cfg);

struct CommandIO {
  std::ostream& out;
  std::ostream& err;
  bool json = false;
};

struct ForgeRequest {
  fs::path records;
  corpus::RecordFormat format = corpus::RecordFormat::kNative;
};

struct EvalRequest {
  std::vector<fs::path> inputs;  // manifests, task directories or directories holding a manifest
  std::string strategy;
  std::string setting;           // defaults to the strategy name
  fs::path outcomes;             // defaults to <out>/outcomes-<setting>.jsonl
};

int cmd_forge(const ForgeConfig& cfg, const ForgeRequest& req, CommandIO& io);
int cmd_validate(const ForgeConfig& cfg, const fs::path& task_dir, CommandIO& io);
int cmd_eval(const ForgeConfig& cfg, const EvalRequest& req, CommandIO& io);
int cmd_report(const std::vector<fs::path>& files, const fs::path& out_dir, CommandIO& io);
int cmd_gc(const ForgeConfig& cfg, CommandIO& io);

// Task directories named by manifests, manifest-holding directories or
// task directories themselves, in order and without repeats.
std::vector<fs::path> resolve_task_dirs(const std::vector<fs::path>& inputs);

}  // namespace susforge::app
