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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "susforge/corpus.hpp"
#include "susforge/env.hpp"
#include "susforge/error.hpp"
#include "susforge/external.hpp"
#include "susforge/mask.hpp"
#include "susforge/oracle.hpp"
#include "susforge/patch.hpp"
#include "susforge/synth.hpp"
#include "susforge/validate.hpp"

namespace susforge::forge {

// Task directory layout. `repo/` holds the masked pre-fix tree; everything
// else is rebuilt from it and the patches.
struct Artifacts {
  static constexpr const char* kDescription = "task.md";
  static constexpr const char* kFeature = "feature.diff";
  static constexpr const char* kTests = "tests.diff";
  static constexpr const char* kMask = "mask.diff";
  static constexpr const char* kTarget = "target.diff";
  static constexpr const char* kMetadata = "metadata.json";
  static constexpr const char* kVerification = "verification.json";
  static constexpr const char* kValidation = "validation.json";
  static constexpr const char* kEnvironment = "environment.json";
  static constexpr const char* kEnvToml = "env.toml";
  static constexpr const char* kParser = "parser.json";
  static constexpr const char* kLogs = "logs";
  static constexpr const char* kRepo = "repo";

  static const std::vector<std::string>& required();
};

class MissingArtifacts : public Error {
 public:
  MissingArtifacts(const fs::path& dir, std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

// "<repo_id>__<first 12 of c0>"
std::string task_id_for(const std::string& repo_id, const std::string& c0_commit);

struct ForgeGenerators {
  mask::MaskGenerator& mask;
  synth::DescriptionGenerator& description;
  synth::CoverageVerifier& verifier;
  const ExternalCommand* toolchain = nullptr;  // detector when null
  const ExternalCommand* env = nullptr;        // env.toml, else inferred
  oracle::ParserSynth* parser_synth = nullptr;
};

struct ForgeOptions {
  synth::SynthConfig synth;
  std::string default_python = "3.10";
  std::chrono::seconds probe_timeout{0};
  bool double_check = false;
  std::optional<std::chrono::seconds> cell_timeout;
  fs::path work_root;  // scratch space, one subdirectory per record
  fs::path out_dir;    // task directories
  bool keep_work = false;
};

struct ForgeOutcome {
  std::string record_id;
  std::string repo_id;
  std::string task_id;
  bool ok = false;
  std::string stage;  // last stage reached
  std::string reason;
  std::string detail;
  std::vector<std::string> failed_requirements;
  int iterations = 0;
  fs::path task_dir;

  nlohmann::json to_json() const;
  static ForgeOutcome from_json(const nlohmann::json& j);
};

// Snapshot, split, synthesize, build the environment, validate, and write the
// task directory when the matrix accepts it. Stage failures become rejected
// outcomes; systemic errors propagate.
ForgeOutcome forge_record(const corpus::VulnRecord& record, corpus::RepoCache& cache, env::Runtime& runtime,
                          ForgeGenerators gens, const ForgeOptions& options);

struct Manifest {
  std::vector<ForgeOutcome> tasks;
  std::vector<ForgeOutcome> rejected;
  nlohmann::json filter = nlohmann::json::object();

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  static Manifest load(const fs::path& path);
};

struct TaskInstance {
  fs::path dir;
  std::string task_id;
  nlohmann::json metadata;
  std::string description;
  patch::Patch feature;
  patch::Patch tests;
  patch::Patch mask;
  patch::Patch target;
  env::EnvironmentRef env;
  nlohmann::json validation;
  validate::Baseline baseline;
  std::vector<std::string> security_tests;
  std::vector<std::string> gold_cwes;
  patch::TestPathClassifier classifier;

  Workspace repo() const { return Workspace{dir / Artifacts::kRepo}; }
};

// Throws MissingArtifacts listing every absent file.
TaskInstance load_task(const fs::path& dir);

struct TaskStates {
  Workspace c0;
  Workspace c_minus1;
  Workspace c_masked;
};

// C-1 = repo + mask^-1, C0 = repo + target + tests; written under `dest`.
// Throws ApplyError when the patches no longer fit the tree.
TaskStates reconstruct_states(const TaskInstance& task, const fs::path& dest);

// Re-runs the matrix on an existing task and rewrites validation.json. A
// patch that no longer applies yields an invalid report ("patch-apply").
validate::ValidationReport revalidate_task(const TaskInstance& task, env::Runtime& runtime,
                                           const validate::ValidationOptions& options = {});

}  // namespace susforge::forge
