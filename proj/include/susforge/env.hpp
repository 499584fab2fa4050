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
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "susforge/external.hpp"
#include "susforge/fs.hpp"
#include "susforge/oracle.hpp"

namespace susforge::env {

enum class InferenceBasis { kCiConfig, kEnvFiles, kDocs, kDefault, kGenerator };
std::string basis_name(InferenceBasis b);

struct ToolchainSpec {
  std::string runtime_version;  // "3.10"
  InferenceBasis basis = InferenceBasis::kDefault;
  std::string notes;

  nlohmann::json to_json() const;
};

bool valid_runtime_version(const std::string& v);

// CI configs, then environment/tooling files, then docs; the highest version
// stated in the first tier that states any wins.
ToolchainSpec detect_toolchain(const Workspace& ws, const std::string& default_version = "3.10");

// Asks an external command for the version; falls back to the detector when
// its answer is missing or malformed.
ToolchainSpec detect_toolchain_external(const Workspace& ws, const ExternalCommand& cmd,
                                        const std::string& default_version = "3.10");

// Declarative environment (`env.toml` at the repository root):
//   [runtime] python = "3.10"
//   [build]   system_packages = [...]; install = ["pip install -e ."]
//   [test]    command = "python -m pytest -rA"; timeout = 1800
struct EnvSpec {
  std::string python;
  std::vector<std::string> system_packages;
  std::vector<std::string> install;
  std::string test_command = "python -m pytest -rA -p no:cacheprovider";
  std::chrono::seconds timeout{1800};

  std::string to_toml() const;
  static EnvSpec from_toml(const std::string& text);
  std::string digest() const;
};

std::optional<EnvSpec> load_env_toml(const Workspace& ws);

// Build commands that would reach outside the sandbox (container control,
// host mounts, published ports, privileged flags).
std::vector<std::string> denied_build_commands(const EnvSpec& spec);

// Asks an external command to write env.toml for the repository; the answer
// is parsed and screened like a declarative file.
EnvSpec generate_env_spec_external(const Workspace& ws, const ToolchainSpec& tc,
                                   const std::vector<std::string>& mandatory, const ExternalCommand& cmd);
// Env spec when the repository carries none: install from the usual manifests.
EnvSpec infer_env_spec(const Workspace& ws, const ToolchainSpec& tc);

struct EnvironmentRef {
  std::string image_tag;
  std::string runtime;  // "docker" | "local"
  std::string build_log_digest;
  std::vector<std::string> run_command;
  std::vector<std::string> mandatory_tests;
  bool fallback = false;  // runs only the mandatory tests
  EnvSpec spec;
  ToolchainSpec toolchain;
  oracle::ParserSpec parser;

  nlohmann::json to_json() const;
  static EnvironmentRef from_json(const nlohmann::json& j);
};

std::string image_tag_for(const std::string& repo_id, const std::string& commit);

struct BuildResult {
  bool ok = false;
  std::string log;
};

struct RunResult {
  std::string log;
  oracle::ExitInfo exit;
  bool runtime_failure = false;  // container runtime error, not a test outcome
  std::string runtime_error;
};

class Runtime {
 public:
  virtual ~Runtime() = default;
  virtual std::string name() const = 0;
  virtual bool image_exists(const std::string& tag) = 0;
  // Builds from the workspace's original sources; no tests run here.
  virtual BuildResult build(const Workspace& sources, const EnvSpec& spec, const std::string& tag) = 0;
  // Runs `command` (plus selection) against a private copy of `ws`.
  virtual RunResult run(const std::string& tag, const Workspace& ws, const std::vector<std::string>& command,
                        std::chrono::seconds timeout) = 0;
  virtual std::vector<std::string> list_images() = 0;
  virtual void remove_image(const std::string& tag) = 0;
};

// Docker CLI: `--network none`, workspace bind-mounted read-only and copied
// into the container's writable layer, container removed after each run.
class DockerRuntime : public Runtime {
 public:
  explicit DockerRuntime(std::string binary = "docker") : binary_(std::move(binary)) {}
  static bool available(const std::string& binary = "docker");

  std::string name() const override { return "docker"; }
  bool image_exists(const std::string& tag) override;
  BuildResult build(const Workspace& sources, const EnvSpec& spec, const std::string& tag) override;
  RunResult run(const std::string& tag, const Workspace& ws, const std::vector<std::string>& command,
                std::chrono::seconds timeout) override;
  std::vector<std::string> list_images() override;
  void remove_image(const std::string& tag) override;

  static std::string dockerfile(const EnvSpec& spec);

 private:
  std::string binary_;
};

// Host stand-in for a container store: an "image" is a directory holding a
// virtual environment (system site packages visible) and the sources it was
// installed from. Runs execute in a fresh temporary copy of the workspace.
class LocalRuntime : public Runtime {
 public:
  explicit LocalRuntime(std::filesystem::path store);

  std::string name() const override { return "local"; }
  bool image_exists(const std::string& tag) override;
  BuildResult build(const Workspace& sources, const EnvSpec& spec, const std::string& tag) override;
  RunResult run(const std::string& tag, const Workspace& ws, const std::vector<std::string>& command,
                std::chrono::seconds timeout) override;
  std::vector<std::string> list_images() override;
  void remove_image(const std::string& tag) override;

  std::filesystem::path image_dir(const std::string& tag) const;

 private:
  std::filesystem::path store_;
};

// "docker" when requested or (for "auto") when the CLI answers; else local.
std::unique_ptr<Runtime> make_runtime(const std::string& kind, const std::filesystem::path& store);

// Splits the test command and appends the selected test ids.
std::vector<std::string> suite_command(const EnvSpec& spec, const std::vector<std::string>& selection = {});

struct BuildOptions {
  std::string repo_id;
  std::string commit;
  std::chrono::seconds probe_timeout{0};  // 0: the spec's timeout
  bool reuse_existing = true;
  oracle::ParserSynth* parser_synth = nullptr;  // heuristic when null
};

// Builds the image, then probes the full suite on `probe_ws`; when the full
// suite times out or prints nothing parseable, the mandatory tests alone are
// tried and the result flagged. Rejections: "env-build", "env-run".
EnvironmentRef build_environment(const Workspace& sources, const Workspace& probe_ws, const EnvSpec& spec,
                                 const ToolchainSpec& tc, const std::vector<std::string>& mandatory,
                                 Runtime& runtime, const BuildOptions& options);

struct SuiteRun {
  RunResult raw;
  oracle::TestReport report;
};

SuiteRun run_suite(const EnvironmentRef& env, Runtime& runtime, const Workspace& ws,
                   const std::vector<std::string>& selection = {},
                   std::optional<std::chrono::seconds> timeout = std::nullopt);

// Removes images under the susforge/ prefix that no listed tag references.
std::vector<std::string> gc_images(Runtime& runtime, const std::vector<std::string>& referenced);

// Serializes builds per repository id.
std::mutex& build_mutex(const std::string& repo_id);

}  // namespace susforge::env
