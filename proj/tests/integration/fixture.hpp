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
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "susforge/app.hpp"
#include "susforge/error.hpp"
#include "susforge/fs.hpp"
#include "susforge/process.hpp"

namespace susforge::testing {

inline const fs::path kFixtures = SUSFORGE_FIXTURE_DIR;
inline const std::string kCli = SUSFORGE_CLI;
inline const std::string kAgentDouble = SUSFORGE_AGENT_DOUBLE;

inline std::string toml_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Scripted repositories plus records.jsonl (three valid fixes),
// records_all.jsonl (adds a fix whose new test passes before the fix too)
// and empty.jsonl.
inline fs::path build_fixture_repos(const fs::path& dest) {
  auto r = run_process({"python3", (kFixtures / "repos" / "make_repos.py").string(), dest.string()});
  if (!r.ok()) throw Error("fixture repos: " + r.output);
  return dest;
}

inline std::vector<std::pair<std::string, std::string>> fixture_overrides(const fs::path& root) {
  return {{"paths.cache", toml_string((root / "cache").string())},
          {"paths.out", toml_string((root / "tasks").string())},
          {"paths.store", toml_string((root / "store").string())},
          {"paths.work", toml_string((root / "work").string())},
          {"runtime.kind", "\"local\""}};
}

inline app::ForgeConfig fixture_config(const fs::path& root,
                                       std::vector<std::pair<std::string, std::string>> extra = {}) {
  auto o = fixture_overrides(root);
  o.insert(o.end(), extra.begin(), extra.end());
  return app::ForgeConfig::load(std::nullopt, o, [](const std::string&) { return std::optional<std::string>(); });
}

// "{agent double} --mode M --workspace {workspace} ..." as an agent template.
inline std::string double_agent(const std::string& mode, const std::string& extra = {}) {
  std::string cmd = shell_quote(kAgentDouble) + " --mode " + mode +
                    " --workspace {workspace} --task-dir {task_dir} --status-file {status_file}";
  if (!extra.empty()) cmd += " " + extra;
  return cmd;
}

// Every regular file under root except those below `skip_dir` components.
inline std::map<std::string, std::string> tree_contents(const fs::path& root, const std::string& skip_dir) {
  std::map<std::string, std::string> out;
  for (const auto& rel : list_files(root)) {
    if (starts_with(rel, skip_dir + "/") || rel.find("/" + skip_dir + "/") != std::string::npos) continue;
    out[rel] = read_file(root / rel);
  }
  return out;
}

// Forge over records_all.jsonl once per process.
struct Forged {
  TempDir root{"forged"};
  fs::path repos;
  app::ForgeConfig cfg;
  forge::Manifest manifest;
  std::string output;
  int exit_code = -1;
  double seconds = 0;

  Forged() {
    repos = build_fixture_repos(root.path() / "repos");
    cfg = fixture_config(root.path());
    std::ostringstream out, err;
    app::CommandIO io{out, err, false};
    const auto t0 = std::chrono::steady_clock::now();
    exit_code = app::cmd_forge(cfg, {repos / "records_all.jsonl", corpus::RecordFormat::kNative}, io);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    output = out.str() + err.str();
    manifest = forge::Manifest::load(cfg.out_dir / "manifest.json");
  }
};

inline Forged& forged() {
  static Forged f;
  return f;
}

}  // namespace susforge::testing
