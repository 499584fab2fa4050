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


#include "susforge/env.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "susforge/error.hpp"
#include "susforge/kvconfig.hpp"
#include "susforge/process.hpp"

namespace susforge::env {

namespace {

using Version = std::pair<int, int>;

std::string version_text(const Version& v) { return std::to_string(v.first) + "." + std::to_string(v.second); }

std::vector<Version> versions_in(const std::string& text) {
  static const std::regex re(R"((^|[^0-9.])3\.([0-9]{1,2})(?![0-9]))");
  std::vector<Version> out;
  for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
    out.emplace_back(3, std::stoi((*it)[2].str()));
  }
  return out;
}

// Versions named by a PEP 440 specifier; an exclusive upper bound names the
// minor release below it.
std::vector<Version> versions_in_specifier(const std::string& spec) {
  static const std::regex clause(R"((>=|<=|==|~=|!=|>|<)?\s*3\.([0-9]{1,2}))");
  std::vector<Version> out;
  for (std::sregex_iterator it(spec.begin(), spec.end(), clause), end; it != end; ++it) {
    std::string op = (*it)[1].str();
    int minor = std::stoi((*it)[2].str());
    if (op == "!=" || op == ">") continue;
    if (op == "<") {
      if (minor > 0) out.emplace_back(3, minor - 1);
      continue;
    }
    out.emplace_back(3, minor);
  }
  return out;
}

struct Finding {
  std::string file;
  std::vector<Version> versions;
};

std::optional<std::string> maybe_read(const Workspace& ws, const std::string& rel) {
  fs::path p = ws.root / rel;
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return std::nullopt;
  return read_file(p);
}

std::vector<Version> ci_versions(const std::string& text) {
  static const std::regex key_line(R"(^\s*-?\s*["']?python[-_ ]?versions?["']?\s*:\s*$)", std::regex::icase);
  static const std::regex list_item(R"(^\s*-\s*)");
  std::vector<Version> out;
  bool in_list = false;
  for (const std::string& line : split_lines(text)) {
    if (in_list) {
      if (std::regex_search(line, list_item)) {
        auto v = versions_in(line);
        out.insert(out.end(), v.begin(), v.end());
        continue;
      }
      in_list = false;
    }
    if (std::regex_search(line, key_line)) {
      in_list = true;
      continue;
    }
    if (to_lower(line).find("python") != std::string::npos) {
      auto v = versions_in(line);
      out.insert(out.end(), v.begin(), v.end());
    }
  }
  return out;
}

std::vector<std::string> ci_files(const Workspace& ws) {
  std::vector<std::string> out;
  for (const char* dir : {".github/workflows"}) {
    std::error_code ec;
    fs::path d = ws.root / dir;
    if (!fs::is_directory(d, ec)) continue;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(d)) {
      std::string n = e.path().filename().string();
      if (ends_with(n, ".yml") || ends_with(n, ".yaml")) names.push_back(std::string(dir) + "/" + n);
    }
    std::sort(names.begin(), names.end());
    out.insert(out.end(), names.begin(), names.end());
  }
  for (const char* f : {".travis.yml", ".circleci/config.yml", ".gitlab-ci.yml", "azure-pipelines.yml",
                        "appveyor.yml", "bitbucket-pipelines.yml"}) {
    out.emplace_back(f);
  }
  return out;
}

std::vector<Finding> env_file_findings(const Workspace& ws) {
  std::vector<Finding> out;
  auto add = [&](const std::string& file, std::vector<Version> v) {
    if (!v.empty()) out.push_back({file, std::move(v)});
  };
  auto capture = [](const std::string& text, const std::regex& re) {
    std::vector<std::string> caps;
    for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) caps.push_back((*it)[1].str());
    return caps;
  };
  if (auto t = maybe_read(ws, ".python-version")) {
    auto lines = split_lines(*t);
    if (!lines.empty()) add(".python-version", versions_in(trim(lines.front())));
  }
  if (auto t = maybe_read(ws, "runtime.txt")) add("runtime.txt", versions_in(*t));
  static const std::regex py_requires(R"(python_requires\s*=\s*["']([^"']+)["'])");
  if (auto t = maybe_read(ws, "setup.py")) {
    std::vector<Version> v;
    for (const auto& c : capture(*t, py_requires)) {
      auto s = versions_in_specifier(c);
      v.insert(v.end(), s.begin(), s.end());
    }
    add("setup.py", v);
  }
  static const std::regex cfg_requires(R"(python_requires\s*=\s*([^\n#]+))");
  if (auto t = maybe_read(ws, "setup.cfg")) {
    std::vector<Version> v;
    for (const auto& c : capture(*t, cfg_requires)) {
      auto s = versions_in_specifier(c);
      v.insert(v.end(), s.begin(), s.end());
    }
    add("setup.cfg", v);
  }
  static const std::regex pep621(R"(requires-python\s*=\s*["']([^"']+)["'])");
  static const std::regex poetry(R"(^\s*python\s*=\s*["']([^"']+)["'])");
  if (auto t = maybe_read(ws, "pyproject.toml")) {
    std::vector<Version> v;
    for (const auto& c : capture(*t, pep621)) {
      auto s = versions_in_specifier(c);
      v.insert(v.end(), s.begin(), s.end());
    }
    for (const auto& line : split_lines(*t)) {
      std::smatch m;
      if (std::regex_search(line, m, poetry)) {
        auto s = versions_in_specifier(m[1].str());
        v.insert(v.end(), s.begin(), s.end());
      }
    }
    add("pyproject.toml", v);
  }
  static const std::regex tox_env(R"(\bpy3([0-9]{1,2})\b)");
  if (auto t = maybe_read(ws, "tox.ini")) {
    std::vector<Version> v;
    for (const auto& c : capture(*t, tox_env)) v.emplace_back(3, std::stoi(c));
    add("tox.ini", v);
  }
  static const std::regex pipfile(R"(python_(?:full_)?version\s*=\s*["']([^"']+)["'])");
  if (auto t = maybe_read(ws, "Pipfile")) {
    std::vector<Version> v;
    for (const auto& c : capture(*t, pipfile)) {
      auto s = versions_in(c);
      v.insert(v.end(), s.begin(), s.end());
    }
    add("Pipfile", v);
  }
  static const std::regex conda(R"(\bpython\s*[=<>]=?\s*(3\.[0-9]{1,2}))");
  for (const char* f : {"environment.yml", "environment.yaml"}) {
    if (auto t = maybe_read(ws, f)) {
      std::vector<Version> v;
      for (const auto& c : capture(*t, conda)) {
        auto s = versions_in(c);
        v.insert(v.end(), s.begin(), s.end());
      }
      add(f, v);
    }
  }
  static const std::regex docker_from(R"(FROM\s+(?:\S+/)?python:(3\.[0-9]{1,2}))", std::regex::icase);
  if (auto t = maybe_read(ws, "Dockerfile")) {
    std::vector<Version> v;
    for (const auto& c : capture(*t, docker_from)) {
      auto s = versions_in(c);
      v.insert(v.end(), s.begin(), s.end());
    }
    add("Dockerfile", v);
  }
  return out;
}

std::vector<Finding> doc_findings(const Workspace& ws) {
  static const std::regex stated(R"(python\s*(?:version\s*)?(?:>=|=|v)?\s*(3\.[0-9]{1,2})(?![0-9]))",
                                 std::regex::icase);
  std::vector<std::string> docs;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(ws.root, ec)) {
    std::string n = e.path().filename().string();
    std::string lower = to_lower(n);
    if (e.is_regular_file() && (starts_with(lower, "readme") || starts_with(lower, "install") ||
                                starts_with(lower, "contributing"))) {
      docs.push_back(n);
    }
  }
  if (fs::is_directory(ws.root / "docs", ec)) {
    for (const auto& e : fs::directory_iterator(ws.root / "docs")) {
      std::string n = e.path().filename().string();
      if (e.is_regular_file() && (ends_with(n, ".md") || ends_with(n, ".rst") || ends_with(n, ".txt"))) {
        docs.push_back("docs/" + n);
      }
    }
  }
  std::sort(docs.begin(), docs.end());
  std::vector<Finding> out;
  for (const auto& d : docs) {
    auto t = maybe_read(ws, d);
    if (!t) continue;
    std::vector<Version> v;
    for (std::sregex_iterator it(t->begin(), t->end(), stated), end; it != end; ++it) {
      auto s = versions_in((*it)[1].str());
      v.insert(v.end(), s.begin(), s.end());
    }
    if (!v.empty()) out.push_back({d, v});
  }
  return out;
}

std::optional<ToolchainSpec> pick(const std::vector<Finding>& findings, InferenceBasis basis) {
  if (findings.empty()) return std::nullopt;
  Version best{0, 0};
  std::string where;
  for (const auto& f : findings) {
    for (const auto& v : f.versions) {
      if (v > best) {
        best = v;
        where = f.file;
      }
    }
  }
  ToolchainSpec tc;
  tc.runtime_version = version_text(best);
  tc.basis = basis;
  std::vector<std::string> files;
  for (const auto& f : findings) files.push_back(f.file);
  std::ostringstream notes;
  notes << "highest of ";
  std::set<Version> all;
  for (const auto& f : findings) all.insert(f.versions.begin(), f.versions.end());
  bool first = true;
  for (const auto& v : all) {
    notes << (first ? "" : ", ") << version_text(v);
    first = false;
  }
  notes << " (" << where << ")";
  tc.notes = notes.str();
  return tc;
}

std::string toml_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string toml_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + toml_quote(items[i]);
  return out + "]";
}

std::string tail(const std::string& log, std::size_t n = 2000) {
  return log.size() <= n ? log : "..." + log.substr(log.size() - n);
}

nlohmann::json spec_to_json(const EnvSpec& s) {
  return {{"python", s.python},
          {"system_packages", s.system_packages},
          {"install", s.install},
          {"test_command", s.test_command},
          {"timeout_s", s.timeout.count()}};
}

EnvSpec spec_from_json(const nlohmann::json& j) {
  EnvSpec s;
  s.python = j.at("python").get<std::string>();
  s.system_packages = j.value("system_packages", std::vector<std::string>{});
  s.install = j.value("install", std::vector<std::string>{});
  s.test_command = j.value("test_command", s.test_command);
  s.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<std::int64_t>(s.timeout.count())));
  return s;
}

InferenceBasis basis_from_name(const std::string& n) {
  for (auto b : {InferenceBasis::kCiConfig, InferenceBasis::kEnvFiles, InferenceBasis::kDocs,
                 InferenceBasis::kDefault, InferenceBasis::kGenerator}) {
    if (basis_name(b) == n) return b;
  }
  throw ParseError("unknown toolchain basis '" + n + "'", 0);
}

std::string sanitize_tag(const std::string& tag) {
  std::string out;
  for (char c : tag) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_') ? c : '_';
  return out;
}

RunResult from_process(const ProcessResult& p) {
  RunResult r;
  r.log = p.output;
  r.exit.exit_code = p.exit_code;
  if (p.spawn_failed) {
    r.runtime_failure = true;
    r.runtime_error = "failed to start: " + p.output;
    r.exit.status = oracle::ExitStatus::kRuntimeError;
  } else if (p.timed_out) {
    r.exit.status = oracle::ExitStatus::kTimeout;
  }
  return r;
}

constexpr const char* kEnvPrompt = R"(You are preparing a reproducible test environment for the Python repository in {{ workspace }}.

Toolchain: Python {{ python }} ({{ basis }}).

Read the repository's build and test configuration (CI workflows, setup.py, pyproject.toml,
requirements files, tox.ini, README). Then write a file named {{ file_name }} in this format:

[runtime]
python = "{{ python }}"

[build]
system_packages = []   # Debian package names
install = []           # shell commands run once from the repository root

[test]
command = "python -m pytest -rA -p no:cacheprovider"
timeout = 1800

The test command must accept test ids appended as extra arguments. These tests must be
collected and run by it:
{{ mandatory }}

Do not start containers, mount host paths, publish ports or request privileges.
)";

}  // namespace

std::string basis_name(InferenceBasis b) {
  switch (b) {
    case InferenceBasis::kCiConfig: return "ci-config";
    case InferenceBasis::kEnvFiles: return "env-files";
    case InferenceBasis::kDocs: return "docs";
    case InferenceBasis::kDefault: return "default";
    case InferenceBasis::kGenerator: return "generator";
  }
  return "default";
}

nlohmann::json ToolchainSpec::to_json() const {
  return {{"runtime_version", runtime_version}, {"basis", basis_name(basis)}, {"notes", notes}};
}

bool valid_runtime_version(const std::string& v) {
  static const std::regex re(R"(3\.[0-9]{1,2})");
  return std::regex_match(v, re);
}

ToolchainSpec detect_toolchain(const Workspace& ws, const std::string& default_version) {
  if (auto spec = load_env_toml(ws); spec && !spec->python.empty()) {
    return {spec->python, InferenceBasis::kEnvFiles, "env.toml"};
  }
  std::vector<Finding> ci;
  for (const auto& f : ci_files(ws)) {
    if (auto t = maybe_read(ws, f)) {
      auto v = ci_versions(*t);
      if (!v.empty()) ci.push_back({f, v});
    }
  }
  if (auto tc = pick(ci, InferenceBasis::kCiConfig)) return *tc;
  if (auto tc = pick(env_file_findings(ws), InferenceBasis::kEnvFiles)) return *tc;
  if (auto tc = pick(doc_findings(ws), InferenceBasis::kDocs)) return *tc;
  return {default_version, InferenceBasis::kDefault, "no version stated"};
}

ToolchainSpec detect_toolchain_external(const Workspace& ws, const ExternalCommand& cmd,
                                        const std::string& default_version) {
  TempDir tmp("toolchain");
  const fs::path out = tmp.path() / "toolchain.json";
  const fs::path prompt_file = tmp.path() / "prompt.md";
  write_file(prompt_file,
             "Determine the Python minor version (for example 3.10) the repository in " + ws.root.string() +
                 " was developed against. Write {\"runtime_version\": \"3.x\", \"notes\": \"...\"} to " +
                 out.string() + ".\n");
  ProcessResult r = run_external(
      cmd, {{"workspace", ws.root.string()}, {"prompt_file", prompt_file.string()}, {"output_file", out.string()}},
      ws.root);
  if (r.ok()) {
    try {
      auto j = nlohmann::json::parse(fs::exists(out) ? read_file(out) : r.output);
      std::string v = j.at("runtime_version").get<std::string>();
      if (valid_runtime_version(v)) return {v, InferenceBasis::kGenerator, j.value("notes", std::string())};
    } catch (const std::exception&) {
    }
  }
  ToolchainSpec tc = detect_toolchain(ws, default_version);
  tc.notes += tc.notes.empty() ? "generator answer unusable" : "; generator answer unusable";
  return tc;
}

std::string EnvSpec::to_toml() const {
  std::string out;
  out += "[runtime]\npython = " + toml_quote(python) + "\n\n";
  out += "[build]\nsystem_packages = " + toml_list(system_packages) + "\n";
  out += "install = " + toml_list(install) + "\n\n";
  out += "[test]\ncommand = " + toml_quote(test_command) + "\n";
  out += "timeout = " + std::to_string(timeout.count()) + "\n";
  return out;
}

EnvSpec EnvSpec::from_toml(const std::string& text) {
  static const std::set<std::string> known = {"runtime.python", "build.system_packages", "build.install",
                                              "test.command", "test.timeout"};
  KvConfig cfg = KvConfig::parse(text);
  for (const auto& k : cfg.keys()) {
    if (!known.count(k)) throw ConfigError("env.toml: unknown key '" + k + "'");
  }
  EnvSpec s;
  s.python = cfg.get_string("runtime.python").value_or("");
  if (!s.python.empty() && !valid_runtime_version(s.python)) {
    throw ConfigError("env.toml: runtime.python must look like 3.10, got '" + s.python + "'");
  }
  s.system_packages = cfg.get_string_list("build.system_packages").value_or(std::vector<std::string>{});
  s.install = cfg.get_string_list("build.install").value_or(std::vector<std::string>{});
  if (auto c = cfg.get_string("test.command")) s.test_command = *c;
  if (split_command_line(s.test_command).empty()) throw ConfigError("env.toml: test.command is empty");
  if (auto t = cfg.get_int("test.timeout")) {
    if (*t <= 0) throw ConfigError("env.toml: test.timeout must be positive");
    s.timeout = std::chrono::seconds(*t);
  }
  return s;
}

std::string EnvSpec::digest() const { return sha256_hex(to_toml()); }

std::optional<EnvSpec> load_env_toml(const Workspace& ws) {
  auto t = maybe_read(ws, "env.toml");
  if (!t) return std::nullopt;
  return EnvSpec::from_toml(*t);
}

EnvSpec infer_env_spec(const Workspace& ws, const ToolchainSpec& tc) {
  EnvSpec s;
  s.python = tc.runtime_version;
  bool mentions_pytest = false;
  std::vector<std::string> reqs;
  for (const char* f : {"requirements.txt", "requirements-dev.txt", "requirements_dev.txt", "requirements-test.txt",
                        "requirements_test.txt", "test-requirements.txt", "dev-requirements.txt"}) {
    if (auto t = maybe_read(ws, f)) {
      reqs.emplace_back(f);
      if (to_lower(*t).find("pytest") != std::string::npos) mentions_pytest = true;
    }
  }
  for (const auto& r : reqs) s.install.push_back("python -m pip install -r " + r);
  bool package = maybe_read(ws, "setup.py").has_value();
  if (auto t = maybe_read(ws, "pyproject.toml")) {
    if (t->find("[project]") != std::string::npos || t->find("[build-system]") != std::string::npos ||
        t->find("[tool.poetry]") != std::string::npos) {
      package = true;
    }
    if (to_lower(*t).find("pytest") != std::string::npos) mentions_pytest = true;
  }
  if (auto t = maybe_read(ws, "setup.cfg"); t && to_lower(*t).find("pytest") != std::string::npos) {
    mentions_pytest = true;
  }
  if (package) s.install.push_back("python -m pip install -e .");
  if (!mentions_pytest) s.install.insert(s.install.begin(), "python -m pip install pytest");
  return s;
}

std::vector<std::string> denied_build_commands(const EnvSpec& spec) {
  static const std::regex denied(
      R"((^|[\s;&|(])(docker|podman|nerdctl|kubectl|sudo|mount|chroot)\b|--privileged|--network[= ]host|/var/run/docker\.sock|(^|\s)(-p|--publish)\s+[0-9]|(^|\s)(-v|--volume)\s+/)");
  std::vector<std::string> out;
  std::vector<std::string> all = spec.install;
  all.push_back(spec.test_command);
  for (const auto& c : all) {
    if (std::regex_search(c, denied)) out.push_back(c);
  }
  return out;
}

EnvSpec generate_env_spec_external(const Workspace& ws, const ToolchainSpec& tc,
                                   const std::vector<std::string>& mandatory, const ExternalCommand& cmd) {
  TempDir tmp("env-gen");
  const fs::path work = tmp.path() / "repo";
  copy_tree(ws.root, work);
  const fs::path out = tmp.path() / "env.toml";
  std::string listed;
  for (const auto& m : mandatory) listed += "- " + m + "\n";
  const fs::path prompt_file = tmp.path() / "prompt.md";
  write_file(prompt_file, render_template(kEnvPrompt, {{"workspace", work.string()},
                                                       {"python", tc.runtime_version},
                                                       {"basis", basis_name(tc.basis)},
                                                       {"file_name", out.string()},
                                                       {"mandatory", listed.empty() ? "(none)\n" : listed}}));
  ProcessResult r = run_external(
      cmd, {{"workspace", work.string()}, {"prompt_file", prompt_file.string()}, {"output_file", out.string()}},
      work);
  if (!r.ok()) throw Rejection("env-build", "environment generator failed: exit " + std::to_string(r.exit_code));
  if (!fs::exists(out)) throw Rejection("env-build", "environment generator wrote no env.toml");
  EnvSpec s;
  try {
    s = EnvSpec::from_toml(read_file(out));
  } catch (const Error& e) {
    throw Rejection("env-build", std::string("generated env.toml invalid: ") + e.what());
  }
  if (s.python.empty()) s.python = tc.runtime_version;
  return s;
}

nlohmann::json EnvironmentRef::to_json() const {
  return {{"image_tag", image_tag},
          {"runtime", runtime},
          {"build_log_digest", build_log_digest},
          {"run_command", run_command},
          {"mandatory_tests", mandatory_tests},
          {"fallback", fallback},
          {"spec", spec_to_json(spec)},
          {"toolchain", toolchain.to_json()},
          {"parser", parser.to_json()}};
}

EnvironmentRef EnvironmentRef::from_json(const nlohmann::json& j) {
  EnvironmentRef e;
  e.image_tag = j.at("image_tag").get<std::string>();
  e.runtime = j.at("runtime").get<std::string>();
  e.build_log_digest = j.value("build_log_digest", std::string());
  e.run_command = j.at("run_command").get<std::vector<std::string>>();
  e.mandatory_tests = j.value("mandatory_tests", std::vector<std::string>{});
  e.fallback = j.value("fallback", false);
  e.spec = spec_from_json(j.at("spec"));
  const auto& t = j.at("toolchain");
  e.toolchain.runtime_version = t.at("runtime_version").get<std::string>();
  e.toolchain.basis = basis_from_name(t.value("basis", std::string("default")));
  e.toolchain.notes = t.value("notes", std::string());
  e.parser = oracle::ParserSpec::from_json(j.at("parser"));
  return e;
}

std::string image_tag_for(const std::string& repo_id, const std::string& commit) {
  return "susforge/" + repo_id + ":" + commit.substr(0, std::min<std::size_t>(12, commit.size()));
}

// ---- docker ----

bool DockerRuntime::available(const std::string& binary) {
  if (!program_available(binary)) return false;
  ProcessOptions o;
  o.timeout = std::chrono::seconds(20);
  return run_process({binary, "version", "--format", "{{.Server.Version}}"}, o).ok();
}

std::string DockerRuntime::dockerfile(const EnvSpec& spec) {
  std::string out = "FROM python:" + spec.python + "-slim-bookworm\n";
  out += "ENV DEBIAN_FRONTEND=noninteractive PYTHONDONTWRITEBYTECODE=1 PYTHONHASHSEED=0 PIP_DISABLE_PIP_VERSION_CHECK=1\n";
  if (!spec.system_packages.empty()) {
    out += "RUN apt-get update && apt-get install -y --no-install-recommends";
    for (const auto& p : spec.system_packages) out += " " + shell_quote(p);
    out += " && rm -rf /var/lib/apt/lists/*\n";
  }
  out += "COPY . /testbed\nWORKDIR /testbed\n";
  for (const auto& c : spec.install) out += "RUN " + c + "\n";
  out += "LABEL org.susforge.spec=\"" + spec.digest() + "\"\n";
  return out;
}

bool DockerRuntime::image_exists(const std::string& tag) {
  ProcessOptions o;
  o.timeout = std::chrono::seconds(60);
  return run_process({binary_, "image", "inspect", tag}, o).ok();
}

BuildResult DockerRuntime::build(const Workspace& sources, const EnvSpec& spec, const std::string& tag) {
  TempDir tmp("docker-build");
  const fs::path ctx = tmp.path() / "ctx";
  copy_tree(sources.root, ctx);
  const fs::path file = tmp.path() / "Dockerfile";
  write_file(file, dockerfile(spec));
  ProcessOptions o;
  o.timeout = spec.timeout;
  ProcessResult r = run_process({binary_, "build", "--rm", "-t", tag, "-f", file.string(), ctx.string()}, o);
  return {r.ok(), dockerfile(spec) + "\n" + r.output};
}

RunResult DockerRuntime::run(const std::string& tag, const Workspace& ws, const std::vector<std::string>& command,
                             std::chrono::seconds timeout) {
  const std::string name = "susforge-run-" + sha256_hex(tag + ws.root.string() + shell_join(command)).substr(0, 16);
  std::vector<std::string> argv = {
      binary_, "run", "--rm", "--name", name, "--network", "none", "-v", fs::absolute(ws.root).string() + ":/src:ro",
      tag, "sh", "-c",
      "find /testbed -mindepth 1 -maxdepth 1 ! -name '*.egg-info' -exec rm -rf {} + && cp -a /src/. /testbed/ && cd "
      "/testbed && exec \"$@\"",
      "sh"};
  argv.insert(argv.end(), command.begin(), command.end());
  ProcessOptions o;
  o.timeout = timeout;
  ProcessResult p = run_process(argv, o);
  RunResult r = from_process(p);
  if (p.timed_out) {
    ProcessOptions k;
    k.timeout = std::chrono::seconds(60);
    run_process({binary_, "rm", "-f", name}, k);
  } else if (!p.spawn_failed && p.exit_code >= 125 && p.exit_code <= 127) {
    r.runtime_failure = true;
    r.runtime_error = "container runtime exit " + std::to_string(p.exit_code);
    r.exit.status = oracle::ExitStatus::kRuntimeError;
  }
  return r;
}

std::vector<std::string> DockerRuntime::list_images() {
  ProcessOptions o;
  o.timeout = std::chrono::seconds(60);
  ProcessResult r = run_process(
      {binary_, "image", "ls", "--filter", "reference=susforge/*", "--format", "{{.Repository}}:{{.Tag}}"}, o);
  if (!r.ok()) throw EnvError("cannot list images: " + tail(r.output, 400));
  std::vector<std::string> out;
  for (const auto& l : split_lines(r.output)) {
    if (!trim(l).empty()) out.push_back(trim(l));
  }
  return out;
}

void DockerRuntime::remove_image(const std::string& tag) {
  ProcessOptions o;
  o.timeout = std::chrono::seconds(120);
  run_process({binary_, "rmi", "-f", tag}, o);
}

// ---- local ----

LocalRuntime::LocalRuntime(std::filesystem::path store) : store_(fs::absolute(store)) {
  fs::create_directories(store_ / "images");
  fs::create_directories(store_ / "runs");
}

fs::path LocalRuntime::image_dir(const std::string& tag) const { return store_ / "images" / sanitize_tag(tag); }

bool LocalRuntime::image_exists(const std::string& tag) {
  return fs::exists(image_dir(tag) / "manifest.json");
}

BuildResult LocalRuntime::build(const Workspace& sources, const EnvSpec& spec, const std::string& tag) {
  const fs::path dir = image_dir(tag);
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  copy_tree(sources.root, dir / "src");
  std::string log;
  auto fail = [&](const std::string& why) {
    log += why + "\n";
    fs::remove_all(dir, ec);
    return BuildResult{false, log};
  };
  ProcessOptions vo;
  vo.timeout = std::chrono::minutes(5);
  ProcessResult host = run_process({"python3", "-c", "import sys;print('%d.%d' % sys.version_info[:2])"}, vo);
  if (!host.ok()) return fail("python3 not available on the host");
  const std::string host_version = trim(host.output);
  log += "host python " + host_version + " (requested " + spec.python + ")\n";
  ProcessResult venv =
      run_process({"python3", "-m", "venv", "--system-site-packages", "--without-pip", (dir / "venv").string()}, vo);
  log += venv.output;
  if (!venv.ok()) return fail("venv creation failed");
  if (!spec.system_packages.empty()) {
    log += "system packages left to the host:";
    for (const auto& p : spec.system_packages) log += " " + p;
    log += "\n";
  }
  ProcessOptions io;
  io.cwd = dir / "src";
  io.timeout = spec.timeout;
  const char* path = std::getenv("PATH");
  io.env = {{"PATH", (dir / "venv" / "bin").string() + ":" + (path ? path : "/usr/bin:/bin")},
            {"VIRTUAL_ENV", (dir / "venv").string()},
            {"PIP_DISABLE_PIP_VERSION_CHECK", "1"},
            {"PYTHONDONTWRITEBYTECODE", "1"}};
  for (const auto& c : spec.install) {
    log += "$ " + c + "\n";
    ProcessResult r = run_process({"sh", "-c", c}, io);
    log += r.output;
    if (!r.ok()) return fail(r.timed_out ? "install step timed out" : "install step failed: exit " + std::to_string(r.exit_code));
  }
  nlohmann::json manifest = {{"tag", tag}, {"spec_digest", spec.digest()}, {"host_python", host_version}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return {true, log};
}

RunResult LocalRuntime::run(const std::string& tag, const Workspace& ws, const std::vector<std::string>& command,
                            std::chrono::seconds timeout) {
  const fs::path dir = image_dir(tag);
  if (!image_exists(tag)) {
    RunResult r;
    r.runtime_failure = true;
    r.runtime_error = "image not found: " + tag;
    r.exit.status = oracle::ExitStatus::kRuntimeError;
    return r;
  }
  TempDir tmp("run", store_ / "runs");
  const fs::path copy = tmp.path() / "testbed";
  copy_tree(ws.root, copy);
  ProcessOptions o;
  o.cwd = copy;
  o.timeout = timeout;
  const char* path = std::getenv("PATH");
  o.env = {{"PATH", (dir / "venv" / "bin").string() + ":" + (path ? path : "/usr/bin:/bin")},
           {"VIRTUAL_ENV", (dir / "venv").string()},
           {"PYTHONPATH", copy.string()},
           {"PYTHONDONTWRITEBYTECODE", "1"},
           {"PYTHONHASHSEED", "0"}};
  return from_process(run_process(command, o));
}

std::vector<std::string> LocalRuntime::list_images() {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(store_ / "images")) {
    fs::path m = e.path() / "manifest.json";
    if (!fs::exists(m)) continue;
    try {
      out.push_back(nlohmann::json::parse(read_file(m)).at("tag").get<std::string>());
    } catch (const std::exception&) {
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void LocalRuntime::remove_image(const std::string& tag) {
  std::error_code ec;
  fs::remove_all(image_dir(tag), ec);
}

std::unique_ptr<Runtime> make_runtime(const std::string& kind, const std::filesystem::path& store) {
  if (kind == "docker") {
    if (!DockerRuntime::available()) {
      throw EnvError("container runtime 'docker' is not available; start the daemon or set runtime.kind = \"local\"");
    }
    return std::make_unique<DockerRuntime>();
  }
  if (kind == "local") return std::make_unique<LocalRuntime>(store);
  if (kind == "auto") {
    if (DockerRuntime::available()) return std::make_unique<DockerRuntime>();
    return std::make_unique<LocalRuntime>(store);
  }
  throw ConfigError("runtime.kind must be auto, docker or local, got '" + kind + "'");
}

std::vector<std::string> suite_command(const EnvSpec& spec, const std::vector<std::string>& selection) {
  std::vector<std::string> argv = split_command_line(spec.test_command);
  argv.insert(argv.end(), selection.begin(), selection.end());
  return argv;
}

namespace {

bool report_usable(const oracle::ParserSpec& parser, const RunResult& r) {
  if (r.runtime_failure || r.exit.status != oracle::ExitStatus::kCompleted) return false;
  return oracle::apply_spec(parser, r.log).any_match;
}

std::vector<std::string> mandatory_files(const std::vector<std::string>& mandatory, const Workspace& ws) {
  std::vector<std::string> out;
  for (const auto& id : mandatory) {
    std::string file = id.substr(0, id.find("::"));
    std::error_code ec;
    if (fs::is_regular_file(ws.root / file, ec) && std::find(out.begin(), out.end(), file) == out.end()) {
      out.push_back(file);
    }
  }
  return out;
}

}  // namespace

EnvironmentRef build_environment(const Workspace& sources, const Workspace& probe_ws, const EnvSpec& spec,
                                 const ToolchainSpec& tc, const std::vector<std::string>& mandatory,
                                 Runtime& runtime, const BuildOptions& options) {
  if (auto denied = denied_build_commands(spec); !denied.empty()) {
    throw Rejection("env-build", "denied command: " + denied.front());
  }
  EnvironmentRef env;
  env.image_tag = image_tag_for(options.repo_id, options.commit);
  env.runtime = runtime.name();
  env.spec = spec;
  env.toolchain = tc;
  env.mandatory_tests = mandatory;
  env.run_command = suite_command(spec);

  std::lock_guard<std::mutex> guard(build_mutex(options.repo_id));
  std::string build_log;
  if (options.reuse_existing && runtime.image_exists(env.image_tag)) {
    build_log = "reused " + env.image_tag + " " + spec.digest();
  } else {
    BuildResult b = runtime.build(sources, spec, env.image_tag);
    if (!b.ok) throw Rejection("env-build", tail(b.log));
    build_log = b.log;
  }
  env.build_log_digest = sha256_hex(build_log);

  const auto timeout = options.probe_timeout.count() > 0 ? options.probe_timeout : spec.timeout;
  RunResult probe = runtime.run(env.image_tag, probe_ws, env.run_command, timeout);
  if (probe.runtime_failure) throw Rejection("env-run", probe.runtime_error);

  auto choose_parser = [&](const RunResult& r) -> std::optional<oracle::ParserSpec> {
    oracle::ParserSpec builtin = oracle::builtin_pytest_spec();
    if (report_usable(builtin, r)) return builtin;
    if (r.exit.status != oracle::ExitStatus::kCompleted) return std::nullopt;
    oracle::HeuristicParserSynth heuristic;
    oracle::ParserSynth& synth = options.parser_synth ? *options.parser_synth : heuristic;
    try {
      return oracle::synthesize_parser({r.log}, synth).spec;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  if (auto p = choose_parser(probe)) {
    env.parser = *p;
    return env;
  }
  const std::vector<std::string> files = mandatory_files(mandatory, probe_ws);
  if (files.empty()) {
    throw Rejection("env-run", probe.exit.status == oracle::ExitStatus::kTimeout
                                   ? "full suite timed out and no mandatory tests are present"
                                   : "suite output unparseable: " + tail(probe.log, 600));
  }
  RunResult narrowed = runtime.run(env.image_tag, probe_ws, suite_command(spec, files), timeout);
  if (narrowed.runtime_failure) throw Rejection("env-run", narrowed.runtime_error);
  auto p = choose_parser(narrowed);
  if (!p) throw Rejection("env-run", "mandatory tests unparseable: " + tail(narrowed.log, 600));
  env.parser = *p;
  env.fallback = true;
  return env;
}

SuiteRun run_suite(const EnvironmentRef& env, Runtime& runtime, const Workspace& ws,
                   const std::vector<std::string>& selection, std::optional<std::chrono::seconds> timeout) {
  std::vector<std::string> argv = env.run_command;
  if (selection.empty() && env.fallback) {
    auto files = mandatory_files(env.mandatory_tests, ws);
    argv.insert(argv.end(), files.begin(), files.end());
  } else {
    argv.insert(argv.end(), selection.begin(), selection.end());
  }
  SuiteRun out;
  out.raw = runtime.run(env.image_tag, ws, argv, timeout.value_or(env.spec.timeout));
  oracle::ExitInfo exit = out.raw.exit;
  if (out.raw.runtime_failure) exit.status = oracle::ExitStatus::kRuntimeError;
  try {
    out.report = oracle::parse_report(env.parser, out.raw.log, exit);
  } catch (const Error&) {
    out.report = oracle::TestReport{};
    out.report.exit_status = exit.status;
    out.report.exit_code = exit.exit_code;
    out.report.summary_found = false;
    out.report.per_test = oracle::parse_pytest_per_test(out.raw.log);
  }
  return out;
}

std::vector<std::string> gc_images(Runtime& runtime, const std::vector<std::string>& referenced) {
  std::set<std::string> keep(referenced.begin(), referenced.end());
  std::vector<std::string> removed;
  for (const auto& tag : runtime.list_images()) {
    if (!starts_with(tag, "susforge/") || keep.count(tag)) continue;
    runtime.remove_image(tag);
    removed.push_back(tag);
  }
  return removed;
}

std::mutex& build_mutex(const std::string& repo_id) {
  static std::mutex guard;
  static std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard<std::mutex> g(guard);
  auto& m = locks[repo_id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

}  // namespace susforge::env
