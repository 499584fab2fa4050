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


#include "susforge/forge.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

#include "susforge/fs.hpp"

namespace susforge::forge {

namespace {

using nlohmann::json;

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<std::string> security_files(const std::vector<std::string>& ids) {
  std::set<std::string> files;
  for (const auto& id : ids) files.insert(id.substr(0, id.find("::")));
  return {files.begin(), files.end()};
}

env::ToolchainSpec detect(const Workspace& ws, const ForgeGenerators& gens, const ForgeOptions& options) {
  if (gens.toolchain) return env::detect_toolchain_external(ws, *gens.toolchain, options.default_python);
  return env::detect_toolchain(ws, options.default_python);
}

env::EnvSpec env_spec_for(const Workspace& ws, const env::ToolchainSpec& tc, const std::vector<std::string>& mandatory,
                          const ForgeGenerators& gens) {
  try {
    if (auto declared = env::load_env_toml(ws)) return *declared;
    if (gens.env) return env::generate_env_spec_external(ws, tc, mandatory, *gens.env);
  } catch (const Rejection&) {
    throw;
  } catch (const Error& e) {
    throw Rejection("env-spec", e.what());
  }
  return env::infer_env_spec(ws, tc);
}

json metadata_for(const corpus::VulnRecord& record, const corpus::CommitTriple& triple, const std::string& task_id,
                  const synth::TaskCandidate& cand, const oracle::SecurityTestSet& sec,
                  const ForgeGenerators& gens, const ForgeOptions& options) {
  json j = triple.metadata(record);
  j["task_id"] = task_id;
  j["security_tests"] = sec.ids;
  j["modified_tests"] = sec.modified_ids;
  j["mask"] = cand.mask.to_json();
  j["iterations"] = cand.iterations;
  j["description_mode"] = cand.description.generation_mode;
  j["required_interfaces"] = cand.description.required_interfaces;
  const auto& a = cand.target.accounting;
  j["target"] = {{"total_lines", a.total_lines},
                 {"security_fix_lines", a.security_fix_lines},
                 {"masked_readded_lines", a.masked_readded_lines},
                 {"files", a.files},
                 {"security_fix_files", a.security_fix_files},
                 {"routes_agree", cand.target.routes_agree}};
  j["generators"] = {{"mask", gens.mask.name()},
                     {"description", gens.description.name()},
                     {"verifier", gens.verifier.name()}};
  j["test_rules"] = options.synth.classifier.rules();
  j["mask_ratio"] = options.synth.ratio;
  return j;
}

void write_task(const fs::path& dir, const json& metadata, const patch::SplitPatch& split,
                const synth::TaskCandidate& cand, env::EnvironmentRef env, const validate::ValidationReport& report,
                const fs::path& logs) {
  fs::create_directories(dir);
  write_file(dir / Artifacts::kDescription, cand.description.markdown);
  write_file(dir / Artifacts::kFeature, patch::render_patch(split.feature));
  write_file(dir / Artifacts::kTests, patch::render_patch(split.tests));
  write_file(dir / Artifacts::kMask, patch::render_patch(cand.mask.patch));
  write_file(dir / Artifacts::kTarget, patch::render_patch(cand.target.patch));
  write_json(dir / Artifacts::kMetadata, metadata);
  write_json(dir / Artifacts::kVerification, cand.verification.to_json());
  write_json(dir / Artifacts::kValidation, report.to_json());
  env.build_log_digest.clear();
  write_json(dir / Artifacts::kEnvironment, env.to_json());
  write_file(dir / Artifacts::kEnvToml, env.spec.to_toml());
  write_json(dir / Artifacts::kParser, env.parser.to_json());
  copy_tree(logs, dir / Artifacts::kLogs);
  copy_tree(cand.masked_root, dir / Artifacts::kRepo);
}

// Replaces `final_dir` with `staged` in one rename.
void publish(const fs::path& staged, const fs::path& final_dir) {
  const fs::path old = final_dir.string() + ".old";
  fs::remove_all(old);
  if (fs::exists(final_dir)) fs::rename(final_dir, old);
  fs::rename(staged, final_dir);
  fs::remove_all(old);
}

}  // namespace

const std::vector<std::string>& Artifacts::required() {
  static const std::vector<std::string> names = {kDescription, kTests, kMask, kTarget, kMetadata,
                                                 kValidation, kEnvironment, kRepo};
  return names;
}

namespace {

std::string missing_message(const fs::path& dir, const std::vector<std::string>& missing) {
  std::string msg = "incomplete task " + dir.string() + ", missing:";
  for (const auto& m : missing) msg += " " + m;
  return msg;
}

}  // namespace

MissingArtifacts::MissingArtifacts(const fs::path& dir, std::vector<std::string> missing)
    : Error(missing_message(dir, missing)), missing_(std::move(missing)) {}

std::string task_id_for(const std::string& repo_id, const std::string& c0_commit) {
  return repo_id + "__" + c0_commit.substr(0, 12);
}

json ForgeOutcome::to_json() const {
  json j = {{"record_id", record_id}, {"repo_id", repo_id}, {"task_id", task_id}, {"ok", ok},
            {"stage", stage},         {"reason", reason},   {"detail", detail},   {"iterations", iterations},
            {"failed_requirements", failed_requirements}};
  if (!task_dir.empty()) j["task_dir"] = task_dir.string();
  return j;
}

ForgeOutcome ForgeOutcome::from_json(const json& j) {
  ForgeOutcome o;
  o.record_id = j.value("record_id", std::string());
  o.repo_id = j.value("repo_id", std::string());
  o.task_id = j.value("task_id", std::string());
  o.ok = j.value("ok", false);
  o.stage = j.value("stage", std::string());
  o.reason = j.value("reason", std::string());
  o.detail = j.value("detail", std::string());
  o.iterations = j.value("iterations", 0);
  o.failed_requirements = j.value("failed_requirements", std::vector<std::string>{});
  o.task_dir = j.value("task_dir", std::string());
  return o;
}

ForgeOutcome forge_record(const corpus::VulnRecord& record, corpus::RepoCache& cache, env::Runtime& runtime,
                          ForgeGenerators gens, const ForgeOptions& options) {
  ForgeOutcome out;
  out.record_id = record.record_id;
  out.repo_id = corpus::repo_id_for(record.repo_url);
  const fs::path work = make_temp_dir(out.record_id.empty() ? "record" : out.record_id, options.work_root);
  struct Cleanup {
    fs::path dir;
    bool keep;
    ~Cleanup() {
      std::error_code ec;
      if (!keep) fs::remove_all(dir, ec);
    }
  } cleanup{work, options.keep_work};

  try {
    out.stage = "snapshot";
    corpus::CommitTriple triple = corpus::snapshot_repo(record, cache, work / "states");
    out.task_id = task_id_for(triple.repo_id, triple.c0_commit);

    out.stage = "split";
    patch::Patch full = patch::diff_workspaces(triple.c_minus1, triple.c0);
    patch::SplitPatch split = patch::split_patch(full, options.synth.classifier);
    if (split.tests.empty()) throw Rejection("no-test-changes", "the fix adds no tests");
    oracle::SecurityTestSet sec = oracle::identify_security_tests(split.tests, &triple.c0);
    if (sec.empty()) throw Rejection("no-security-tests", "the tests patch defines no new test");

    out.stage = "synth";
    synth::TaskCandidate cand = synth::synthesize_task(triple.c0, triple.c_minus1, split, triple.repo_id,
                                                       options.synth, {gens.mask, gens.description, gens.verifier},
                                                       work / "synth");
    out.iterations = cand.iterations;
    if (cand.status == synth::CandidateStatus::kRejected) {
      out.reason = cand.reason;
      out.detail = cand.detail;
      return out;
    }

    out.stage = "env";
    const auto mandatory = security_files(sec.ids);
    env::ToolchainSpec tc = detect(triple.c0, gens, options);
    env::EnvSpec spec = env_spec_for(triple.c0, tc, mandatory, gens);
    env::BuildOptions bo;
    bo.repo_id = triple.repo_id;
    bo.commit = triple.c0_commit;
    bo.probe_timeout = options.probe_timeout;
    bo.parser_synth = gens.parser_synth;
    env::EnvironmentRef env =
        env::build_environment(triple.c0, triple.c0, spec, tc, mandatory, runtime, bo);

    out.stage = "validation";
    validate::ValidationInputs in;
    in.c0 = triple.c0;
    in.c_minus1 = triple.c_minus1;
    in.c_masked = Workspace{cand.masked_root};
    in.tests_patch = split.tests;
    in.security_tests = sec.ids;
    in.classifier = options.synth.classifier;
    validate::ValidationOptions vo;
    vo.double_check = options.double_check;
    vo.timeout = options.cell_timeout;
    vo.log_dir = work / "logs";
    fs::create_directories(vo.log_dir);
    validate::ValidationReport report = validate::validate_task(in, env, runtime, vo);
    if (!report.valid) {
      out.reason = report.reason.empty() ? "requirements" : report.reason;
      out.failed_requirements = report.failed_requirements;
      out.detail = report.reason == "requirements" ? "failed requirements" : report.reason;
      return out;
    }
    cand.advance(synth::CandidateStatus::kValidated);

    out.stage = "write";
    fs::create_directories(options.out_dir);
    const fs::path staged = options.out_dir / (".staging-" + out.task_id);
    fs::remove_all(staged);
    write_task(staged, metadata_for(record, triple, out.task_id, cand, sec, gens, options), split, cand, env, report,
               vo.log_dir);
    out.task_dir = options.out_dir / out.task_id;
    publish(staged, out.task_dir);
    out.ok = true;
    out.stage = "done";
    spdlog::info("task {} written", out.task_id);
  } catch (const Rejection& r) {
    out.reason = r.reason();
    out.detail = r.what();
  } catch (const VcsError& e) {
    out.reason = "vcs";
    out.detail = e.what();
  } catch (const ApplyError& e) {
    out.reason = "patch-apply";
    out.detail = e.what();
  }
  if (!out.ok) spdlog::info("record {} rejected at {}: {}", out.record_id, out.stage, out.reason);
  return out;
}

json Manifest::to_json() const {
  json t = json::array();
  json r = json::array();
  for (const auto& o : tasks) t.push_back(o.to_json());
  for (const auto& o : rejected) r.push_back(o.to_json());
  return {{"tasks", t}, {"rejected", r}, {"filter", filter}};
}

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  for (const auto& o : j.value("tasks", json::array())) m.tasks.push_back(ForgeOutcome::from_json(o));
  for (const auto& o : j.value("rejected", json::array())) m.rejected.push_back(ForgeOutcome::from_json(o));
  m.filter = j.value("filter", json::object());
  return m;
}

Manifest Manifest::load(const fs::path& path) {
  Manifest m = from_json(read_json(path));
  for (auto& t : m.tasks) {
    if (!t.task_dir.empty() && t.task_dir.is_relative()) t.task_dir = path.parent_path() / t.task_dir;
  }
  return m;
}

TaskInstance load_task(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const auto& name : Artifacts::required()) {
    if (!fs::exists(dir / name)) missing.push_back(name);
  }
  if (!missing.empty()) throw MissingArtifacts(dir, missing);

  TaskInstance t;
  t.dir = dir;
  t.metadata = read_json(dir / Artifacts::kMetadata);
  t.task_id = t.metadata.value("task_id", dir.filename().string());
  t.description = read_file(dir / Artifacts::kDescription);
  if (fs::exists(dir / Artifacts::kFeature)) t.feature = patch::parse_patch(read_file(dir / Artifacts::kFeature));
  t.tests = patch::parse_patch(read_file(dir / Artifacts::kTests));
  t.mask = patch::parse_patch(read_file(dir / Artifacts::kMask));
  t.target = patch::parse_patch(read_file(dir / Artifacts::kTarget));
  t.env = env::EnvironmentRef::from_json(read_json(dir / Artifacts::kEnvironment));
  t.validation = read_json(dir / Artifacts::kValidation);
  t.baseline = validate::Baseline::from_json(t.validation.value("baseline", json::object()));
  t.security_tests = t.validation.value("security_tests", t.metadata.value("security_tests", std::vector<std::string>{}));
  t.gold_cwes = t.metadata.value("cwe_ids", std::vector<std::string>{});
  if (t.metadata.contains("test_rules")) {
    t.classifier = patch::TestPathClassifier(t.metadata.at("test_rules").get<std::vector<std::string>>());
  }
  return t;
}

TaskStates reconstruct_states(const TaskInstance& task, const fs::path& dest) {
  TaskStates s{Workspace{dest / "c0"}, Workspace{dest / "c_minus1"}, Workspace{dest / "c_masked"}};
  copy_tree(task.repo().root, s.c_masked.root);
  copy_tree(task.repo().root, s.c_minus1.root);
  patch::apply_patch(s.c_minus1, patch::invert_patch(task.mask));
  copy_tree(task.repo().root, s.c0.root);
  patch::apply_patch(s.c0, task.target);
  patch::apply_patch(s.c0, task.tests);
  return s;
}

validate::ValidationReport revalidate_task(const TaskInstance& task, env::Runtime& runtime,
                                           const validate::ValidationOptions& options) {
  TempDir scratch("revalidate");
  validate::ValidationReport report;
  report.security_tests = task.security_tests;
  TaskStates states;
  try {
    states = reconstruct_states(task, scratch.path());
  } catch (const ApplyError& e) {
    report.reason = "patch-apply";
    spdlog::warn("{}: {}", task.task_id, e.what());
    write_json(task.dir / Artifacts::kValidation, report.to_json());
    return report;
  }
  if (!runtime.image_exists(task.env.image_tag)) {
    std::lock_guard<std::mutex> guard(env::build_mutex(task.metadata.value("repo_id", task.task_id)));
    env::BuildResult b = runtime.build(states.c0, task.env.spec, task.env.image_tag);
    if (!b.ok) throw Rejection("env-build", b.log.substr(b.log.size() > 2000 ? b.log.size() - 2000 : 0));
  }
  validate::ValidationInputs in;
  in.c0 = states.c0;
  in.c_minus1 = states.c_minus1;
  in.c_masked = states.c_masked;
  in.tests_patch = task.tests;
  in.security_tests = task.security_tests;
  in.classifier = task.classifier;
  validate::ValidationOptions vo = options;
  if (vo.log_dir.empty()) vo.log_dir = task.dir / Artifacts::kLogs;
  fs::create_directories(vo.log_dir);
  report = validate::validate_task(in, task.env, runtime, vo);
  write_json(task.dir / Artifacts::kValidation, report.to_json());
  return report;
}

}  // namespace susforge::forge
