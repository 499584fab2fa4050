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


#include "susforge/app.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include "susforge/env.hpp"
#include "susforge/error.hpp"
#include "susforge/metrics.hpp"
#include "susforge/process.hpp"

namespace susforge::app {

namespace {

using nlohmann::json;

// Keys taking a list; absent means the built-in list.
const std::set<std::string> kListKeys = {"tests.rules", "synth.deny_terms"};
const std::set<std::string> kStrategyKeys = {"kind", "catalog", "selection_file"};

bool known_key(const std::string& key) {
  for (const auto& [k, v] : ForgeConfig::defaults()) {
    if (k == key) return true;
  }
  if (kListKeys.count(key)) return true;
  if (starts_with(key, "strategy.")) {
    const auto dot = key.rfind('.');
    return dot > 9 && kStrategyKeys.count(key.substr(dot + 1)) != 0;
  }
  return false;
}

std::string req_string(const KvConfig& kv, const std::string& key) {
  auto v = kv.get_string(key);
  if (!v) throw ConfigError("missing " + key);
  return *v;
}

std::int64_t req_int(const KvConfig& kv, const std::string& key, std::int64_t lo, std::int64_t hi) {
  auto v = kv.get_int(key);
  if (!v) throw ConfigError("missing " + key);
  if (*v < lo || *v > hi) {
    throw ConfigError(key + " = " + std::to_string(*v) + " is outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  return *v;
}

void check_generator(const std::string& key, const std::string& value, const std::set<std::string>& builtin) {
  if (builtin.count(value)) return;
  if (starts_with(value, "external:") && !trim(value.substr(9)).empty()) return;
  std::string names;
  for (const auto& b : builtin) names += (names.empty() ? "" : ", ") + b;
  throw ConfigError(key + " = '" + value + "': expected one of " + names + " or external:<cmd>");
}

std::optional<ExternalCommand> external_of(const std::string& value, std::chrono::seconds timeout) {
  if (!starts_with(value, "external:")) return std::nullopt;
  ExternalCommand cmd = parse_external(value);
  cmd.timeout = timeout;
  return cmd;
}

void print_rule(std::ostream& out) { out << std::string(60, '-') << "\n"; }

}  // namespace

const std::vector<std::pair<std::string, std::string>>& ForgeConfig::defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"paths.cache", "\".susforge/cache\""},
      {"paths.out", "\"tasks\""},
      {"paths.store", "\".susforge/store\""},
      {"paths.work", "\".susforge/work\""},
      {"filter.min_relevance", "65"},
      {"filter.language", "\"python\""},
      {"filter.require_test_modification", "true"},
      {"filter.max_cwes", "0"},
      {"mask.ratio", "2.0"},
      {"mask.max_iters", "3"},
      {"synth.description_retries", "1"},
      {"synth.leak_min", "40"},
      {"generators.mask", "\"structural\""},
      {"generators.description", "\"template\""},
      {"generators.verifier", "\"rule\""},
      {"generators.env", "\"infer\""},
      {"generators.toolchain", "\"detect\""},
      {"generators.parser", "\"heuristic\""},
      {"runtime.kind", "\"auto\""},
      {"runtime.slots", "1"},
      {"runtime.python", "\"3.10\""},
      {"timeouts.probe", "0"},
      {"timeouts.cell", "0"},
      {"timeouts.generator", "1800"},
      {"timeouts.agent", "3600"},
      {"validate.double_check", "false"},
      {"eval.agent", "\"\""},
      {"eval.max_steps", "200"},
      {"eval.selection_file", "\"selected_cwes.json\""},
  };
  return d;
}

std::string env_var_for(const std::string& key) {
  std::string out = "SUSFORGE_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

ForgeConfig::EnvLookup ForgeConfig::process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

ForgeConfig ForgeConfig::load(const std::optional<fs::path>& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides,
                              const EnvLookup& env) {
  KvConfig kv;
  if (file) {
    if (!fs::exists(*file)) throw ConfigError("config file not found: " + file->string());
    try {
      kv = KvConfig::parse(read_file(*file));
    } catch (const ParseError& e) {
      throw ConfigError(file->string() + ": " + e.what());
    }
  }
  for (const auto& key : kv.keys()) {
    if (!known_key(key)) throw ConfigError("unknown config key: " + key);
  }
  for (const auto& [key, raw] : defaults()) {
    if (!kv.has(key)) kv.set_raw(key, raw);
  }
  std::vector<std::string> env_keys;
  for (const auto& [key, raw] : defaults()) env_keys.push_back(key);
  env_keys.insert(env_keys.end(), kListKeys.begin(), kListKeys.end());
  for (const auto& key : env_keys) {
    if (auto v = env(env_var_for(key))) kv.set_raw(key, *v);
  }
  for (const auto& [key, raw] : overrides) {
    if (!known_key(key)) throw ConfigError("unknown config key: " + key);
    kv.set_raw(key, raw);
  }
  return from_kv(kv);
}

ForgeConfig ForgeConfig::from_kv(const KvConfig& kv) {
  ForgeConfig c;
  c.cache_dir = fs::absolute(req_string(kv, "paths.cache"));
  c.out_dir = fs::absolute(req_string(kv, "paths.out"));
  c.store_dir = fs::absolute(req_string(kv, "paths.store"));
  c.work_dir = fs::absolute(req_string(kv, "paths.work"));

  const auto min_rel = req_int(kv, "filter.min_relevance", 0, 100);
  c.filter.min_relevance = min_rel > 0 ? std::optional<int>(static_cast<int>(min_rel)) : std::nullopt;
  c.filter.language = req_string(kv, "filter.language");
  c.filter.require_test_modification = kv.get_bool("filter.require_test_modification").value_or(true);
  const auto max_cwes = req_int(kv, "filter.max_cwes", 0, 1000);
  c.filter.max_cwes = max_cwes > 0 ? std::optional<int>(static_cast<int>(max_cwes)) : std::nullopt;

  c.test_rules = kv.get_string_list("tests.rules").value_or(patch::TestPathClassifier::default_rules());
  if (c.test_rules.empty()) throw ConfigError("tests.rules must not be empty");
  c.filter.classifier = patch::TestPathClassifier(c.test_rules);

  c.mask_ratio = kv.get_double("mask.ratio").value_or(2.0);
  if (!(c.mask_ratio >= 1.0)) throw ConfigError("mask.ratio must be at least 1");
  c.max_iters = static_cast<int>(req_int(kv, "mask.max_iters", 1, 100));
  c.description_retries = static_cast<int>(req_int(kv, "synth.description_retries", 0, 100));
  c.leak_min = static_cast<int>(req_int(kv, "synth.leak_min", 1, 100000));
  c.deny_terms = kv.get_string_list("synth.deny_terms").value_or(synth::ScanPolicy::default_deny_terms());

  c.gen_mask = req_string(kv, "generators.mask");
  c.gen_description = req_string(kv, "generators.description");
  c.gen_verifier = req_string(kv, "generators.verifier");
  c.gen_env = req_string(kv, "generators.env");
  c.gen_toolchain = req_string(kv, "generators.toolchain");
  c.gen_parser = req_string(kv, "generators.parser");
  check_generator("generators.mask", c.gen_mask, {"structural"});
  check_generator("generators.description", c.gen_description, {"template"});
  check_generator("generators.verifier", c.gen_verifier, {"rule"});
  check_generator("generators.env", c.gen_env, {"infer"});
  check_generator("generators.toolchain", c.gen_toolchain, {"detect"});
  check_generator("generators.parser", c.gen_parser, {"heuristic"});

  c.runtime_kind = req_string(kv, "runtime.kind");
  if (c.runtime_kind != "auto" && c.runtime_kind != "docker" && c.runtime_kind != "local") {
    throw ConfigError("runtime.kind must be auto, docker or local");
  }
  c.slots = static_cast<int>(req_int(kv, "runtime.slots", 1, 256));
  c.default_python = req_string(kv, "runtime.python");
  if (!env::valid_runtime_version(c.default_python)) throw ConfigError("runtime.python: bad version");

  c.probe_timeout = std::chrono::seconds(req_int(kv, "timeouts.probe", 0, 86400 * 7));
  c.cell_timeout = std::chrono::seconds(req_int(kv, "timeouts.cell", 0, 86400 * 7));
  c.generator_timeout = std::chrono::seconds(req_int(kv, "timeouts.generator", 1, 86400 * 7));
  c.agent_timeout = std::chrono::seconds(req_int(kv, "timeouts.agent", 1, 86400 * 7));
  c.double_check = kv.get_bool("validate.double_check").value_or(false);

  c.agent = req_string(kv, "eval.agent");
  c.max_steps = static_cast<int>(req_int(kv, "eval.max_steps", 1, 1000000));
  c.selection_file = req_string(kv, "eval.selection_file");
  if (c.selection_file.empty() || c.selection_file.find('/') != std::string::npos) {
    throw ConfigError("eval.selection_file must be a plain file name");
  }

  for (const auto& key : kv.keys()) {
    if (!starts_with(key, "strategy.")) continue;
    const auto dot = key.rfind('.');
    const std::string name = key.substr(9, dot - 9);
    const std::string sub = key.substr(dot + 1);
    StrategyConfig& s = c.strategies[name];
    s.name = name;
    const std::string value = req_string(kv, key);
    if (sub == "kind") s.kind = value;
    if (sub == "catalog") s.catalog = value;
    if (sub == "selection_file") s.selection_file = value;
  }
  for (const auto& [name, s] : c.strategies) {
    if (s.kind.empty()) throw ConfigError("strategy." + name + ".kind is missing");
    eval::parse_kind(s.kind);
  }
  return c;
}

void ForgeConfig::check_commands() const {
  const std::vector<std::pair<std::string, std::string>> gens = {
      {"generators.mask", gen_mask},       {"generators.description", gen_description},
      {"generators.verifier", gen_verifier}, {"generators.env", gen_env},
      {"generators.toolchain", gen_toolchain}, {"generators.parser", gen_parser}};
  for (const auto& [key, value] : gens) {
    auto cmd = external_of(value, generator_timeout);
    if (!cmd) continue;
    if (cmd->empty() || !program_available(cmd->argv.front())) {
      throw ConfigError(key + ": command not found: " + (cmd->empty() ? value : cmd->argv.front()));
    }
  }
  for (const auto& [name, s] : strategies) {
    if (!s.catalog.empty() && !fs::exists(s.catalog)) {
      throw ConfigError("strategy." + name + ".catalog: no such file: " + s.catalog);
    }
  }
}

patch::TestPathClassifier ForgeConfig::classifier() const { return patch::TestPathClassifier(test_rules); }

synth::SynthConfig ForgeConfig::synth_config() const {
  synth::SynthConfig s;
  s.ratio = mask_ratio;
  s.max_iters = max_iters;
  s.description_retries = description_retries;
  s.scan.deny_terms = deny_terms;
  s.scan.leak_min = static_cast<std::size_t>(leak_min);
  s.classifier = classifier();
  return s;
}

eval::Strategy ForgeConfig::strategy(const std::string& name) const {
  eval::Strategy s;
  if (auto it = strategies.find(name); it != strategies.end()) {
    s = eval::Strategy::builtin(eval::parse_kind(it->second.kind));
    if (!it->second.catalog.empty()) s.cwe_catalog = eval::load_cwe_catalog(it->second.catalog);
    s.selection_file_name = it->second.selection_file.empty() ? selection_file : it->second.selection_file;
  } else {
    try {
      s = eval::Strategy::builtin(eval::parse_kind(name));
    } catch (const ConfigError&) {
      throw ConfigError("unknown strategy: " + name);
    }
    s.selection_file_name = selection_file;
  }
  s.name = name;
  return s;
}

forge::ForgeGenerators GeneratorSet::view() {
  forge::ForgeGenerators g{*mask, *description, *verifier};
  g.toolchain = toolchain ? &*toolchain : nullptr;
  g.env = env ? &*env : nullptr;
  g.parser_synth = parser.get();
  return g;
}

GeneratorSet make_generators(const ForgeConfig& cfg) {
  GeneratorSet g;
  const auto t = cfg.generator_timeout;
  if (auto cmd = external_of(cfg.gen_mask, t)) {
    g.mask = std::make_unique<mask::ExternalMaskGenerator>(*cmd);
  } else {
    g.mask = std::make_unique<mask::StructuralMaskGenerator>();
  }
  if (auto cmd = external_of(cfg.gen_description, t)) {
    g.description = std::make_unique<synth::ExternalDescriptionGenerator>(*cmd);
  } else {
    g.description = std::make_unique<synth::TemplateDescriptionGenerator>();
  }
  if (auto cmd = external_of(cfg.gen_verifier, t)) {
    g.verifier = std::make_unique<synth::ExternalCoverageVerifier>(*cmd);
  } else {
    g.verifier = std::make_unique<synth::RuleCoverageVerifier>();
  }
  g.toolchain = external_of(cfg.gen_toolchain, t);
  g.env = external_of(cfg.gen_env, t);
  if (auto cmd = external_of(cfg.gen_parser, t)) {
    g.parser = std::make_unique<oracle::ExternalParserSynth>(*cmd);
  } else {
    g.parser = std::make_unique<oracle::HeuristicParserSynth>();
  }
  return g;
}

namespace {

template <typename Fn>
void run_pool(std::size_t n, int slots, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(slots), n));
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

int cmd_forge(const ForgeConfig& cfg, const ForgeRequest& req, CommandIO& io) {
  cfg.check_commands();
  if (!fs::is_regular_file(req.records)) throw ConfigError("no such record file: " + req.records.string());
  corpus::IngestResult ingest = corpus::ingest_records(req.records, req.format);
  corpus::RepoCache cache(cfg.cache_dir);
  corpus::FilterReport filtered = corpus::filter_records(ingest.records, cfg.filter, &cache);

  auto runtime = env::make_runtime(cfg.runtime_kind, cfg.store_dir);
  forge::ForgeOptions opt;
  opt.synth = cfg.synth_config();
  opt.default_python = cfg.default_python;
  opt.probe_timeout = cfg.probe_timeout;
  opt.double_check = cfg.double_check;
  if (cfg.cell_timeout.count() > 0) opt.cell_timeout = cfg.cell_timeout;
  opt.work_root = cfg.work_dir;
  opt.out_dir = cfg.out_dir;
  fs::create_directories(cfg.work_dir);
  fs::create_directories(cfg.out_dir);

  const auto& records = filtered.kept;
  std::vector<forge::ForgeOutcome> results(records.size());
  std::atomic<int> internal_errors{0};
  run_pool(records.size(), cfg.slots, [&](std::size_t i) {
    GeneratorSet gens = make_generators(cfg);
    try {
      results[i] = forge::forge_record(records[i], cache, *runtime, gens.view(), opt);
    } catch (const std::exception& e) {
      ++internal_errors;
      results[i].record_id = records[i].record_id;
      results[i].repo_id = corpus::repo_id_for(records[i].repo_url);
      results[i].reason = "internal-error";
      results[i].detail = e.what();
      spdlog::error("record {}: {}", records[i].record_id, e.what());
    }
  });

  forge::Manifest manifest;
  manifest.filter = filtered.to_json();
  manifest.filter["ingest_skipped_missing_commit"] = ingest.skipped_missing_commit;
  manifest.filter["ingest_skipped_malformed"] = ingest.skipped_malformed;
  for (auto& r : results) {
    if (r.ok) {
      r.task_dir = r.task_dir.filename();
      manifest.tasks.push_back(r);
    } else {
      manifest.rejected.push_back(r);
    }
  }
  const fs::path manifest_path = cfg.out_dir / "manifest.json";
  write_file(manifest_path, manifest.to_json().dump(2) + "\n");

  if (io.json) {
    io.out << manifest.to_json().dump(2) << "\n";
  } else {
    io.out << "forged " << manifest.tasks.size() << " task(s), rejected " << manifest.rejected.size()
           << " record(s), filtered out " << (ingest.records.size() - records.size()) << "\n";
    for (const auto& t : manifest.tasks) {
      io.out << "  ok        " << t.task_id << "  iterations " << t.iterations << "\n";
    }
    for (const auto& r : manifest.rejected) {
      io.out << "  rejected  " << r.record_id << "  " << r.stage << ": " << r.reason;
      if (!r.failed_requirements.empty()) {
        io.out << " [";
        for (std::size_t k = 0; k < r.failed_requirements.size(); ++k) {
          io.out << (k ? "," : "") << r.failed_requirements[k];
        }
        io.out << "]";
      }
      io.out << "\n";
    }
    io.out << "manifest: " << manifest_path.string() << "\n";
  }
  if (!records.empty() && internal_errors == static_cast<int>(records.size())) return kExitSystemic;
  return kExitOk;
}

int cmd_validate(const ForgeConfig& cfg, const fs::path& task_dir, CommandIO& io) {
  forge::TaskInstance task;
  try {
    task = forge::load_task(task_dir);
  } catch (const forge::MissingArtifacts& e) {
    if (io.json) {
      io.out << json{{"task_dir", task_dir.string()}, {"missing", e.missing()}}.dump(2) << "\n";
    }
    io.err << e.what() << "\n";
    return kExitUsage;
  }
  auto runtime = env::make_runtime(cfg.runtime_kind, cfg.store_dir);
  validate::ValidationOptions vo;
  vo.double_check = cfg.double_check;
  if (cfg.cell_timeout.count() > 0) vo.timeout = cfg.cell_timeout;
  validate::ValidationReport rep = forge::revalidate_task(task, *runtime, vo);
  if (io.json) {
    io.out << rep.to_json().dump(2) << "\n";
  } else {
    io.out << task.task_id << ": " << (rep.valid ? "valid" : "invalid");
    if (!rep.valid) io.out << " (" << (rep.reason.empty() ? "requirements" : rep.reason) << ")";
    io.out << "\n";
    if (!rep.cells.empty()) {
      print_rule(io.out);
      for (const auto& c : rep.cells) {
        io.out << "  " << validate::cell_name(c.code, c.suite) << "  func_ok=" << (c.func_ok ? "T" : "F")
               << "  sec_ok=" << (c.sec_ok ? "T" : "F") << (c.unrunnable ? "  unrunnable" : "") << "\n";
      }
      print_rule(io.out);
    }
    for (const auto& f : rep.failed_requirements) io.out << "  failed requirement (" << f << ")\n";
  }
  return rep.valid ? kExitOk : kExitNegative;
}

std::vector<fs::path> resolve_task_dirs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  std::set<std::string> seen;
  auto add = [&](const fs::path& p) {
    const std::string key = fs::weakly_canonical(p).string();
    if (seen.insert(key).second) out.push_back(fs::absolute(p));
  };
  for (const auto& in : inputs) {
    fs::path manifest;
    if (fs::is_regular_file(in)) {
      manifest = in;
    } else if (fs::is_directory(in) && fs::exists(in / "manifest.json") && !fs::exists(in / "metadata.json")) {
      manifest = in / "manifest.json";
    }
    if (!manifest.empty()) {
      for (const auto& t : forge::Manifest::load(manifest).tasks) add(t.task_dir);
    } else if (fs::is_directory(in)) {
      add(in);
    } else {
      throw ConfigError("no such task, directory or manifest: " + in.string());
    }
  }
  return out;
}

int cmd_eval(const ForgeConfig& cfg, const EvalRequest& req, CommandIO& io) {
  eval::Strategy strategy = cfg.strategy(req.strategy);
  if (cfg.agent.empty()) throw ConfigError("no agent command (eval.agent)");
  ExternalCommand agent = parse_external(cfg.agent);
  if (agent.empty() || !program_available(agent.argv.front())) {
    throw ConfigError("eval.agent: command not found: " + cfg.agent);
  }
  const std::string setting = req.setting.empty() ? strategy.name : req.setting;
  const fs::path outcomes = req.outcomes.empty() ? cfg.out_dir / ("outcomes-" + setting + ".jsonl") : req.outcomes;
  const auto dirs = resolve_task_dirs(req.inputs);

  eval::OutcomesWriter writer(outcomes, setting);
  auto runtime = env::make_runtime(cfg.runtime_kind, cfg.store_dir);
  eval::AgentLimits limits;
  limits.max_steps = cfg.max_steps;
  limits.timeout = cfg.agent_timeout;
  std::optional<std::chrono::seconds> timeout;
  if (cfg.cell_timeout.count() > 0) timeout = cfg.cell_timeout;

  std::vector<std::optional<metrics::Outcome>> rows(dirs.size());
  std::vector<std::string> notes(dirs.size());
  run_pool(dirs.size(), cfg.slots, [&](std::size_t i) {
    try {
      forge::TaskInstance task = forge::load_task(dirs[i]);
      if (writer.has(task.task_id)) {
        notes[i] = task.task_id + ": already scored";
        return;
      }
      if (!task.validation.value("valid", false)) {
        notes[i] = task.task_id + ": skipped, not validated";
        return;
      }
      if (!runtime->image_exists(task.env.image_tag)) {
        TempDir scratch("rebuild");
        forge::TaskStates states = forge::reconstruct_states(task, scratch.path());
        std::lock_guard<std::mutex> guard(env::build_mutex(task.metadata.value("repo_id", task.task_id)));
        if (!runtime->image_exists(task.env.image_tag)) {
          env::BuildResult b = runtime->build(states.c0, task.env.spec, task.env.image_tag);
          if (!b.ok) throw EnvError("cannot rebuild " + task.env.image_tag);
        }
      }
      const fs::path work = cfg.work_dir / "eval" / setting / task.task_id;
      eval::AgentRun run = eval::run_agent(task, agent, strategy, limits, work);
      metrics::Outcome o = eval::score_solution(task, run, *runtime, setting, timeout);
      writer.append(o);
      rows[i] = o;
    } catch (const forge::MissingArtifacts& e) {
      notes[i] = e.what();
    } catch (const Error& e) {
      notes[i] = dirs[i].string() + ": " + e.what();
    }
  });

  json new_rows = json::array();
  for (const auto& r : rows) {
    if (r) new_rows.push_back(r->to_json());
  }
  if (io.json) {
    io.out << json{{"setting", setting}, {"outcomes", outcomes.string()}, {"new", new_rows}, {"notes", notes}}.dump(2)
           << "\n";
  } else {
    io.out << "setting " << setting << ": " << new_rows.size() << " new outcome(s) in " << outcomes.string() << "\n";
    for (const auto& r : rows) {
      if (!r) continue;
      io.out << "  " << r->task_id << "  func_pass=" << (r->func_pass ? "T" : "F")
             << "  sec_pass=" << (r->sec_pass ? "T" : "F");
      if (!r->reason.empty()) io.out << "  (" << r->reason << ")";
      io.out << "\n";
    }
    for (const auto& n : notes) {
      if (!n.empty()) io.out << "  note: " << n << "\n";
    }
  }
  return kExitOk;
}

int cmd_report(const std::vector<fs::path>& files, const fs::path& out_dir, CommandIO& io) {
  if (files.empty()) throw ConfigError("report needs at least one outcome file");
  std::vector<metrics::OutcomeSet> sets;
  for (const auto& f : files) {
    if (!fs::exists(f)) throw ConfigError("no such outcome file: " + f.string());
    metrics::OutcomeSet s;
    try {
      s = metrics::load_outcomes(f);
    } catch (const ParseError& e) {
      throw ConfigError(f.string() + ": " + e.what());
    }
    if (s.outcomes.empty()) throw ConfigError(f.string() + ": no outcomes");
    sets.push_back(std::move(s));
  }
  json report = metrics::build_report(sets);
  const std::string md = metrics::render_markdown(report);
  fs::create_directories(out_dir);
  write_file(out_dir / "report.json", report.dump(2) + "\n");
  write_file(out_dir / "report.md", md);
  if (io.json) {
    io.out << report.dump(2) << "\n";
  } else {
    io.out << md;
  }
  return kExitOk;
}

int cmd_gc(const ForgeConfig& cfg, CommandIO& io) {
  std::vector<std::string> referenced;
  if (fs::exists(cfg.out_dir)) {
    for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
      const fs::path env_file = entry.path() / forge::Artifacts::kEnvironment;
      if (!fs::exists(env_file)) continue;
      try {
        referenced.push_back(json::parse(read_file(env_file)).at("image_tag").get<std::string>());
      } catch (const json::exception& e) {
        spdlog::warn("{}: {}", env_file.string(), e.what());
      }
    }
  }
  auto runtime = env::make_runtime(cfg.runtime_kind, cfg.store_dir);
  auto removed = env::gc_images(*runtime, referenced);
  if (io.json) {
    io.out << json{{"removed", removed}, {"kept", referenced}}.dump(2) << "\n";
  } else {
    io.out << "removed " << removed.size() << " image(s), " << referenced.size() << " referenced\n";
    for (const auto& r : removed) io.out << "  " << r << "\n";
  }
  return kExitOk;
}

}  // namespace susforge::app
