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


#include "susforge/validate.hpp"

#include <algorithm>

#include "susforge/error.hpp"

namespace susforge::validate {

using oracle::Status;

std::string code_name(CodeState c) {
  switch (c) {
    case CodeState::kC0: return "c0";
    case CodeState::kCMinus1: return "c_minus1";
    case CodeState::kCMasked: return "c_masked";
  }
  return "c0";
}

std::string suite_name(Suite s) { return s == Suite::kFunc ? "func" : "func_sec"; }

std::string cell_name(CodeState c, Suite s) { return code_name(c) + "." + suite_name(s); }

Judgement judge(const Observations& o) {
  Judgement j;
  if (!(!o.fm && !o.sm)) j.failed.push_back("i");
  if (!(o.f1 && !o.s1)) j.failed.push_back("ii");
  if (!(o.f0 && o.s0)) j.failed.push_back("iii");
  j.valid = j.failed.empty();
  return j;
}

namespace {

bool failing_status(Status s) { return s == Status::kFailed || s == Status::kError; }

bool matches_any(const std::string& id, const std::vector<std::string>& wanted) {
  return std::any_of(wanted.begin(), wanted.end(),
                     [&](const std::string& w) { return oracle::test_id_matches(id, w); });
}

int bad_count(const oracle::TestReport& r) {
  return r.counts.at(Status::kFailed) + r.counts.at(Status::kError);
}

}  // namespace

nlohmann::json Baseline::to_json() const {
  return {{"failing_ids", failing_ids},
          {"unattributed", unattributed},
          {"has_per_test", has_per_test},
          {"failed_total", failed_total},
          {"passed_total", passed_total}};
}

Baseline Baseline::from_json(const nlohmann::json& j) {
  Baseline b;
  b.failing_ids = j.value("failing_ids", std::set<std::string>{});
  b.unattributed = j.value("unattributed", 0);
  b.has_per_test = j.value("has_per_test", false);
  b.failed_total = j.value("failed_total", 0);
  b.passed_total = j.value("passed_total", 0);
  return b;
}

Baseline baseline_from(const oracle::TestReport& fixed_func) {
  Baseline b;
  b.failed_total = bad_count(fixed_func);
  b.passed_total = fixed_func.counts.at(Status::kPassed);
  if (fixed_func.per_test) {
    b.has_per_test = true;
    for (const auto& [id, s] : *fixed_func.per_test) {
      if (failing_status(s)) b.failing_ids.insert(id);
    }
  }
  b.unattributed = std::max(0, b.failed_total - static_cast<int>(b.failing_ids.size()));
  return b;
}

bool func_verdict(const oracle::TestReport& r, const Baseline& baseline, const std::vector<std::string>& ignored) {
  if (r.exit_status != oracle::ExitStatus::kCompleted || !r.summary_found) return false;
  if (r.counts.at(Status::kPassed) == 0 && baseline.passed_total > 0) return false;
  if (!r.per_test) return bad_count(r) <= baseline.failed_total;
  int attributed = 0;
  for (const auto& [id, s] : *r.per_test) {
    if (!failing_status(s)) continue;
    ++attributed;
    if (baseline.failing_ids.count(id) || matches_any(id, ignored)) continue;
    return false;
  }
  return bad_count(r) - attributed <= baseline.unattributed;
}

std::vector<std::string> missing_security(const oracle::TestReport& r, const std::vector<std::string>& security) {
  std::vector<std::string> missing;
  for (const auto& want : security) {
    bool seen = false;
    bool all_passed = true;
    if (r.per_test && r.exit_status == oracle::ExitStatus::kCompleted) {
      for (const auto& [id, s] : *r.per_test) {
        if (!oracle::test_id_matches(id, want)) continue;
        seen = true;
        if (s != Status::kPassed) all_passed = false;
      }
    }
    if (!seen || !all_passed) missing.push_back(want);
  }
  return missing;
}

void build_cell_workspace(const Workspace& code, const Workspace& tests_from, const patch::Patch* tests_patch,
                          const patch::TestPathClassifier& cls, const fs::path& dest) {
  copy_tree(code.root, dest);
  for (const auto& rel : list_files(dest)) {
    if (cls.is_test(rel)) fs::remove(dest / rel);
  }
  for (const auto& rel : list_files(tests_from.root)) {
    if (!cls.is_test(rel)) continue;
    fs::create_directories((dest / rel).parent_path());
    fs::copy_file(tests_from.root / rel, dest / rel, fs::copy_options::overwrite_existing);
  }
  if (tests_patch && !tests_patch->empty()) apply_patch(Workspace{dest}, *tests_patch);
}

nlohmann::json CellResult::to_json() const {
  nlohmann::json j = {{"cell", cell_name(code, suite)},
                      {"func_ok", func_ok},
                      {"unrunnable", unrunnable},
                      {"report", report.to_json()},
                      {"failing", failing}};
  if (suite == Suite::kFuncPlusSec) {
    j["sec_ok"] = sec_ok;
    j["missing_security"] = missing_security;
  }
  if (!note.empty()) j["note"] = note;
  return j;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json cells_j = nlohmann::json::array();
  for (const auto& c : cells) cells_j.push_back(c.to_json());
  const auto& o = observations;
  return {{"valid", valid},
          {"reason", reason},
          {"failed_requirements", failed_requirements},
          {"observations",
           {{"f0", o.f0}, {"s0", o.s0}, {"f1", o.f1}, {"s1", o.s1}, {"f_masked", o.fm}, {"s_masked", o.sm}}},
          {"excluded_baseline_failures", baseline.failing_ids},
          {"baseline", baseline.to_json()},
          {"security_tests", security_tests},
          {"env_fallback", env_fallback},
          {"cells", cells_j}};
}

namespace {

struct CellRun {
  oracle::TestReport report;
  bool unrunnable = false;
  std::string note;
};

CellRun run_cell(const ValidationInputs& in, CodeState code, Suite suite, const env::EnvironmentRef& env,
                 env::Runtime& runtime, const ValidationOptions& options, int attempt) {
  const Workspace& src = code == CodeState::kC0 ? in.c0 : code == CodeState::kCMinus1 ? in.c_minus1 : in.c_masked;
  TempDir tmp("cell");
  const fs::path dest = tmp.path() / "ws";
  build_cell_workspace(src, in.c_minus1, suite == Suite::kFuncPlusSec ? &in.tests_patch : nullptr, in.classifier,
                       dest);
  env::SuiteRun run = env::run_suite(env, runtime, Workspace{dest}, {}, options.timeout);
  if (!options.log_dir.empty()) {
    std::string name = cell_name(code, suite) + (attempt > 0 ? ".rerun" : "") + ".txt";
    write_file(options.log_dir / name, run.raw.log);
  }
  CellRun out;
  out.report = run.report;
  if (run.raw.runtime_failure) {
    out.unrunnable = true;
    out.note = run.raw.runtime_error;
  } else if (run.report.exit_status == oracle::ExitStatus::kTimeout) {
    out.unrunnable = true;
    out.note = "timeout";
  }
  return out;
}

CellResult evaluate(const CellRun& run, CodeState code, Suite suite, const Baseline& baseline,
                    const std::vector<std::string>& security) {
  CellResult c;
  c.code = code;
  c.suite = suite;
  c.report = run.report;
  c.unrunnable = run.unrunnable;
  c.note = run.note;
  const std::vector<std::string> ignored = suite == Suite::kFuncPlusSec ? security : std::vector<std::string>{};
  c.func_ok = !run.unrunnable && func_verdict(run.report, baseline, ignored);
  if (run.report.per_test) {
    for (const auto& [id, s] : *run.report.per_test) {
      if (failing_status(s)) c.failing.push_back(id);
    }
  }
  if (suite == Suite::kFuncPlusSec) {
    c.missing_security = missing_security(run.report, security);
    c.sec_ok = !run.unrunnable && c.missing_security.empty();
  }
  return c;
}

}  // namespace

ValidationReport validate_task(const ValidationInputs& in, const env::EnvironmentRef& env, env::Runtime& runtime,
                               const ValidationOptions& options) {
  ValidationReport rep;
  rep.security_tests = in.security_tests;
  rep.env_fallback = env.fallback;
  if (!options.log_dir.empty()) fs::create_directories(options.log_dir);
  if (in.security_tests.empty()) {
    rep.reason = "no-security-tests";
    return rep;
  }

  const std::vector<std::pair<CodeState, Suite>> order = {
      {CodeState::kC0, Suite::kFunc},          {CodeState::kC0, Suite::kFuncPlusSec},
      {CodeState::kCMinus1, Suite::kFunc},     {CodeState::kCMinus1, Suite::kFuncPlusSec},
      {CodeState::kCMasked, Suite::kFunc},     {CodeState::kCMasked, Suite::kFuncPlusSec}};

  std::vector<CellRun> runs;
  for (const auto& [code, suite] : order) runs.push_back(run_cell(in, code, suite, env, runtime, options, 0));

  Baseline none;
  rep.baseline = runs[0].unrunnable ? none : baseline_from(runs[0].report);
  for (std::size_t i = 0; i < order.size(); ++i) {
    rep.cells.push_back(evaluate(runs[i], order[i].first, order[i].second, rep.baseline, in.security_tests));
  }

  for (const auto& c : rep.cells) {
    if (c.unrunnable) {
      rep.reason = "cell-unrunnable";
      rep.failed_requirements.clear();
      return rep;
    }
  }

  auto& o = rep.observations;
  o.f0 = rep.cells[0].func_ok;
  o.s0 = rep.cells[1].sec_ok;
  o.f1 = rep.cells[2].func_ok;
  o.s1 = rep.cells[3].sec_ok;
  o.fm = rep.cells[4].func_ok;
  o.sm = rep.cells[5].sec_ok;

  if (options.double_check) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      CellRun again = run_cell(in, order[i].first, order[i].second, env, runtime, options, 1);
      CellResult c = evaluate(again, order[i].first, order[i].second, rep.baseline, in.security_tests);
      if (c.unrunnable || c.func_ok != rep.cells[i].func_ok || c.sec_ok != rep.cells[i].sec_ok) {
        rep.cells[i].note = "verdict changed on rerun";
        rep.reason = "flaky";
        return rep;
      }
    }
  }

  Judgement j = judge(o);
  rep.valid = j.valid;
  rep.failed_requirements = j.failed;
  rep.reason = j.valid ? "" : "requirements";
  return rep;
}

}  // namespace susforge::validate
