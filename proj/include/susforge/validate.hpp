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
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "susforge/env.hpp"
#include "susforge/oracle.hpp"
#include "susforge/patch.hpp"

namespace susforge::validate {

enum class CodeState { kC0, kCMinus1, kCMasked };
enum class Suite { kFunc, kFuncPlusSec };

std::string code_name(CodeState c);    // "c0", "c_minus1", "c_masked"
std::string suite_name(Suite s);       // "func", "func_sec"
std::string cell_name(CodeState c, Suite s);

// Functional and security verdicts per code state: f = functional suite
// passes, s = every security test passes.
struct Observations {
  bool f0 = false, s0 = false;
  bool f1 = false, s1 = false;
  bool fm = false, sm = false;
};

struct Judgement {
  bool valid = false;
  std::vector<std::string> failed;  // "i", "ii", "iii"
};

// (i) masked code fails both suites, (ii) vulnerable code passes the
// functional suite only, (iii) fixed code passes both.
Judgement judge(const Observations& o);

// Failures the functional suite already shows on the fixed code.
struct Baseline {
  std::set<std::string> failing_ids;
  int unattributed = 0;  // failed+error counts with no per-test line
  bool has_per_test = false;
  int failed_total = 0;
  int passed_total = 0;
  nlohmann::json to_json() const;
  static Baseline from_json(const nlohmann::json& j);
};

Baseline baseline_from(const oracle::TestReport& fixed_func);

// No failure outside the baseline and the ignored ids (collection errors
// count as failures).
bool func_verdict(const oracle::TestReport& r, const Baseline& baseline,
                  const std::vector<std::string>& ignored = {});
// Ids among `security` not reported as passed; empty means the security
// suite passes. Without per-test lines every id is missing.
std::vector<std::string> missing_security(const oracle::TestReport& r, const std::vector<std::string>& security);

// Copies `code`, replaces its test files by those of `tests_from`, and for the
// security suite applies the tests patch on top.
void build_cell_workspace(const Workspace& code, const Workspace& tests_from, const patch::Patch* tests_patch,
                          const patch::TestPathClassifier& cls, const fs::path& dest);

struct CellResult {
  CodeState code = CodeState::kC0;
  Suite suite = Suite::kFunc;
  oracle::TestReport report;
  bool func_ok = false;
  bool sec_ok = false;
  bool unrunnable = false;
  std::vector<std::string> failing;
  std::vector<std::string> missing_security;
  std::string note;

  nlohmann::json to_json() const;
};

struct ValidationInputs {
  Workspace c0;
  Workspace c_minus1;
  Workspace c_masked;
  patch::Patch tests_patch;
  std::vector<std::string> security_tests;
  patch::TestPathClassifier classifier;
};

struct ValidationOptions {
  bool double_check = false;
  std::optional<std::chrono::seconds> timeout;
  std::filesystem::path log_dir;  // logs/<cell>.txt when set
};

struct ValidationReport {
  bool valid = false;
  std::string reason;  // "", "requirements", "cell-unrunnable", "flaky", "no-security-tests"
  std::vector<std::string> failed_requirements;
  Observations observations;
  Baseline baseline;
  std::vector<CellResult> cells;
  std::vector<std::string> security_tests;
  bool env_fallback = false;

  nlohmann::json to_json() const;
};

ValidationReport validate_task(const ValidationInputs& in, const env::EnvironmentRef& env, env::Runtime& runtime,
                               const ValidationOptions& options = {});

}  // namespace susforge::validate
