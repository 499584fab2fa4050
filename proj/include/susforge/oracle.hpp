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

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "susforge/external.hpp"
#include "susforge/fs.hpp"
#include "susforge/patch.hpp"

namespace susforge::oracle {

enum class Status { kPassed, kFailed, kError, kSkipped };
inline constexpr std::array<Status, 4> kAllStatuses = {Status::kPassed, Status::kFailed,
                                                       Status::kError, Status::kSkipped};

std::string status_name(Status s);
std::optional<Status> status_from_name(std::string_view name);
// Maps framework labels ("errors", "xfailed", "passing", "ignored", ...) onto
// the four statuses. Unknown labels (warnings, deselected) yield nullopt.
std::optional<Status> normalize_label(std::string_view label);

// Always holds an entry for each status.
struct Counts {
  std::map<Status, int> by_status{
      {Status::kPassed, 0}, {Status::kFailed, 0}, {Status::kError, 0}, {Status::kSkipped, 0}};

  int& operator[](Status s) { return by_status[s]; }
  int at(Status s) const { return by_status.at(s); }
  int total() const;
  bool operator==(const Counts&) const = default;
};

nlohmann::json counts_to_json(const Counts& c);
Counts counts_from_json(const nlohmann::json& j);

// Regexes over the whole log with multiline anchors. Each capturing pattern
// has exactly one group; an unmatched group reads as zero.
struct ParserSpec {
  std::map<Status, std::string> patterns;
  // Extra labels folded into a status (xfailed into skipped, ...); each is a
  // full pattern whose capture is added to the status count.
  std::map<Status, std::vector<std::string>> folds;

  nlohmann::json to_json() const;
  static ParserSpec from_json(const nlohmann::json& j);
  bool operator==(const ParserSpec&) const = default;
};

// Compilation and group-count problems; empty when the spec is usable.
std::vector<std::string> check_spec(const ParserSpec& spec);

struct SpecMatch {
  Counts counts;
  bool any_match = false;
  // Largest number of matches any single pattern produced on the log.
  int max_matches_per_pattern = 0;
  std::vector<std::string> multi_matched;  // patterns matching more than once
};

SpecMatch apply_spec(const ParserSpec& spec, std::string_view log);

enum class ExitStatus { kCompleted, kTimeout, kRuntimeError };
std::string exit_status_name(ExitStatus s);
ExitStatus exit_status_from_name(std::string_view name);

struct ExitInfo {
  ExitStatus status = ExitStatus::kCompleted;
  int exit_code = 0;
};

struct TestReport {
  Counts counts;
  std::optional<std::map<std::string, Status>> per_test;
  ExitStatus exit_status = ExitStatus::kCompleted;
  int exit_code = 0;
  bool summary_found = false;
  // per_test histogram disagrees with the summary counts.
  bool inconsistent = false;

  nlohmann::json to_json() const;
  static TestReport from_json(const nlohmann::json& j);
};

// Summary-line parser for pytest output, with xfailed/xpassed folded.
ParserSpec builtin_pytest_spec();

// Per-test outcome lines ("PASSED a.py::t" from -rA, "a.py::t PASSED" from -v).
// Skips reported only as "SKIPPED [n] file:line" receive synthetic ids.
std::optional<std::map<std::string, Status>> parse_pytest_per_test(std::string_view log);

TestReport parse_report(const ParserSpec& spec, std::string_view log, const ExitInfo& exit);

// Counts read off the last line carrying "<n> <label>" tokens; the reference
// a synthesized spec is validated against.
std::optional<Counts> summary_token_counts(std::string_view log);

class ParserSynth {
 public:
  virtual ~ParserSynth() = default;
  virtual std::string name() const = 0;
  virtual ParserSpec propose(const std::vector<std::string>& samples) = 0;
};

// Generalizes the summary lines of the samples into anchored patterns.
class HeuristicParserSynth : public ParserSynth {
 public:
  std::string name() const override { return "heuristic"; }
  ParserSpec propose(const std::vector<std::string>& samples) override;
};

// Delegates to an external command given the parser-synthesis prompt.
class ExternalParserSynth : public ParserSynth {
 public:
  explicit ExternalParserSynth(ExternalCommand cmd) : cmd_(std::move(cmd)) {}
  std::string name() const override { return "external"; }
  ParserSpec propose(const std::vector<std::string>& samples) override;

 private:
  ExternalCommand cmd_;
};

struct SynthesisResult {
  ParserSpec spec;
  std::vector<std::size_t> validated;  // sample indices the spec reproduces
  std::vector<std::size_t> ignored;    // chaotic samples
};

// Throws PreconditionError on no samples, Error("unparseable suite") when no
// sample validates.
SynthesisResult synthesize_parser(const std::vector<std::string>& samples, ParserSynth& synth);

struct SecurityTestSet {
  std::vector<std::string> ids;           // "path::case" or "path::Class::case"
  std::vector<std::string> modified_ids;  // pre-existing tests the patch edits

  bool empty() const { return ids.empty(); }
};

// Test definitions added by the tests patch. With the post-fix workspace the
// enclosing class of added methods and edited tests are resolved from the
// full file; otherwise only the hunk text is used.
SecurityTestSet identify_security_tests(const patch::Patch& tests_patch,
                                        const Workspace* post_fix = nullptr);

// A reported id selects a wanted one if equal, or a parametrization or
// member of it ("a.py::t[1]", "a.py::K::t" for "a.py::K").
bool test_id_matches(const std::string& reported, const std::string& wanted);

}  // namespace susforge::oracle
