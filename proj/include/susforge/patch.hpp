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

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "susforge/fs.hpp"

namespace susforge::patch {

enum class LineKind { kContext, kAdd, kDel };

struct HunkLine {
  LineKind kind = LineKind::kContext;
  std::string text;
  // "\ No newline at end of file" follows this line.
  bool no_newline = false;

  bool operator==(const HunkLine&) const = default;
};

// Line numbers follow the unified-diff convention: 1-based, and a side with
// zero length names the line *before* the (empty) range.
struct Hunk {
  int old_start = 0;
  int old_len = 0;
  int new_start = 0;
  int new_len = 0;
  std::string section;  // text after the closing "@@", if any
  std::vector<HunkLine> lines;

  std::size_t count(LineKind kind) const;
  std::string header() const;
  bool operator==(const Hunk&) const = default;
};

struct FileDelta {
  std::string old_path;
  std::string new_path;
  bool is_new = false;
  bool is_deleted = false;
  bool binary = false;
  std::vector<Hunk> hunks;

  // The path a reader would name this delta by.
  const std::string& path() const { return is_deleted ? old_path : new_path; }
  std::size_t added_lines() const;
  std::size_t deleted_lines() const;
  bool operator==(const FileDelta&) const = default;
};

struct Patch {
  std::vector<FileDelta> files;

  bool empty() const { return files.empty(); }
  std::set<std::string> paths() const;
  std::size_t added_lines() const;
  std::size_t deleted_lines() const;
  std::size_t changed_lines() const { return added_lines() + deleted_lines(); }
  const FileDelta* find(std::string_view path) const;
  bool operator==(const Patch&) const = default;
};

// Accepts git-style and plain unified diffs. CRLF input is normalized to LF,
// timestamps after the file names are dropped and "a/" / "b/" prefixes are
// stripped. Throws ParseError (with the 1-based input line) on a malformed
// hunk header or a hunk whose body does not match its header counts.
Patch parse_patch(std::string_view text);

// Canonical form: LF endings, files sorted by path, git-style headers, runs
// of changed lines ordered deletions-first.
std::string render_patch(const Patch& p);
Patch canonicalize(Patch p);

Patch invert_patch(const Patch& p);

// Ordered first-match-wins path rules. Rule syntax:
//   segment:NAME   a directory component equals NAME
//   glob:PATTERN   the basename matches an fnmatch pattern
//   name:NAME      the basename equals NAME
// A leading '!' makes a matching rule classify the path as non-test.
class TestPathClassifier {
 public:
  TestPathClassifier();
  explicit TestPathClassifier(std::vector<std::string> rules);

  bool is_test(std::string_view path) const;
  const std::vector<std::string>& rules() const { return rules_; }

  static std::vector<std::string> default_rules();

 private:
  struct Rule {
    enum class Kind { kSegment, kGlob, kName } kind;
    std::string pattern;
    bool test_verdict;
  };
  std::vector<std::string> rules_;
  std::vector<Rule> compiled_;
};

struct SplitPatch {
  Patch feature;
  Patch tests;
};

SplitPatch split_patch(const Patch& p, const TestPathClassifier& cls);
Patch recompose(const SplitPatch& split);

// In-memory text file. The last element of `lines` lacks a trailing newline
// when `final_newline` is false.
struct FileText {
  std::vector<std::string> lines;
  bool final_newline = true;

  static FileText from_string(std::string_view content);
  std::string to_string() const;
  bool operator==(const FileText&) const = default;
};

struct ApplyOptions {
  // Maximum line offset tolerated when locating a hunk. Zero means the hunk
  // must match exactly at its stated position.
  int fuzz = 0;
};

// Applies one delta to a file's content.
FileText apply_to_text(const FileText& old, const FileDelta& delta,
                       const ApplyOptions& options = {});

// All-or-nothing: on ApplyError (naming file and hunk) nothing is written.
void apply_patch(const Workspace& ws, const Patch& p, const ApplyOptions& options = {});

struct DiffOptions {
  int context = 3;
  // Paths for which this returns true are left out of the diff.
  std::function<bool(const std::string&)> exclude;
};

FileDelta diff_texts(const std::string& path, const FileText& a, const FileText& b,
                     int context = 3);

// Diff turning `a` into `b`. Files that only exist on one side become
// whole-file additions/deletions; files with NUL bytes are flagged binary.
Patch diff_workspaces(const Workspace& a, const Workspace& b, const DiffOptions& options = {});

// Deleted old-side line numbers (1-based) per path, with their text.
std::map<std::string, std::map<int, std::string>> deleted_lines_by_path(const Patch& p);

struct LineAccounting {
  std::size_t total_lines = 0;
  // Added or deleted target lines that come from the fix itself.
  std::size_t security_fix_lines = 0;
  // Masked lines that the target puts back unchanged.
  std::size_t masked_readded_lines = 0;
  std::size_t files = 0;
  std::size_t security_fix_files = 0;
};

// Merges the fix and the inverse of the mask directly on the line level,
// producing C0 - masked without touching the filesystem. Both patches must be
// expressed against `base`; throws Error on base mismatch.
Patch algebraic_merge(const Workspace& base, const Patch& feature_fix, const Patch& mask,
                      LineAccounting* accounting = nullptr, int context = 3);

struct TargetPatch {
  Patch patch;
  LineAccounting accounting;
  // render(algebraic route) == render(workspace-diff route)
  bool routes_agree = false;
};

// The canonical solution: diff_workspaces(masked, fixed) over non-test paths,
// cross-checked against algebraic_merge. `base` is the vulnerable state the
// fix and mask are written against.
TargetPatch compose_target_patch(const Workspace& base, const Patch& feature_fix,
                                 const Patch& mask, const TestPathClassifier& cls);

}  // namespace susforge::patch
