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

#include <fnmatch.h>

#include "susforge/error.hpp"
#include "susforge/patch.hpp"

namespace susforge::patch {

std::vector<std::string> TestPathClassifier::default_rules() {
  return {"segment:tests", "segment:test", "glob:test_*", "glob:*_test.*", "name:conftest.py"};
}

TestPathClassifier::TestPathClassifier() : TestPathClassifier(default_rules()) {}

TestPathClassifier::TestPathClassifier(std::vector<std::string> rules) : rules_(std::move(rules)) {
  for (const auto& raw : rules_) {
    std::string_view r = raw;
    bool verdict = true;
    if (!r.empty() && r.front() == '!') {
      verdict = false;
      r.remove_prefix(1);
    }
    std::size_t colon = r.find(':');
    if (colon == std::string_view::npos) throw ConfigError("bad classifier rule '" + raw + "'");
    std::string_view kind = r.substr(0, colon);
    std::string pattern(r.substr(colon + 1));
    Rule rule{Rule::Kind::kSegment, pattern, verdict};
    if (kind == "segment") {
      rule.kind = Rule::Kind::kSegment;
    } else if (kind == "glob") {
      rule.kind = Rule::Kind::kGlob;
    } else if (kind == "name") {
      rule.kind = Rule::Kind::kName;
    } else {
      throw ConfigError("unknown classifier rule kind in '" + raw + "'");
    }
    compiled_.push_back(std::move(rule));
  }
}

bool TestPathClassifier::is_test(std::string_view path) const {
  std::vector<std::string_view> dirs;
  std::string_view rest = path;
  std::size_t slash;
  while ((slash = rest.find('/')) != std::string_view::npos) {
    dirs.push_back(rest.substr(0, slash));
    rest.remove_prefix(slash + 1);
  }
  const std::string base(rest);
  for (const auto& rule : compiled_) {
    bool hit = false;
    switch (rule.kind) {
      case Rule::Kind::kSegment:
        for (auto d : dirs) hit = hit || d == rule.pattern;
        break;
      case Rule::Kind::kGlob:
        hit = ::fnmatch(rule.pattern.c_str(), base.c_str(), 0) == 0;
        break;
      case Rule::Kind::kName:
        hit = base == rule.pattern;
        break;
    }
    if (hit) return rule.test_verdict;
  }
  return false;
}

SplitPatch split_patch(const Patch& p, const TestPathClassifier& cls) {
  SplitPatch out;
  for (const auto& f : p.files) {
    // A rename between a test and non-test location counts as test-side if
    // either end is a test path; the partition stays disjoint on path sets.
    bool test = cls.is_test(f.old_path) || cls.is_test(f.new_path);
    (test ? out.tests : out.feature).files.push_back(f);
  }
  return out;
}

Patch recompose(const SplitPatch& split) {
  Patch out = split.feature;
  out.files.insert(out.files.end(), split.tests.files.begin(), split.tests.files.end());
  return canonicalize(std::move(out));
}

}  // namespace susforge::patch
