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

#include <map>
#include <random>
#include <string>
#include <vector>

#include "susforge/fs.hpp"
#include "susforge/patch.hpp"

namespace susforge::testing {

inline void populate(const Workspace& ws, const std::map<std::string, std::string>& files) {
  fs::create_directories(ws.root);
  for (const auto& [path, content] : files) write_file(ws.resolve(path), content);
}

inline std::map<std::string, std::string> snapshot(const Workspace& ws) {
  std::map<std::string, std::string> out;
  for (const auto& p : list_files(ws.root)) out[p] = read_file(ws.resolve(p));
  return out;
}

// Random text drawn from a tiny vocabulary so that repeated lines (the hard
// case for alignment) are common.
inline std::vector<std::string> random_lines(std::mt19937& rng, int max_lines) {
  static const std::vector<std::string> vocab = {
      "def f():", "    return x", "", "    pass", "x = 1", "# note", "class A:",
      "    def g(self):", "        return 2", "import os", "y = x + 1", "}"};
  std::uniform_int_distribution<int> len(0, max_lines);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::vector<std::string> out;
  int n = len(rng);
  for (int i = 0; i < n; ++i) out.push_back(vocab[pick(rng)]);
  return out;
}

// Applies a random keep/delete/insert script to `a`. The result is the
// ground truth that a patch between the two must reproduce.
inline std::vector<std::string> random_edit(std::mt19937& rng, const std::vector<std::string>& a) {
  std::uniform_int_distribution<int> op(0, 9);
  std::vector<std::string> b;
  for (const auto& line : a) {
    int o = op(rng);
    if (o == 0) continue;  // delete
    if (o == 1) {          // replace
      auto extra = random_lines(rng, 2);
      b.insert(b.end(), extra.begin(), extra.end());
      continue;
    }
    if (o == 2) {  // insert before
      auto extra = random_lines(rng, 3);
      b.insert(b.end(), extra.begin(), extra.end());
    }
    b.push_back(line);
  }
  if (op(rng) < 2) {
    auto extra = random_lines(rng, 3);
    b.insert(b.end(), extra.begin(), extra.end());
  }
  return b;
}

// A syntactically valid hunk list built without the diff engine: random
// context/add/del lines with counts derived from the body.
inline patch::Patch random_patch_model(std::mt19937& rng) {
  std::uniform_int_distribution<int> nfiles(0, 4);
  std::uniform_int_distribution<int> nhunks(1, 3);
  std::uniform_int_distribution<int> nlines(1, 8);
  std::uniform_int_distribution<int> kind(0, 2);
  static const std::vector<std::string> vocab = {"a", "b = 2", "  indented", "", "def x():", "#"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  patch::Patch p;
  int files = nfiles(rng);
  for (int f = 0; f < files; ++f) {
    patch::FileDelta d;
    d.old_path = d.new_path = "pkg/file" + std::to_string(f) + ".py";
    int old_line = 1;
    int new_line = 1;
    int hunks = nhunks(rng);
    for (int h = 0; h < hunks; ++h) {
      old_line += 3;
      new_line += 3;
      patch::Hunk hk;
      int body = nlines(rng);
      bool changed = false;
      for (int i = 0; i < body; ++i) {
        int k = kind(rng);
        patch::HunkLine l;
        l.kind = k == 0 ? patch::LineKind::kContext : k == 1 ? patch::LineKind::kAdd : patch::LineKind::kDel;
        l.text = vocab[pick(rng)];
        changed = changed || l.kind != patch::LineKind::kContext;
        hk.lines.push_back(l);
      }
      if (!changed) hk.lines.push_back({patch::LineKind::kAdd, "new", false});
      hk.old_len = static_cast<int>(hk.count(patch::LineKind::kContext) + hk.count(patch::LineKind::kDel));
      hk.new_len = static_cast<int>(hk.count(patch::LineKind::kContext) + hk.count(patch::LineKind::kAdd));
      hk.old_start = hk.old_len == 0 ? old_line - 1 : old_line;
      hk.new_start = hk.new_len == 0 ? new_line - 1 : new_line;
      old_line += hk.old_len;
      new_line += hk.new_len;
      d.hunks.push_back(std::move(hk));
    }
    p.files.push_back(std::move(d));
  }
  return patch::canonicalize(std::move(p));
}

}  // namespace susforge::testing
