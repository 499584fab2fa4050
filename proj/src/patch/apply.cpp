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

#include <map>
#include <optional>

#include "susforge/error.hpp"
#include "susforge/patch.hpp"

namespace susforge::patch {

FileText FileText::from_string(std::string_view content) {
  FileText t;
  t.lines = split_lines(content);
  t.final_newline = content.empty() || content.back() == '\n';
  return t;
}

std::string FileText::to_string() const { return join_lines(lines, final_newline); }

namespace {

bool hunk_matches_at(const FileText& old, const Hunk& h, std::size_t pos) {
  std::size_t idx = pos;
  for (const auto& l : h.lines) {
    if (l.kind == LineKind::kAdd) continue;
    if (idx >= old.lines.size() || old.lines[idx] != l.text) return false;
    ++idx;
  }
  return true;
}

std::string hunk_label(const FileDelta& delta, std::size_t index, const Hunk& h) {
  return delta.path() + " hunk #" + std::to_string(index + 1) + " (" + h.header() + ")";
}

}  // namespace

FileText apply_to_text(const FileText& old, const FileDelta& delta, const ApplyOptions& options) {
  if (delta.binary) throw ApplyError(delta.path() + ": cannot apply a binary delta");
  FileText out;
  // Newline state of the most recently emitted line.
  bool end_newline = true;
  std::size_t cursor = 0;  // next unconsumed old line
  auto copy_old_line = [&](std::size_t idx) {
    out.lines.push_back(old.lines[idx]);
    end_newline = idx + 1 < old.lines.size() || old.final_newline;
  };
  for (std::size_t hi = 0; hi < delta.hunks.size(); ++hi) {
    const Hunk& h = delta.hunks[hi];
    const long stated = h.old_len == 0 ? h.old_start : h.old_start - 1;
    std::optional<std::size_t> found;
    for (int off = 0; off <= options.fuzz && !found; ++off) {
      for (int sign : {1, -1}) {
        if (off == 0 && sign == -1) continue;
        long pos = stated + sign * off;
        if (pos < static_cast<long>(cursor) || pos > static_cast<long>(old.lines.size())) continue;
        if (hunk_matches_at(old, h, static_cast<std::size_t>(pos))) {
          found = static_cast<std::size_t>(pos);
          break;
        }
      }
    }
    if (!found) throw ApplyError(hunk_label(delta, hi, h) + ": context mismatch");
    for (; cursor < *found; ++cursor) copy_old_line(cursor);
    for (const auto& l : h.lines) {
      if (l.kind != LineKind::kAdd) ++cursor;
      if (l.kind != LineKind::kDel) {
        out.lines.push_back(l.text);
        end_newline = !l.no_newline;
      }
    }
  }
  for (; cursor < old.lines.size(); ++cursor) copy_old_line(cursor);
  out.final_newline = out.lines.empty() || end_newline;
  return out;
}

void apply_patch(const Workspace& ws, const Patch& p, const ApplyOptions& options) {
  struct Pending {
    std::optional<std::string> remove;
    std::optional<std::pair<std::string, std::string>> write;
  };
  std::vector<Pending> plan;
  for (const auto& delta : p.files) {
    if (delta.binary) throw ApplyError(delta.path() + ": cannot apply a binary delta");
    const fs::path old_file = ws.resolve(delta.old_path);
    FileText old;
    if (delta.is_new) {
      if (fs::exists(ws.resolve(delta.new_path))) {
        throw ApplyError(delta.new_path + ": file to be created already exists");
      }
    } else {
      if (!fs::is_regular_file(old_file)) throw ApplyError(delta.old_path + ": no such file");
      old = FileText::from_string(read_file(old_file));
    }
    FileText updated = apply_to_text(old, delta, options);
    Pending step;
    if (delta.is_deleted) {
      if (!updated.lines.empty()) {
        throw ApplyError(delta.old_path + ": deletion leaves content behind");
      }
      step.remove = delta.old_path;
    } else {
      if (!delta.is_new && delta.old_path != delta.new_path) step.remove = delta.old_path;
      step.write = std::make_pair(delta.new_path, updated.to_string());
    }
    plan.push_back(std::move(step));
  }
  for (const auto& step : plan) {
    if (step.remove) fs::remove(ws.resolve(*step.remove));
  }
  for (const auto& step : plan) {
    if (step.write) write_file(ws.resolve(step.write->first), step.write->second);
  }
}

}  // namespace susforge::patch
