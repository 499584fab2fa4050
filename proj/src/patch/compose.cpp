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
#include <set>

#include "patch_internal.hpp"
#include "susforge/error.hpp"
#include "susforge/patch.hpp"

namespace susforge::patch {

namespace {

enum class Origin { kBase, kFix, kMask };

struct BaseEdits {
  std::set<std::size_t> deleted;                           // 0-based base lines
  std::map<std::size_t, std::vector<std::string>> inserts;  // gap index -> lines
};

BaseEdits read_edits(const FileText& base, const FileDelta& delta, const char* what) {
  BaseEdits edits;
  for (std::size_t hi = 0; hi < delta.hunks.size(); ++hi) {
    const Hunk& h = delta.hunks[hi];
    std::size_t idx = static_cast<std::size_t>(h.old_len == 0 ? h.old_start : h.old_start - 1);
    for (const auto& l : h.lines) {
      if (l.kind == LineKind::kAdd) {
        edits.inserts[idx].push_back(l.text);
        continue;
      }
      if (idx >= base.lines.size() || base.lines[idx] != l.text) {
        throw Error(std::string(what) + " does not match its base at " + delta.path() +
                    " hunk #" + std::to_string(hi + 1));
      }
      if (l.kind == LineKind::kDel) edits.deleted.insert(idx);
      ++idx;
    }
  }
  return edits;
}

struct ScriptLine {
  HunkLine line;
  Origin origin;
};

}  // namespace

Patch algebraic_merge(const Workspace& base, const Patch& feature_fix, const Patch& mask,
                      LineAccounting* accounting, int context) {
  std::map<std::string, const FileDelta*> fixes;
  std::map<std::string, const FileDelta*> masks;
  for (const auto& f : feature_fix.files) fixes[f.old_path] = &f;
  for (const auto& m : mask.files) {
    if (m.added_lines() != 0) throw Error("mask adds lines to " + m.path());
    masks[m.old_path] = &m;
  }
  std::set<std::string> paths;
  for (const auto& [p, _] : fixes) paths.insert(p);
  for (const auto& [p, _] : masks) paths.insert(p);

  LineAccounting acct;
  Patch out;
  for (const auto& path : paths) {
    const FileDelta* fix = fixes.count(path) ? fixes[path] : nullptr;
    const FileDelta* msk = masks.count(path) ? masks[path] : nullptr;
    if ((fix && fix->binary) || (msk && msk->binary)) {
      throw Error("cannot merge binary delta for " + path);
    }
    const bool base_exists = fs::is_regular_file(base.resolve(path));
    if (fix && fix->is_new && base_exists) throw Error(path + ": fix creates an existing file");
    if (!base_exists && !(fix && fix->is_new)) throw Error(path + ": missing from base");
    FileText text = base_exists ? FileText::from_string(read_file(base.resolve(path))) : FileText{};

    BaseEdits mask_edits = msk ? read_edits(text, *msk, "mask") : BaseEdits{};
    BaseEdits fix_edits = fix ? read_edits(text, *fix, "fix") : BaseEdits{};

    std::vector<ScriptLine> script;
    auto emit_inserts = [&](std::size_t gap) {
      auto it = fix_edits.inserts.find(gap);
      if (it == fix_edits.inserts.end()) return;
      for (const auto& s : it->second) script.push_back({{LineKind::kAdd, s, false}, Origin::kFix});
    };
    for (std::size_t i = 0; i < text.lines.size(); ++i) {
      emit_inserts(i);
      const bool masked = mask_edits.deleted.count(i) != 0;
      const bool fixed_away = fix_edits.deleted.count(i) != 0;
      if (masked && fixed_away) continue;  // absent on both sides
      if (masked) {
        script.push_back({{LineKind::kAdd, text.lines[i], false}, Origin::kMask});
      } else if (fixed_away) {
        script.push_back({{LineKind::kDel, text.lines[i], false}, Origin::kFix});
      } else {
        script.push_back({{LineKind::kContext, text.lines[i], false}, Origin::kBase});
      }
    }
    emit_inserts(text.lines.size());

    const bool old_final_nl = msk ? apply_to_text(text, *msk).final_newline : text.final_newline;
    const bool new_final_nl = fix ? apply_to_text(text, *fix).final_newline : text.final_newline;
    long last_old = -1;
    long last_new = -1;
    for (std::size_t i = 0; i < script.size(); ++i) {
      if (script[i].line.kind != LineKind::kAdd) last_old = static_cast<long>(i);
      if (script[i].line.kind != LineKind::kDel) last_new = static_cast<long>(i);
    }
    if (last_old >= 0 && last_old == last_new && old_final_nl != new_final_nl) {
      // Same final line, different newline state: it becomes a change.
      ScriptLine del = script[static_cast<std::size_t>(last_old)];
      del.line.kind = LineKind::kDel;
      del.origin = Origin::kFix;
      ScriptLine add = del;
      add.line.kind = LineKind::kAdd;
      script[static_cast<std::size_t>(last_old)] = del;
      script.insert(script.begin() + last_old + 1, add);
      last_new = last_old + 1;
    }
    if (last_old >= 0 && !old_final_nl) script[static_cast<std::size_t>(last_old)].line.no_newline = true;
    if (last_new >= 0 && !new_final_nl) script[static_cast<std::size_t>(last_new)].line.no_newline = true;

    std::vector<HunkLine> plain;
    plain.reserve(script.size());
    std::size_t fix_lines = 0;
    std::size_t readded = 0;
    for (const auto& s : script) {
      plain.push_back(s.line);
      if (s.line.kind == LineKind::kContext) continue;
      if (s.origin == Origin::kMask) {
        ++readded;
      } else {
        ++fix_lines;
      }
    }
    FileDelta delta;
    delta.old_path = path;
    delta.new_path = path;
    delta.is_new = !base_exists || (msk && msk->is_deleted);
    delta.is_deleted = fix && fix->is_deleted;
    delta.hunks = hunks_from_script(plain, context);
    for (auto& h : delta.hunks) normalize_hunk_runs(&h);
    if (delta.hunks.empty() && !delta.is_new && !delta.is_deleted) continue;
    acct.security_fix_lines += fix_lines;
    acct.masked_readded_lines += readded;
    acct.total_lines += fix_lines + readded;
    acct.files += 1;
    if (fix_lines > 0) acct.security_fix_files += 1;
    out.files.push_back(std::move(delta));
  }
  if (accounting) *accounting = acct;
  return canonicalize(std::move(out));
}

TargetPatch compose_target_patch(const Workspace& base, const Patch& feature_fix,
                                 const Patch& mask, const TestPathClassifier& cls) {
  Patch fix_only;
  for (const auto& f : feature_fix.files) {
    if (!cls.is_test(f.old_path) && !cls.is_test(f.new_path)) fix_only.files.push_back(f);
  }
  TargetPatch out;
  Patch algebraic = algebraic_merge(base, fix_only, mask, &out.accounting);

  // Workspace route over just the touched files; untouched files are
  // identical on both sides and contribute nothing to the diff.
  TempDir scratch("susforge-compose");
  Workspace masked{scratch.path() / "masked"};
  Workspace fixed{scratch.path() / "fixed"};
  fs::create_directories(masked.root);
  fs::create_directories(fixed.root);
  std::set<std::string> touched = fix_only.paths();
  for (const auto& p : mask.paths()) touched.insert(p);
  for (const auto& p : touched) {
    if (!fs::is_regular_file(base.resolve(p))) continue;
    for (const auto* ws : {&masked, &fixed}) {
      fs::create_directories(ws->resolve(p).parent_path());
      fs::copy_file(base.resolve(p), ws->resolve(p));
    }
  }
  try {
    apply_patch(masked, mask);
    apply_patch(fixed, fix_only);
  } catch (const ApplyError& e) {
    throw Error(std::string("incompatible bases: ") + e.what());
  }
  DiffOptions opts;
  opts.exclude = [&cls](const std::string& p) { return cls.is_test(p); };
  out.patch = canonicalize(diff_workspaces(masked, fixed, opts));
  out.routes_agree = render_patch(out.patch) == render_patch(algebraic);
  if (!out.routes_agree) {
    // Different but equivalent alignments are fine; different results are not.
    TempDir check("susforge-compose-check");
    Workspace replay{check.path()};
    copy_tree(masked.root, replay.root);
    apply_patch(replay, algebraic);
    if (content_digest(replay) != content_digest(fixed)) {
      throw Error("incompatible bases: algebraic merge and workspace diff disagree");
    }
  }
  return out;
}

}  // namespace susforge::patch
