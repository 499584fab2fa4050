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


#include "susforge/mask.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "susforge/error.hpp"
#include "susforge/syntax.hpp"

namespace susforge::mask {

using patch::FileDelta;
using patch::FileText;
using patch::Hunk;
using patch::HunkLine;
using patch::LineKind;
using syntax::Module;
using syntax::Unit;
using syntax::UnitKind;

namespace {

struct FileCtx {
  FileText text;
  Module mod;
  bool parsed = false;
  int size() const { return static_cast<int>(text.lines.size()); }
};

class Files {
 public:
  explicit Files(const Workspace& base) : base_(base) {}

  FileCtx* get(const std::string& path) {
    auto it = cache_.find(path);
    if (it != cache_.end()) return it->second ? &*it->second : nullptr;
    fs::path p = base_.root / path;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) {
      cache_[path] = std::nullopt;
      return nullptr;
    }
    FileCtx ctx;
    ctx.text = FileText::from_string(read_file(p));
    ctx.mod = syntax::parse_python(ctx.text.lines);
    ctx.parsed = ctx.mod.ok;
    auto& slot = cache_[path];
    slot = std::move(ctx);
    return &*slot;
  }

 private:
  Workspace base_;
  std::map<std::string, std::optional<FileCtx>> cache_;
};

bool add_range(std::set<int>& s, int lo, int hi) {
  bool grew = false;
  for (int l = lo; l <= hi; ++l) grew |= s.insert(l).second;
  return grew;
}

bool add_unit(std::set<int>& s, const Unit& u) { return add_range(s, u.start_line, u.end_line); }

bool fully_masked(const std::set<int>& s, int lo, int hi) {
  for (int l = lo; l <= hi; ++l) {
    if (!s.count(l)) return false;
  }
  return true;
}

std::size_t count_lines(const LineSet& ls) {
  std::size_t n = 0;
  for (const auto& [p, s] : ls) n += s.size();
  return n;
}

std::vector<std::string> remaining_lines(const FileCtx& f, const std::set<int>& masked) {
  std::vector<std::string> out;
  for (int l = 1; l <= f.size(); ++l) {
    if (!masked.count(l)) out.push_back(f.text.lines[l - 1]);
  }
  return out;
}

// Base line shown as line `m` of the masked file.
int base_line_of(const FileCtx& f, const std::set<int>& masked, int m) {
  int seen = 0;
  int last = 0;
  for (int l = 1; l <= f.size(); ++l) {
    if (masked.count(l)) continue;
    last = l;
    if (++seen == m) return l;
  }
  return last;
}

bool is_import_block(const FileCtx& f, const Unit& u) {
  for (int l = u.header_line; l <= u.end_line; ++l) {
    std::string t = trim(f.text.lines[l - 1]);
    if (t.empty() || t[0] == '#') continue;
    if (!starts_with(t, "import ") && !starts_with(t, "from ")) return false;
  }
  return true;
}

// Masks enclosing units whose bodies would otherwise be left empty, then any
// unit the scanner reports broken. Returns false if the masked file still
// does not parse.
bool close_over_syntax(const FileCtx& f, std::set<int>& masked) {
  if (!f.parsed) return false;
  const Module& m = f.mod;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Unit& p : m.units) {
      if (p.kind == UnitKind::kBlock || p.children.empty() || masked.count(p.header_line)) continue;
      bool body_left = false;
      for (int l = p.header_line + 1; l <= p.end_line; ++l) {
        if (m.logical_start[l] && m.line_indent[l] >= 0 && !masked.count(l)) {
          body_left = true;
          break;
        }
      }
      if (!body_left) changed |= add_unit(masked, p);
    }
  }
  for (int guard = 0; guard < static_cast<int>(m.units.size()) + 1; ++guard) {
    Module after = syntax::parse_python(remaining_lines(f, masked));
    if (after.ok) return true;
    bool grew = false;
    for (int probe : {after.error_line, after.error_line - 1}) {
      if (probe < 1) continue;
      int base = base_line_of(f, masked, probe);
      int u = m.innermost(base);
      while (u >= 0 && fully_masked(masked, m.units[u].start_line, m.units[u].end_line)) u = m.units[u].parent;
      if (u >= 0) {
        grew = add_unit(masked, m.units[u]);
        if (grew) break;
      }
    }
    if (!grew) return false;
  }
  return syntax::parse_python(remaining_lines(f, masked)).ok;
}

struct Seed {
  std::string path;
  int unit = -1;
};

struct Touch {
  std::vector<int> deleted;                     // old-side lines
  std::vector<std::pair<int, int>> insertions;  // (line before, indent of added text)
};

int indent_of(const std::string& s) {
  int n = 0;
  for (char c : s) {
    if (c == ' ') {
      ++n;
    } else if (c == '\t') {
      n += 8 - n % 8;
    } else {
      break;
    }
  }
  return n;
}

Touch touches_of(const FileDelta& d) {
  Touch t;
  for (const Hunk& h : d.hunks) {
    int old_line = h.old_len == 0 ? h.old_start + 1 : h.old_start;
    bool in_add_run = false;
    for (const HunkLine& hl : h.lines) {
      if (hl.kind == LineKind::kContext) {
        ++old_line;
        in_add_run = false;
      } else if (hl.kind == LineKind::kDel) {
        t.deleted.push_back(old_line++);
        in_add_run = false;
      } else {
        if (!in_add_run && !trim(hl.text).empty()) {
          t.insertions.emplace_back(old_line - 1, indent_of(hl.text));
          in_add_run = true;
        }
      }
    }
  }
  return t;
}

int nearest_named(const Module& m, int line) {
  int best = -1;
  int best_d = 0;
  for (std::size_t i = 0; i < m.units.size(); ++i) {
    const Unit& u = m.units[i];
    if (u.kind == UnitKind::kBlock || u.parent >= 0) continue;
    int d = u.contains(line) ? 0 : std::min(std::abs(u.start_line - line), std::abs(u.end_line - line));
    if (best < 0 || d < best_d) {
      best = static_cast<int>(i);
      best_d = d;
    }
  }
  return best;
}

int enclosing_for_insertion(const Module& m, int k, int indent) {
  int best = -1;
  for (std::size_t i = 0; i < m.units.size(); ++i) {
    const Unit& u = m.units[i];
    if (u.kind == UnitKind::kBlock) continue;
    if (u.header_line <= k && k <= u.end_line && indent > u.indent) {
      if (best < 0 || u.header_line >= m.units[best].header_line) best = static_cast<int>(i);
    }
  }
  if (best >= 0) return best;
  int b = m.innermost(k);
  if (b >= 0 && k < m.units[b].end_line) return b;
  return -1;
}

std::vector<int> expansion_order(const FileCtx& f, int unit) {
  const Module& m = f.mod;
  std::vector<int> out;
  const Unit& u = m.units[unit];
  auto dist = [&](int i) { return std::abs(m.units[i].start_line - u.start_line); };
  std::vector<int> sib;
  for (int i : m.siblings(unit)) {
    if (i != unit && m.units[i].kind != UnitKind::kBlock) sib.push_back(i);
  }
  std::stable_sort(sib.begin(), sib.end(), [&](int a, int b) { return dist(a) < dist(b); });
  out.insert(out.end(), sib.begin(), sib.end());
  std::vector<int> blocks;
  for (std::size_t i = 0; i < m.units.size(); ++i) {
    if (m.units[i].kind == UnitKind::kBlock && static_cast<int>(i) != unit && !is_import_block(f, m.units[i])) {
      blocks.push_back(static_cast<int>(i));
    }
  }
  std::stable_sort(blocks.begin(), blocks.end(), [&](int a, int b) { return dist(a) < dist(b); });
  out.insert(out.end(), blocks.begin(), blocks.end());
  for (int p = u.parent; p >= 0; p = m.units[p].parent) out.push_back(p);
  out.push_back(-1);  // whole file
  return out;
}

std::size_t needed_lines(const MaskRequest& req) {
  return static_cast<std::size_t>(std::ceil(req.ratio * static_cast<double>(req.feature_fix.changed_lines()) - 1e-9));
}

void check_request(const MaskRequest& req) {
  if (req.feature_fix.empty()) throw PreconditionError("feature fix is empty");
  if (!(req.ratio >= 1.0)) throw PreconditionError("mask ratio must be at least 1");
}

bool only_new_files(const MaskRequest& req) {
  for (const auto& d : req.feature_fix.files) {
    if (!d.is_new && !req.classifier.is_test(d.path())) return false;
  }
  return true;
}

// Every base file the fix edits is fully masked.
bool saturated(const LineSet& lines, const MaskRequest& req, Files& files) {
  for (const auto& d : req.feature_fix.files) {
    if (d.is_new || req.classifier.is_test(d.old_path)) continue;
    FileCtx* f = files.get(d.old_path);
    if (!f) continue;
    auto it = lines.find(d.old_path);
    if (it == lines.end() || static_cast<int>(it->second.size()) < f->size()) return false;
  }
  return true;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

}  // namespace

LineSet Mask::lines() const {
  LineSet out;
  for (const auto& [path, dels] : patch::deleted_lines_by_path(patch)) {
    for (const auto& [n, text] : dels) out[path].insert(n);
  }
  return out;
}

nlohmann::json Mask::to_json() const {
  nlohmann::json regions_j = nlohmann::json::array();
  for (const auto& r : regions) {
    regions_j.push_back({{"path", r.path}, {"unit", r.unit}, {"start_line", r.start_line}, {"end_line", r.end_line}});
  }
  return {{"ratio_achieved", ratio_achieved},
          {"generation_mode", generation_mode},
          {"syntax_relaxed", syntax_relaxed},
          {"masked_lines", masked_lines()},
          {"regions", regions_j}};
}

patch::Patch render_mask(const Workspace& base, const LineSet& lines, int context) {
  patch::Patch out;
  for (const auto& [path, masked] : lines) {
    if (masked.empty()) continue;
    FileText ft = FileText::from_string(read_file(base.root / path));
    const int n = static_cast<int>(ft.lines.size());
    FileDelta d;
    d.old_path = d.new_path = path;
    std::vector<int> runs(masked.begin(), masked.end());
    std::size_t i = 0;
    int deleted_before = 0;
    while (i < runs.size()) {
      if (runs[i] < 1 || runs[i] > n) throw PreconditionError("mask line out of range in " + path);
      std::size_t j = i;
      while (j + 1 < runs.size() && runs[j + 1] - runs[j] <= 2 * context + 1) ++j;
      const int lo = std::max(1, runs[i] - context);
      const int hi = std::min(n, runs[j] + context);
      Hunk h;
      h.old_start = lo;
      h.old_len = hi - lo + 1;
      int dels = 0;
      for (int l = lo; l <= hi; ++l) {
        HunkLine hl;
        hl.kind = masked.count(l) ? LineKind::kDel : LineKind::kContext;
        hl.text = ft.lines[l - 1];
        hl.no_newline = (l == n && !ft.final_newline);
        if (hl.kind == LineKind::kDel) ++dels;
        h.lines.push_back(hl);
      }
      h.new_len = h.old_len - dels;
      h.new_start = h.new_len == 0 ? lo - deleted_before - 1 : lo - deleted_before;
      deleted_before += dels;
      d.hunks.push_back(std::move(h));
      i = j + 1;
    }
    out.files.push_back(std::move(d));
  }
  return out;
}

std::vector<std::string> validate_mask(const patch::Patch& mask, const Workspace& base,
                                       const patch::Patch& feature_fix, const patch::TestPathClassifier& cls) {
  std::vector<std::string> v;
  for (const auto& d : mask.files) {
    const std::string& path = d.path();
    if (cls.is_test(path)) v.push_back("test-path: " + path);
    if (d.is_new || d.old_path != d.new_path) v.push_back("deletion-only: " + path + " (file created or renamed)");
    for (std::size_t k = 0; k < d.hunks.size(); ++k) {
      if (d.hunks[k].count(LineKind::kAdd) > 0) {
        v.push_back("deletion-only: " + path + "#" + std::to_string(k + 1));
      }
    }
    if (!d.is_new) {
      std::error_code ec;
      if (!fs::is_regular_file(base.root / d.old_path, ec)) {
        v.push_back("base-mismatch: " + path + " (absent)");
        continue;
      }
      try {
        patch::apply_to_text(FileText::from_string(read_file(base.root / d.old_path)), d);
      } catch (const Error& e) {
        v.push_back("base-mismatch: " + path + " (" + e.what() + ")");
      }
    }
  }
  auto masked = patch::deleted_lines_by_path(mask);
  for (const auto& [path, dels] : patch::deleted_lines_by_path(feature_fix)) {
    if (cls.is_test(path)) continue;
    auto it = masked.find(path);
    for (const auto& [n, text] : dels) {
      if (it == masked.end() || !it->second.count(n) || it->second.at(n) != text) {
        v.push_back("coverage: " + path + ":" + std::to_string(n));
      }
    }
  }
  return v;
}

double ratio_of(const patch::Patch& mask, const patch::Patch& feature_fix) {
  const std::size_t total = feature_fix.changed_lines();
  if (total == 0) return 0.0;
  return static_cast<double>(mask.deleted_lines()) / static_cast<double>(total);
}

Mask structural_mask(const MaskRequest& req) {
  check_request(req);
  Files files(req.base);
  LineSet masked;
  std::vector<Seed> seeds;
  std::map<std::string, std::vector<int>> window_points;
  std::vector<std::pair<std::string, int>> loose_insertions;
  auto add_seed = [&](const std::string& path, int unit) {
    for (const auto& s : seeds) {
      if (s.path == path && s.unit == unit) return;
    }
    seeds.push_back({path, unit});
  };

  for (const auto& d : req.feature_fix.files) {
    if (d.is_new || req.classifier.is_test(d.old_path)) continue;
    FileCtx* f = files.get(d.old_path);
    if (!f) continue;
    Touch t = touches_of(d);
    if (!f->parsed) {
      auto& pts = window_points[d.old_path];
      pts.insert(pts.end(), t.deleted.begin(), t.deleted.end());
      for (const auto& [k, ind] : t.insertions) pts.push_back(std::max(1, k));
      for (int l : t.deleted) masked[d.old_path].insert(l);
      continue;
    }
    for (int l : t.deleted) {
      int u = f->mod.innermost_named(l);
      if (u < 0) u = f->mod.innermost(l);
      if (u >= 0) {
        add_seed(d.old_path, u);
      } else {
        masked[d.old_path].insert(l);
      }
    }
    for (const auto& [k, ind] : t.insertions) {
      int u = enclosing_for_insertion(f->mod, k, ind);
      if (u >= 0) {
        add_seed(d.old_path, u);
      } else {
        loose_insertions.emplace_back(d.old_path, k);
      }
    }
  }
  if (seeds.empty() && window_points.empty()) {
    for (const auto& [path, k] : loose_insertions) {
      FileCtx* f = files.get(path);
      int u = nearest_named(f->mod, k);
      if (u >= 0) {
        add_seed(path, u);
        break;
      }
    }
  }
  if (seeds.empty() && window_points.empty() && count_lines(masked) == 0) {
    throw Rejection("mask-empty", "the fix touches no existing implementation lines");
  }

  for (const auto& s : seeds) add_unit(masked[s.path], files.get(s.path)->mod.units[s.unit]);
  for (auto& [path, set] : masked) {
    FileCtx* f = files.get(path);
    if (f && f->parsed) close_over_syntax(*f, set);
  }

  const std::size_t needed = needed_lines(req);
  std::vector<std::vector<int>> orders;
  std::vector<std::size_t> cursor(seeds.size(), 0);
  for (const auto& s : seeds) orders.push_back(expansion_order(*files.get(s.path), s.unit));
  bool progress = true;
  while (count_lines(masked) < needed && progress) {
    progress = false;
    for (std::size_t i = 0; i < seeds.size() && count_lines(masked) < needed; ++i) {
      FileCtx* f = files.get(seeds[i].path);
      auto& set = masked[seeds[i].path];
      while (cursor[i] < orders[i].size()) {
        int c = orders[i][cursor[i]++];
        bool grew = c < 0 ? add_range(set, 1, f->size()) : add_unit(set, f->mod.units[c]);
        if (grew) {
          close_over_syntax(*f, set);
          progress = true;
          break;
        }
      }
    }
  }

  if (!window_points.empty()) {
    LineSet fixed = masked;
    for (int k = 1;; ++k) {
      LineSet trial = fixed;
      bool all_full = true;
      for (const auto& [path, pts] : window_points) {
        FileCtx* f = files.get(path);
        for (int p : pts) add_range(trial[path], std::max(1, p - k), std::min(f->size(), p + k));
        if (static_cast<int>(trial[path].size()) < f->size()) all_full = false;
      }
      masked = trial;
      if (count_lines(masked) >= needed || all_full) break;
    }
  }

  Mask m = describe_mask(render_mask(req.base, masked), req, "structural");
  return m;
}

Mask describe_mask(const patch::Patch& p, const MaskRequest& req, const std::string& mode) {
  Mask m;
  m.patch = p;
  m.generation_mode = mode;
  m.ratio_achieved = ratio_of(p, req.feature_fix);
  Files files(req.base);
  for (const auto& [path, set] : m.lines()) {
    FileCtx* f = files.get(path);
    if (!f) continue;
    if (!f->parsed || !syntax::parse_python(remaining_lines(*f, set)).ok) {
      if (ends_with(path, ".py")) m.syntax_relaxed = true;
    }
    std::vector<int> lines(set.begin(), set.end());
    for (std::size_t i = 0; i < lines.size();) {
      std::size_t j = i;
      while (j + 1 < lines.size() && lines[j + 1] == lines[j] + 1) ++j;
      const int lo = lines[i];
      const int hi = lines[j];
      bool named = false;
      if (f->parsed) {
        for (const Unit& u : f->mod.units) {
          if (u.kind == UnitKind::kBlock || u.start_line < lo || u.end_line > hi) continue;
          if (u.parent >= 0) {
            const Unit& par = f->mod.units[u.parent];
            if (par.start_line >= lo && par.end_line <= hi) continue;
          }
          m.regions.push_back({path, u.qualified_name, u.start_line, u.end_line});
          named = true;
        }
      }
      if (!named) {
        std::string unit;
        if (f->parsed) {
          int u = f->mod.innermost_named(lo);
          if (u >= 0) unit = f->mod.units[u].qualified_name;
        }
        m.regions.push_back({path, unit, lo, hi});
      }
      i = j + 1;
    }
  }
  return m;
}

ExternalMaskGenerator::ExternalMaskGenerator(ExternalCommand cmd, std::string prompt_template)
    : cmd_(std::move(cmd)), template_(prompt_template.empty() ? default_prompt() : std::move(prompt_template)) {}

const std::string& ExternalMaskGenerator::default_prompt() {
  static const std::string p =
      "The repository in {{ workspace }} is about to receive the change below, which has\n"
      "not been applied yet.\n\n"
      "<change>\n{{ diff }}</change>\n\n"
      "Write a unified diff to {{ file_name }} that deletes the implementation area this\n"
      "change lives in, so that someone could write it again from a description.\n\n"
      "Rules:\n"
      "- Remove every line the change removes or edits, together with the surrounding\n"
      "  functions, methods or classes they belong to.\n"
      "- Remove at least {{ ratio }} times as many lines as the change has.\n"
      "- Only remove lines. Never add, edit or move a line.\n"
      "- Leave test files and test directories untouched.\n"
      "- Paths in the diff are relative to the repository root, with a/ and b/ prefixes.\n"
      "{{ feedback }}";
  return p;
}

patch::Patch ExternalMaskGenerator::generate(const MaskRequest& req) {
  TempDir tmp("mask-gen");
  const fs::path repo = tmp.path() / "repo";
  copy_tree(req.base.root, repo);
  const fs::path out = tmp.path() / "mask.diff";
  std::string feedback;
  if (!req.feedback.empty()) feedback = "\nA previous attempt was refused:\n" + req.feedback + "\n";
  char ratio[32];
  std::snprintf(ratio, sizeof ratio, "%g", req.ratio);
  const fs::path prompt_file = tmp.path() / "prompt.md";
  write_file(prompt_file, render_template(template_, {{"workspace", repo.string()},
                                                      {"diff", patch::render_patch(req.feature_fix)},
                                                      {"ratio", ratio},
                                                      {"file_name", out.string()},
                                                      {"feedback", feedback}}));
  ProcessResult r = run_external(
      cmd_, {{"workspace", repo.string()}, {"prompt_file", prompt_file.string()}, {"output_file", out.string()}},
      repo);
  if (!r.ok()) throw Error("mask generator failed: exit " + std::to_string(r.exit_code));
  if (!fs::exists(out)) throw Error("mask generator wrote no diff");
  return patch::parse_patch(read_file(out));
}

Mask propose_mask(const MaskRequest& req, MaskGenerator& gen) {
  check_request(req);
  if (only_new_files(req)) throw Rejection("mask-empty", "the fix only adds new files");
  MaskRequest r = req;
  const int attempts = gen.agentic() ? 2 : 1;
  const std::string mode = gen.agentic() ? "agentic" : "structural";
  std::vector<std::string> violations;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    violations.clear();
    patch::Patch p;
    try {
      p = gen.generate(r);
    } catch (const Rejection&) {
      throw;
    } catch (const Error& e) {
      violations.push_back(std::string("generator: ") + e.what());
    }
    if (violations.empty()) {
      if (p.empty()) violations.push_back("coverage: empty mask");
      auto v = validate_mask(p, req.base, req.feature_fix, req.classifier);
      violations.insert(violations.end(), v.begin(), v.end());
    }
    if (violations.empty()) {
      Mask m = describe_mask(p, req, mode);
      Files files(req.base);
      if (m.ratio_achieved + 1e-9 < req.ratio && !saturated(m.lines(), req, files)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "ratio: %.2f achieved, %.2f required", m.ratio_achieved, req.ratio);
        violations.push_back(buf);
      } else {
        return m;
      }
    }
    r.feedback = join(violations, "\n");
  }
  throw Rejection("mask-invalid", join(violations, "; "));
}

Mask grow_mask(const Mask& m, const MaskFeedback& fb, const MaskRequest& req) {
  if (fb.empty()) throw PreconditionError("grow_mask needs feedback");
  Files files(req.base);
  const LineSet before = m.lines();
  LineSet next = before;
  for (const auto& region : fb.excessive) {
    if (req.classifier.is_test(region.path)) continue;
    FileCtx* f = files.get(region.path);
    if (!f) continue;
    auto& set = next[region.path];
    const std::set<int> masked_before = before.count(region.path) ? before.at(region.path) : std::set<int>{};
    const int base_line = region.line > 0 ? base_line_of(*f, masked_before, region.line) : 0;
    if (!f->parsed) {
      if (base_line > 0) {
        add_range(set, std::max(1, base_line - 3), std::min(f->size(), base_line + 3));
      } else {
        add_range(set, 1, f->size());
      }
      continue;
    }
    std::optional<int> unit;
    if (!region.unit.empty()) {
      unit = f->mod.find_qualified(region.unit);
      if (!unit) {
        std::string last = region.unit.substr(region.unit.rfind('.') + 1);
        int found = -1, hits = 0;
        for (std::size_t i = 0; i < f->mod.units.size(); ++i) {
          if (f->mod.units[i].kind != UnitKind::kBlock && f->mod.units[i].name == last) {
            found = static_cast<int>(i);
            ++hits;
          }
        }
        if (hits == 1) unit = found;
      }
    }
    if (!unit && base_line > 0) {
      int u = f->mod.innermost_named(base_line);
      if (u < 0) u = f->mod.innermost(base_line);
      if (u < 0) u = nearest_named(f->mod, base_line);
      if (u >= 0) unit = u;
    }
    if (unit) {
      add_unit(set, f->mod.units[*unit]);
    } else if (base_line > 0) {
      add_range(set, std::max(1, base_line - 3), std::min(f->size(), base_line + 3));
    }
    close_over_syntax(*f, set);
  }
  for (auto it = next.begin(); it != next.end();) {
    it = it->second.empty() ? next.erase(it) : std::next(it);
  }
  if (next == before) throw Rejection("mask-saturated", "every flagged region is already masked");
  return describe_mask(render_mask(req.base, next), req, m.generation_mode);
}

}  // namespace susforge::mask
