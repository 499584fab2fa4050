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

#include <algorithm>
#include <charconv>
#include <optional>

#include "susforge/error.hpp"
#include "patch_internal.hpp"
#include "susforge/patch.hpp"

namespace susforge::patch {

std::size_t Hunk::count(LineKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      lines.begin(), lines.end(), [kind](const HunkLine& l) { return l.kind == kind; }));
}

namespace {

std::string range_text(int start, int len) {
  if (len == 1) return std::to_string(start);
  return std::to_string(start) + "," + std::to_string(len);
}

}  // namespace

std::string Hunk::header() const {
  std::string h = "@@ -" + range_text(old_start, old_len) + " +" +
                  range_text(new_start, new_len) + " @@";
  if (!section.empty()) h += " " + section;
  return h;
}

std::size_t FileDelta::added_lines() const {
  std::size_t n = 0;
  for (const auto& h : hunks) n += h.count(LineKind::kAdd);
  return n;
}

std::size_t FileDelta::deleted_lines() const {
  std::size_t n = 0;
  for (const auto& h : hunks) n += h.count(LineKind::kDel);
  return n;
}

std::set<std::string> Patch::paths() const {
  std::set<std::string> out;
  for (const auto& f : files) {
    if (!f.old_path.empty()) out.insert(f.old_path);
    if (!f.new_path.empty()) out.insert(f.new_path);
  }
  return out;
}

std::size_t Patch::added_lines() const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.added_lines();
  return n;
}

std::size_t Patch::deleted_lines() const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.deleted_lines();
  return n;
}

const FileDelta* Patch::find(std::string_view path) const {
  for (const auto& f : files) {
    if (f.path() == path || f.old_path == path || f.new_path == path) return &f;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string strip_path(std::string_view raw, bool* dev_null) {
  // Drop "\t<timestamp>" suffixes emitted by diff(1).
  std::size_t tab = raw.find('\t');
  std::string p(tab == std::string_view::npos ? raw : raw.substr(0, tab));
  p = trim(p);
  if (p.size() >= 2 && p.front() == '"' && p.back() == '"') p = p.substr(1, p.size() - 2);
  *dev_null = p == "/dev/null";
  if (*dev_null) return {};
  if (starts_with(p, "a/") || starts_with(p, "b/")) p = p.substr(2);
  return p;
}

bool parse_number(std::string_view s, int* out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size() && *out >= 0;
}

bool parse_range(std::string_view s, int* start, int* len) {
  std::size_t comma = s.find(',');
  if (comma == std::string_view::npos) {
    *len = 1;
    return parse_number(s, start);
  }
  return parse_number(s.substr(0, comma), start) && parse_number(s.substr(comma + 1), len);
}

std::optional<Hunk> parse_hunk_header(std::string_view line) {
  // @@ -a[,b] +c[,d] @@[ section]
  if (!starts_with(line, "@@ -")) return std::nullopt;
  std::size_t plus = line.find(" +", 4);
  if (plus == std::string_view::npos) return std::nullopt;
  std::size_t close = line.find(" @@", plus + 2);
  if (close == std::string_view::npos) return std::nullopt;
  Hunk h;
  if (!parse_range(line.substr(4, plus - 4), &h.old_start, &h.old_len)) return std::nullopt;
  if (!parse_range(line.substr(plus + 2, close - plus - 2), &h.new_start, &h.new_len)) {
    return std::nullopt;
  }
  std::string_view rest = line.substr(close + 3);
  if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  h.section = std::string(rest);
  return h;
}

void parse_git_header_paths(std::string_view line, FileDelta* delta) {
  // diff --git a/X b/Y
  std::string_view rest = line.substr(std::string_view("diff --git ").size());
  std::size_t split = rest.find(" b/");
  if (split == std::string_view::npos) return;
  bool dn = false;
  delta->old_path = strip_path(rest.substr(0, split), &dn);
  delta->new_path = strip_path(rest.substr(split + 1), &dn);
}

}  // namespace

Patch parse_patch(std::string_view text) {
  std::vector<std::string> lines = split_lines(text);
  Patch out;
  FileDelta* current = nullptr;
  bool in_binary_payload = false;
  std::set<std::pair<std::string, std::string>> seen;

  auto finish_current = [&]() {
    if (current == nullptr) return;
    auto key = std::make_pair(current->old_path, current->new_path);
    if (!seen.insert(key).second) {
      throw Error("duplicate file delta for " + current->path());
    }
  };
  auto start_file = [&]() {
    finish_current();
    out.files.emplace_back();
    current = &out.files.back();
    in_binary_payload = false;
  };

  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string& line = lines[i];
    const std::size_t lineno = i + 1;
    if (starts_with(line, "diff --git ")) {
      start_file();
      parse_git_header_paths(line, current);
      ++i;
      continue;
    }
    if (starts_with(line, "--- ") && i + 1 < lines.size() && starts_with(lines[i + 1], "+++ ")) {
      // Plain unified diffs have no "diff --git" line; a second ---/+++ pair
      // inside one git section cannot happen, so it starts a new file.
      if (current == nullptr || !current->hunks.empty() || in_binary_payload) start_file();
      bool old_null = false;
      bool new_null = false;
      std::string old_path = strip_path(std::string_view(line).substr(4), &old_null);
      std::string new_path = strip_path(std::string_view(lines[i + 1]).substr(4), &new_null);
      if (old_null) {
        current->is_new = true;
        current->old_path = new_path;
      } else {
        current->old_path = old_path;
      }
      if (new_null) {
        current->is_deleted = true;
        current->new_path = old_path;
      } else {
        current->new_path = new_path;
      }
      i += 2;
      continue;
    }
    if (starts_with(line, "@@")) {
      if (current == nullptr) throw ParseError("hunk outside of a file section", lineno);
      std::optional<Hunk> header = parse_hunk_header(line);
      if (!header) throw ParseError("malformed hunk header '" + line + "'", lineno);
      Hunk hunk = std::move(*header);
      int old_seen = 0;
      int new_seen = 0;
      ++i;
      while (old_seen < hunk.old_len || new_seen < hunk.new_len ||
             (i < lines.size() && starts_with(lines[i], "\\"))) {
        if (i >= lines.size()) throw ParseError("hunk truncated", i + 1);
        const std::string& body = lines[i];
        if (starts_with(body, "\\")) {
          if (hunk.lines.empty()) throw ParseError("stray no-newline marker", i + 1);
          hunk.lines.back().no_newline = true;
          ++i;
          continue;
        }
        HunkLine hl;
        char tag = body.empty() ? ' ' : body[0];
        hl.text = body.empty() ? std::string() : body.substr(1);
        switch (tag) {
          case ' ':
            hl.kind = LineKind::kContext;
            ++old_seen;
            ++new_seen;
            break;
          case '-':
            hl.kind = LineKind::kDel;
            ++old_seen;
            break;
          case '+':
            hl.kind = LineKind::kAdd;
            ++new_seen;
            break;
          default:
            throw ParseError("unexpected line inside hunk", i + 1);
        }
        if (old_seen > hunk.old_len || new_seen > hunk.new_len) {
          throw ParseError("hunk body longer than its header", i + 1);
        }
        hunk.lines.push_back(std::move(hl));
        ++i;
      }
      current->hunks.push_back(std::move(hunk));
      continue;
    }
    if (current != nullptr && current->hunks.empty()) {
      if (starts_with(line, "new file mode")) {
        current->is_new = true;
      } else if (starts_with(line, "deleted file mode")) {
        current->is_deleted = true;
      } else if (starts_with(line, "rename from ")) {
        current->old_path = line.substr(12);
      } else if (starts_with(line, "rename to ")) {
        current->new_path = line.substr(10);
      } else if (starts_with(line, "Binary files ") || starts_with(line, "GIT binary patch")) {
        current->binary = true;
        in_binary_payload = true;
      }
    }
    // Anything else (commit messages, index lines, binary payload) is ignored.
    ++i;
  }
  finish_current();
  for (auto& f : out.files) {
    if (f.is_new && f.old_path.empty()) f.old_path = f.new_path;
    if (f.is_deleted && f.new_path.empty()) f.new_path = f.old_path;
    if (f.binary) f.hunks.clear();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical form

void normalize_hunk_runs(Hunk* h) {
  std::vector<HunkLine> out;
  out.reserve(h->lines.size());
  std::size_t i = 0;
  while (i < h->lines.size()) {
    if (h->lines[i].kind == LineKind::kContext) {
      out.push_back(h->lines[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < h->lines.size() && h->lines[j].kind != LineKind::kContext) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (h->lines[k].kind == LineKind::kDel) out.push_back(h->lines[k]);
    }
    for (std::size_t k = i; k < j; ++k) {
      if (h->lines[k].kind == LineKind::kAdd) out.push_back(h->lines[k]);
    }
    i = j;
  }
  h->lines = std::move(out);
}

Patch canonicalize(Patch p) {
  for (auto& f : p.files) {
    for (auto& h : f.hunks) normalize_hunk_runs(&h);
  }
  std::stable_sort(p.files.begin(), p.files.end(),
                   [](const FileDelta& a, const FileDelta& b) { return a.path() < b.path(); });
  return p;
}

std::string render_patch(const Patch& input) {
  Patch p = canonicalize(input);
  std::string out;
  for (const auto& f : p.files) {
    const std::string& old_path = f.old_path.empty() ? f.new_path : f.old_path;
    const std::string& new_path = f.new_path.empty() ? f.old_path : f.new_path;
    out += "diff --git a/" + old_path + " b/" + new_path + "\n";
    if (f.is_new) out += "new file mode 100644\n";
    if (f.is_deleted) out += "deleted file mode 100644\n";
    if (!f.is_new && !f.is_deleted && old_path != new_path) {
      out += "rename from " + old_path + "\n";
      out += "rename to " + new_path + "\n";
    }
    if (f.binary) {
      out += "Binary files " + (f.is_new ? std::string("/dev/null") : "a/" + old_path) + " and " +
             (f.is_deleted ? std::string("/dev/null") : "b/" + new_path) + " differ\n";
      continue;
    }
    if (f.hunks.empty()) continue;
    out += f.is_new ? std::string("--- /dev/null\n") : "--- a/" + old_path + "\n";
    out += f.is_deleted ? std::string("+++ /dev/null\n") : "+++ b/" + new_path + "\n";
    for (const auto& h : f.hunks) {
      out += h.header();
      out += '\n';
      for (const auto& l : h.lines) {
        out += l.kind == LineKind::kContext ? ' ' : l.kind == LineKind::kAdd ? '+' : '-';
        out += l.text;
        out += '\n';
        if (l.no_newline) out += "\\ No newline at end of file\n";
      }
    }
  }
  return out;
}

Patch invert_patch(const Patch& p) {
  Patch out;
  out.files.reserve(p.files.size());
  for (const auto& f : p.files) {
    FileDelta inv;
    inv.old_path = f.new_path;
    inv.new_path = f.old_path;
    inv.is_new = f.is_deleted;
    inv.is_deleted = f.is_new;
    inv.binary = f.binary;
    for (const auto& h : f.hunks) {
      Hunk ih;
      ih.old_start = h.new_start;
      ih.old_len = h.new_len;
      ih.new_start = h.old_start;
      ih.new_len = h.old_len;
      ih.section = h.section;
      ih.lines = h.lines;
      for (auto& l : ih.lines) {
        if (l.kind == LineKind::kAdd) {
          l.kind = LineKind::kDel;
        } else if (l.kind == LineKind::kDel) {
          l.kind = LineKind::kAdd;
        }
      }
      normalize_hunk_runs(&ih);
      inv.hunks.push_back(std::move(ih));
    }
    out.files.push_back(std::move(inv));
  }
  return out;
}

std::map<std::string, std::map<int, std::string>> deleted_lines_by_path(const Patch& p) {
  std::map<std::string, std::map<int, std::string>> out;
  for (const auto& f : p.files) {
    auto& slot = out[f.old_path.empty() ? f.path() : f.old_path];
    for (const auto& h : f.hunks) {
      int old_line = h.old_len == 0 ? h.old_start + 1 : h.old_start;
      for (const auto& l : h.lines) {
        if (l.kind == LineKind::kAdd) continue;
        if (l.kind == LineKind::kDel) slot[old_line] = l.text;
        ++old_line;
      }
    }
  }
  return out;
}

}  // namespace susforge::patch
