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
#include <set>

#include "patch_internal.hpp"
#include "susforge/error.hpp"
#include "susforge/patch.hpp"

namespace susforge::patch {

namespace {

// Greedy O((N+M)D) shortest edit script over a[lo_a, hi_a) x b[lo_b, hi_b).
// Appends ops in forward order.
void myers(const std::vector<std::string>& a, std::size_t lo_a, std::size_t hi_a,
           const std::vector<std::string>& b, std::size_t lo_b, std::size_t hi_b,
           std::vector<LineKind>* ops) {
  const long n = static_cast<long>(hi_a - lo_a);
  const long m = static_cast<long>(hi_b - lo_b);
  const long max = n + m;
  if (max == 0) return;
  const long offset = max + 1;
  std::vector<long> v(static_cast<std::size_t>(2 * max + 3), 0);
  std::vector<std::vector<long>> trace;
  long final_d = -1;
  for (long d = 0; d <= max && final_d < 0; ++d) {
    trace.push_back(v);
    for (long k = -d; k <= d; k += 2) {
      long x;
      if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
        x = v[offset + k + 1];
      } else {
        x = v[offset + k - 1] + 1;
      }
      long y = x - k;
      while (x < n && y < m && a[lo_a + x] == b[lo_b + y]) {
        ++x;
        ++y;
      }
      v[offset + k] = x;
      if (x >= n && y >= m) {
        final_d = d;
        break;
      }
    }
  }
  std::vector<LineKind> rev;
  long x = n;
  long y = m;
  for (long d = final_d; d > 0; --d) {
    const std::vector<long>& pv = trace[static_cast<std::size_t>(d)];
    long k = x - y;
    long prev_k;
    if (k == -d || (k != d && pv[offset + k - 1] < pv[offset + k + 1])) {
      prev_k = k + 1;
    } else {
      prev_k = k - 1;
    }
    long prev_x = pv[offset + prev_k];
    long prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y) {
      rev.push_back(LineKind::kContext);
      --x;
      --y;
    }
    if (x == prev_x) {
      rev.push_back(LineKind::kAdd);
      --y;
    } else {
      rev.push_back(LineKind::kDel);
      --x;
    }
  }
  while (x > 0 && y > 0) {
    rev.push_back(LineKind::kContext);
    --x;
    --y;
  }
  ops->insert(ops->end(), rev.rbegin(), rev.rend());
}

std::vector<std::string> comparison_keys(const FileText& t) {
  std::vector<std::string> keys = t.lines;
  if (!t.final_newline && !keys.empty()) keys.back() += '\x01';
  return keys;
}

bool looks_binary(const std::string& content) {
  return content.find('\0', 0) != std::string::npos &&
         content.find('\0') < std::min<std::size_t>(content.size(), 8000);
}

}  // namespace

std::vector<Hunk> hunks_from_script(const std::vector<HunkLine>& script, int context) {
  std::vector<Hunk> hunks;
  const std::size_t n = script.size();
  std::vector<std::size_t> changes;
  for (std::size_t i = 0; i < n; ++i) {
    if (script[i].kind != LineKind::kContext) changes.push_back(i);
  }
  if (changes.empty()) return hunks;
  // old_before[i] / new_before[i]: old/new lines preceding script index i.
  std::vector<int> old_before(n + 1, 0);
  std::vector<int> new_before(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    old_before[i + 1] = old_before[i] + (script[i].kind != LineKind::kAdd ? 1 : 0);
    new_before[i + 1] = new_before[i] + (script[i].kind != LineKind::kDel ? 1 : 0);
  }
  const std::size_t ctx = static_cast<std::size_t>(std::max(context, 0));
  std::size_t ci = 0;
  while (ci < changes.size()) {
    std::size_t first = changes[ci];
    std::size_t last = first;
    std::size_t cj = ci + 1;
    while (cj < changes.size() && changes[cj] - last - 1 <= 2 * ctx) {
      last = changes[cj];
      ++cj;
    }
    std::size_t begin = first >= ctx ? first - ctx : 0;
    std::size_t end = std::min(n, last + ctx + 1);
    Hunk h;
    h.lines.assign(script.begin() + static_cast<long>(begin), script.begin() + static_cast<long>(end));
    h.old_len = old_before[end] - old_before[begin];
    h.new_len = new_before[end] - new_before[begin];
    h.old_start = old_before[begin] + (h.old_len > 0 ? 1 : 0);
    h.new_start = new_before[begin] + (h.new_len > 0 ? 1 : 0);
    hunks.push_back(std::move(h));
    ci = cj;
  }
  return hunks;
}

std::vector<HunkLine> edit_script(const FileText& a, const FileText& b) {
  const std::vector<std::string> ka = comparison_keys(a);
  const std::vector<std::string> kb = comparison_keys(b);
  std::size_t prefix = 0;
  while (prefix < ka.size() && prefix < kb.size() && ka[prefix] == kb[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < ka.size() - prefix && suffix < kb.size() - prefix &&
         ka[ka.size() - 1 - suffix] == kb[kb.size() - 1 - suffix]) {
    ++suffix;
  }
  std::vector<LineKind> ops(prefix, LineKind::kContext);
  myers(ka, prefix, ka.size() - suffix, kb, prefix, kb.size() - suffix, &ops);
  ops.insert(ops.end(), suffix, LineKind::kContext);

  std::vector<HunkLine> script;
  script.reserve(ops.size());
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (LineKind op : ops) {
    HunkLine l;
    l.kind = op;
    if (op == LineKind::kAdd) {
      l.text = b.lines[ib];
      l.no_newline = !b.final_newline && ib + 1 == b.lines.size();
      ++ib;
    } else {
      l.text = a.lines[ia];
      l.no_newline = !a.final_newline && ia + 1 == a.lines.size();
      ++ia;
      if (op == LineKind::kContext) ++ib;
    }
    script.push_back(std::move(l));
  }
  return script;
}

FileDelta diff_texts(const std::string& path, const FileText& a, const FileText& b, int context) {
  FileDelta delta;
  delta.old_path = path;
  delta.new_path = path;
  delta.hunks = hunks_from_script(edit_script(a, b), context);
  for (auto& h : delta.hunks) normalize_hunk_runs(&h);
  return delta;
}

Patch diff_workspaces(const Workspace& a, const Workspace& b, const DiffOptions& options) {
  std::set<std::string> all;
  for (auto& p : list_files(a.root)) all.insert(p);
  for (auto& p : list_files(b.root)) all.insert(p);
  Patch out;
  for (const auto& path : all) {
    if (options.exclude && options.exclude(path)) continue;
    const bool in_a = fs::is_regular_file(a.resolve(path));
    const bool in_b = fs::is_regular_file(b.resolve(path));
    std::string ca = in_a ? read_file(a.resolve(path)) : std::string();
    std::string cb = in_b ? read_file(b.resolve(path)) : std::string();
    if (in_a && in_b && ca == cb) continue;
    if (looks_binary(ca) || looks_binary(cb)) {
      FileDelta d;
      d.old_path = d.new_path = path;
      d.binary = true;
      d.is_new = !in_a;
      d.is_deleted = !in_b;
      out.files.push_back(std::move(d));
      continue;
    }
    FileText ta = FileText::from_string(ca);
    FileText tb = FileText::from_string(cb);
    if (!in_a) ta = FileText{};
    if (!in_b) tb = FileText{};
    FileDelta d = diff_texts(path, ta, tb, options.context);
    d.is_new = !in_a;
    d.is_deleted = !in_b;
    out.files.push_back(std::move(d));
  }
  return out;
}

}  // namespace susforge::patch
