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

#include "susforge/syntax.hpp"

#include <cctype>

#include "susforge/fs.hpp"

namespace susforge::syntax {
namespace {

struct LogicalLine {
  int first = 0;  // 1-based physical lines
  int last = 0;
  int indent = 0;
  std::string text;  // physical lines joined, comments removed
  char last_significant = 0;
};

int measure_indent(const std::string& line) {
  int col = 0;
  for (char c : line) {
    if (c == ' ') {
      ++col;
    } else if (c == '\t') {
      col = (col / 8 + 1) * 8;
    } else if (c == '\f') {
      col = 0;
    } else {
      break;
    }
  }
  return col;
}

bool is_string_prefix(const std::string& s) {
  if (s.size() > 2) return false;
  for (char c : s) {
    char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
  }
  return true;
}

std::string collapse_space(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty() && out.back() != '(' && c != ')') out += ' ';
    space = false;
    out += c;
  }
  return out;
}

// Splits physical lines into logical lines. Returns false on unterminated
// strings or brackets.
bool scan_logical(const std::vector<std::string>& lines, std::vector<LogicalLine>* out,
                  std::string* error, int* error_line) {
  char quote = 0;
  bool triple = false;
  int depth = 0;
  bool continuing = false;
  LogicalLine cur;
  int string_start = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const int lineno = static_cast<int>(i) + 1;
    if (!continuing) {
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      cur = LogicalLine{};
      cur.first = lineno;
      cur.indent = measure_indent(line);
    } else {
      cur.text += ' ';
    }
    bool backslash = false;
    for (std::size_t j = 0; j < line.size(); ++j) {
      char c = line[j];
      if (quote != 0) {
        cur.text += c;
        if (c == '\\') {
          if (j + 1 < line.size()) cur.text += line[++j];
          continue;
        }
        if (c == quote) {
          if (!triple) {
            quote = 0;
          } else if (j + 2 < line.size() && line[j + 1] == quote && line[j + 2] == quote) {
            cur.text += line.substr(j + 1, 2);
            j += 2;
            quote = 0;
          }
        }
        continue;
      }
      if (c == '#') break;
      if (c == '\\' && j + 1 == line.size()) {
        backslash = true;
        break;
      }
      cur.text += c;
      if (c == '"' || c == '\'') {
        quote = c;
        triple = j + 2 < line.size() && line[j + 1] == c && line[j + 2] == c;
        if (triple) {
          cur.text += line.substr(j + 1, 2);
          j += 2;
        }
        string_start = lineno;
        cur.last_significant = c;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') {
        if (--depth < 0) {
          *error = "unbalanced closing bracket";
          *error_line = lineno;
          return false;
        }
      }
      if (!std::isspace(static_cast<unsigned char>(c))) cur.last_significant = c;
    }
    if (quote != 0 && !triple) {
      *error = "unterminated string literal";
      *error_line = lineno;
      return false;
    }
    continuing = (quote != 0) || depth > 0 || backslash;
    if (!continuing) {
      cur.last = lineno;
      out->push_back(cur);
    }
  }
  if (continuing) {
    *error = quote != 0 ? "unterminated triple-quoted string" : "unclosed bracket";
    *error_line = quote != 0 ? string_start : cur.first;
    return false;
  }
  return true;
}

struct Header {
  UnitKind kind;
  std::string name;
};

std::optional<Header> parse_header(const std::string& text) {
  std::string t = trim(text);
  UnitKind kind;
  std::size_t pos;
  if (starts_with(t, "class") && t.size() > 5 && std::isspace(static_cast<unsigned char>(t[5]))) {
    kind = UnitKind::kClass;
    pos = 5;
  } else if (starts_with(t, "def") && t.size() > 3 &&
             std::isspace(static_cast<unsigned char>(t[3]))) {
    kind = UnitKind::kFunction;
    pos = 3;
  } else if (starts_with(t, "async") && t.size() > 5 &&
             std::isspace(static_cast<unsigned char>(t[5]))) {
    std::string rest = trim(t.substr(5));
    if (!starts_with(rest, "def") || rest.size() < 4 ||
        !std::isspace(static_cast<unsigned char>(rest[3]))) {
      return std::nullopt;
    }
    t = rest;
    kind = UnitKind::kFunction;
    pos = 3;
  } else {
    return std::nullopt;
  }
  while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
  std::size_t end = pos;
  while (end < t.size() && (std::isalnum(static_cast<unsigned char>(t[end])) || t[end] == '_')) {
    ++end;
  }
  std::string name = t.substr(pos, end - pos);
  if (!is_identifier(name)) return std::nullopt;
  return Header{kind, name};
}

// Returns the first line of a docstring if the logical line is a bare
// string literal.
std::optional<std::string> docstring_summary(const std::string& text) {
  std::string t = trim(text);
  std::size_t q = 0;
  while (q < t.size() && std::isalpha(static_cast<unsigned char>(t[q]))) ++q;
  if (q >= t.size() || !is_string_prefix(t.substr(0, q))) return std::nullopt;
  char c = t[q];
  if (c != '"' && c != '\'') return std::nullopt;
  std::size_t open = q + 1;
  if (t.compare(q, 3, std::string(3, c)) == 0) open = q + 3;
  std::string body = t.substr(open);
  std::size_t close = body.find(c);
  if (close != std::string::npos) body = body.substr(0, close);
  for (const std::string& line : split_lines(body)) {
    std::string first = trim(line);
    if (!first.empty()) return first;
  }
  return std::string();
}

}  // namespace

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

int Module::innermost_named(int line) const {
  int best = -1;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Unit& u = units[i];
    if (u.kind == UnitKind::kBlock || !u.contains(line)) continue;
    if (best < 0 || u.start_line >= units[best].start_line) best = static_cast<int>(i);
  }
  return best;
}

int Module::innermost(int line) const {
  int best = -1;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Unit& u = units[i];
    if (!u.contains(line)) continue;
    if (best < 0 || u.start_line >= units[best].start_line) best = static_cast<int>(i);
  }
  return best;
}

std::optional<int> Module::find_qualified(const std::string& qualified_name) const {
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].kind != UnitKind::kBlock && units[i].qualified_name == qualified_name) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

std::vector<int> Module::siblings(int index) const {
  std::vector<int> out;
  const int parent = units.at(index).parent;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (static_cast<int>(i) != index && units[i].parent == parent) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

Module parse_python(const std::vector<std::string>& lines) {
  Module m;
  m.line_count = static_cast<int>(lines.size());
  m.line_indent.assign(lines.size() + 1, -1);
  m.logical_start.assign(lines.size() + 1, false);

  std::vector<LogicalLine> logical;
  if (!scan_logical(lines, &logical, &m.error, &m.error_line)) return m;

  std::vector<int> indent_levels{0};
  std::vector<int> open;  // unit indices whose body may continue
  int pending_decorator = 0;
  int pending_decorator_indent = -1;
  int current_block = -1;
  int prev_last = 0;
  bool expect_body = false;
  int expect_body_indent = 0;
  int awaiting_doc = -1;

  for (const LogicalLine& ll : logical) {
    for (int l = ll.first; l <= ll.last; ++l) m.line_indent[l] = ll.indent;
    m.logical_start[ll.first] = true;

    if (expect_body && ll.indent <= expect_body_indent) {
      m.error = "expected an indented block";
      m.error_line = ll.first;
      return m;
    }
    if (ll.indent > indent_levels.back()) {
      if (!expect_body) {
        m.error = "unexpected indent";
        m.error_line = ll.first;
        return m;
      }
      indent_levels.push_back(ll.indent);
    } else {
      while (ll.indent < indent_levels.back()) indent_levels.pop_back();
      if (ll.indent != indent_levels.back()) {
        m.error = "unindent does not match any outer indentation level";
        m.error_line = ll.first;
        return m;
      }
    }
    expect_body = ll.last_significant == ':';
    expect_body_indent = ll.indent;

    while (!open.empty() && ll.indent <= m.units[open.back()].indent) open.pop_back();

    if (awaiting_doc >= 0) {
      Unit& u = m.units[awaiting_doc];
      if (ll.indent > u.indent) {
        std::vector<std::string> raw(lines.begin() + ll.first - 1, lines.begin() + ll.last);
        if (auto doc = docstring_summary(join_lines(raw))) u.doc_summary = *doc;
      }
      awaiting_doc = -1;
    }
    for (int idx : open) m.units[idx].end_line = ll.last;

    std::string head = trim(ll.text);
    if (!head.empty() && head[0] == '@') {
      if (pending_decorator_indent != ll.indent) {
        pending_decorator = ll.first;
        pending_decorator_indent = ll.indent;
      }
      prev_last = ll.last;
      continue;
    }

    if (auto header = parse_header(head)) {
      Unit u;
      u.kind = header->kind;
      u.name = header->name;
      u.header_line = ll.first;
      u.start_line = pending_decorator_indent == ll.indent ? pending_decorator : ll.first;
      u.end_line = ll.last;
      u.indent = ll.indent;
      u.parent = open.empty() ? -1 : open.back();
      u.qualified_name = u.parent >= 0 ? m.units[u.parent].qualified_name + "." + u.name : u.name;
      std::string sig = collapse_space(head);
      // One-line bodies ("def f(): pass") keep only the header part.
      if (!expect_body) {
        std::size_t depth = 0, cut = std::string::npos;
        char q = 0;
        for (std::size_t k = 0; k < sig.size(); ++k) {
          char c = sig[k];
          if (q) {
            if (c == q) q = 0;
            continue;
          }
          if (c == '"' || c == '\'') q = c;
          if (c == '(' || c == '[' || c == '{') ++depth;
          if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
          if (c == ':' && depth == 0) {
            cut = k;
            break;
          }
        }
        if (cut != std::string::npos) sig = sig.substr(0, cut + 1);
      }
      if (!sig.empty() && sig.back() == ':') sig.pop_back();
      u.signature = trim(sig);
      const int idx = static_cast<int>(m.units.size());
      if (u.parent >= 0) m.units[u.parent].children.push_back(idx);
      m.units.push_back(u);
      if (expect_body) {
        open.push_back(idx);
        awaiting_doc = idx;
      }
      current_block = -1;
    } else if (open.empty()) {
      const bool contiguous = current_block >= 0 &&
                              (ll.indent > 0 || prev_last + 1 == ll.first ||
                               pending_decorator_indent == 0);
      if (contiguous) {
        m.units[current_block].end_line = ll.last;
      } else if (ll.indent == 0) {
        Unit b;
        b.kind = UnitKind::kBlock;
        b.start_line = pending_decorator_indent == 0 ? pending_decorator : ll.first;
        b.header_line = ll.first;
        b.end_line = ll.last;
        current_block = static_cast<int>(m.units.size());
        m.units.push_back(b);
      }
    }
    pending_decorator_indent = -1;
    prev_last = ll.last;
  }
  if (expect_body) {
    m.error = "expected an indented block";
    m.error_line = m.line_count;
    return m;
  }
  m.ok = true;
  return m;
}

Module parse_python_text(const std::string& text) { return parse_python(split_lines(text)); }

}  // namespace susforge::syntax
