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

#include <optional>
#include <string>
#include <vector>

namespace susforge::syntax {

enum class UnitKind { kFunction, kClass, kBlock };

// A syntactic unit of a Python source file. Line numbers are 1-based and
// inclusive.
struct Unit {
  UnitKind kind = UnitKind::kBlock;
  std::string name;            // empty for blocks
  std::string qualified_name;  // "Outer.inner" for nested units
  int start_line = 0;          // first decorator line, or the header
  int header_line = 0;
  int end_line = 0;            // last non-blank line of the body
  int indent = 0;
  int parent = -1;             // index into Module::units
  std::vector<int> children;
  std::string signature;       // header text without the trailing ':'
  std::string doc_summary;     // first line of the docstring, if any

  int line_count() const { return end_line - start_line + 1; }
  bool contains(int line) const { return line >= start_line && line <= end_line; }
};

struct Module {
  bool ok = false;
  std::string error;
  int error_line = 0;
  int line_count = 0;
  std::vector<Unit> units;
  // Per physical line: indent of the logical line it belongs to, or -1 for
  // blank and comment-only lines.
  std::vector<int> line_indent;
  // Per physical line: true if a logical line starts here.
  std::vector<bool> logical_start;

  // Innermost function or class containing the line, or -1.
  int innermost_named(int line) const;
  // Innermost unit of any kind containing the line, or -1.
  int innermost(int line) const;
  std::optional<int> find_qualified(const std::string& qualified_name) const;
  // Indices of units that share the parent of `index`, in source order.
  std::vector<int> siblings(int index) const;
};

// Indentation-based structural scan: tracks strings, brackets and line
// continuations, but does not build an AST.
Module parse_python(const std::vector<std::string>& lines);
Module parse_python_text(const std::string& text);

bool is_identifier(const std::string& s);

}  // namespace susforge::syntax
