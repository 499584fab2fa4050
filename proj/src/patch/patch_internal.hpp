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

#include <vector>

#include "susforge/patch.hpp"

namespace susforge::patch {

// Whole-file edit script (every line of both sides, in order).
std::vector<HunkLine> edit_script(const FileText& a, const FileText& b);

// Groups a whole-file script into hunks with `context` lines around changes.
std::vector<Hunk> hunks_from_script(const std::vector<HunkLine>& script, int context);

// Within each run of changed lines, deletions first.
void normalize_hunk_runs(Hunk* h);

}  // namespace susforge::patch
