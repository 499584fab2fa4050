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
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "susforge/external.hpp"
#include "susforge/fs.hpp"
#include "susforge/patch.hpp"

namespace susforge::mask {

// Masked lines per path, in C-1 line numbers.
using LineSet = std::map<std::string, std::set<int>>;

struct MaskedRegion {
  std::string path;
  std::string unit;  // qualified name, empty for blocks and windows
  int start_line = 0;
  int end_line = 0;
};

struct Mask {
  patch::Patch patch;  // deletion-only, against C-1
  double ratio_achieved = 0.0;
  std::string generation_mode = "structural";  // "structural" | "agentic"
  bool syntax_relaxed = false;
  std::vector<MaskedRegion> regions;

  LineSet lines() const;
  std::size_t masked_lines() const { return patch.deleted_lines(); }
  nlohmann::json to_json() const;
};

struct MaskRequest {
  Workspace base;             // C-1
  patch::Patch feature_fix;   // P^F
  double ratio = 2.0;
  patch::TestPathClassifier classifier;
  std::string feedback;       // violations from a rejected attempt
};

// Deletion-only delta per path removing exactly `lines` from the base files.
patch::Patch render_mask(const Workspace& base, const LineSet& lines, int context = 3);

// "rule: location" strings; empty iff the mask deletes only, covers every
// line the fix deletes, and stays off test paths.
std::vector<std::string> validate_mask(const patch::Patch& mask, const Workspace& base,
                                       const patch::Patch& feature_fix, const patch::TestPathClassifier& cls);

// Masked lines over all fix lines (additions plus deletions).
double ratio_of(const patch::Patch& mask, const patch::Patch& feature_fix);

// Smallest enclosing named units (else top-level blocks) of every touched
// line, grown over siblings, blocks, parents and finally whole files until
// the ratio is met. Unparseable files get line windows instead.
Mask structural_mask(const MaskRequest& req);

// Regions, ratio and syntax check for a mask patch from any generator.
Mask describe_mask(const patch::Patch& p, const MaskRequest& req, const std::string& mode);

class MaskGenerator {
 public:
  virtual ~MaskGenerator() = default;
  virtual std::string name() const = 0;
  virtual bool agentic() const = 0;
  virtual patch::Patch generate(const MaskRequest& req) = 0;
};

class StructuralMaskGenerator : public MaskGenerator {
 public:
  std::string name() const override { return "structural"; }
  bool agentic() const override { return false; }
  patch::Patch generate(const MaskRequest& req) override { return structural_mask(req).patch; }
};

// Runs a command given the masking prompt in a copy of C-1; the command
// writes a unified diff to {output_file}.
class ExternalMaskGenerator : public MaskGenerator {
 public:
  explicit ExternalMaskGenerator(ExternalCommand cmd, std::string prompt_template = {});
  std::string name() const override { return "external"; }
  bool agentic() const override { return true; }
  patch::Patch generate(const MaskRequest& req) override;

  static const std::string& default_prompt();

 private:
  ExternalCommand cmd_;
  std::string template_;
};

// Validated mask; generator output failing validation gets one repair round
// with the violations as feedback, then Rejection("mask-invalid"). Fixes
// adding only new files give Rejection("mask-empty").
Mask propose_mask(const MaskRequest& req, MaskGenerator& gen);

struct FlaggedRegion {
  std::string path;
  std::string unit;  // qualified name in the fixed code, may be empty
  int line = 0;      // line in the masked file, 0 if unknown
  std::string reason;
};

struct MaskFeedback {
  std::vector<FlaggedRegion> excessive;
  bool empty() const { return excessive.empty(); }
};

// Masks the enclosing unit of every flagged region in addition to `m`.
// Rejection("mask-saturated") when nothing new would be masked.
Mask grow_mask(const Mask& m, const MaskFeedback& fb, const MaskRequest& req);

}  // namespace susforge::mask
