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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "susforge/external.hpp"
#include "susforge/fs.hpp"
#include "susforge/mask.hpp"
#include "susforge/patch.hpp"

namespace susforge::synth {

struct TaskDescription {
  std::string markdown;
  std::vector<std::string> required_interfaces;
  std::string generation_mode;  // "template" | "agentic"
};

// What a description generator may look at: the masked repository, the
// pre-fix repository it came from, and the mask. Never the fixed code.
struct DescriptionContext {
  std::string repo_id;
  Workspace c_masked;
  Workspace c_minus1;
  mask::Mask mask;
  patch::TestPathClassifier classifier;
  int attempt = 0;  // > 0 after a scan failure
};

class DescriptionGenerator {
 public:
  virtual ~DescriptionGenerator() = default;
  virtual std::string name() const = 0;
  virtual TaskDescription generate(const DescriptionContext& ctx) = 0;
};

// One "## `unit` in `file`" section per masked unit: signature, docstring
// summary, referencing files, observed and expected behaviour. Retries omit
// signatures and docstrings.
class TemplateDescriptionGenerator : public DescriptionGenerator {
 public:
  std::string name() const override { return "template"; }
  TaskDescription generate(const DescriptionContext& ctx) override;
};

class ExternalDescriptionGenerator : public DescriptionGenerator {
 public:
  explicit ExternalDescriptionGenerator(ExternalCommand cmd) : cmd_(std::move(cmd)) {}
  std::string name() const override { return "external"; }
  TaskDescription generate(const DescriptionContext& ctx) override;
  static const std::string& prompt();

 private:
  ExternalCommand cmd_;
};

struct ScanPolicy {
  std::vector<std::string> deny_terms = default_deny_terms();
  std::size_t leak_min = 40;

  static std::vector<std::string> default_deny_terms();
};

// "leak: ..." and "framing: ..." findings. Deny terms are matched as words
// outside code spans; leaks are shared substrings with the fix's added lines.
std::vector<std::string> scan_description(const std::string& markdown, const patch::Patch& feature_fix,
                                          const ScanPolicy& policy);

// Scan failures get `retries` regenerations, then Rejection("description-scan").
TaskDescription generate_description(DescriptionContext ctx, DescriptionGenerator& gen,
                                     const patch::Patch& feature_fix, const ScanPolicy& policy, int retries = 1);

inline const char* kUnjustified = "UNJUSTIFIED";

struct HunkMapping {
  std::string hunk_id;      // "path#k", k from 1
  std::string requirement;  // section header text or UNJUSTIFIED
  std::string path;
  std::string unit;         // qualified name in the fixed code, may be empty
  int masked_line = 0;      // first line of the hunk in the masked file
};

struct VerificationReport {
  bool excessive = false;
  std::vector<HunkMapping> mappings;
  std::string explanation;

  nlohmann::json to_json() const;
  mask::MaskFeedback feedback() const;
};

// Section headers ("## ...") of a description, in order.
std::vector<std::string> requirement_ids(const std::string& markdown);
// Hunk ids of a target patch, in order.
std::vector<std::string> hunk_ids(const patch::Patch& target);

class CoverageVerifier {
 public:
  virtual ~CoverageVerifier() = default;
  virtual std::string name() const = 0;
  virtual VerificationReport verify(const TaskDescription& desc, const patch::Patch& target, const Workspace& c0,
                                    const Workspace& c_masked) = 0;
};

// A hunk is justified by a section naming its enclosing unit (or an
// ancestor); code in units new to the fixed version is justified when a
// justified unit uses it; module-level code when a section names the file.
class RuleCoverageVerifier : public CoverageVerifier {
 public:
  std::string name() const override { return "rule"; }
  VerificationReport verify(const TaskDescription& desc, const patch::Patch& target, const Workspace& c0,
                            const Workspace& c_masked) override;
};

class ExternalCoverageVerifier : public CoverageVerifier {
 public:
  explicit ExternalCoverageVerifier(ExternalCommand cmd) : cmd_(std::move(cmd)) {}
  std::string name() const override { return "external"; }
  VerificationReport verify(const TaskDescription& desc, const patch::Patch& target, const Workspace& c0,
                            const Workspace& c_masked) override;
  static const std::string& prompt();

 private:
  ExternalCommand cmd_;
};

// Every hunk mapped exactly once and excessive consistent with the mapping;
// one retry on verifier failure, then Rejection("unverifiable").
VerificationReport verify_coverage(const TaskDescription& desc, const patch::Patch& target, CoverageVerifier& ver,
                                   const Workspace& c0, const Workspace& c_masked);

struct SynthConfig {
  double ratio = 2.0;
  int max_iters = 3;
  int description_retries = 1;
  ScanPolicy scan;
  patch::TestPathClassifier classifier;
};

struct Generators {
  mask::MaskGenerator& mask;
  DescriptionGenerator& description;
  CoverageVerifier& verifier;
};

enum class CandidateStatus { kDraft, kVerified, kValidated, kRejected };
std::string status_name(CandidateStatus s);

struct TaskCandidate {
  CandidateStatus status = CandidateStatus::kDraft;
  std::string reason;
  std::string detail;
  int iterations = 0;
  mask::Mask mask;
  TaskDescription description;
  patch::TargetPatch target;
  VerificationReport verification;
  fs::path masked_root;  // C-1 with the mask applied

  // Forward-only moves; anything may become rejected.
  void advance(CandidateStatus next, const std::string& why = {});
};

// Mask, describe, compose the target and verify; grow the mask while the
// verifier finds unjustified hunks, up to max_iters rounds.
TaskCandidate synthesize_task(const Workspace& c0, const Workspace& c_minus1, const patch::SplitPatch& split,
                              const std::string& repo_id, const SynthConfig& config, Generators gens,
                              const fs::path& work_dir);

}  // namespace susforge::synth
