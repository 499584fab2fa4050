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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "susforge/fs.hpp"
#include "susforge/patch.hpp"

namespace susforge::corpus {

struct VulnRecord {
  std::string record_id;
  std::string repo_url;
  std::string fix_commit;
  std::optional<std::string> cve_id;
  std::vector<std::string> cwe_ids;
  std::optional<int> relevance_score;
  std::string language_tag;
  nlohmann::json extras = nlohmann::json::object();  // unknown input fields

  nlohmann::json to_json() const;
  static VulnRecord from_json(const nlohmann::json& j);
};

enum class RecordFormat { kReposVul, kMoreFixes, kNative };
RecordFormat parse_record_format(const std::string& name);

struct IngestResult {
  std::vector<VulnRecord> records;
  int skipped_missing_commit = 0;
  int skipped_malformed = 0;
  std::vector<std::string> warnings;
};

// JSON lines. An unreadable file throws; bad rows are counted and skipped.
IngestResult ingest_records(const std::filesystem::path& source, RecordFormat format);
IngestResult ingest_text(const std::string& text, RecordFormat format);

// "https://github.com/Owner/Repo.git" -> "owner__repo"; local paths use the
// last component. Always a valid container-image repository name.
std::string repo_id_for(const std::string& repo_url);

// Bare clones and pristine checkouts keyed by (repo, commit). Writes to one
// key are serialized with a file lock, so several processes may share it.
class RepoCache {
 public:
  explicit RepoCache(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Full hash of `commit`, fetching once more if the clone lacks it. Throws
  // VcsError("commit not found: ...").
  std::string resolve(const std::string& repo_url, const std::string& commit);
  // First parent; Rejection("root-commit") when there is none.
  std::string first_parent(const std::string& repo_url, const std::string& commit);
  // Paths changed between the first parent and the commit.
  std::vector<std::string> changed_files(const std::string& repo_url, const std::string& commit);
  // Read-only pristine tree of the commit inside the cache.
  Workspace pristine(const std::string& repo_url, const std::string& commit);

 private:
  std::filesystem::path clone(const std::string& repo_url);
  std::filesystem::path root_;
};

struct FilterPolicy {
  std::optional<int> min_relevance = 65;
  // Case-insensitive language tag; empty disables the predicate.
  std::string language = "python";
  bool require_test_modification = true;
  // Drop records carrying more CWE ids than this (unset: no limit).
  std::optional<int> max_cwes;
  patch::TestPathClassifier classifier;
};

struct FilterReport {
  std::vector<VulnRecord> kept;
  // Drop counts in predicate order.
  std::vector<std::pair<std::string, int>> dropped;
  std::vector<std::string> undetermined;  // record ids whose repo was unreachable

  nlohmann::json to_json() const;
};

// Predicates run in declaration order: relevance, cwe count, language, test
// modification (the only one that touches the repository).
FilterReport filter_records(const std::vector<VulnRecord>& records, const FilterPolicy& policy,
                            RepoCache* cache);

struct CommitTriple {
  std::string repo_id;
  std::string repo_url;
  std::string c0_commit;
  std::string c_minus1_commit;
  Workspace c0;
  Workspace c_minus1;
  std::optional<Workspace> c_masked;

  nlohmann::json metadata(const VulnRecord& r) const;
};

// Copies both pristine trees into `dest` ("c0/", "c_minus1/"), owned by the
// caller.
CommitTriple snapshot_repo(const VulnRecord& record, RepoCache& cache,
                           const std::filesystem::path& dest);

}  // namespace susforge::corpus
