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

#include "susforge/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <sstream>

#include "susforge/error.hpp"
#include "susforge/metrics.hpp"
#include "susforge/process.hpp"

namespace susforge::corpus {

using nlohmann::json;

namespace {

std::optional<std::string> str_field(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = j.find(k);
    if (it == j.end() || it->is_null()) continue;
    if (it->is_string() && !it->get<std::string>().empty()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
  }
  return std::nullopt;
}

std::vector<std::string> cwe_field(const json& j, std::initializer_list<const char*> keys) {
  std::vector<std::string> out;
  auto add = [&](const std::string& raw) {
    // "CWE-79, CWE-89" style strings occur in some feeds.
    std::stringstream ss(raw);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (auto id = metrics::normalize_cwe(part)) {
        if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
      }
    }
  };
  for (const char* k : keys) {
    auto it = j.find(k);
    if (it == j.end() || it->is_null()) continue;
    if (it->is_string()) add(it->get<std::string>());
    if (it->is_number_integer()) add(std::to_string(it->get<long long>()));
    if (it->is_array()) {
      for (const auto& e : *it) {
        if (e.is_string()) add(e.get<std::string>());
        if (e.is_number_integer()) add(std::to_string(e.get<long long>()));
      }
    }
    if (!out.empty()) break;
  }
  return out;
}

std::optional<int> int_field(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = j.find(k);
    if (it == j.end() || it->is_null()) continue;
    if (it->is_number()) return static_cast<int>(it->get<double>());
    if (it->is_string()) {
      try {
        return static_cast<int>(std::stod(it->get<std::string>()));
      } catch (const std::exception&) {
        throw Error(std::string("field '") + k + "' is not a number");
      }
    }
    throw Error(std::string("field '") + k + "' is not a number");
  }
  return std::nullopt;
}

bool plausible_commit(const std::string& c) {
  if (c.empty() || c.size() > 64) return false;
  return std::all_of(c.begin(), c.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)); });
}

// Splits ".../owner/repo/commit/<hash>" into (repo url, hash).
std::optional<std::pair<std::string, std::string>> split_commit_url(const std::string& url) {
  auto pos = url.find("/commit/");
  if (pos == std::string::npos) return std::nullopt;
  std::string hash = url.substr(pos + 8);
  auto cut = hash.find_first_of("/?#");
  if (cut != std::string::npos) hash = hash.substr(0, cut);
  return std::make_pair(url.substr(0, pos), hash);
}

json extras_of(const json& row, std::initializer_list<const char*> known) {
  json extras = json::object();
  for (const auto& [k, v] : row.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* n) { return k == n; }) == known.end()) {
      extras[k] = v;
    }
  }
  return extras;
}

std::string default_record_id(const VulnRecord& r) {
  return repo_id_for(r.repo_url) + "-" + r.fix_commit.substr(0, 12);
}

// nullopt: the row has no fix commit.
std::optional<VulnRecord> adapt(const json& row, RecordFormat format) {
  if (!row.is_object()) throw Error("row is not a JSON object");
  VulnRecord r;
  switch (format) {
    case RecordFormat::kNative: {
      r.repo_url = str_field(row, {"repo_url"}).value_or("");
      r.fix_commit = str_field(row, {"fix_commit"}).value_or("");
      r.record_id = str_field(row, {"record_id"}).value_or("");
      r.cve_id = str_field(row, {"cve_id"});
      r.cwe_ids = cwe_field(row, {"cwe_ids"});
      r.relevance_score = int_field(row, {"relevance_score"});
      r.language_tag = str_field(row, {"language_tag", "language"}).value_or("");
      r.extras = extras_of(row, {"repo_url", "fix_commit", "record_id", "cve_id", "cwe_ids",
                                 "relevance_score", "language_tag", "language"});
      break;
    }
    case RecordFormat::kReposVul: {
      auto url = str_field(row, {"url", "commit_url", "html_url"});
      auto split = url ? split_commit_url(*url) : std::nullopt;
      r.repo_url = str_field(row, {"repo_url", "project_url"}).value_or(split ? split->first : "");
      r.fix_commit = str_field(row, {"commit_id", "commit_hash", "hash"}).value_or(split ? split->second : "");
      r.record_id = str_field(row, {"index", "id"}).value_or("");
      r.cve_id = str_field(row, {"cve_id", "cve"});
      r.cwe_ids = cwe_field(row, {"cwe_id", "cwe_ids", "cwe"});
      r.relevance_score = int_field(row, {"relevance_score"});
      r.language_tag = str_field(row, {"language", "programming_language"}).value_or("");
      r.extras = extras_of(row, {"url", "commit_url", "html_url", "repo_url", "project_url", "commit_id",
                                 "commit_hash", "hash", "index", "id", "cve_id", "cve", "cwe_id", "cwe_ids",
                                 "cwe", "relevance_score", "language", "programming_language"});
      break;
    }
    case RecordFormat::kMoreFixes: {
      r.repo_url = str_field(row, {"repo_url"}).value_or("");
      r.fix_commit = str_field(row, {"hash", "commit_hash", "fix_commit"}).value_or("");
      r.record_id = str_field(row, {"fixes_id", "record_id", "id"}).value_or("");
      r.cve_id = str_field(row, {"cve_id"});
      r.cwe_ids = cwe_field(row, {"cwe_ids", "cwe_id", "cwe"});
      r.relevance_score = int_field(row, {"score", "relevance_score"});
      r.language_tag = str_field(row, {"repo_language", "language"}).value_or("");
      r.extras = extras_of(row, {"repo_url", "hash", "commit_hash", "fix_commit", "fixes_id", "record_id",
                                 "id", "cve_id", "cwe_ids", "cwe_id", "cwe", "score", "relevance_score",
                                 "repo_language", "language"});
      break;
    }
  }
  if (r.fix_commit.empty()) return std::nullopt;
  if (!plausible_commit(r.fix_commit)) throw Error("fix commit is not a commit id: " + r.fix_commit);
  if (r.repo_url.empty()) throw Error("row has no repository url");
  if (r.relevance_score && (*r.relevance_score < 0 || *r.relevance_score > 100)) {
    throw Error("relevance score out of range");
  }
  if (r.record_id.empty()) r.record_id = default_record_id(r);
  return r;
}

std::string git_error(const ProcessResult& r) {
  std::string out = trim(r.output);
  if (out.size() > 400) out = out.substr(0, 400) + "...";
  return out;
}

ProcessResult git(const std::vector<std::string>& args, const std::filesystem::path& git_dir,
                  const std::map<std::string, std::string>& env = {}) {
  std::vector<std::string> argv = {"git"};
  if (!git_dir.empty()) argv.push_back("--git-dir=" + git_dir.string());
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions opt;
  opt.env = env;
  opt.env["GIT_TERMINAL_PROMPT"] = "0";
  opt.env["LC_ALL"] = "C";
  opt.timeout = std::chrono::minutes(20);
  return run_process(argv, opt);
}

}  // namespace

json VulnRecord::to_json() const {
  json j;
  j["record_id"] = record_id;
  j["repo_url"] = repo_url;
  j["fix_commit"] = fix_commit;
  j["cve_id"] = cve_id ? json(*cve_id) : json(nullptr);
  j["cwe_ids"] = cwe_ids;
  j["relevance_score"] = relevance_score ? json(*relevance_score) : json(nullptr);
  j["language_tag"] = language_tag;
  if (!extras.empty()) j["extras"] = extras;
  return j;
}

VulnRecord VulnRecord::from_json(const json& j) {
  auto r = adapt(j, RecordFormat::kNative);
  if (!r) throw Error("record has no fix commit");
  if (auto it = j.find("extras"); it != j.end() && it->is_object()) r->extras = *it;
  return *r;
}

RecordFormat parse_record_format(const std::string& name) {
  std::string n = to_lower(name);
  if (n == "reposvul") return RecordFormat::kReposVul;
  if (n == "morefixes") return RecordFormat::kMoreFixes;
  if (n == "native") return RecordFormat::kNative;
  throw ConfigError("unknown record format '" + name + "' (reposvul, morefixes, native)");
}

IngestResult ingest_text(const std::string& text, RecordFormat format) {
  IngestResult res;
  std::size_t line_no = 0;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    try {
      auto r = adapt(json::parse(t), format);
      if (!r) {
        ++res.skipped_missing_commit;
        continue;
      }
      res.records.push_back(std::move(*r));
    } catch (const std::exception& e) {
      ++res.skipped_malformed;
      res.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
      spdlog::warn("records line {}: {}", line_no, e.what());
    }
  }
  return res;
}

IngestResult ingest_records(const std::filesystem::path& source, RecordFormat format) {
  if (!std::filesystem::is_regular_file(source)) throw Error("cannot read record file " + source.string());
  return ingest_text(read_file(source), format);
}

std::string repo_id_for(const std::string& repo_url) {
  std::string u = repo_url;
  while (!u.empty() && (u.back() == '/')) u.pop_back();
  if (ends_with(u, ".git")) u.resize(u.size() - 4);
  std::vector<std::string> parts;
  std::stringstream ss(u);
  std::string p;
  while (std::getline(ss, p, '/')) {
    if (!p.empty()) parts.push_back(p);
  }
  std::string id;
  bool hosted = u.find("://") != std::string::npos && !starts_with(u, "file://") && parts.size() >= 3;
  if (hosted) {
    id = parts[parts.size() - 2] + "__" + parts.back();
  } else if (!parts.empty()) {
    id = parts.back();
  }
  std::string out;
  for (char ch : to_lower(id)) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_' || ch == '-') {
      out += ch;
    } else {
      out += '-';
    }
  }
  while (!out.empty() && !std::isalnum(static_cast<unsigned char>(out.front()))) out.erase(out.begin());
  if (out.empty()) out = "repo-" + sha256_hex(repo_url).substr(0, 12);
  return out;
}

RepoCache::RepoCache(std::filesystem::path root) : root_(std::filesystem::absolute(root)) {
  std::filesystem::create_directories(root_ / "repos");
  std::filesystem::create_directories(root_ / "trees");
  std::filesystem::create_directories(root_ / "locks");
}

std::filesystem::path RepoCache::clone(const std::string& repo_url) {
  const std::string key = sha256_hex(repo_url).substr(0, 24);
  auto dir = root_ / "repos" / (key + ".git");
  FileLock lock(root_ / "locks" / (key + ".lock"));
  if (std::filesystem::exists(dir / "HEAD")) return dir;
  auto tmp = root_ / "repos" / (key + ".tmp");
  std::filesystem::remove_all(tmp);
  auto r = git({"clone", "--bare", "--quiet", repo_url, tmp.string()}, {});
  if (!r.ok()) {
    std::filesystem::remove_all(tmp);
    throw VcsError("clone of " + repo_url + " failed: " + git_error(r));
  }
  std::filesystem::rename(tmp, dir);
  return dir;
}

std::string RepoCache::resolve(const std::string& repo_url, const std::string& commit) {
  auto dir = clone(repo_url);
  auto lookup = [&]() -> std::optional<std::string> {
    auto r = git({"rev-parse", "--verify", "--quiet", commit + "^{commit}"}, dir);
    if (!r.ok()) return std::nullopt;
    return trim(r.output);
  };
  if (auto h = lookup()) return *h;
  {
    // One deepening attempt: the clone may predate the commit.
    FileLock lock(root_ / "locks" / (sha256_hex(repo_url).substr(0, 24) + ".lock"));
    git({"fetch", "--quiet", "origin", "+refs/heads/*:refs/heads/*", "+refs/tags/*:refs/tags/*"}, dir);
    git({"fetch", "--quiet", "origin", commit}, dir);
  }
  if (auto h = lookup()) return *h;
  throw VcsError("commit not found: " + commit + " in " + repo_url);
}

std::string RepoCache::first_parent(const std::string& repo_url, const std::string& commit) {
  auto full = resolve(repo_url, commit);
  auto dir = clone(repo_url);
  auto r = git({"rev-list", "--parents", "-n", "1", full}, dir);
  if (!r.ok()) throw VcsError("cannot list parents of " + full + ": " + git_error(r));
  std::stringstream ss(trim(r.output));
  std::vector<std::string> hashes;
  std::string h;
  while (ss >> h) hashes.push_back(h);
  if (hashes.size() < 2) throw Rejection("root-commit", full + " has no parent");
  return hashes[1];
}

std::vector<std::string> RepoCache::changed_files(const std::string& repo_url, const std::string& commit) {
  auto full = resolve(repo_url, commit);
  auto parent = first_parent(repo_url, full);
  auto r = git({"diff", "--name-only", "--no-renames", parent, full}, clone(repo_url));
  if (!r.ok()) throw VcsError("cannot diff " + full + ": " + git_error(r));
  std::vector<std::string> out;
  for (const auto& line : split_lines(r.output)) {
    if (!trim(line).empty()) out.push_back(trim(line));
  }
  return out;
}

Workspace RepoCache::pristine(const std::string& repo_url, const std::string& commit) {
  auto full = resolve(repo_url, commit);
  auto dir = clone(repo_url);
  const std::string repo_key = sha256_hex(repo_url).substr(0, 24);
  auto tree = root_ / "trees" / repo_key / full;
  FileLock lock(root_ / "locks" / (repo_key + "-" + full.substr(0, 16) + ".lock"));
  if (std::filesystem::exists(tree / ".susforge-complete")) return Workspace{tree};
  auto tmp = root_ / "trees" / repo_key / (full + ".tmp");
  std::filesystem::remove_all(tmp);
  std::filesystem::create_directories(tmp);
  auto index = tmp.string() + ".index";
  std::map<std::string, std::string> env = {{"GIT_INDEX_FILE", index}};
  auto r = git({"--work-tree=" + tmp.string(), "read-tree", full}, dir, env);
  if (r.ok()) r = git({"--work-tree=" + tmp.string(), "checkout-index", "-a", "-f"}, dir, env);
  std::filesystem::remove(index);
  if (!r.ok()) {
    std::filesystem::remove_all(tmp);
    throw VcsError("checkout of " + full + " failed: " + git_error(r));
  }
  write_file(tmp / ".susforge-complete", full + "\n");
  std::filesystem::remove_all(tree);
  std::filesystem::rename(tmp, tree);
  return Workspace{tree};
}

json FilterReport::to_json() const {
  json j;
  j["kept"] = kept.size();
  j["dropped"] = json::object();
  for (const auto& [name, n] : dropped) j["dropped"][name] = n;
  j["undetermined"] = undetermined;
  return j;
}

FilterReport filter_records(const std::vector<VulnRecord>& records, const FilterPolicy& policy,
                            RepoCache* cache) {
  FilterReport rep;
  std::vector<VulnRecord> cur = records;
  auto stage = [&](const std::string& name, bool enabled, const std::function<bool(const VulnRecord&)>& keep) {
    if (!enabled) return;
    std::vector<VulnRecord> next;
    int dropped = 0;
    for (auto& r : cur) {
      if (keep(r)) {
        next.push_back(std::move(r));
      } else {
        ++dropped;
      }
    }
    cur = std::move(next);
    rep.dropped.emplace_back(name, dropped);
  };

  stage("relevance", policy.min_relevance.has_value(), [&](const VulnRecord& r) {
    // Feeds without a score (curated upstream) are not judged by it.
    return !r.relevance_score || *r.relevance_score >= *policy.min_relevance;
  });
  stage("cwe_count", policy.max_cwes.has_value(), [&](const VulnRecord& r) {
    return static_cast<int>(r.cwe_ids.size()) <= *policy.max_cwes;
  });
  const std::string lang = to_lower(policy.language);
  stage("language", !lang.empty(), [&](const VulnRecord& r) {
    if (!r.language_tag.empty()) return to_lower(r.language_tag) == lang;
    if (lang != "python" || cache == nullptr) return false;
    try {
      auto files = cache->changed_files(r.repo_url, r.fix_commit);
      return std::any_of(files.begin(), files.end(), [](const std::string& f) { return ends_with(f, ".py"); });
    } catch (const Error&) {
      return false;
    }
  });
  int undetermined = 0;
  stage("test_modification", policy.require_test_modification, [&](const VulnRecord& r) {
    if (cache == nullptr) throw PreconditionError("test-modification filter needs a repository cache");
    try {
      auto files = cache->changed_files(r.repo_url, r.fix_commit);
      return std::any_of(files.begin(), files.end(),
                         [&](const std::string& f) { return policy.classifier.is_test(f); });
    } catch (const Rejection&) {
      return false;
    } catch (const VcsError& e) {
      spdlog::warn("record {} undetermined: {}", r.record_id, e.what());
      rep.undetermined.push_back(r.record_id);
      ++undetermined;
      return false;
    }
  });
  if (policy.require_test_modification) {
    // Unreachable repositories are reported apart from genuine drops.
    rep.dropped.back().second -= undetermined;
    rep.dropped.emplace_back("undetermined", undetermined);
  }
  rep.kept = std::move(cur);
  return rep;
}

json CommitTriple::metadata(const VulnRecord& r) const {
  json j;
  j["record_id"] = r.record_id;
  j["repo_url"] = repo_url;
  j["repo_id"] = repo_id;
  j["c0"] = c0_commit;
  j["c_minus1"] = c_minus1_commit;
  j["cwe_ids"] = r.cwe_ids;
  j["cve_id"] = r.cve_id ? json(*r.cve_id) : json(nullptr);
  return j;
}

CommitTriple snapshot_repo(const VulnRecord& record, RepoCache& cache, const std::filesystem::path& dest) {
  CommitTriple t;
  t.repo_url = record.repo_url;
  t.repo_id = repo_id_for(record.repo_url);
  t.c0_commit = cache.resolve(record.repo_url, record.fix_commit);
  t.c_minus1_commit = cache.first_parent(record.repo_url, t.c0_commit);
  auto p0 = cache.pristine(record.repo_url, t.c0_commit);
  auto p1 = cache.pristine(record.repo_url, t.c_minus1_commit);
  t.c0 = Workspace{dest / "c0"};
  t.c_minus1 = Workspace{dest / "c_minus1"};
  copy_tree(p0.root, t.c0.root);
  copy_tree(p1.root, t.c_minus1.root);
  std::filesystem::remove(t.c0.root / ".susforge-complete");
  std::filesystem::remove(t.c_minus1.root / ".susforge-complete");
  return t;
}

}  // namespace susforge::corpus
