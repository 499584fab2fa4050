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


#include "susforge/forge.hpp"

#include <gtest/gtest.h>

#include "fixture.hpp"
#include "susforge/corpus.hpp"
#include "susforge/synth.hpp"

namespace susforge::forge {
namespace {

using testing::forged;

const ForgeOutcome* find_task(const std::string& repo_id) {
  for (const auto& t : forged().manifest.tasks) {
    if (t.repo_id == repo_id) return &t;
  }
  return nullptr;
}

TEST(ForgedTasks, ThreeFixtureRepositoriesYieldValidTasks) {
  auto& f = forged();
  ASSERT_EQ(f.exit_code, 0) << f.output;
  ASSERT_EQ(f.manifest.tasks.size(), 3u) << f.output;
  for (const char* repo : {"redirectkit", "authkit", "linkcheck"}) {
    const ForgeOutcome* t = find_task(repo);
    ASSERT_NE(t, nullptr) << repo;
    EXPECT_TRUE(t->ok);
    for (const auto& name : Artifacts::required()) EXPECT_TRUE(fs::exists(t->task_dir / name)) << name;
    for (const char* name : {Artifacts::kFeature, Artifacts::kEnvToml, Artifacts::kParser, Artifacts::kVerification}) {
      EXPECT_TRUE(fs::exists(t->task_dir / name)) << name;
    }
    for (const char* cell : {"c0.func", "c0.func_sec", "c_minus1.func", "c_minus1.func_sec", "c_masked.func",
                             "c_masked.func_sec"}) {
      EXPECT_TRUE(fs::exists(t->task_dir / "logs" / (std::string(cell) + ".txt"))) << cell;
    }
  }
  EXPECT_LT(f.seconds, 300.0);
}

TEST(ForgedTasks, ValidationShowsTheCanonicalPattern) {
  for (const auto& t : forged().manifest.tasks) {
    TaskInstance task = load_task(t.task_dir);
    const auto& obs = task.validation.at("observations");
    EXPECT_TRUE(task.validation.at("valid").get<bool>()) << t.task_id;
    EXPECT_TRUE(task.validation.at("failed_requirements").empty());
    EXPECT_FALSE(obs.at("f_masked").get<bool>()) << t.task_id;
    EXPECT_FALSE(obs.at("s_masked").get<bool>()) << t.task_id;
    EXPECT_TRUE(obs.at("f1").get<bool>()) << t.task_id;
    EXPECT_FALSE(obs.at("s1").get<bool>()) << t.task_id;
    EXPECT_TRUE(obs.at("f0").get<bool>()) << t.task_id;
    EXPECT_TRUE(obs.at("s0").get<bool>()) << t.task_id;
    EXPECT_EQ(task.validation.at("cells").size(), 6u);
    EXPECT_TRUE(task.validation.at("excluded_baseline_failures").empty());
  }
}

TEST(ForgedTasks, VacuousSecurityTestIsRejectedOnRequirementTwo) {
  const auto& rejected = forged().manifest.rejected;
  ASSERT_EQ(rejected.size(), 1u);
  EXPECT_EQ(rejected[0].record_id, "slugkit-fix");
  EXPECT_EQ(rejected[0].stage, "validation");
  EXPECT_EQ(rejected[0].reason, "requirements");
  EXPECT_EQ(rejected[0].failed_requirements, std::vector<std::string>{"ii"});
  EXPECT_FALSE(fs::exists(forged().cfg.out_dir / rejected[0].task_id));
}

TEST(ForgedTasks, TaskIdsFollowRepoAndCommit) {
  for (const auto& t : forged().manifest.tasks) {
    TaskInstance task = load_task(t.task_dir);
    EXPECT_EQ(task.task_id, task.metadata.at("repo_id").get<std::string>() + "__" +
                                task.metadata.at("c0").get<std::string>().substr(0, 12));
    EXPECT_EQ(t.task_dir.filename().string(), task.task_id);
    EXPECT_EQ(task.env.image_tag, "susforge/" + task.metadata.at("repo_id").get<std::string>() + ":" +
                                      task.metadata.at("c0").get<std::string>().substr(0, 12));
  }
}

TEST(ForgedTasks, ArtifactsAreMutuallyConsistent) {
  for (const auto& t : forged().manifest.tasks) {
    TaskInstance task = load_task(t.task_dir);
    EXPECT_EQ(task.mask.added_lines(), 0u) << t.task_id;
    for (const auto& p : task.mask.paths()) EXPECT_FALSE(task.classifier.is_test(p)) << p;
    for (const auto& p : task.target.paths()) EXPECT_FALSE(task.classifier.is_test(p)) << p;
    for (const auto& p : task.tests.paths()) EXPECT_TRUE(task.classifier.is_test(p)) << p;
    EXPECT_GE(task.metadata.at("mask").at("ratio_achieved").get<double>(), 2.0);
    EXPECT_TRUE(task.metadata.at("target").at("routes_agree").get<bool>());
    EXPECT_FALSE(task.security_tests.empty());
    EXPECT_TRUE(synth::scan_description(task.description, task.feature, {}).empty()) << task.description;
    // The security tests are not part of the shipped tree.
    for (const auto& id : task.security_tests) {
      const std::string file = id.substr(0, id.find("::"));
      const std::string name = id.substr(id.rfind("::") + 2);
      ASSERT_TRUE(fs::exists(task.repo().resolve(file)));
      EXPECT_EQ(read_file(task.repo().resolve(file)).find(name), std::string::npos) << id;
    }
  }
}

TEST(ForgedTasks, ReconstructedStatesMatchTheCommits) {
  auto& f = forged();
  corpus::RepoCache cache(f.cfg.cache_dir);
  auto records = corpus::ingest_records(f.repos / "records.jsonl", corpus::RecordFormat::kNative).records;
  for (const auto& rec : records) {
    TempDir snap("snap");
    corpus::CommitTriple triple = corpus::snapshot_repo(rec, cache, snap.path());
    const ForgeOutcome* t = find_task(triple.repo_id);
    ASSERT_NE(t, nullptr);
    TaskInstance task = load_task(t->task_dir);
    TempDir dest("states");
    TaskStates s = reconstruct_states(task, dest.path());
    EXPECT_EQ(content_digest(s.c0), content_digest(triple.c0)) << triple.repo_id;
    EXPECT_EQ(content_digest(s.c_minus1), content_digest(triple.c_minus1)) << triple.repo_id;
    EXPECT_EQ(content_digest(s.c_masked), content_digest(task.repo()));
  }
}

TEST(ForgedTasks, ReforgingWithWarmCacheIsByteIdentical) {
  auto& f = forged();
  TempDir out("again");
  app::ForgeConfig cfg = f.cfg;
  cfg.out_dir = out.path() / "tasks";
  cfg.work_dir = out.path() / "work";
  std::ostringstream o, e;
  app::CommandIO io{o, e, false};
  ASSERT_EQ(app::cmd_forge(cfg, {f.repos / "records.jsonl", corpus::RecordFormat::kNative}, io), 0);
  for (const auto& t : f.manifest.tasks) {
    auto first = testing::tree_contents(t.task_dir, "logs");
    auto second = testing::tree_contents(cfg.out_dir / t.task_id, "logs");
    EXPECT_FALSE(first.empty());
    EXPECT_EQ(first, second) << t.task_id;
  }
}

TEST(ForgedTasks, RevalidationAcceptsAndTamperingFails) {
  auto& f = forged();
  const ForgeOutcome* t = find_task("linkcheck");
  ASSERT_NE(t, nullptr);
  env::LocalRuntime rt(f.cfg.store_dir);
  TempDir copy("copy");
  const fs::path dir = copy.path() / t->task_id;
  copy_tree(t->task_dir, dir);

  auto rep = revalidate_task(load_task(dir), rt);
  EXPECT_TRUE(rep.valid) << rep.to_json().dump(2);

  std::string target = read_file(dir / Artifacts::kTarget);
  const auto at = target.find("(\"http\", \"https\")");
  ASSERT_NE(at, std::string::npos);
  target.replace(at, 17, "(\"http\", \"https\", \"javascript\")");
  write_file(dir / Artifacts::kTarget, target);
  rep = revalidate_task(load_task(dir), rt);
  EXPECT_FALSE(rep.valid);
  EXPECT_EQ(rep.failed_requirements, std::vector<std::string>{"iii"});
  EXPECT_FALSE(nlohmann::json::parse(read_file(dir / Artifacts::kValidation)).at("valid").get<bool>());

  write_file(dir / Artifacts::kMask, "--- a/linkcheck/links.py\n+++ b/linkcheck/links.py\n@@ -0,0 +1,1 @@\n+nothing here\n");
  rep = revalidate_task(load_task(dir), rt);
  EXPECT_FALSE(rep.valid);
  EXPECT_EQ(rep.reason, "patch-apply");
}

TEST(LoadTask, ListsEveryMissingArtifact) {
  auto& f = forged();
  TempDir copy("copy");
  copy_tree(f.manifest.tasks.front().task_dir, copy.path());
  fs::remove(copy.path() / Artifacts::kEnvironment);
  fs::remove(copy.path() / Artifacts::kTarget);
  try {
    load_task(copy.path());
    ADD_FAILURE() << "incomplete task accepted";
  } catch (const MissingArtifacts& e) {
    EXPECT_EQ(e.missing(), (std::vector<std::string>{"target.diff", "environment.json"}));
    EXPECT_NE(std::string(e.what()).find("environment.json"), std::string::npos);
  }
}

TEST(Forge, EmptyRecordFileGivesEmptyManifest) {
  auto& f = forged();
  TempDir out("empty");
  app::ForgeConfig cfg = f.cfg;
  cfg.out_dir = out.path() / "tasks";
  std::ostringstream o, e;
  app::CommandIO io{o, e, true};
  ASSERT_EQ(app::cmd_forge(cfg, {f.repos / "empty.jsonl", corpus::RecordFormat::kNative}, io), 0);
  Manifest m = Manifest::load(cfg.out_dir / "manifest.json");
  EXPECT_TRUE(m.tasks.empty());
  EXPECT_TRUE(m.rejected.empty());
  EXPECT_TRUE(nlohmann::json::parse(o.str()).at("tasks").empty());
}

TEST(Forge, UnreachableRepositoryIsIsolated) {
  auto& f = forged();
  TempDir out("isolated");
  write_file(out.path() / "records.jsonl",
             "{\"record_id\": \"gone\", \"repo_url\": \"" + (out.path() / "missing-repo").string() +
                 "\", \"fix_commit\": \"0123456789abcdef0123456789abcdef01234567\", \"language_tag\": \"Python\"}\n" +
                 read_file(f.repos / "records.jsonl").substr(0, read_file(f.repos / "records.jsonl").find('\n') + 1));
  app::ForgeConfig cfg = f.cfg;
  cfg.out_dir = out.path() / "tasks";
  cfg.filter.require_test_modification = false;
  std::ostringstream o, e;
  app::CommandIO io{o, e, false};
  ASSERT_EQ(app::cmd_forge(cfg, {out.path() / "records.jsonl", corpus::RecordFormat::kNative}, io), 0) << o.str();
  Manifest m = Manifest::load(cfg.out_dir / "manifest.json");
  EXPECT_EQ(m.tasks.size(), 1u);
  ASSERT_EQ(m.rejected.size(), 1u);
  EXPECT_EQ(m.rejected[0].record_id, "gone");
  EXPECT_EQ(m.rejected[0].stage, "snapshot");
}

}  // namespace
}  // namespace susforge::forge
