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


#include <gtest/gtest.h>

#include "fixture.hpp"
#include "susforge/metrics.hpp"

namespace susforge {
namespace {

using nlohmann::json;
using testing::forged;
using testing::kCli;
using testing::toml_string;

// A config file pointing at the shared cache and image store with a fresh
// output directory, plus a strategy table.
struct CliEnv {
  TempDir root{"cli"};
  fs::path config;

  CliEnv() {
    const auto& c = forged().cfg;
    config = root.path() / "susforge.toml";
    write_file(config, "[paths]\ncache = " + toml_string(c.cache_dir.string()) +
                           "\nout = " + toml_string((root.path() / "tasks").string()) +
                           "\nstore = " + toml_string(c.store_dir.string()) +
                           "\nwork = " + toml_string((root.path() / "work").string()) +
                           "\n\n[runtime]\nkind = \"local\"\n\n[strategy.careful]\nkind = \"self-selection\"\n");
  }

  ProcessResult run(std::vector<std::string> args, std::map<std::string, std::string> env = {}) const {
    std::vector<std::string> argv{kCli, "-c", config.string(), "--log-level", "off"};
    argv.insert(argv.end(), args.begin(), args.end());
    ProcessOptions o;
    o.env = std::move(env);
    o.cwd = root.path();
    o.timeout = std::chrono::minutes(10);
    return run_process(argv, o);
  }
};

const CliEnv& cli() {
  static CliEnv e;
  return e;
}

fs::path first_task() { return forged().manifest.tasks.front().task_dir; }

TEST(Cli, ForgeWritesManifestAndSummary) {
  auto r = cli().run({"--json", "forge", (forged().repos / "records.jsonl").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto summary = json::parse(r.output);
  EXPECT_EQ(summary.at("tasks").size(), 3u);
  const auto m = forge::Manifest::load(cli().root.path() / "tasks" / "manifest.json");
  EXPECT_EQ(m.tasks.size(), 3u);
  for (const auto& t : m.tasks) EXPECT_TRUE(fs::exists(t.task_dir / forge::Artifacts::kValidation));
}

TEST(Cli, ForgeRejectsBadInput) {
  EXPECT_EQ(cli().run({"forge", "/nonexistent/records.jsonl"}).exit_code, 2);
  EXPECT_EQ(cli().run({"forge", (forged().repos / "records.jsonl").string(), "--format", "xml"}).exit_code, 2);
  EXPECT_EQ(cli().run({"forge", (forged().repos / "records.jsonl").string(), "--ratio", "0.5"}).exit_code, 2);
  EXPECT_EQ(cli().run({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(cli().run({}).exit_code, 2);
}

TEST(Cli, ValidateReportsExitCodes) {
  auto ok = cli().run({"--json", "validate", first_task().string()});
  ASSERT_EQ(ok.exit_code, 0) << ok.output;
  EXPECT_TRUE(json::parse(ok.output).at("valid").get<bool>());

  TempDir copy("cli-validate");
  copy_tree(first_task(), copy.path());
  fs::remove(copy.path() / forge::Artifacts::kMetadata);
  auto missing = cli().run({"validate", copy.path().string()});
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_NE(missing.output.find("metadata.json"), std::string::npos) << missing.output;
}

TEST(Cli, EvalScoresResumesAndHonoursStrategies) {
  const fs::path manifest = forged().cfg.out_dir / "manifest.json";
  const fs::path outcomes = cli().root.path() / "perfect.jsonl";
  const std::string agent = "eval.agent=" + toml_string(testing::double_agent("perfect", "--select CWE-79"));
  auto r = cli().run({"--set", agent, "eval", manifest.string(), "-s", "careful", "--setting", "double/perfect",
                      "-o", outcomes.string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto set = metrics::load_outcomes(outcomes);
  EXPECT_EQ(set.setting_id, "double/perfect");
  ASSERT_EQ(set.outcomes.size(), 3u);
  for (const auto& [id, o] : set.outcomes) {
    EXPECT_TRUE(o.func_pass && o.sec_pass) << id;
    EXPECT_EQ(o.strategy, "careful");
    ASSERT_TRUE(o.selected_cwes.has_value());
    EXPECT_EQ(*o.selected_cwes, std::vector<std::string>{"CWE-79"});
  }
  const std::string before = read_file(outcomes);
  auto again = cli().run({"--set", agent, "eval", manifest.string(), "-s", "careful", "--setting", "double/perfect",
                          "-o", outcomes.string()});
  EXPECT_EQ(again.exit_code, 0) << again.output;
  EXPECT_EQ(read_file(outcomes), before);

  auto unknown = cli().run({"--set", agent, "eval", manifest.string(), "-s", "telepathy"});
  EXPECT_EQ(unknown.exit_code, 2);
  auto no_agent = cli().run({"eval", manifest.string(), "-s", "generic"});
  EXPECT_EQ(no_agent.exit_code, 2);
}

TEST(Cli, EvalTakesTheAgentFromTheEnvironment) {
  const fs::path outcomes = cli().root.path() / "noop.jsonl";
  auto r = cli().run({"eval", first_task().string(), "-s", "generic", "-o", outcomes.string()},
                     {{"SUSFORGE_EVAL_AGENT", testing::double_agent("noop")}});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto set = metrics::load_outcomes(outcomes);
  ASSERT_EQ(set.outcomes.size(), 1u);
  EXPECT_FALSE(set.outcomes.begin()->second.func_pass);
}

const json& setting(const json& report, const std::string& id) {
  for (const auto& s : report.at("settings")) {
    if (s.at("setting") == id) return s;
  }
  throw Error("no setting " + id);
}

TEST(Cli, ReportReproducesTheAgentModelTable) {
  const std::vector<std::tuple<std::string, double, double>> cells = {
      {"swe-agent/claude-4-sonnet", 61.0, 10.5},   {"openhands/claude-4-sonnet", 49.5, 12.5},
      {"claude-code/claude-4-sonnet", 44.0, 6.0},  {"swe-agent/kimi-k2", 22.5, 6.0},
      {"openhands/kimi-k2", 37.0, 9.0},            {"claude-code/kimi-k2", 43.5, 8.0},
      {"swe-agent/gemini-2.5-pro", 19.5, 7.0},     {"openhands/gemini-2.5-pro", 21.5, 8.5},
      {"claude-code/gemini-2.5-pro", 15.0, 4.5}};
  std::vector<std::string> args{"--json", "report"};
  for (const auto& [id, f, s] : cells) {
    args.push_back((testing::kFixtures / "outcomes" / "agent_models" / (id.substr(0, id.find('/')) + "__" +
                                                                 id.substr(id.find('/') + 1) + ".jsonl"))
                       .string());
  }
  const fs::path out = cli().root.path() / "report3";
  args.insert(args.end(), {"--out", out.string()});
  auto r = cli().run(args);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const json report = json::parse(read_file(out / "report.json"));
  EXPECT_EQ(json::parse(r.output), report);
  EXPECT_TRUE(fs::exists(out / "report.md"));
  for (const auto& [id, f, s] : cells) {
    const json& e = setting(report, id);
    EXPECT_DOUBLE_EQ(e.at("func_pass").at("pct").get<double>(), f) << id;
    EXPECT_DOUBLE_EQ(e.at("sec_pass").at("pct").get<double>(), s) << id;
    EXPECT_EQ(e.at("n_tasks").get<int>(), 200) << id;
  }
  EXPECT_DOUBLE_EQ(setting(report, "swe-agent/claude-4-sonnet").at("insecure_share").at("pct").get<double>(), 82.8);
  EXPECT_DOUBLE_EQ(setting(report, "openhands/claude-4-sonnet").at("insecure_share").at("pct").get<double>(), 74.7);
}

TEST(Cli, ReportOnOneFileHasOnlyAggregates) {
  const fs::path out = cli().root.path() / "report1";
  auto r = cli().run({"report", (testing::kFixtures / "outcomes" / "strategies" / "generic.jsonl").string(), "--out",
                      out.string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const json report = json::parse(read_file(out / "report.json"));
  EXPECT_EQ(report.at("settings").size(), 1u);
  EXPECT_FALSE(report.contains("transitions"));
  EXPECT_FALSE(report.contains("secure_given_correct"));
}

TEST(Cli, ReportRejectsUnusableInput) {
  const fs::path empty = cli().root.path() / "empty.jsonl";
  write_file(empty, "");
  EXPECT_EQ(cli().run({"report", empty.string()}).exit_code, 2);
  const fs::path bad = cli().root.path() / "bad.jsonl";
  write_file(bad, "{\"task_id\": \"t\", \"func_pass\": false, \"sec_pass\": true}\n");
  EXPECT_EQ(cli().run({"report", bad.string()}).exit_code, 2);
  EXPECT_EQ(cli().run({"report", "/nonexistent.jsonl"}).exit_code, 2);
}

TEST(Cli, GcKeepsReferencedImages) {
  auto r = cli().run({"gc"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  env::LocalRuntime rt(forged().cfg.store_dir);
  for (const auto& t : forged().manifest.tasks) {
    EXPECT_TRUE(rt.image_exists(forge::load_task(t.task_dir).env.image_tag)) << t.task_id;
  }
}

}  // namespace
}  // namespace susforge
