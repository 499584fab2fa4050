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


#include "susforge/eval.hpp"

#include <gtest/gtest.h>

#include "fixture.hpp"

namespace susforge::eval {
namespace {

using forge::TaskInstance;
using testing::double_agent;
using testing::forged;

struct Scored {
  AgentRun run;
  metrics::Outcome outcome;
};

Scored play(const TaskInstance& task, const std::string& command, const Strategy& strat = Strategy::builtin(StrategyKind::kGeneric),
            AgentLimits limits = {}) {
  TempDir work("agent");
  env::LocalRuntime rt(forged().cfg.store_dir);
  AgentRun run = run_agent(task, parse_external(command), strat.for_task(task.gold_cwes), limits, work.path());
  metrics::Outcome o = score_solution(task, run, rt, "test");
  return {run, o};
}

std::vector<TaskInstance> tasks() {
  std::vector<TaskInstance> out;
  for (const auto& t : forged().manifest.tasks) out.push_back(forge::load_task(t.task_dir));
  return out;
}

TEST(Harness, ScoresTheOutcomeLatticeOnEveryTask) {
  ASSERT_EQ(forged().manifest.tasks.size(), 3u) << forged().output;
  for (const auto& task : tasks()) {
    auto noop = play(task, double_agent("noop"));
    EXPECT_FALSE(noop.outcome.func_pass) << task.task_id;
    EXPECT_FALSE(noop.outcome.sec_pass) << task.task_id;
    EXPECT_TRUE(noop.run.solution.empty());

    auto vuln = play(task, double_agent("vulnerable"));
    EXPECT_TRUE(vuln.outcome.func_pass) << task.task_id;
    EXPECT_FALSE(vuln.outcome.sec_pass) << task.task_id;
    EXPECT_EQ(vuln.outcome.outcome_class(), metrics::OutcomeClass::kInsecure);

    auto perfect = play(task, double_agent("perfect"));
    EXPECT_TRUE(perfect.outcome.func_pass) << task.task_id;
    EXPECT_TRUE(perfect.outcome.sec_pass) << task.task_id;
    EXPECT_EQ(patch::render_patch(perfect.run.solution), patch::render_patch(task.target));
    EXPECT_EQ(perfect.outcome.gold_cwes, task.gold_cwes);
    EXPECT_EQ(perfect.outcome.steps, 1);
  }
}

TEST(Harness, VulnerableSolutionReproducesThePreFixTree) {
  const auto task = tasks().front();
  auto v = play(task, double_agent("vulnerable"));
  TempDir d("states");
  auto states = forge::reconstruct_states(task, d.path());
  TempDir ws("ws");
  copy_tree(task.repo().root, ws.path());
  patch::apply_patch(Workspace{ws.path()}, v.run.solution);
  EXPECT_EQ(content_digest(Workspace{ws.path()}), content_digest(states.c_minus1));
}

TEST(Harness, CrashAndTimeoutScoreAsFailures) {
  const auto task = tasks().front();
  auto crash = play(task, double_agent("perfect", "--exit-code 3"));
  EXPECT_TRUE(crash.run.failed);
  EXPECT_EQ(crash.outcome.reason, "agent-crash");
  EXPECT_FALSE(crash.outcome.func_pass);
  EXPECT_FALSE(crash.outcome.sec_pass);

  AgentLimits quick;
  quick.timeout = std::chrono::seconds(1);
  auto slow = play(task, "sleep 30", Strategy::builtin(StrategyKind::kGeneric), quick);
  EXPECT_TRUE(slow.run.failed);
  EXPECT_EQ(slow.outcome.reason, "agent-timeout");
  EXPECT_FALSE(slow.outcome.func_pass);
}

TEST(Harness, StepBudgetIsEnforced) {
  const auto task = tasks().front();
  AgentLimits small;
  small.max_steps = 5;
  auto over = play(task, double_agent("perfect", "--steps 9"), Strategy::builtin(StrategyKind::kGeneric), small);
  EXPECT_EQ(over.outcome.steps, 5);
  EXPECT_EQ(over.outcome.reason, "step-budget");
  EXPECT_TRUE(over.outcome.func_pass);

  auto within = play(task, double_agent("perfect", "--steps 5"), Strategy::builtin(StrategyKind::kGeneric), small);
  EXPECT_EQ(within.outcome.steps, 5);
  EXPECT_EQ(within.outcome.reason, "");
}

TEST(Harness, SelectionFileIsReadAndKeptOutOfTheSolution) {
  const auto task = tasks().front();
  const auto strat = Strategy::builtin(StrategyKind::kSelfSelection);
  auto picked = play(task, double_agent("perfect", "--select CWE-79 --select 22"), strat);
  ASSERT_TRUE(picked.run.selected_cwes.has_value());
  EXPECT_EQ(*picked.run.selected_cwes, (std::vector<std::string>{"CWE-79", "CWE-22"}));
  EXPECT_EQ(picked.outcome.selected_cwes, picked.run.selected_cwes);
  for (const auto& p : picked.run.solution.paths()) EXPECT_NE(p, strat.selection_file_name);
  EXPECT_TRUE(picked.outcome.sec_pass);

  auto silent = play(task, double_agent("perfect"), strat);
  ASSERT_TRUE(silent.run.selected_cwes.has_value());
  EXPECT_TRUE(silent.run.selected_cwes->empty());

  auto generic = play(task, double_agent("perfect"));
  EXPECT_FALSE(generic.run.selected_cwes.has_value());
}

TEST(Harness, TestFileEditsAreDropped) {
  const auto task = tasks().front();
  auto r = play(task, double_agent("perfect", "--touch tests/test_extra.py"));
  EXPECT_EQ(r.run.dropped_test_paths, std::vector<std::string>{"tests/test_extra.py"});
  for (const auto& p : r.run.solution.paths()) EXPECT_FALSE(task.classifier.is_test(p)) << p;
  EXPECT_TRUE(r.outcome.sec_pass);
}

TEST(Harness, UnapplicableSolutionScoresAsPatchApply) {
  const auto task = tasks().front();
  AgentRun run;
  run.task_id = task.task_id;
  run.strategy = "generic";
  run.solution = patch::parse_patch("--- a/missing.py\n+++ b/missing.py\n@@ -1,1 +1,1 @@\n-a\n+b\n");
  env::LocalRuntime rt(forged().cfg.store_dir);
  auto o = score_solution(task, run, rt, "test");
  EXPECT_EQ(o.reason, "patch-apply");
  EXPECT_FALSE(o.func_pass);
  EXPECT_FALSE(o.sec_pass);
}

TEST(Harness, PromptFollowsTheTaskText) {
  const auto task = tasks().front();
  for (auto kind : {StrategyKind::kGeneric, StrategyKind::kSelfSelection, StrategyKind::kOracle}) {
    const auto prompt = prepare_prompt(task, Strategy::builtin(kind).for_task(task.gold_cwes));
    EXPECT_TRUE(starts_with(prompt, task.description)) << kind_name(kind);
  }
  const auto oracle = prepare_prompt(task, Strategy::builtin(StrategyKind::kOracle).for_task(task.gold_cwes));
  for (const auto& cwe : task.gold_cwes) EXPECT_NE(oracle.find(cwe), std::string::npos);
}

TEST(Harness, WorkspaceStartsFromTheMaskedTree) {
  const auto task = tasks().front();
  TempDir work("agent");
  // An agent that fails unless the workspace is a pristine copy.
  const std::string probe = "sh -c 'test -d {workspace} && test ! -e {workspace}/.git && test -f {prompt_file} && "
                            "test {max_steps} = 200'";
  AgentRun run = run_agent(task, parse_external(probe), Strategy::builtin(StrategyKind::kGeneric), {}, work.path());
  EXPECT_FALSE(run.failed) << run.reason;
  EXPECT_TRUE(run.solution.empty());
  EXPECT_TRUE(fs::exists(task.repo().root));
}

}  // namespace
}  // namespace susforge::eval
