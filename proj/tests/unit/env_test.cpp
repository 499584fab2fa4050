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


#include "susforge/env.hpp"

#include <gtest/gtest.h>

#include <random>

#include "susforge/error.hpp"
#include "susforge/process.hpp"

namespace susforge::env {
namespace {

struct Repo {
  TempDir dir{"env-test"};
  Workspace ws() const { return Workspace{dir.path()}; }
  void put(const std::string& rel, const std::string& text) const { write_file(dir.path() / rel, text); }
};

TEST(Toolchain, DefaultWhenNothingStated) {
  Repo r;
  r.put("app.py", "x = 1\n");
  auto tc = detect_toolchain(r.ws(), "3.10");
  EXPECT_EQ(tc.runtime_version, "3.10");
  EXPECT_EQ(tc.basis, InferenceBasis::kDefault);
}

TEST(Toolchain, WorkflowMatrixListTakesHighest) {
  Repo r;
  r.put(".github/workflows/ci.yml",
        "jobs:\n  test:\n    strategy:\n      matrix:\n        python-version:\n          - \"3.8\"\n          - \"3.11\"\n"
        "          - \"3.9\"\n    steps:\n      - uses: actions/checkout@v3\n");
  r.put("setup.py", "setup(python_requires='>=3.6')\n");
  auto tc = detect_toolchain(r.ws());
  EXPECT_EQ(tc.runtime_version, "3.11");
  EXPECT_EQ(tc.basis, InferenceBasis::kCiConfig);
}

TEST(Toolchain, InlineMatrixAndIgnoresUnrelatedNumbers) {
  Repo r;
  r.put(".travis.yml", "dist: 3.14\npython: [\"3.7\", \"3.10\"]\n");
  auto tc = detect_toolchain(r.ws());
  EXPECT_EQ(tc.runtime_version, "3.10");
}

TEST(Toolchain, EnvFilesWhenNoCi) {
  Repo r;
  r.put("setup.py", "setup(name='x', python_requires='>=3.7,<3.12')\n");
  r.put("tox.ini", "[tox]\nenvlist = py38,py39\n");
  auto tc = detect_toolchain(r.ws());
  EXPECT_EQ(tc.basis, InferenceBasis::kEnvFiles);
  EXPECT_EQ(tc.runtime_version, "3.11");
}

TEST(Toolchain, PyprojectAndPythonVersionFile) {
  Repo r;
  r.put("pyproject.toml", "[project]\nrequires-python = \">=3.9\"\n");
  auto tc = detect_toolchain(r.ws());
  EXPECT_EQ(tc.runtime_version, "3.9");
  r.put(".python-version", "3.12.1\n");
  EXPECT_EQ(detect_toolchain(r.ws()).runtime_version, "3.12");
}

TEST(Toolchain, DocsAreLastResort) {
  Repo r;
  r.put("README.md", "Requires Python 3.8 or newer. Version 3.99 of the API.\n");
  auto tc = detect_toolchain(r.ws());
  EXPECT_EQ(tc.basis, InferenceBasis::kDocs);
  EXPECT_EQ(tc.runtime_version, "3.8");
}

TEST(Toolchain, EnvTomlWins) {
  Repo r;
  r.put(".github/workflows/ci.yml", "python-version: 3.11\n");
  r.put("env.toml", "[runtime]\npython = \"3.9\"\n");
  auto tc = detect_toolchain(r.ws());
  EXPECT_EQ(tc.runtime_version, "3.9");
  EXPECT_EQ(tc.basis, InferenceBasis::kEnvFiles);
}

TEST(Toolchain, ExternalAnswerOrFallback) {
  Repo r;
  r.put("setup.py", "setup(python_requires='>=3.8')\n");
  auto good = detect_toolchain_external(
      r.ws(), parse_external("sh -c 'echo {\\\"runtime_version\\\":\\\"3.11\\\"} > {output_file}'"));
  EXPECT_EQ(good.runtime_version, "3.11");
  EXPECT_EQ(good.basis, InferenceBasis::kGenerator);
  auto bad = detect_toolchain_external(r.ws(), parse_external("sh -c 'echo nonsense'"));
  EXPECT_EQ(bad.runtime_version, "3.8");
  EXPECT_EQ(bad.basis, InferenceBasis::kEnvFiles);
}

TEST(EnvSpecToml, RoundTripProperty) {
  std::mt19937 rng(7);
  const std::string alphabet = "abc \"\\'\t$;-=[]#{}";
  auto word = [&] {
    std::string s;
    int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int round = 0; round < 200; ++round) {
    EnvSpec s;
    s.python = "3." + std::to_string(6 + rng() % 8);
    for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i) s.system_packages.push_back(word());
    for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) s.install.push_back(word());
    s.test_command = "python -m pytest " + shell_quote(word());
    s.timeout = std::chrono::seconds(1 + rng() % 5000);
    EnvSpec back = EnvSpec::from_toml(s.to_toml());
    EXPECT_EQ(back.python, s.python);
    EXPECT_EQ(back.system_packages, s.system_packages);
    EXPECT_EQ(back.install, s.install);
    EXPECT_EQ(back.test_command, s.test_command);
    EXPECT_EQ(back.timeout, s.timeout);
    EXPECT_EQ(back.digest(), s.digest());
  }
}

TEST(EnvSpecToml, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(EnvSpec::from_toml("[runtime]\npyhton = \"3.9\"\n"), ConfigError);
  EXPECT_THROW(EnvSpec::from_toml("[runtime]\npython = \"three\"\n"), ConfigError);
  EXPECT_THROW(EnvSpec::from_toml("[test]\ntimeout = 0\n"), ConfigError);
  EXPECT_THROW(EnvSpec::from_toml("[test]\ncommand = \"\"\n"), ConfigError);
  EnvSpec d = EnvSpec::from_toml("");
  EXPECT_EQ(d.test_command, "python -m pytest -rA -p no:cacheprovider");
}

TEST(EnvSpecInfer, ManifestsDriveInstall) {
  Repo r;
  r.put("requirements.txt", "requests\npytest\n");
  r.put("setup.py", "setup()\n");
  auto s = infer_env_spec(r.ws(), {"3.9", InferenceBasis::kEnvFiles, ""});
  EXPECT_EQ(s.python, "3.9");
  ASSERT_EQ(s.install.size(), 2u);
  EXPECT_EQ(s.install[0], "python -m pip install -r requirements.txt");
  EXPECT_EQ(s.install[1], "python -m pip install -e .");
  Repo bare;
  bare.put("a.py", "");
  auto b = infer_env_spec(bare.ws(), {"3.10", InferenceBasis::kDefault, ""});
  ASSERT_EQ(b.install.size(), 1u);
  EXPECT_EQ(b.install[0], "python -m pip install pytest");
}

TEST(EnvSpecScreen, DeniedCommands) {
  EnvSpec s;
  s.install = {"pip install -e .", "docker run -v /:/host alpine", "apt-get install --privileged x",
               "make test", "python serve.py -p 8080"};
  auto d = denied_build_commands(s);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0], "docker run -v /:/host alpine");
  EXPECT_EQ(d[1], "apt-get install --privileged x");
  EXPECT_EQ(d[2], "python serve.py -p 8080");
}

TEST(Docker, DockerfileShape) {
  EnvSpec s;
  s.python = "3.9";
  s.system_packages = {"libxml2-dev"};
  s.install = {"pip install -e ."};
  std::string df = DockerRuntime::dockerfile(s);
  EXPECT_NE(df.find("FROM python:3.9-slim-bookworm\n"), std::string::npos);
  EXPECT_NE(df.find("apt-get install -y --no-install-recommends libxml2-dev"), std::string::npos);
  EXPECT_NE(df.find("RUN pip install -e .\n"), std::string::npos);
  EXPECT_NE(df.find("org.susforge.spec=\"" + s.digest() + "\""), std::string::npos);
}

TEST(Tags, ImageTag) {
  EXPECT_EQ(image_tag_for("pallets__flask", "0123456789abcdef0123"), "susforge/pallets__flask:0123456789ab");
}

TEST(Runtime, UnknownKindRejected) {
  TempDir store("store");
  EXPECT_THROW(make_runtime("podman", store.path()), ConfigError);
  EXPECT_EQ(make_runtime("local", store.path())->name(), "local");
}

struct LocalFixture : ::testing::Test {
  TempDir store{"store"};
  Repo repo;
  LocalRuntime rt{store.path()};
  EnvSpec spec;

  void SetUp() override {
    spec.python = "3.10";
    repo.put("pkg/__init__.py", "");
    repo.put("pkg/core.py", "def double(x):\n    return 2 * x\n");
    repo.put("tests/test_core.py",
             "from pkg.core import double\n\n\ndef test_double():\n    assert double(2) == 4\n\n\n"
             "def test_other():\n    assert double(0) == 0\n");
    repo.put("tests/test_side.py", "import os\n\n\ndef test_writes():\n    open('side.txt', 'w').write('x')\n");
  }
};

TEST_F(LocalFixture, BuildProbeAndRun) {
  spec.install = {"echo built > ../built.txt"};
  auto env = build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                               {"demo", "abcdef0123456789", {}, true});
  EXPECT_EQ(env.image_tag, "susforge/demo:abcdef012345");
  EXPECT_FALSE(env.fallback);
  EXPECT_TRUE(fs::exists(rt.image_dir(env.image_tag) / "built.txt"));
  EXPECT_EQ(env.parser, oracle::builtin_pytest_spec());

  auto run = run_suite(env, rt, repo.ws());
  EXPECT_TRUE(run.report.summary_found);
  EXPECT_EQ(run.report.counts[oracle::Status::kPassed], 3);
  ASSERT_TRUE(run.report.per_test.has_value());
  EXPECT_EQ(run.report.per_test->at("tests/test_core.py::test_double"), oracle::Status::kPassed);
  EXPECT_FALSE(fs::exists(repo.dir.path() / "side.txt"));

  auto sel = run_suite(env, rt, repo.ws(), {"tests/test_core.py::test_other"});
  EXPECT_EQ(sel.report.counts[oracle::Status::kPassed], 1);

  auto again = run_suite(env, rt, repo.ws());
  EXPECT_EQ(again.report.to_json(), run.report.to_json());

  auto round = EnvironmentRef::from_json(env.to_json());
  EXPECT_EQ(round.to_json(), env.to_json());
}

TEST_F(LocalFixture, FailingTestsAndCollectionErrorsAreReported) {
  auto env = build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                               {"demo", "1111111111111111", {}, true});
  repo.put("pkg/core.py", "def double(x):\n    return 3 * x\n");
  auto failing = run_suite(env, rt, repo.ws());
  EXPECT_EQ(failing.report.per_test->at("tests/test_core.py::test_double"), oracle::Status::kFailed);
  repo.put("pkg/core.py", "def triple(x):\n    return 3 * x\n");
  auto broken = run_suite(env, rt, repo.ws());
  EXPECT_TRUE(broken.report.summary_found);
  EXPECT_GE(broken.report.counts[oracle::Status::kError], 1);
}

TEST_F(LocalFixture, BuildFailureRejects) {
  spec.install = {"exit 3"};
  try {
    build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                      {"demo", "2222222222222222", {}, true});
    FAIL() << "expected rejection";
  } catch (const Rejection& r) {
    EXPECT_EQ(r.reason(), "env-build");
  }
  EXPECT_FALSE(rt.image_exists("susforge/demo:222222222222"));
}

TEST_F(LocalFixture, DeniedInstallRejects) {
  spec.install = {"docker build ."};
  EXPECT_THROW(build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                                 {"demo", "3333333333333333", {}, true}),
               Rejection);
}

TEST_F(LocalFixture, TimeoutFallsBackToMandatoryTests) {
  repo.put("tests/test_slow.py", "import time\n\n\ndef test_slow():\n    time.sleep(60)\n");
  auto env = build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""},
                               {"tests/test_core.py::test_double"}, rt,
                               {"demo", "4444444444444444", std::chrono::seconds(4), true});
  EXPECT_TRUE(env.fallback);
  auto run = run_suite(env, rt, repo.ws());
  EXPECT_EQ(run.report.counts[oracle::Status::kPassed], 2);

  auto slow = run_suite(env, rt, repo.ws(), {"tests/test_slow.py"}, std::chrono::seconds(2));
  EXPECT_EQ(slow.report.exit_status, oracle::ExitStatus::kTimeout);
}

TEST_F(LocalFixture, TimeoutWithoutMandatoryRejects) {
  repo.put("tests/test_slow.py", "import time\n\n\ndef test_slow():\n    time.sleep(60)\n");
  try {
    build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                      {"demo", "5555555555555555", std::chrono::seconds(3), true});
    FAIL() << "expected rejection";
  } catch (const Rejection& r) {
    EXPECT_EQ(r.reason(), "env-run");
  }
}

TEST_F(LocalFixture, GcKeepsReferencedImages) {
  build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                    {"a", "6666666666666666", {}, true});
  build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                    {"b", "7777777777777777", {}, true});
  EXPECT_EQ(rt.list_images().size(), 2u);
  auto removed = gc_images(rt, {"susforge/a:666666666666"});
  ASSERT_EQ(removed.size(), 1u);
  EXPECT_EQ(removed[0], "susforge/b:777777777777");
  EXPECT_EQ(rt.list_images(), std::vector<std::string>{"susforge/a:666666666666"});
}

TEST_F(LocalFixture, CustomRunnerUsesSynthesizedParser) {
  repo.put("run_checks.py",
           "import sys\nprint('checking...')\nprint('Ran: 3 passing, 1 failing, 0 errors')\nsys.exit(1)\n");
  spec.test_command = "python run_checks.py";
  auto env = build_environment(repo.ws(), repo.ws(), spec, {"3.10", InferenceBasis::kDefault, ""}, {}, rt,
                               {"demo", "8888888888888888", {}, true});
  EXPECT_NE(env.parser, oracle::builtin_pytest_spec());
  auto run = run_suite(env, rt, repo.ws());
  EXPECT_TRUE(run.report.summary_found);
  EXPECT_EQ(run.report.counts[oracle::Status::kPassed] + run.report.counts[oracle::Status::kFailed], 4);
}

}  // namespace
}  // namespace susforge::env
