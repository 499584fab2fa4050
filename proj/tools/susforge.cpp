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


#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "susforge/app.hpp"
#include "susforge/error.hpp"

namespace app = susforge::app;
namespace fs = std::filesystem;

namespace {

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw susforge::ConfigError("--set expects KEY=VALUE, got: " + s);
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"susforge: forge secure-coding tasks from vulnerability fixes and evaluate agents on them"};
  cli.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> sets;
  bool json = false;
  std::string log_level = "warn";
  cli.add_option("-c,--config", config_file, "config file");
  cli.add_option("--set", sets, "override a config key (KEY=VALUE), repeatable");
  cli.add_flag("--json", json, "print JSON to stdout");
  cli.add_option("--log-level", log_level, "trace, debug, info, warn, error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::vector<std::pair<std::string, std::string>> flag_overrides;
  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help,
                  bool is_string) {
    sub->add_option_function<std::string>(
        flag, [&, key, is_string](const std::string& v) { flag_overrides.emplace_back(key, is_string ? quoted(v) : v); },
        help);
  };

  auto* forge = cli.add_subcommand("forge", "forge task directories from a record file");
  std::string records;
  std::string format = "native";
  forge->add_option("records", records, "JSON-lines record file")->required();
  forge->add_option("--format", format, "native, reposvul or morefixes")
      ->check(CLI::IsMember({"native", "reposvul", "morefixes"}));
  bind(forge, "--out", "paths.out", "task output directory", true);
  bind(forge, "--cache", "paths.cache", "repository cache directory", true);
  bind(forge, "--ratio", "mask.ratio", "mask-to-fix size ratio", false);
  bind(forge, "--slots", "runtime.slots", "parallel workers", false);
  bind(forge, "--runtime", "runtime.kind", "auto, docker or local", true);

  auto* validate = cli.add_subcommand("validate", "re-run the validation matrix on a task directory");
  std::string task_dir;
  bool double_check = false;
  validate->add_option("task_dir", task_dir, "task directory")->required();
  validate->add_flag("--double-check", double_check, "run every cell twice and reject disagreement");
  bind(validate, "--runtime", "runtime.kind", "auto, docker or local", true);

  auto* evalc = cli.add_subcommand("eval", "run an agent on tasks and append outcomes");
  app::EvalRequest ereq;
  std::vector<std::string> inputs;
  std::string outcomes;
  evalc->add_option("tasks", inputs, "manifests or task directories")->required();
  evalc->add_option("-s,--strategy", ereq.strategy, "generic, self_selection, oracle or a configured name")
      ->required();
  evalc->add_option("--setting", ereq.setting, "setting label (default: strategy name)");
  evalc->add_option("-o,--outcomes", outcomes, "outcomes file to append to");
  bind(evalc, "--agent", "eval.agent", "agent command template", true);
  bind(evalc, "--max-steps", "eval.max_steps", "agent step budget", false);
  bind(evalc, "--slots", "runtime.slots", "parallel workers", false);
  bind(evalc, "--runtime", "runtime.kind", "auto, docker or local", true);

  auto* report = cli.add_subcommand("report", "compute metrics from outcome files");
  std::vector<std::string> files;
  std::string report_out = ".";
  report->add_option("files", files, "outcomes.jsonl files, one per setting")->required();
  report->add_option("--out", report_out, "directory for report.json and report.md");

  auto* gc = cli.add_subcommand("gc", "remove environment images no task references");
  bind(gc, "--runtime", "runtime.kind", "auto, docker or local", true);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::kExitUsage;
  }

  spdlog::set_default_logger(spdlog::default_logger());
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%l] %v");

  app::CommandIO io{std::cout, std::cerr, json};
  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) overrides.push_back(split_assignment(s));
    overrides.insert(overrides.end(), flag_overrides.begin(), flag_overrides.end());
    if (*validate && double_check) overrides.emplace_back("validate.double_check", "true");
    std::optional<fs::path> cfg_path;
    if (!config_file.empty()) cfg_path = config_file;

    if (*report) {
      std::vector<fs::path> paths(files.begin(), files.end());
      return app::cmd_report(paths, report_out, io);
    }
    app::ForgeConfig cfg = app::ForgeConfig::load(cfg_path, overrides);
    if (*forge) {
      app::ForgeRequest req;
      req.records = records;
      req.format = susforge::corpus::parse_record_format(format);
      return app::cmd_forge(cfg, req, io);
    }
    if (*validate) return app::cmd_validate(cfg, task_dir, io);
    if (*evalc) {
      ereq.inputs.assign(inputs.begin(), inputs.end());
      ereq.outcomes = outcomes;
      return app::cmd_eval(cfg, ereq, io);
    }
    if (*gc) return app::cmd_gc(cfg, io);
  } catch (const susforge::ConfigError& e) {
    std::cerr << "susforge: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const susforge::PreconditionError& e) {
    std::cerr << "susforge: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "susforge: " << e.what() << "\n";
    return app::kExitSystemic;
  }
  return app::kExitUsage;
}
