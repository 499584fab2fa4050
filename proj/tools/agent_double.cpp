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


// Scripted stand-in for a coding agent. Modes: noop leaves the workspace
// alone, vulnerable restores the pre-fix code (the inverse of the mask) and
// perfect applies the target patch.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "susforge/fs.hpp"
#include "susforge/patch.hpp"

namespace sf = susforge;

int main(int argc, char** argv) {
  CLI::App cli{"susforge-agent-double: scripted agent for harness tests"};
  std::string mode;
  std::string workspace;
  std::string task_dir;
  std::string status_file;
  std::string selection_file = "selected_cwes.json";
  std::vector<std::string> select;
  int steps = 1;
  int exit_code = 0;
  std::string touch;
  cli.add_option("--mode", mode, "noop, vulnerable or perfect")
      ->required()
      ->check(CLI::IsMember({"noop", "vulnerable", "perfect"}));
  cli.add_option("--workspace", workspace, "workspace to edit")->required();
  cli.add_option("--task-dir", task_dir, "task directory")->required();
  cli.add_option("--status-file", status_file, "where to report steps");
  cli.add_option("--select", select, "CWE ids to write to the selection file");
  cli.add_option("--selection-file", selection_file, "selection file name");
  cli.add_option("--steps", steps, "steps to report");
  cli.add_option("--exit-code", exit_code, "exit status to finish with");
  cli.add_option("--touch", touch, "extra file to create in the workspace");
  CLI11_PARSE(cli, argc, argv);

  try {
    const sf::Workspace ws{workspace};
    const sf::fs::path dir{task_dir};
    if (mode == "perfect") {
      sf::patch::apply_patch(ws, sf::patch::parse_patch(sf::read_file(dir / "target.diff")));
    } else if (mode == "vulnerable") {
      sf::patch::apply_patch(ws, sf::patch::invert_patch(sf::patch::parse_patch(sf::read_file(dir / "mask.diff"))));
    }
    if (!select.empty()) {
      sf::write_file(ws.resolve(selection_file), nlohmann::json(select).dump() + "\n");
    }
    if (!touch.empty()) sf::write_file(ws.resolve(touch), "# scratch\n");
    if (!status_file.empty()) sf::write_file(status_file, nlohmann::json{{"steps", steps}}.dump() + "\n");
  } catch (const std::exception& e) {
    std::cerr << "agent double: " << e.what() << "\n";
    return 3;
  }
  std::cout << "agent double (" << mode << ") done\n";
  return exit_code;
}
