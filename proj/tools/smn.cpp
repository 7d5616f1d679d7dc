/* Copyright 2026 The SMN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// smn: prepare | train | predict | evaluate | analyze | ablate | gradcheck

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smn/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Statement-based memory network code summarizer"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  smn::CommandOptions options;
  options.log = &std::cerr;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"prepare", "split a corpus by project and build vocabularies"},
      {"train", "train one model and write its checkpoint and log"},
      {"predict", "greedy-decode the test split with one checkpoint or an ensemble"},
      {"evaluate", "score predictions with BLEU and METEOR"},
      {"analyze", "difference set and improved set of two prediction files"},
      {"ablate", "train and compare the configuration sweep"},
      {"gradcheck", "finite-difference check of every op and the full model"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--out", options.out, "overrides the primary output path");
    if (name == "predict") {
      sub->add_option("--checkpoint", options.checkpoints, "ensemble member (repeatable)");
      sub->add_flag("--dump-gates", options.dump_gates, "write per-hop statement gates next to the predictions");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) options.seed = seed;
  const std::string command = sub->get_name();
  try {
    const smn::RunConfig config = smn::read_run_config(config_path);
    std::vector<std::filesystem::path> written;
    if (command == "prepare") written = smn::cmd_prepare(config, options);
    if (command == "train") written = smn::cmd_train(config, options);
    if (command == "predict") written = smn::cmd_predict(config, options);
    if (command == "evaluate") written = smn::cmd_evaluate(config, options);
    if (command == "analyze") written = smn::cmd_analyze(config, options);
    if (command == "ablate") written = smn::cmd_ablate(config, options);
    if (command == "gradcheck") smn::cmd_gradcheck(config, options);
    for (const auto& p : written) std::cout << p.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "smn " << command << ": " << e.what() << '\n';
    return smn::exit_code_for(e);
  }
  return 0;
}
