// Copyright 2026 The specmtm authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "specmtm/trainer.hpp"
#include "specmtm/verify.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string checkpoint;
  std::string out_dir;
  std::string precision;
  std::int64_t seed = -1;
};

specmtm::cli::RunConfig load_config(const CommonArgs& args, bool required) {
  specmtm::cli::RunConfig cfg;
  if (!args.config_path.empty()) {
    cfg = specmtm::cli::RunConfig::from_file(args.config_path);
  } else if (required) {
    throw std::runtime_error("--config is required for this command");
  }
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (!args.precision.empty()) cfg.training.precision = args.precision;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_checkpoint) {
  cmd->add_option("--config", args.config_path, "Path to the JSON run config");
  cmd->add_option("--seed", args.seed, "Root seed for all randomness");
  cmd->add_option("--out", args.out_dir, "Output directory for run artifacts");
  cmd->add_option("--precision", args.precision, "Compute precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  if (with_checkpoint) {
    cmd->add_option("--checkpoint", args.checkpoint,
                    "Checkpoint produced by `pretrain`")
        ->required();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked time-series pre-training with a spectral decoder"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* pretrain = app.add_subcommand(
      "pretrain", "Train both reconstruction branches; writes loss.csv and a "
                  "checkpoint");
  add_common(pretrain, args, false);
  CLI::App* finetune = app.add_subcommand(
      "finetune", "Update all weights from a checkpoint with the "
                  "classification loss");
  add_common(finetune, args, true);
  CLI::App* probe = app.add_subcommand(
      "probe", "Freeze the encoder and train only the linear head");
  add_common(probe, args, true);
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "Emit interaction ranks, band energies and the learned "
                  "response curve");
  add_common(diagnose, args, true);
  CLI::App* verify = app.add_subcommand(
      "verify", "Run the numerical property suite; nonzero exit on failure");
  (void)verify;

  CLI11_PARSE(app, argc, argv);

  try {
    if (pretrain->parsed()) {
      auto cfg = load_config(args, true);
      auto result = specmtm::trainer::run_pretrain(cfg);
      std::cout << "pretrain done: first-epoch loss "
                << result.epoch_losses.front() << ", final loss "
                << result.epoch_losses.back() << "\n";
      std::cout << "checkpoint: " << result.checkpoint_path << "\n";
    } else if (finetune->parsed()) {
      auto cfg = load_config(args, true);
      auto result = specmtm::trainer::run_finetune(cfg, args.checkpoint);
      std::cout << "finetune done: train acc " << result.train_accuracy
                << ", test acc " << result.test_accuracy << "\n";
    } else if (probe->parsed()) {
      auto cfg = load_config(args, true);
      auto result = specmtm::trainer::run_probe(cfg, args.checkpoint);
      std::cout << "probe done: train acc " << result.train_accuracy
                << ", test acc " << result.test_accuracy << "\n";
    } else if (diagnose->parsed()) {
      auto cfg = load_config(args, true);
      specmtm::trainer::run_diagnose(cfg, args.checkpoint);
      std::cout << "diagnostics written to " << cfg.out_dir << "/diag\n";
    } else if (verify->parsed()) {
      auto results = specmtm::verify::run_suite();
      const bool ok = specmtm::verify::report(results, std::cout);
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
