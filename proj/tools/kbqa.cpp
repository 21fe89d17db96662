// SPDX-License-Identifier: Apache-2.0
// Batch runner: searches, baselines, annotation, evaluation and reward statistics.
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "kbqa/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tree-search semantic parsing over a knowledge base"};
  app.require_subcommand(1);
  kbqa::HarnessOptions opt;
  std::optional<std::uint64_t> seed;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "JSON config file");
    cmd->add_option("--dataset", opt.dataset_path, "JSON-lines dataset");
    cmd->add_option("--kb", opt.kb_path, "JSON-lines knowledge base");
    cmd->add_option("--out", opt.out_dir, "output directory")->required();
    cmd->add_option("--seed", seed, "overrides the config seed");
    cmd->add_option("--workers", opt.workers, "questions searched in parallel");
    cmd->add_option("--reward-mode", opt.reward_mode, "rule, direct or random");
    cmd->add_option("--agent", opt.agent, "scripted:<fixture>, replay:<fixture> or endpoint");
  };

  auto* search = app.add_subcommand("search", "tree search over a dataset");
  add_run_flags(search);
  auto* baseline = app.add_subcommand("baseline", "baseline search over a dataset");
  add_run_flags(baseline);
  baseline->add_option("--strategy", opt.strategy, "linear, linear-vote, bfs, dfs or random")->required();
  auto* annotate = app.add_subcommand("annotate", "build training trajectories from gold queries");
  add_run_flags(annotate);
  auto* stats = app.add_subcommand("reward-stats", "evaluator score spread by depth");
  add_run_flags(stats);
  auto* eval = app.add_subcommand("eval", "metrics from a prediction file");
  eval->add_option("--predictions", opt.predictions_path, "defaults to <out>/predictions.jsonl");
  eval->add_option("--out", opt.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);
  auto* cmd = app.get_subcommands().front();
  opt.command = cmd->get_name();
  opt.seed = seed;
  return kbqa::run_experiment(opt, std::cerr);
}
