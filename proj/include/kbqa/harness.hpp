// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace kbqa {

inline constexpr const char* kVersion = "0.1.0";

struct HarnessOptions {
  std::string command;  // search | baseline | annotate | eval | reward-stats
  std::string config_path;
  std::string dataset_path;
  std::string kb_path;
  std::string out_dir;
  std::string strategy;  // baseline only
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<std::string> reward_mode;
  /// "scripted:<fixture>", "replay:<fixture>" or "endpoint".
  std::string agent = "endpoint";
  std::string predictions_path;  // eval only; defaults to <out>/predictions.jsonl
};

/// Runs one command and writes its artifacts under out_dir. Returns the
/// process exit status: 0 on success, 2 on invalid options or config, 1 when
/// inputs cannot be loaded. Per-question failures are logged and recorded in
/// the prediction file without stopping the run.
int run_experiment(const HarnessOptions& options, std::ostream& log);

/// File-system safe form of a question id.
std::string safe_file_name(const std::string& id);

}  // namespace kbqa
