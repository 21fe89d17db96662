// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kbqa/chat.hpp"
#include "kbqa/mcts.hpp"
#include "kbqa/reward.hpp"

namespace kbqa {

/// Everything a batch run needs besides its input files. Field names in the
/// JSON file follow the hyper-parameter table: early_stop_k, max_simulations,
/// depth_penalty, max_preferred_depth, max_rounds, n_agent, n_reward,
/// temperature_agent, temperature_reward.
struct RunConfig {
  SearchConfig search;
  RewardMode reward_mode = RewardMode::Rule;
  int n_reward = 10;
  double temperature_reward = 0.7;
  std::string prompt_dir;  // agent_system.txt and the evaluator prompt pieces
  double annotate_threshold = 0.67;
  std::optional<EndpointConfig> agent_endpoint;
  std::optional<EndpointConfig> reward_endpoint;

  std::string to_json() const;
};

struct ConfigResult {
  RunConfig config;
  std::vector<std::string> errors;  // every problem found; empty when valid
};

/// Unknown keys, wrong types and out-of-range values are all reported.
/// A relative prompt_dir is resolved against `base_dir` when one is given.
ConfigResult parse_config(const std::string& text, const std::string& base_dir = {});
ConfigResult load_config(const std::string& path);

}  // namespace kbqa
