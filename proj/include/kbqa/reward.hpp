// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kbqa/agent.hpp"
#include "kbqa/chat.hpp"

namespace kbqa {

enum class RewardMode { Rule, Direct, Random };

std::string_view to_string(RewardMode mode);
std::optional<RewardMode> reward_mode_from_string(std::string_view name);

/// Prompt pieces for the evaluator, loaded from a prompt directory:
/// task.txt, guidelines.txt, exemplars.txt, tools.txt, format.txt.
struct RewardPrompts {
  std::string task;
  std::string guidelines;
  std::string exemplars;
  std::string tools;
  std::string format;

  /// Throws std::runtime_error naming the missing asset file.
  static RewardPrompts load(const std::string& dir);
};

struct RewardConfig {
  RewardMode mode = RewardMode::Rule;
  int samples = 10;  // n_r
  double temperature = 0.7;
  RewardPrompts prompts;
};

struct RewardSample {
  std::string raw;
  std::optional<double> value;  // in [0, 1]; empty on parse failure
};

struct RewardOutcome {
  double value = 0.5;
  bool degraded = false;
  std::vector<RewardSample> samples;
};

/// Source of raw evaluator completions. The state is passed alongside the
/// rendered prompt so offline backends can judge it without re-parsing text.
class RewardBackend {
 public:
  virtual ~RewardBackend() = default;
  /// Throws TransportError.
  virtual std::vector<std::string> complete(const std::vector<ChatMessage>& prompt, const AgentState& state,
                                            RewardMode mode, int n, double temperature) = 0;
};

class ChatRewardBackend : public RewardBackend {
 public:
  ChatRewardBackend(ChatTransport& transport, std::string model) : transport_(transport), model_(std::move(model)) {}
  std::vector<std::string> complete(const std::vector<ChatMessage>& prompt, const AgentState& state, RewardMode mode,
                                    int n, double temperature) override;

 private:
  ChatTransport& transport_;
  std::string model_;
};

/// Question plus every (thought, action, observation) turn, numbered.
std::string render_state_for_eval(const AgentState& state);

/// Rule mode: task, guidelines, exemplars, format. Direct mode: tool
/// descriptions and format only. Throws std::invalid_argument for Random.
std::vector<ChatMessage> build_eval_prompt(const AgentState& state, RewardMode mode, const RewardPrompts& prompts);

/// Last "Score: <0..10>" divided by 10.
std::optional<double> parse_score(std::string_view text);

/// Mean of the parsed samples; 0.5 with `degraded` when nothing parses or the
/// backend fails. Random mode draws from `rng` and never calls the backend.
RewardOutcome score_state(RewardBackend& backend, const RewardConfig& config, const AgentState& state,
                          std::mt19937_64& rng);

double uniform01(std::mt19937_64& rng);

// --- score stability -------------------------------------------------------

struct NodeSamples {
  std::size_t depth = 0;
  std::vector<RewardSample> samples;
};

struct StabilityRow {
  std::size_t depth = 0;
  std::size_t node_count = 0;
  double mean_std = 0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;  // ascending depth
  std::size_t excluded = 0;        // nodes with fewer than two parsed samples
};

double population_std(const std::vector<double>& values);
StabilityReport score_stability(const std::vector<NodeSamples>& nodes);
/// "depth,node_count,mean_std" header plus one line per depth.
std::string stability_csv(const StabilityReport& report);

}  // namespace kbqa
