// SPDX-License-Identifier: Apache-2.0
#include "kbqa/reward.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kbqa/util.hpp"

namespace kbqa {

std::string_view to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::Rule: return "rule";
    case RewardMode::Direct: return "direct";
    case RewardMode::Random: return "random";
  }
  return "rule";
}

std::optional<RewardMode> reward_mode_from_string(std::string_view name) {
  for (auto m : {RewardMode::Rule, RewardMode::Direct, RewardMode::Random}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

RewardPrompts RewardPrompts::load(const std::string& dir) {
  auto part = [&](const char* name) {
    std::string path = dir + "/" + name;
    if (!std::filesystem::exists(path)) throw std::runtime_error("missing reward prompt asset: " + path);
    return read_file(path);
  };
  return RewardPrompts{part("task.txt"), part("guidelines.txt"), part("exemplars.txt"), part("tools.txt"),
                       part("format.txt")};
}

std::vector<std::string> ChatRewardBackend::complete(const std::vector<ChatMessage>& prompt, const AgentState&,
                                                     RewardMode, int n, double temperature) {
  return transport_.complete(ChatRequest{model_, prompt, n, temperature});
}

std::string render_state_for_eval(const AgentState& state) {
  std::ostringstream out;
  out << "Question: " << state.question << '\n';
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    const auto& step = state.history[i];
    out << "\nStep " << (i + 1) << ":\n" << render_action(step.action) << '\n';
    if (step.observation) out << "Observation: " << step.observation->text << '\n';
  }
  return out.str();
}

std::vector<ChatMessage> build_eval_prompt(const AgentState& state, RewardMode mode, const RewardPrompts& prompts) {
  std::string system;
  switch (mode) {
    case RewardMode::Rule:
      system = prompts.task + "\n\n" + prompts.guidelines + "\n\n" + prompts.exemplars + "\n\n" + prompts.format;
      break;
    case RewardMode::Direct:
      system = prompts.tools + "\n\n" + prompts.format;
      break;
    case RewardMode::Random:
      throw std::invalid_argument("random reward mode has no prompt");
  }
  return {{"system", system}, {"user", render_state_for_eval(state)}};
}

std::optional<double> parse_score(std::string_view text) {
  static constexpr std::string_view kTag = "Score:";
  auto at = text.rfind(kTag);
  if (at == std::string_view::npos) return std::nullopt;
  std::size_t i = at + kTag.size();
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  std::size_t start = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == start || i - start > 3) return std::nullopt;
  // "7.5" is not on the integer scale.
  if (i + 1 < text.size() && text[i] == '.' && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
    return std::nullopt;
  }
  int value = std::stoi(std::string(text.substr(start, i - start)));
  if (value < 0 || value > 10) return std::nullopt;
  return value / 10.0;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

RewardOutcome score_state(RewardBackend& backend, const RewardConfig& config, const AgentState& state,
                          std::mt19937_64& rng) {
  RewardOutcome out;
  if (config.mode == RewardMode::Random) {
    out.value = uniform01(rng);
    return out;
  }
  std::vector<std::string> completions;
  try {
    completions = backend.complete(build_eval_prompt(state, config.mode, config.prompts), state, config.mode,
                                   config.samples, config.temperature);
  } catch (const TransportError&) {
    out.value = 0.5;
    out.degraded = true;
    return out;
  }
  double sum = 0;
  std::size_t parsed = 0;
  for (auto& c : completions) {
    RewardSample s{std::move(c), std::nullopt};
    s.value = parse_score(s.raw);
    if (s.value) {
      sum += *s.value;
      ++parsed;
    }
    out.samples.push_back(std::move(s));
  }
  if (parsed == 0) {
    out.value = 0.5;
    out.degraded = true;
  } else {
    out.value = sum / static_cast<double>(parsed);
  }
  return out;
}

double population_std(const std::vector<double>& values) {
  if (values.empty()) return 0;
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

StabilityReport score_stability(const std::vector<NodeSamples>& nodes) {
  StabilityReport report;
  std::map<std::size_t, std::pair<double, std::size_t>> by_depth;
  for (const auto& node : nodes) {
    std::vector<double> values;
    for (const auto& s : node.samples) {
      if (s.value) values.push_back(*s.value);
    }
    if (values.size() < 2) {
      ++report.excluded;
      continue;
    }
    auto& acc = by_depth[node.depth];
    acc.first += population_std(values);
    ++acc.second;
  }
  for (const auto& [depth, acc] : by_depth) {
    report.rows.push_back({depth, acc.second, acc.first / static_cast<double>(acc.second)});
  }
  return report;
}

std::string stability_csv(const StabilityReport& report) {
  std::string out = "depth,node_count,mean_std\n";
  char buf[64];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", row.mean_std);
    out += std::to_string(row.depth) + "," + std::to_string(row.node_count) + "," + buf + "\n";
  }
  return out;
}

}  // namespace kbqa
