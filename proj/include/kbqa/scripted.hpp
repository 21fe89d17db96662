// SPDX-License-Identifier: Apache-2.0
#pragma once

// Offline agent and evaluator backends driven by a fixture of scripted
// branches. They make searches reproducible without a model endpoint.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbqa/agent.hpp"
#include "kbqa/reward.hpp"

namespace kbqa {

struct ScriptedBranch {
  double weight = 1.0;
  bool gold = false;
  std::vector<std::string> steps;  // raw agent completions, one per step
  std::vector<std::optional<Action>> parsed;
};

struct ScriptedQuestion {
  std::string question;
  std::vector<ScriptedBranch> branches;
};

/// JSON-lines: {"question", "branches": [{"weight", "gold", "steps": [...]}]}.
class ScriptedFixture {
 public:
  static ScriptedFixture parse(const std::string& text);
  static ScriptedFixture load(const std::string& path);

  void add(ScriptedQuestion q);
  const ScriptedQuestion* find(const std::string& question) const;
  std::string to_jsonl() const;
  std::size_t size() const { return questions_.size(); }

 private:
  std::map<std::string, ScriptedQuestion> questions_;
  std::vector<std::string> order_;
};

/// True when every step of `history` matches the branch's step at the same
/// position on tool and argument.
bool branch_matches(const ScriptedBranch& branch, const std::vector<Step>& history);

/// Samples next steps from the branches consistent with the history, weighted
/// by branch weight. Sampling is seeded by (seed, question, history, attempt).
/// With no consistent branch it answers with a plain Done.
class ScriptedAgent : public AgentBackend {
 public:
  ScriptedAgent(const ScriptedFixture& fixture, std::uint64_t seed) : fixture_(fixture), seed_(seed) {}
  std::vector<std::string> complete(const AgentState& state, int n, double temperature,
                                    std::uint64_t attempt) override;

 private:
  const ScriptedFixture& fixture_;
  std::uint64_t seed_;
};

/// Rule mode scores 10 for a prefix of a gold branch and 0 otherwise. Direct
/// mode adds seeded noise: gold prefixes draw from 4..10, others from 0..6.
class ScriptedReward : public RewardBackend {
 public:
  ScriptedReward(const ScriptedFixture& fixture, std::uint64_t seed) : fixture_(fixture), seed_(seed) {}
  std::vector<std::string> complete(const std::vector<ChatMessage>& prompt, const AgentState& state, RewardMode mode,
                                    int n, double temperature) override;

 private:
  const ScriptedFixture& fixture_;
  std::uint64_t seed_;
};

/// Stable digest of a question plus a history, used to seed scripted backends.
std::uint64_t history_digest(std::uint64_t seed, const AgentState& state);

}  // namespace kbqa
