// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kbqa/chat.hpp"
#include "kbqa/tools.hpp"

namespace kbqa {

struct Step {
  Action action;
  std::optional<Observation> observation;  // absent only for Done
};

/// Root-to-node interaction history. The root state has an empty history.
struct AgentState {
  std::string question;
  std::vector<Step> history;

  std::size_t depth() const { return history.size(); }
};

/// Static parts of the agent prompt (tool documentation and format rules).
struct AgentPrompt {
  std::string system;

  /// Reads `<dir>/agent_system.txt`.
  static AgentPrompt load(const std::string& dir);
};

/// "Thought: ...\nAction: Tool(argument)"
std::string render_action(const Action& action);
/// Only the "Tool(argument)" part.
std::string render_tool_call(const Action& action);

/// system, user(question), then assistant(action) / user(observation) pairs.
std::vector<ChatMessage> render_state_prompt(const AgentState& state, const AgentPrompt& prompt);

struct ParseFailure {
  std::string reason;
};

/// Extracts the thought and exactly one "Action: Tool(argument)" line.
std::variant<Action, ParseFailure> parse_agent_output(std::string_view text);

/// Source of raw agent completions for a state.
class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  /// `attempt` distinguishes repeated calls on the same state (re-expansion,
  /// linear runs) so deterministic backends can vary their output.
  /// Throws TransportError.
  virtual std::vector<std::string> complete(const AgentState& state, int n, double temperature,
                                            std::uint64_t attempt) = 0;
};

/// Agent served behind a chat-completion transport.
class ChatAgentBackend : public AgentBackend {
 public:
  ChatAgentBackend(ChatTransport& transport, std::string model, AgentPrompt prompt)
      : transport_(transport), model_(std::move(model)), prompt_(std::move(prompt)) {}
  std::vector<std::string> complete(const AgentState& state, int n, double temperature,
                                    std::uint64_t attempt) override;

 private:
  ChatTransport& transport_;
  std::string model_;
  AgentPrompt prompt_;
};

struct Proposal {
  std::vector<Action> actions;
  std::size_t parse_failures = 0;
  std::optional<std::string> transport_error;
};

/// Parses up to n completions; unparseable ones are dropped and counted.
Proposal propose_actions(AgentBackend& backend, const AgentState& state, int n, double temperature,
                         std::uint64_t attempt = 0);

}  // namespace kbqa
