// SPDX-License-Identifier: Apache-2.0
#include "kbqa/baselines.hpp"

#include <algorithm>

namespace kbqa {

std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::Linear: return "linear";
    case Baseline::LinearVote: return "linear-vote";
    case Baseline::Bfs: return "bfs";
    case Baseline::Dfs: return "dfs";
    case Baseline::Random: return "random";
  }
  return "linear";
}

std::optional<Baseline> baseline_from_string(std::string_view name) {
  for (auto b : {Baseline::Linear, Baseline::LinearVote, Baseline::Bfs, Baseline::Dfs, Baseline::Random}) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

SearchResult run_linear(const std::string& question, const KnowledgeBase& kb, AgentBackend& agent, int runs,
                        const SearchConfig& config, const Scorer& scorer) {
  SearchResult result;
  result.strategy = runs > 1 ? "linear-vote" : "linear";
  result.tree = SearchTree(question);
  result.stop_reason = "budget";
  SearchTree& tree = result.tree;
  std::size_t iteration = 0;

  for (int run = 0; run < runs; ++run) {
    std::size_t cur = 0;
    while (tree.node(cur).depth < static_cast<std::size_t>(config.max_rounds)) {
      auto proposal =
          propose_actions(agent, tree.state_of(cur), 1, config.temperature_agent, static_cast<std::uint64_t>(run));
      ++result.stats.expansions;
      ++result.stats.iterations;
      result.stats.parse_failures += proposal.parse_failures;
      result.stats.transport_errors += proposal.transport_error ? 1 : 0;
      tree.node(cur).expansions += 1;
      if (proposal.actions.empty()) break;

      Action action = std::move(proposal.actions.front());
      std::optional<Observation> obs;
      if (action.tool != Tool::Done) obs = execute_action(kb, action, scorer);
      std::string fp = observation_fingerprint(action, obs.value_or(Observation{}));
      bool done = action.tool == Tool::Done;
      auto child = tree.add_child(cur, std::move(action), std::move(obs), std::move(fp), iteration++);
      backpropagate(tree, child, 0.0, config);
      if (done) {
        auto& node = tree.node(child);
        node.terminal = true;
        node.prediction = valid_terminal_prediction(tree, child);
        node.valid_terminal = node.prediction.has_value();
        ++(node.valid_terminal ? result.stats.valid_terminals : result.stats.invalid_terminals);
        break;
      }
      cur = child;
    }
  }

  result.stats.node_count = tree.size();
  for (const auto& node : tree.nodes()) result.stats.max_depth = std::max(result.stats.max_depth, node.depth);
  result.terminal_predictions = collect_predictions(tree);
  auto voted = vote(result.terminal_predictions);
  result.answer = std::move(voted.answer);
  result.chosen_sparql = std::move(voted.sparql);
  return result;
}

SearchResult run_bfs(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                     const RewardConfig& reward, const SearchConfig& config) {
  return run_search(question, kb, backends, reward, config, Strategy::Bfs);
}

SearchResult run_dfs(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                     const RewardConfig& reward, const SearchConfig& config) {
  return run_search(question, kb, backends, reward, config, Strategy::Dfs);
}

SearchResult run_random(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                        const RewardConfig& reward, const SearchConfig& config) {
  RewardConfig random = reward;
  random.mode = RewardMode::Random;
  auto result = run_search(question, kb, backends, random, config, Strategy::Mcts);
  result.strategy = "random";
  return result;
}

SearchResult run_baseline(Baseline b, const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                          const RewardConfig& reward, const SearchConfig& config) {
  switch (b) {
    case Baseline::Linear: return run_linear(question, kb, backends.agent, 1, config);
    case Baseline::LinearVote: return run_linear(question, kb, backends.agent, 5, config);
    case Baseline::Bfs: return run_bfs(question, kb, backends, reward, config);
    case Baseline::Dfs: return run_dfs(question, kb, backends, reward, config);
    case Baseline::Random: return run_random(question, kb, backends, reward, config);
  }
  return run_linear(question, kb, backends.agent, 1, config);
}

}  // namespace kbqa
