// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kbqa/agent.hpp"
#include "kbqa/kb.hpp"
#include "kbqa/reward.hpp"
#include "kbqa/tools.hpp"

namespace kbqa {

/// Which node depth scales the backpropagation decay.
enum class DecayDepth {
  PerNode,    // each updated ancestor uses its own depth
  Evaluated,  // every ancestor uses the depth of the evaluated node
};

/// How the next node to expand is chosen. Everything else in the loop is shared.
enum class Strategy { Mcts, Bfs, Dfs, RandomSelect };

std::string_view to_string(Strategy s);

struct SearchConfig {
  int n_expand = 5;
  int k_early_stop = 5;
  double gamma = 0.1;
  int d_exp = 5;
  int max_simulations = 50;
  int max_rounds = 12;
  double temperature_agent = 1.0;
  std::uint64_t seed = 0;
  DecayDepth decay = DecayDepth::PerNode;
  int exhaustion_limit = 2;  // consecutive fruitless expansions before a node is retired

  /// Every violated constraint, empty when valid.
  std::vector<std::string> validate() const;
};

struct Prediction {
  std::string sparql;
  AnswerSet answers;
};

struct SearchNode {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  std::optional<Action> action;            // absent only at the root
  std::optional<Observation> observation;  // absent at the root and for Done
  std::string fingerprint;
  double w = 0;
  std::uint64_t n = 0;
  std::size_t depth = 0;
  bool terminal = false;
  bool valid_terminal = false;
  bool exhausted = false;
  std::optional<Prediction> prediction;  // iff valid_terminal

  // Bookkeeping for the loop and the trace.
  int expansions = 0;
  int fruitless = 0;
  std::optional<double> reward;
  bool reward_degraded = false;
  std::vector<RewardSample> reward_samples;
  std::size_t created_iteration = 0;
};

class SearchTree {
 public:
  explicit SearchTree(std::string question);

  const std::string& question() const { return question_; }
  const SearchNode& root() const { return nodes_.front(); }
  const SearchNode& node(std::size_t id) const { return nodes_.at(id); }
  SearchNode& node(std::size_t id) { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<SearchNode>& nodes() const { return nodes_; }

  std::size_t add_child(std::size_t parent, Action action, std::optional<Observation> obs, std::string fingerprint,
                        std::size_t iteration);

  /// Node ids from the root to `id`, inclusive.
  std::vector<std::size_t> path(std::size_t id) const;
  AgentState state_of(std::size_t id) const;

 private:
  std::string question_;
  std::vector<SearchNode> nodes_;
};

/// w/n + sqrt(2 ln(N) / n). Requires n >= 1.
double uct(double w, std::uint64_t n, std::uint64_t parent_visits);

/// max(0, 1 - gamma * max(0, depth - d_exp)).
double decay_factor(std::size_t depth, double gamma, int d_exp);

/// Adds r to every node on the root-to-`id` path with the depth decay applied.
void backpropagate(SearchTree& tree, std::size_t id, double r, const SearchConfig& config);

bool is_selectable(const SearchNode& node, const SearchConfig& config);

/// UCT score used by selection: +inf for unvisited nodes; the root uses its own
/// visit count as N.
double selection_score(const SearchTree& tree, const SearchNode& node);

/// Global argmax of UCT over selectable nodes; ties by smaller depth, then
/// creation order.
std::optional<std::size_t> select(const SearchTree& tree, const SearchConfig& config);

std::optional<std::size_t> select_with(const SearchTree& tree, const SearchConfig& config, Strategy strategy,
                                       std::mt19937_64& rng);

/// Valid iff the node's action is Done and its parent executed a query with an
/// error-free, non-empty result. Returns the parent's query and answers.
std::optional<Prediction> valid_terminal_prediction(const SearchTree& tree, std::size_t id);
bool is_valid_terminal(const SearchTree& tree, std::size_t id);

struct ExpansionResult {
  std::vector<std::size_t> children;
  std::size_t proposals = 0;
  std::size_t duplicates = 0;
  std::size_t parse_failures = 0;
  bool transport_error = false;
};

ExpansionResult expand(SearchTree& tree, std::size_t id, AgentBackend& agent, const KnowledgeBase& kb,
                       const SearchConfig& config, std::size_t iteration = 0, const Scorer& scorer = default_scorer());

struct TerminalPrediction {
  std::size_t node = 0;
  std::string sparql;
  AnswerSet answers;
  double branch_reward = 0;
};

struct VoteResult {
  AnswerSet answer;
  std::optional<std::string> sparql;
  std::optional<std::size_t> node;
};

/// Most frequent answer set; ties by higher mean branch reward, then earliest node.
VoteResult vote(const std::vector<TerminalPrediction>& predictions);

struct TreeStats {
  std::size_t node_count = 0;
  std::size_t max_depth = 0;
  std::size_t iterations = 0;
  std::size_t expansions = 0;
  std::size_t parse_failures = 0;
  std::size_t transport_errors = 0;
  std::size_t degraded_rewards = 0;
  std::size_t valid_terminals = 0;
  std::size_t invalid_terminals = 0;
};

struct SearchResult {
  std::string strategy;
  AnswerSet answer;
  std::optional<std::string> chosen_sparql;
  std::vector<TerminalPrediction> terminal_predictions;
  TreeStats stats;
  std::string stop_reason;  // "early_stop" | "budget" | "no_selectable" | "hook"
  SearchTree tree{""};
};

struct SearchHooks {
  /// Called after each new valid terminal; returning true ends the search.
  std::function<bool(const SearchTree&, std::size_t)> on_valid_terminal;
};

struct SearchBackends {
  AgentBackend& agent;
  RewardBackend& reward;
};

/// select -> expand -> evaluate -> backpropagate until k valid terminals, the
/// simulation budget, or no selectable node remains; then votes.
SearchResult run_search(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                        const RewardConfig& reward_config, const SearchConfig& config,
                        Strategy strategy = Strategy::Mcts, const SearchHooks& hooks = {},
                        const Scorer& scorer = default_scorer());

std::vector<TerminalPrediction> collect_predictions(const SearchTree& tree);
double branch_reward(const SearchTree& tree, std::size_t id);

/// JSON-lines: one summary record, then one record per node in creation order.
std::string trace_jsonl(const SearchResult& result);

/// Per-question RNG seed derived from the run seed and question text.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt);

}  // namespace kbqa
