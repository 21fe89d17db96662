// SPDX-License-Identifier: Apache-2.0
#include "kbqa/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Mcts: return "mcts";
    case Strategy::Bfs: return "bfs";
    case Strategy::Dfs: return "dfs";
    case Strategy::RandomSelect: return "random-select";
  }
  return "mcts";
}

std::vector<std::string> SearchConfig::validate() const {
  std::vector<std::string> errors;
  if (n_expand < 1) errors.push_back("n_agent must be >= 1");
  if (k_early_stop < 1) errors.push_back("early_stop_k must be >= 1");
  if (!(gamma >= 0 && gamma < 1)) errors.push_back("depth_penalty must be in [0, 1)");
  if (d_exp < 0) errors.push_back("max_preferred_depth must be >= 0");
  if (max_simulations < 1) errors.push_back("max_simulations must be >= 1");
  if (max_rounds < 1) errors.push_back("max_rounds must be >= 1");
  if (!(temperature_agent >= 0)) errors.push_back("temperature_agent must be >= 0");
  if (exhaustion_limit < 1) errors.push_back("exhaustion_limit must be >= 1");
  return errors;
}

SearchTree::SearchTree(std::string question) : question_(std::move(question)) { nodes_.emplace_back(); }

std::size_t SearchTree::add_child(std::size_t parent, Action action, std::optional<Observation> obs,
                                  std::string fingerprint, std::size_t iteration) {
  SearchNode child;
  child.id = nodes_.size();
  child.parent = parent;
  child.depth = nodes_.at(parent).depth + 1;
  child.action = std::move(action);
  child.observation = std::move(obs);
  child.fingerprint = std::move(fingerprint);
  child.created_iteration = iteration;
  nodes_.push_back(std::move(child));
  nodes_[parent].children.push_back(nodes_.back().id);
  return nodes_.back().id;
}

std::vector<std::size_t> SearchTree::path(std::size_t id) const {
  std::vector<std::size_t> out;
  std::optional<std::size_t> cur = id;
  while (cur) {
    out.push_back(*cur);
    cur = nodes_.at(*cur).parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

AgentState SearchTree::state_of(std::size_t id) const {
  AgentState state{question_, {}};
  for (auto step : path(id)) {
    const auto& n = nodes_[step];
    if (!n.action) continue;
    state.history.push_back({*n.action, n.observation});
  }
  return state;
}

double uct(double w, std::uint64_t n, std::uint64_t parent_visits) {
  double nn = static_cast<double>(n);
  return w / nn + std::sqrt(2.0 * std::log(static_cast<double>(parent_visits)) / nn);
}

double decay_factor(std::size_t depth, double gamma, int d_exp) {
  double excess = std::max(0.0, static_cast<double>(depth) - static_cast<double>(d_exp));
  return std::max(0.0, 1.0 - gamma * excess);
}

void backpropagate(SearchTree& tree, std::size_t id, double r, const SearchConfig& config) {
  std::size_t evaluated_depth = tree.node(id).depth;
  for (auto step : tree.path(id)) {
    auto& node = tree.node(step);
    std::size_t d = config.decay == DecayDepth::PerNode ? node.depth : evaluated_depth;
    node.n += 1;
    node.w += r * decay_factor(d, config.gamma, config.d_exp);
  }
}

bool is_selectable(const SearchNode& node, const SearchConfig& config) {
  return !node.terminal && !node.exhausted && node.depth < static_cast<std::size_t>(config.max_rounds);
}

double selection_score(const SearchTree& tree, const SearchNode& node) {
  if (node.n == 0) return std::numeric_limits<double>::infinity();
  std::uint64_t parent_visits = node.parent ? tree.node(*node.parent).n : node.n;
  return uct(node.w, node.n, parent_visits);
}

std::optional<std::size_t> select(const SearchTree& tree, const SearchConfig& config) {
  std::optional<std::size_t> best;
  double best_score = 0;
  for (const auto& node : tree.nodes()) {
    if (!is_selectable(node, config)) continue;
    double s = selection_score(tree, node);
    if (!best) {
      best = node.id;
      best_score = s;
      continue;
    }
    const auto& b = tree.node(*best);
    // Nodes are visited in creation order, so ties on depth keep the earlier node.
    if (s > best_score || (s == best_score && node.depth < b.depth)) {
      best = node.id;
      best_score = s;
    }
  }
  return best;
}

std::optional<std::size_t> select_with(const SearchTree& tree, const SearchConfig& config, Strategy strategy,
                                       std::mt19937_64& rng) {
  switch (strategy) {
    case Strategy::Mcts: return select(tree, config);
    case Strategy::Bfs:
    case Strategy::Dfs: {
      std::optional<std::size_t> best;
      for (const auto& node : tree.nodes()) {
        if (!is_selectable(node, config) || node.expansions > 0) continue;
        if (!best) {
          best = node.id;
          continue;
        }
        std::size_t bd = tree.node(*best).depth;
        bool better = strategy == Strategy::Bfs ? node.depth < bd : node.depth > bd;
        if (better) best = node.id;
      }
      return best;
    }
    case Strategy::RandomSelect: {
      std::vector<std::size_t> pool;
      for (const auto& node : tree.nodes()) {
        if (is_selectable(node, config)) pool.push_back(node.id);
      }
      if (pool.empty()) return std::nullopt;
      auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size()));
      return pool[std::min(pick, pool.size() - 1)];
    }
  }
  return std::nullopt;
}

std::optional<Prediction> valid_terminal_prediction(const SearchTree& tree, std::size_t id) {
  const auto& node = tree.node(id);
  if (!node.action || node.action->tool != Tool::Done || !node.parent) return std::nullopt;
  const auto& parent = tree.node(*node.parent);
  if (!parent.action || parent.action->tool != Tool::ExecuteSPARQL || !parent.observation) return std::nullopt;
  if (parent.observation->error || parent.observation->answers.empty()) return std::nullopt;
  return Prediction{parent.action->argument, parent.observation->answers};
}

bool is_valid_terminal(const SearchTree& tree, std::size_t id) { return valid_terminal_prediction(tree, id).has_value(); }

ExpansionResult expand(SearchTree& tree, std::size_t id, AgentBackend& agent, const KnowledgeBase& kb,
                       const SearchConfig& config, std::size_t iteration, const Scorer& scorer) {
  ExpansionResult result;
  AgentState state = tree.state_of(id);
  auto attempt = static_cast<std::uint64_t>(tree.node(id).expansions);
  Proposal proposal = propose_actions(agent, state, config.n_expand, config.temperature_agent, attempt);
  tree.node(id).expansions += 1;
  result.proposals = proposal.actions.size();
  result.parse_failures = proposal.parse_failures;
  result.transport_error = proposal.transport_error.has_value();

  std::set<std::string> seen;
  for (auto child : tree.node(id).children) seen.insert(tree.node(child).fingerprint);

  for (auto& action : proposal.actions) {
    std::optional<Observation> obs;
    if (action.tool != Tool::Done) obs = execute_action(kb, action, scorer);
    std::string fp = observation_fingerprint(action, obs.value_or(Observation{}));
    if (!seen.insert(fp).second) {
      ++result.duplicates;
      continue;
    }
    bool done = action.tool == Tool::Done;
    auto child = tree.add_child(id, std::move(action), std::move(obs), std::move(fp), iteration);
    if (done) {
      auto& node = tree.node(child);
      node.terminal = true;
      node.prediction = valid_terminal_prediction(tree, child);
      node.valid_terminal = node.prediction.has_value();
    }
    result.children.push_back(child);
  }

  auto& node = tree.node(id);
  if (result.children.empty()) {
    if (++node.fruitless >= config.exhaustion_limit) node.exhausted = true;
  } else {
    node.fruitless = 0;
  }
  return result;
}

double branch_reward(const SearchTree& tree, std::size_t id) {
  double sum = 0;
  std::size_t count = 0;
  for (auto step : tree.path(id)) {
    const auto& n = tree.node(step);
    if (n.terminal || !n.reward) continue;
    sum += *n.reward;
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<TerminalPrediction> collect_predictions(const SearchTree& tree) {
  std::vector<TerminalPrediction> out;
  for (const auto& node : tree.nodes()) {
    if (!node.valid_terminal || !node.prediction) continue;
    out.push_back({node.id, node.prediction->sparql, node.prediction->answers, branch_reward(tree, node.id)});
  }
  return out;
}

VoteResult vote(const std::vector<TerminalPrediction>& predictions) {
  struct Group {
    std::size_t count = 0;
    double reward_sum = 0;
    const TerminalPrediction* first = nullptr;
  };
  std::map<AnswerSet, Group> groups;
  for (const auto& p : predictions) {
    auto& g = groups[p.answers];
    ++g.count;
    g.reward_sum += p.branch_reward;
    if (!g.first || p.node < g.first->node) g.first = &p;
  }
  const Group* best = nullptr;
  const AnswerSet* best_key = nullptr;
  for (const auto& [answers, g] : groups) {
    if (!best) {
      best = &g;
      best_key = &answers;
      continue;
    }
    double mean = g.reward_sum / static_cast<double>(g.count);
    double best_mean = best->reward_sum / static_cast<double>(best->count);
    bool better = g.count > best->count ||
                  (g.count == best->count &&
                   (mean > best_mean || (mean == best_mean && g.first->node < best->first->node)));
    if (better) {
      best = &g;
      best_key = &answers;
    }
  }
  VoteResult out;
  if (!best) return out;
  out.answer = *best_key;
  out.sparql = best->first->sparql;
  out.node = best->first->node;
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt) {
  return fnv1a64(salt, 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL));
}

SearchResult run_search(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                        const RewardConfig& reward_config, const SearchConfig& config, Strategy strategy,
                        const SearchHooks& hooks, const Scorer& scorer) {
  SearchResult result;
  result.strategy = std::string(to_string(strategy));
  result.tree = SearchTree(question);
  SearchTree& tree = result.tree;
  std::mt19937_64 rng(derive_seed(config.seed, question));
  // Only UCT consumes rewards; the traversal baselines treat all nodes alike.
  const bool scoring = strategy == Strategy::Mcts;

  std::size_t valid = 0;
  bool stop = false;
  result.stop_reason = "budget";
  for (int iter = 0; iter < config.max_simulations && !stop; ++iter) {
    if (valid >= static_cast<std::size_t>(config.k_early_stop)) {
      result.stop_reason = "early_stop";
      break;
    }
    auto selected = select_with(tree, config, strategy, rng);
    if (!selected) {
      result.stop_reason = "no_selectable";
      break;
    }
    ++result.stats.iterations;
    ++result.stats.expansions;
    auto iteration = static_cast<std::size_t>(iter);
    auto exp = expand(tree, *selected, backends.agent, kb, config, iteration, scorer);
    result.stats.parse_failures += exp.parse_failures;
    result.stats.transport_errors += exp.transport_error ? 1 : 0;

    for (auto child : exp.children) {
      auto& node = tree.node(child);
      if (!node.terminal) {
        RewardOutcome outcome;
        outcome.value = 0;
        if (scoring) outcome = score_state(backends.reward, reward_config, tree.state_of(child), rng);
        auto& fresh = tree.node(child);
        fresh.reward = outcome.value;
        fresh.reward_degraded = outcome.degraded;
        fresh.reward_samples = std::move(outcome.samples);
        result.stats.degraded_rewards += outcome.degraded ? 1 : 0;
        backpropagate(tree, child, outcome.value, config);
        continue;
      }
      const auto& parent = tree.node(*node.parent);
      backpropagate(tree, child, parent.reward.value_or(0.0), config);
      if (!tree.node(child).valid_terminal) {
        ++result.stats.invalid_terminals;
        continue;
      }
      ++valid;
      ++result.stats.valid_terminals;
      if (hooks.on_valid_terminal && hooks.on_valid_terminal(tree, child)) {
        result.stop_reason = "hook";
        stop = true;
        break;
      }
    }
  }
  if (!stop && valid >= static_cast<std::size_t>(config.k_early_stop)) result.stop_reason = "early_stop";

  result.stats.node_count = tree.size();
  for (const auto& node : tree.nodes()) result.stats.max_depth = std::max(result.stats.max_depth, node.depth);
  result.terminal_predictions = collect_predictions(tree);
  auto voted = vote(result.terminal_predictions);
  result.answer = std::move(voted.answer);
  result.chosen_sparql = std::move(voted.sparql);
  return result;
}

namespace {

json observation_json(const Observation& obs) {
  json j{{"text", obs.text}, {"item_count", obs.item_count}};
  j["error"] = obs.error ? json(*obs.error) : json(nullptr);
  return j;
}

}  // namespace

std::string trace_jsonl(const SearchResult& result) {
  const auto& tree = result.tree;
  std::string out;
  json summary{{"kind", "summary"},
               {"strategy", result.strategy},
               {"question", tree.question()},
               {"answer", result.answer},
               {"chosen_sparql", result.chosen_sparql ? json(*result.chosen_sparql) : json(nullptr)},
               {"stop_reason", result.stop_reason},
               {"stats",
                {{"node_count", result.stats.node_count},
                 {"max_depth", result.stats.max_depth},
                 {"iterations", result.stats.iterations},
                 {"expansions", result.stats.expansions},
                 {"parse_failures", result.stats.parse_failures},
                 {"transport_errors", result.stats.transport_errors},
                 {"degraded_rewards", result.stats.degraded_rewards},
                 {"valid_terminals", result.stats.valid_terminals},
                 {"invalid_terminals", result.stats.invalid_terminals}}}};
  out += summary.dump() + "\n";
  for (const auto& node : tree.nodes()) {
    json rec{{"kind", "node"},
             {"strategy", result.strategy},
             {"id", node.id},
             {"parent", node.parent ? json(*node.parent) : json(nullptr)},
             {"children", node.children},
             {"depth", node.depth},
             {"w", node.w},
             {"n", node.n},
             {"terminal", node.terminal},
             {"valid_terminal", node.valid_terminal},
             {"exhausted", node.exhausted},
             {"expansions", node.expansions},
             {"fingerprint", node.fingerprint},
             // Logical clock: the loop iteration that created the node.
             {"created_iteration", node.created_iteration}};
    if (node.action) {
      rec["action"] = {{"thought", node.action->thought},
                       {"tool", std::string(to_string(node.action->tool))},
                       {"argument", node.action->argument},
                       {"raw", node.action->raw}};
    } else {
      rec["action"] = nullptr;
    }
    rec["observation"] = node.observation ? observation_json(*node.observation) : json(nullptr);
    rec["reward"] = node.reward ? json(*node.reward) : json(nullptr);
    rec["reward_degraded"] = node.reward_degraded;
    json samples = json::array();
    for (const auto& s : node.reward_samples) {
      samples.push_back({{"raw", s.raw}, {"value", s.value ? json(*s.value) : json(nullptr)}});
    }
    rec["reward_samples"] = samples;
    if (node.prediction) {
      rec["prediction"] = {{"sparql", node.prediction->sparql}, {"answers", node.prediction->answers}};
    } else {
      rec["prediction"] = nullptr;
    }
    out += rec.dump() + "\n";
  }
  return out;
}

}  // namespace kbqa
