// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "kbqa/mcts.hpp"

namespace kbqa {

enum class Baseline { Linear, LinearVote, Bfs, Dfs, Random };

std::string_view to_string(Baseline b);
std::optional<Baseline> baseline_from_string(std::string_view name);

/// `runs` independent single-action chains from the question to Done or
/// max_rounds. Valid terminals across runs are voted on. All chains live in
/// one tree under the root so the trace format matches the search's.
SearchResult run_linear(const std::string& question, const KnowledgeBase& kb, AgentBackend& agent, int runs,
                        const SearchConfig& config, const Scorer& scorer = default_scorer());

SearchResult run_bfs(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                     const RewardConfig& reward, const SearchConfig& config);
SearchResult run_dfs(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                     const RewardConfig& reward, const SearchConfig& config);
/// The search loop with uniform random rewards in place of the evaluator.
SearchResult run_random(const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                        const RewardConfig& reward, const SearchConfig& config);

/// Dispatches on `b`. Linear uses one run, LinearVote five.
SearchResult run_baseline(Baseline b, const std::string& question, const KnowledgeBase& kb, SearchBackends backends,
                          const RewardConfig& reward, const SearchConfig& config);

}  // namespace kbqa
