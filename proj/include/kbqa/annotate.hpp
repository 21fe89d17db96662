// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kbqa/dataset.hpp"
#include "kbqa/mcts.hpp"

namespace kbqa {

inline constexpr double kDefaultAnnotateThreshold = 0.67;

struct Trajectory {
  std::string id;
  std::string question;
  std::vector<Step> turns;  // ends with Done
  double f1 = 0;
  std::string sparql;
  std::string gold_sparql;
};

struct AnnotationOutcome {
  std::optional<Trajectory> trajectory;
  std::string skip_reason;  // "budget", "gold_empty" or "gold_error: ..."
  SearchResult search;
};

/// Runs the search and stops at the first valid terminal whose answers reach
/// `threshold` F1 against the gold answers.
AnnotationOutcome annotate_question(const DatasetRecord& record, const KnowledgeBase& kb, SearchBackends backends,
                                    const RewardConfig& reward, const SearchConfig& config,
                                    double threshold = kDefaultAnnotateThreshold);

/// Manifest line followed by one chat-format record per trajectory.
std::string export_training_file(const std::vector<Trajectory>& trajectories, const AgentPrompt& prompt);

/// Trajectories recovered from an exported file by re-parsing the assistant turns.
std::vector<Trajectory> parse_training_file(const std::string& text);

/// Re-executes every non-Done turn. Returns the indices of turns whose
/// observation text differs from the recorded one.
std::vector<std::size_t> replay_mismatches(const Trajectory& t, const KnowledgeBase& kb,
                                           const Scorer& scorer = default_scorer());

struct SkipRecord {
  std::string id;
  std::string reason;
};
std::string skip_report_csv(const std::vector<SkipRecord>& skips);

}  // namespace kbqa
