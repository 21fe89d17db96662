// SPDX-License-Identifier: Apache-2.0
// Synthetic knowledge bases with planted gold paths and decoy branches.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kbqa/dataset.hpp"
#include "kbqa/kb.hpp"
#include "kbqa/scripted.hpp"

namespace kbqa::testing {

enum class DecoyEnd {
  Wrong,  // a query with a wrong, non-empty answer, then Done: a valid terminal
  Empty,  // a query with no result, then Done: an invalid terminal
};

struct PlantedOptions {
  std::size_t questions = 50;
  std::size_t decoys = 6;       // decoy branches per question
  std::size_t decoy_depth = 6;  // search steps a decoy takes after leaving the gold path
  DecoyEnd decoy_end = DecoyEnd::Empty;
  bool gold = true;  // false: the gold answer is unreachable
  double gold_weight = 2.0;
  double decoy_weight = 1.0;
  std::uint64_t seed = 7;
};

/// Per question: an anchor entity with two answers behind one predicate, a
/// four-step gold branch (find, inspect, query, Done) and decoy branches.
/// Decoy d follows the first d % 3 gold steps, then wanders through
/// unrelated entities. Without a gold branch the decoys still leave from the
/// same points.
struct PlantedSet {
  std::string kb_jsonl;
  KnowledgeBase kb;
  std::vector<DatasetRecord> dataset;
  ScriptedFixture fixture;
  std::size_t gold_depth = 4;  // depth of the gold Done node
};

PlantedSet make_planted(const PlantedOptions& options);

/// Per question: five valid branches (find the anchor, run one of five
/// queries with distinct non-empty answers, Done) and four invalid ones
/// (Done at the root, Done after a search, Done after an empty query, Done
/// after a malformed query). Valid branches are marked gold.
PlantedSet make_termination_set(std::size_t questions, std::uint64_t seed);

/// Agent completion text for one step.
std::string step_search_nodes(const std::string& text, const std::string& thought = "Locate the entity.");
std::string step_graph_patterns(const std::string& node_id, const std::string& hint);
std::string step_sparql(const std::string& query, const std::string& thought = "Run the query.");
std::string step_done();

/// Deterministic pronounceable words, unique within one call.
std::vector<std::string> make_words(std::size_t count, std::uint64_t seed);

}  // namespace kbqa::testing
