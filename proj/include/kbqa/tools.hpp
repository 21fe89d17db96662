// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbqa/kb.hpp"
#include "kbqa/query.hpp"

namespace kbqa {

enum class Tool { SearchNodes, SearchGraphPatterns, ExecuteSPARQL, Done };

std::string_view to_string(Tool tool);
std::optional<Tool> tool_from_string(std::string_view name);

/// One agent step. The thought is carried inside the action.
struct Action {
  std::string thought;
  Tool tool = Tool::Done;
  std::string argument;  // empty for Done
  std::string raw;       // verbatim agent output
};

/// Maximum number of items rendered into any observation.
inline constexpr std::size_t kMaxObservationItems = 10;

struct Observation {
  std::string text;
  std::size_t item_count = 0;        // before truncation
  std::optional<std::string> error;  // exclusive with a non-empty result
  /// Untruncated canonical content: answer strings for ExecuteSPARQL, item
  /// keys for the search tools. Used for dedup and voting.
  std::vector<std::string> content;
  /// ExecuteSPARQL only: canonical answers of the executed query.
  AnswerSet answers;
};

/// Relevance of a label against a query; compared lexicographically.
struct Relevance {
  double primary = 0;
  double secondary = 0;
  double tertiary = 0;
  auto operator<=>(const Relevance&) const = default;
};

/// Ranking strategy behind SearchNodes and SearchGraphPatterns, so an
/// embedding-backed scorer can replace the lexical one.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Relevance score(std::string_view query, std::string_view label) const = 0;
  /// Whether a candidate is worth listing at all.
  virtual bool matches(const Relevance& r) const = 0;
};

/// exact normalized match > token-overlap (Jaccard) > character-trigram Jaccard.
class LexicalScorer : public Scorer {
 public:
  explicit LexicalScorer(double min_trigram = 0.3) : min_trigram_(min_trigram) {}
  Relevance score(std::string_view query, std::string_view label) const override;
  bool matches(const Relevance& r) const override;

 private:
  struct Features {
    std::string normalized;
    std::vector<std::string> tokens;      // sorted, unique
    std::vector<std::uint32_t> trigrams;  // sorted, unique
  };
  static constexpr std::size_t kCacheLimit = 1 << 18;

  std::shared_ptr<const Features> features(std::string_view text) const;

  double min_trigram_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::shared_ptr<const Features>> cache_;
};

const Scorer& default_scorer();

/// Renders a numbered list of at most kMaxObservationItems entries followed by
/// "... and N more" when truncated.
std::string render_list(const std::vector<std::string>& items, std::size_t total);

Observation search_nodes(const KnowledgeBase& kb, std::string_view query, const Scorer& scorer = default_scorer());

/// `anchor_query` is a SELECT whose first projected variable binds the anchor
/// entity; `semantic_hint` ranks the one-hop patterns around it.
Observation search_graph_patterns(const KnowledgeBase& kb, std::string_view anchor_query,
                                  std::string_view semantic_hint, const Scorer& scorer = default_scorer());

Observation execute_sparql(const KnowledgeBase& kb, std::string_view query_text);

struct GraphPatternArgs {
  std::string anchor;
  std::string hint;
};

/// Splits `"<anchor>", semantic="<hint>"` (single or double quotes). Throws
/// std::invalid_argument on malformed input.
GraphPatternArgs parse_graph_pattern_args(std::string_view argument);
std::string format_graph_pattern_args(const GraphPatternArgs& args);

/// Runs a non-Done action. Done yields an empty observation.
Observation execute_action(const KnowledgeBase& kb, const Action& action, const Scorer& scorer = default_scorer());

/// Stable digest over (tool, canonical result content). Thought text and
/// query spelling do not participate.
std::string observation_fingerprint(const Action& action, const Observation& obs);

}  // namespace kbqa
