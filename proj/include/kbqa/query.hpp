// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kbqa/kb.hpp"

namespace kbqa {

// ---------------------------------------------------------------------------
// AST for the query subset. The grammar is documented in docs/query_grammar.md.
// ---------------------------------------------------------------------------

struct Variable {
  std::string name;  // without the leading '?'
  auto operator<=>(const Variable&) const = default;
};

using QueryTerm = std::variant<Variable, NodeId, Literal>;

/// `?s pq:key ?v` attached to the main pattern it follows; it can only bind
/// against the qualifier list of the statement that main pattern matched.
struct QualifierPattern {
  PredicateId predicate;
  QueryTerm object;
  bool operator==(const QualifierPattern&) const = default;
};

struct TriplePattern {
  QueryTerm subject;
  PredicateId predicate;
  QueryTerm object;
  std::vector<QualifierPattern> qualifiers;
  bool operator==(const TriplePattern&) const = default;
};

enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge };

std::string_view to_string(CompareOp op);

struct FilterExpr {
  CompareOp op = CompareOp::Eq;
  QueryTerm lhs;
  QueryTerm rhs;
  bool operator==(const FilterExpr&) const = default;
};

struct ValuesBlock {
  Variable variable;
  std::vector<TermValue> values;
  bool operator==(const ValuesBlock&) const = default;
};

struct GroupPattern;

struct UnionPattern {
  std::vector<GroupPattern> branches;  // at least two
  friend bool operator==(const UnionPattern& a, const UnionPattern& b);
};

using PatternElement = std::variant<TriplePattern, FilterExpr, UnionPattern, ValuesBlock>;

struct GroupPattern {
  std::vector<PatternElement> elements;
  bool operator==(const GroupPattern&) const = default;
};

enum class QueryForm { Select, Ask };
enum class SortDirection { Asc, Desc };

struct CountProjection {
  Variable counted;
  bool distinct = false;
  Variable alias;
  bool operator==(const CountProjection&) const = default;
};

struct OrderKey {
  Variable variable;
  SortDirection direction = SortDirection::Asc;
  bool operator==(const OrderKey&) const = default;
};

struct Query {
  QueryForm form = QueryForm::Select;
  bool distinct = false;
  std::vector<Variable> projection;     // empty when count is set or for ASK
  std::optional<CountProjection> count;
  GroupPattern body;
  std::optional<OrderKey> order;
  std::optional<std::size_t> limit;
  bool operator==(const Query&) const = default;
};

class QueryError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownPrefix };
  QueryError(Kind kind, std::size_t offset, std::string message, std::string expected = {});

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  Kind kind_;
  std::size_t offset_;
  std::string expected_;
};

/// Throws QueryError; never crashes on arbitrary input.
Query parse_query(std::string_view text);

/// Canonical single-line rendering; parse_query(serialize_query(q)) == q.
std::string serialize_query(const Query& query);

std::set<std::string> body_variables(const GroupPattern& group);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

using Row = std::vector<std::optional<TermValue>>;

struct ResultSet {
  std::vector<std::string> variables;
  std::vector<Row> rows;
  bool is_ask = false;
  /// Labels of every node appearing in rows, for canonical rendering.
  std::map<NodeId, std::string> labels;

  /// Order-insensitive digest of the rendered rows.
  std::string fingerprint() const;
};

using AnswerSet = std::set<std::string>;

ResultSet evaluate(const Query& query, const KnowledgeBase& kb);

/// Node -> "id (label)", literal -> canonical lexical form, unbound -> "".
std::string render_term(const std::optional<TermValue>& term, const std::map<NodeId, std::string>& labels);
std::string render_row(const Row& row, const std::map<NodeId, std::string>& labels);

/// Deduplicated rendered projections; ASK yields {"true"} or {"false"}.
AnswerSet canonical_answers(const ResultSet& rs);

/// Query-syntax spelling of a constant: e:id, "text", 42, "1990-01-01"^^xsd:date.
std::string to_query_syntax(const TermValue& term);

/// Three-way comparison used by FILTER; nullopt when the kinds are not comparable.
std::optional<std::partial_ordering> filter_compare(const TermValue& a, const TermValue& b);
/// Total order used by ORDER BY (unbound sorts first).
std::weak_ordering order_compare(const std::optional<TermValue>& a, const std::optional<TermValue>& b);

}  // namespace kbqa
