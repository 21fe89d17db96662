// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kbqa {

struct NodeId {
  std::string value;
  auto operator<=>(const NodeId&) const = default;
};

struct PredicateId {
  std::string value;
  auto operator<=>(const PredicateId&) const = default;
};

enum class LiteralKind { String, Integer, Decimal, Date, Year };

std::string_view to_string(LiteralKind kind);
std::optional<LiteralKind> literal_kind_from_string(std::string_view name);

/// A typed literal kept in canonical lexical form, so equality is a plain
/// comparison of (kind, lexical).
class Literal {
 public:
  /// Throws std::invalid_argument when `lexical` is not a valid form of `kind`.
  static Literal make(LiteralKind kind, std::string_view lexical);
  static Literal string(std::string_view text) { return make(LiteralKind::String, text); }
  static Literal integer(long long value) { return make(LiteralKind::Integer, std::to_string(value)); }

  LiteralKind kind() const { return kind_; }
  const std::string& lexical() const { return lexical_; }
  /// Present iff kind is Integer, Decimal or Year.
  std::optional<double> numeric() const { return numeric_; }

  friend bool operator==(const Literal& a, const Literal& b) {
    return a.kind_ == b.kind_ && a.lexical_ == b.lexical_;
  }
  friend std::strong_ordering operator<=>(const Literal& a, const Literal& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    return a.lexical_ <=> b.lexical_;
  }

 private:
  Literal() = default;
  LiteralKind kind_ = LiteralKind::String;
  std::string lexical_;
  std::optional<double> numeric_;
};

using TermValue = std::variant<NodeId, Literal>;

struct Qualifier {
  PredicateId predicate;
  TermValue value;
  auto operator<=>(const Qualifier&) const = default;
};

struct Statement {
  NodeId subject;
  PredicateId predicate;
  TermValue object;
  std::vector<Qualifier> qualifiers;

  // Qualifier order is not significant.
  friend bool operator==(const Statement& a, const Statement& b);
};

struct NodeMeta {
  std::string label;
  std::optional<std::string> description;
  bool is_class = false;
};

/// A (subject, predicate, object) filter; unset positions match anything.
struct StatementPattern {
  std::optional<NodeId> subject;
  std::optional<PredicateId> predicate;
  std::optional<TermValue> object;
};

class KbError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KbParseError : public KbError {
 public:
  KbParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DanglingReferenceError : public KbError {
 public:
  explicit DanglingReferenceError(std::string id);
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class UnknownIdError : public KbError {
 public:
  explicit UnknownIdError(std::string id);
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Immutable in-memory knowledge base. Construct through KnowledgeBase::Builder
/// or load_kb(); after that it is safe to share between threads.
class KnowledgeBase {
 public:
  class Builder {
   public:
    Builder& add_entity(std::string id, std::string label, std::optional<std::string> description = {});
    Builder& add_class(std::string id, std::string label);
    Builder& add_predicate(std::string id, std::string label);
    Builder& add_statement(Statement statement);
    /// Validates references; throws DanglingReferenceError or KbError (duplicate id).
    KnowledgeBase build() &&;

   private:
    friend class KnowledgeBase;
    std::vector<std::pair<NodeId, NodeMeta>> nodes_;
    std::vector<std::pair<PredicateId, std::string>> predicates_;
    std::vector<Statement> statements_;
  };

  KnowledgeBase() = default;

  std::span<const Statement> statements() const { return statements_; }
  /// Entity and class ids in declaration order.
  std::span<const NodeId> nodes() const { return node_order_; }
  std::span<const PredicateId> predicates() const { return predicate_order_; }

  bool has_node(const NodeId& id) const { return node_meta_.count(id) != 0; }
  bool has_predicate(const PredicateId& id) const { return predicate_labels_.count(id) != 0; }

  /// Throws UnknownIdError.
  const NodeMeta& node_meta(const NodeId& id) const;
  const std::string& predicate_label(const PredicateId& id) const;

  std::size_t entity_count() const;
  std::size_t class_count() const;

  /// Statements agreeing with every bound position, in load order.
  std::vector<const Statement*> match_statements(const StatementPattern& pattern) const;

  /// Normalized label -> node ids carrying that label, in declaration order.
  const std::map<std::string, std::vector<NodeId>>& label_index() const { return label_index_; }

 private:
  std::vector<Statement> statements_;
  std::vector<NodeId> node_order_;
  std::vector<PredicateId> predicate_order_;
  std::map<NodeId, NodeMeta> node_meta_;
  std::map<PredicateId, std::string> predicate_labels_;
  std::map<std::string, std::vector<NodeId>> label_index_;
  std::map<NodeId, std::vector<std::size_t>> by_subject_;
  std::map<PredicateId, std::vector<std::size_t>> by_predicate_;
  std::map<NodeId, std::vector<std::size_t>> by_object_node_;
};

/// Loads the line-oriented JSON KB format. Throws KbParseError (with 1-based
/// line number), DanglingReferenceError, or KbError.
KnowledgeBase load_kb(const std::string& path);
KnowledgeBase parse_kb(std::string_view text);

/// Serializes back to the same format, manifest first.
std::string serialize_kb(const KnowledgeBase& kb);

// Convenience accessors used across modules.
std::string term_key(const TermValue& term);
bool is_node(const TermValue& term);

}  // namespace kbqa
