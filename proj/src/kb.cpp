// SPDX-License-Identifier: Apache-2.0
#include "kbqa/kb.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Sign handled separately; strips leading zeros from a digit run.
std::string strip_leading_zeros(std::string_view digits) {
  std::size_t i = 0;
  while (i + 1 < digits.size() && digits[i] == '0') ++i;
  return std::string(digits.substr(i));
}

std::string canonical_integer(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text[0] == '+' || text[0] == '-')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  if (!all_digits(text)) throw std::invalid_argument("malformed integer literal");
  std::string body = strip_leading_zeros(text);
  if (body == "0") negative = false;
  return negative ? "-" + body : body;
}

std::string canonical_decimal(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text[0] == '+' || text[0] == '-')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  std::string_view int_part = text.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) throw std::invalid_argument("malformed decimal literal");
  if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
      (dot != std::string_view::npos && frac_part.empty() && int_part.empty())) {
    throw std::invalid_argument("malformed decimal literal");
  }
  std::string ip = int_part.empty() ? "0" : strip_leading_zeros(int_part);
  std::string fp(frac_part);
  while (!fp.empty() && fp.back() == '0') fp.pop_back();
  std::string body = fp.empty() ? ip : ip + "." + fp;
  if (body == "0") negative = false;
  return negative ? "-" + body : body;
}

std::string canonical_date(std::string_view text) {
  // [-]YYYY-MM-DD with at least four year digits.
  std::string_view rest = text;
  bool negative = false;
  if (!rest.empty() && rest[0] == '-') {
    negative = true;
    rest.remove_prefix(1);
  }
  auto d1 = rest.find('-');
  if (d1 == std::string_view::npos || d1 < 4) throw std::invalid_argument("malformed date literal");
  auto year = rest.substr(0, d1);
  auto md = rest.substr(d1 + 1);
  if (md.size() != 5 || md[2] != '-' || !all_digits(year) || !all_digits(md.substr(0, 2)) ||
      !all_digits(md.substr(3, 2))) {
    throw std::invalid_argument("malformed date literal");
  }
  int month = (md[0] - '0') * 10 + (md[1] - '0');
  int day = (md[3] - '0') * 10 + (md[4] - '0');
  if (month < 1 || month > 12 || day < 1 || day > 31) throw std::invalid_argument("date out of range");
  return (negative ? "-" : "") + std::string(year) + "-" + std::string(md);
}

double to_double(const std::string& canonical) {
  double value = 0;
  std::istringstream in(canonical);
  in.imbue(std::locale::classic());
  in >> value;
  return value;
}

}  // namespace

std::string_view to_string(LiteralKind kind) {
  switch (kind) {
    case LiteralKind::String: return "string";
    case LiteralKind::Integer: return "integer";
    case LiteralKind::Decimal: return "decimal";
    case LiteralKind::Date: return "date";
    case LiteralKind::Year: return "year";
  }
  return "string";
}

std::optional<LiteralKind> literal_kind_from_string(std::string_view name) {
  for (auto kind : {LiteralKind::String, LiteralKind::Integer, LiteralKind::Decimal, LiteralKind::Date,
                    LiteralKind::Year}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

Literal Literal::make(LiteralKind kind, std::string_view lexical) {
  Literal lit;
  lit.kind_ = kind;
  switch (kind) {
    case LiteralKind::String:
      lit.lexical_ = std::string(lexical);
      break;
    case LiteralKind::Integer:
    case LiteralKind::Year:
      lit.lexical_ = canonical_integer(lexical);
      lit.numeric_ = to_double(lit.lexical_);
      break;
    case LiteralKind::Decimal:
      lit.lexical_ = canonical_decimal(lexical);
      lit.numeric_ = to_double(lit.lexical_);
      break;
    case LiteralKind::Date:
      lit.lexical_ = canonical_date(lexical);
      break;
  }
  return lit;
}

bool operator==(const Statement& a, const Statement& b) {
  if (a.subject != b.subject || a.predicate != b.predicate || a.object != b.object) return false;
  if (a.qualifiers.size() != b.qualifiers.size()) return false;
  auto qa = a.qualifiers;
  auto qb = b.qualifiers;
  std::sort(qa.begin(), qa.end());
  std::sort(qb.begin(), qb.end());
  return qa == qb;
}

KbParseError::KbParseError(std::size_t line, const std::string& message)
    : KbError("line " + std::to_string(line) + ": " + message), line_(line) {}

DanglingReferenceError::DanglingReferenceError(std::string id)
    : KbError("dangling reference to undeclared id '" + id + "'"), id_(std::move(id)) {}

UnknownIdError::UnknownIdError(std::string id) : KbError("unknown id '" + id + "'"), id_(std::move(id)) {}

KnowledgeBase::Builder& KnowledgeBase::Builder::add_entity(std::string id, std::string label,
                                                           std::optional<std::string> description) {
  nodes_.push_back({NodeId{std::move(id)}, NodeMeta{std::move(label), std::move(description), false}});
  return *this;
}

KnowledgeBase::Builder& KnowledgeBase::Builder::add_class(std::string id, std::string label) {
  nodes_.push_back({NodeId{std::move(id)}, NodeMeta{std::move(label), std::nullopt, true}});
  return *this;
}

KnowledgeBase::Builder& KnowledgeBase::Builder::add_predicate(std::string id, std::string label) {
  predicates_.push_back({PredicateId{std::move(id)}, std::move(label)});
  return *this;
}

KnowledgeBase::Builder& KnowledgeBase::Builder::add_statement(Statement statement) {
  statements_.push_back(std::move(statement));
  return *this;
}

KnowledgeBase KnowledgeBase::Builder::build() && {
  KnowledgeBase kb;
  for (auto& [id, meta] : nodes_) {
    if (kb.node_meta_.count(id)) throw KbError("duplicate node id '" + id.value + "'");
    auto norm = normalize_label(meta.label);
    auto& bucket = kb.label_index_[norm];
    bucket.push_back(id);
    kb.node_order_.push_back(id);
    kb.node_meta_.emplace(id, std::move(meta));
  }
  for (auto& [id, label] : predicates_) {
    if (kb.predicate_labels_.count(id)) throw KbError("duplicate predicate id '" + id.value + "'");
    kb.predicate_order_.push_back(id);
    kb.predicate_labels_.emplace(id, std::move(label));
  }
  auto check_term = [&](const TermValue& term) {
    if (auto* node = std::get_if<NodeId>(&term); node && !kb.has_node(*node)) {
      throw DanglingReferenceError(node->value);
    }
  };
  for (auto& st : statements_) {
    if (!kb.has_node(st.subject)) throw DanglingReferenceError(st.subject.value);
    if (!kb.has_predicate(st.predicate)) throw DanglingReferenceError(st.predicate.value);
    check_term(st.object);
    for (const auto& q : st.qualifiers) {
      if (!kb.has_predicate(q.predicate)) throw DanglingReferenceError(q.predicate.value);
      check_term(q.value);
    }
    std::size_t index = kb.statements_.size();
    kb.by_subject_[st.subject].push_back(index);
    kb.by_predicate_[st.predicate].push_back(index);
    if (auto* node = std::get_if<NodeId>(&st.object)) kb.by_object_node_[*node].push_back(index);
    kb.statements_.push_back(std::move(st));
  }
  nodes_.clear();
  predicates_.clear();
  statements_.clear();
  return kb;
}

const NodeMeta& KnowledgeBase::node_meta(const NodeId& id) const {
  auto it = node_meta_.find(id);
  if (it == node_meta_.end()) throw UnknownIdError(id.value);
  return it->second;
}

const std::string& KnowledgeBase::predicate_label(const PredicateId& id) const {
  auto it = predicate_labels_.find(id);
  if (it == predicate_labels_.end()) throw UnknownIdError(id.value);
  return it->second;
}

std::size_t KnowledgeBase::entity_count() const {
  return static_cast<std::size_t>(
      std::count_if(node_meta_.begin(), node_meta_.end(), [](const auto& kv) { return !kv.second.is_class; }));
}

std::size_t KnowledgeBase::class_count() const { return node_meta_.size() - entity_count(); }

std::vector<const Statement*> KnowledgeBase::match_statements(const StatementPattern& pattern) const {
  static const std::vector<std::size_t> kEmpty;
  const std::vector<std::size_t>* candidates = nullptr;
  auto narrow = [&](const std::vector<std::size_t>& list) {
    if (!candidates || list.size() < candidates->size()) candidates = &list;
  };
  if (pattern.subject) {
    auto it = by_subject_.find(*pattern.subject);
    narrow(it == by_subject_.end() ? kEmpty : it->second);
  }
  if (pattern.predicate) {
    auto it = by_predicate_.find(*pattern.predicate);
    narrow(it == by_predicate_.end() ? kEmpty : it->second);
  }
  if (pattern.object) {
    if (auto* node = std::get_if<NodeId>(&*pattern.object)) {
      auto it = by_object_node_.find(*node);
      narrow(it == by_object_node_.end() ? kEmpty : it->second);
    }
  }

  std::vector<const Statement*> out;
  auto consider = [&](const Statement& st) {
    if (pattern.subject && st.subject != *pattern.subject) return;
    if (pattern.predicate && st.predicate != *pattern.predicate) return;
    if (pattern.object && st.object != *pattern.object) return;
    out.push_back(&st);
  };
  if (candidates) {
    for (auto index : *candidates) consider(statements_[index]);
  } else {
    for (const auto& st : statements_) consider(st);
  }
  return out;
}

namespace {

TermValue parse_term_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw KbParseError(line, "object term must be a JSON object");
  if (j.contains("node")) {
    if (!j["node"].is_string()) throw KbParseError(line, "\"node\" must be a string");
    return NodeId{j["node"].get<std::string>()};
  }
  if (j.contains("literal")) {
    const auto& lex = j["literal"];
    std::string kind_name = j.value("type", std::string("string"));
    auto kind = literal_kind_from_string(kind_name);
    if (!kind) throw KbParseError(line, "unknown literal type '" + kind_name + "'");
    std::string text = lex.is_string() ? lex.get<std::string>() : lex.dump();
    try {
      return Literal::make(*kind, text);
    } catch (const std::invalid_argument& e) {
      throw KbParseError(line, e.what());
    }
  }
  throw KbParseError(line, "term needs \"node\" or \"literal\"");
}

json term_to_json(const TermValue& term) {
  if (auto* node = std::get_if<NodeId>(&term)) return json{{"node", node->value}};
  const auto& lit = std::get<Literal>(term);
  json j{{"literal", lit.lexical()}};
  if (lit.kind() != LiteralKind::String) j["type"] = std::string(to_string(lit.kind()));
  return j;
}

std::string require_string(const json& rec, const char* key, std::size_t line) {
  if (!rec.contains(key) || !rec[key].is_string()) {
    throw KbParseError(line, std::string("missing string field \"") + key + "\"");
  }
  return rec[key].get<std::string>();
}

}  // namespace

KnowledgeBase parse_kb(std::string_view text) {
  KnowledgeBase::Builder builder;
  std::optional<json> manifest;
  std::size_t entities = 0, classes = 0, predicates = 0, statements = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;

    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) throw KbParseError(line_no, "not a JSON object");
    std::string kind = require_string(rec, "kind", line_no);

    if (!manifest && kind != "manifest") throw KbParseError(line_no, "first record must be the manifest");
    if (kind == "manifest") {
      if (manifest) throw KbParseError(line_no, "duplicate manifest");
      for (const char* key : {"entities", "predicates", "statements"}) {
        if (!rec.contains(key) || !rec[key].is_number_unsigned()) {
          throw KbParseError(line_no, std::string("manifest needs non-negative integer \"") + key + "\"");
        }
      }
      manifest = rec;
    } else if (kind == "entity") {
      std::optional<std::string> description;
      if (rec.contains("description") && rec["description"].is_string()) {
        description = rec["description"].get<std::string>();
      }
      builder.add_entity(require_string(rec, "id", line_no), require_string(rec, "label", line_no),
                         std::move(description));
      ++entities;
    } else if (kind == "class") {
      builder.add_class(require_string(rec, "id", line_no), require_string(rec, "label", line_no));
      ++classes;
    } else if (kind == "predicate") {
      builder.add_predicate(require_string(rec, "id", line_no), require_string(rec, "label", line_no));
      ++predicates;
    } else if (kind == "statement") {
      Statement st{NodeId{require_string(rec, "s", line_no)}, PredicateId{require_string(rec, "p", line_no)},
                   NodeId{}, {}};
      if (!rec.contains("o")) throw KbParseError(line_no, "statement missing \"o\"");
      st.object = parse_term_json(rec["o"], line_no);
      if (rec.contains("qualifiers")) {
        if (!rec["qualifiers"].is_array()) throw KbParseError(line_no, "\"qualifiers\" must be an array");
        for (const auto& q : rec["qualifiers"]) {
          if (!q.is_object() || !q.contains("o")) throw KbParseError(line_no, "malformed qualifier");
          st.qualifiers.push_back({PredicateId{require_string(q, "p", line_no)}, parse_term_json(q["o"], line_no)});
        }
      }
      builder.add_statement(std::move(st));
      ++statements;
    } else {
      throw KbParseError(line_no, "unknown record kind '" + kind + "'");
    }
  }
  if (!manifest) throw KbParseError(line_no, "missing manifest record");

  auto check = [&](const char* key, std::size_t actual) {
    if (!manifest->contains(key)) return;
    auto declared = (*manifest)[key].get<std::size_t>();
    if (declared != actual) {
      throw KbError(std::string("manifest declares ") + std::to_string(declared) + " " + key + " but file has " +
                    std::to_string(actual));
    }
  };
  check("entities", entities);
  check("classes", classes);
  check("predicates", predicates);
  check("statements", statements);
  return std::move(builder).build();
}

KnowledgeBase load_kb(const std::string& path) { return parse_kb(read_file(path)); }

std::string serialize_kb(const KnowledgeBase& kb) {
  std::ostringstream out;
  out << json{{"kind", "manifest"},
              {"entities", kb.entity_count()},
              {"classes", kb.class_count()},
              {"predicates", kb.predicates().size()},
              {"statements", kb.statements().size()}}
             .dump()
      << '\n';
  for (const auto& id : kb.nodes()) {
    const auto& meta = kb.node_meta(id);
    json rec{{"kind", meta.is_class ? "class" : "entity"}, {"id", id.value}, {"label", meta.label}};
    if (meta.description) rec["description"] = *meta.description;
    out << rec.dump() << '\n';
  }
  for (const auto& id : kb.predicates()) {
    out << json{{"kind", "predicate"}, {"id", id.value}, {"label", kb.predicate_label(id)}}.dump() << '\n';
  }
  for (const auto& st : kb.statements()) {
    json rec{{"kind", "statement"}, {"s", st.subject.value}, {"p", st.predicate.value}, {"o", term_to_json(st.object)}};
    if (!st.qualifiers.empty()) {
      json qs = json::array();
      for (const auto& q : st.qualifiers) qs.push_back({{"p", q.predicate.value}, {"o", term_to_json(q.value)}});
      rec["qualifiers"] = qs;
    }
    out << rec.dump() << '\n';
  }
  return out.str();
}

std::string term_key(const TermValue& term) {
  if (auto* node = std::get_if<NodeId>(&term)) return "n:" + node->value;
  const auto& lit = std::get<Literal>(term);
  return "l:" + std::string(to_string(lit.kind())) + ":" + lit.lexical();
}

bool is_node(const TermValue& term) { return std::holds_alternative<NodeId>(term); }

}  // namespace kbqa
