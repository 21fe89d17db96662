// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <tuple>

#include "kbqa/query.hpp"
#include "kbqa/util.hpp"

namespace kbqa {

namespace {

bool is_numeric_kind(LiteralKind k) {
  return k == LiteralKind::Integer || k == LiteralKind::Decimal || k == LiteralKind::Year;
}

std::tuple<long long, int, int> date_parts(const std::string& lexical) {
  // Canonical form is [-]Y+-MM-DD.
  auto last = lexical.rfind('-');
  auto mid = lexical.rfind('-', last - 1);
  long long year = std::stoll(lexical.substr(0, mid));
  int month = std::stoi(lexical.substr(mid + 1, 2));
  int day = std::stoi(lexical.substr(last + 1, 2));
  return {year, month, day};
}

// Group order for ORDER BY across kinds: names sorted alphabetically.
int order_group(const TermValue& t) {
  if (std::holds_alternative<NodeId>(t)) return 1;  // "node"
  switch (std::get<Literal>(t).kind()) {
    case LiteralKind::Date: return 0;  // "date"
    case LiteralKind::String: return 3;  // "string"
    default: return 2;  // "numeric"
  }
}

std::weak_ordering from_partial(std::partial_ordering p) {
  if (p == std::partial_ordering::less) return std::weak_ordering::less;
  if (p == std::partial_ordering::greater) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

// ---------------------------------------------------------------------------

using Binding = std::vector<std::optional<TermValue>>;

class Evaluator {
 public:
  Evaluator(const Query& q, const KnowledgeBase& kb) : kb_(kb) {
    for (const auto& name : body_variables(q.body)) slot_of(name);
  }

  std::size_t slot_of(const std::string& name) {
    auto it = slots_.find(name);
    if (it != slots_.end()) return it->second;
    std::size_t s = slots_.size();
    slots_.emplace(name, s);
    return s;
  }

  std::size_t slot(const std::string& name) const { return slots_.at(name); }
  std::size_t width() const { return slots_.size(); }

  std::vector<Binding> eval_group(const GroupPattern& g) const {
    std::vector<Binding> omega{Binding(width())};
    std::vector<const FilterExpr*> filters;
    for (const auto& el : g.elements) {
      if (const auto* tp = std::get_if<TriplePattern>(&el)) {
        omega = extend_triple(omega, *tp);
      } else if (const auto* f = std::get_if<FilterExpr>(&el)) {
        filters.push_back(f);
      } else if (const auto* u = std::get_if<UnionPattern>(&el)) {
        std::vector<Binding> unioned;
        for (const auto& branch : u->branches) {
          auto part = eval_group(branch);
          unioned.insert(unioned.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
        omega = join(omega, unioned);
      } else if (const auto* vb = std::get_if<ValuesBlock>(&el)) {
        std::vector<Binding> rows;
        for (const auto& v : vb->values) {
          Binding b(width());
          b[slot(vb->variable.name)] = v;
          rows.push_back(std::move(b));
        }
        omega = join(omega, rows);
      }
      if (omega.empty()) break;
    }
    if (filters.empty()) return omega;
    std::vector<Binding> kept;
    for (auto& b : omega) {
      bool ok = std::all_of(filters.begin(), filters.end(), [&](const FilterExpr* f) { return passes(*f, b); });
      if (ok) kept.push_back(std::move(b));
    }
    return kept;
  }

 private:
  static std::vector<Binding> join(const std::vector<Binding>& left, const std::vector<Binding>& right) {
    std::vector<Binding> out;
    for (const auto& l : left) {
      for (const auto& r : right) {
        Binding merged = l;
        bool compatible = true;
        for (std::size_t i = 0; i < merged.size() && compatible; ++i) {
          if (!r[i]) continue;
          if (!merged[i]) {
            merged[i] = r[i];
          } else if (*merged[i] != *r[i]) {
            compatible = false;
          }
        }
        if (compatible) out.push_back(std::move(merged));
      }
    }
    return out;
  }

  // Unifies `pattern` with `value` under `b`; returns false on conflict.
  bool unify(const QueryTerm& pattern, const TermValue& value, Binding& b) const {
    if (const auto* v = std::get_if<Variable>(&pattern)) {
      auto& cell = b[slot(v->name)];
      if (cell) return *cell == value;
      cell = value;
      return true;
    }
    if (const auto* n = std::get_if<NodeId>(&pattern)) {
      const auto* vn = std::get_if<NodeId>(&value);
      return vn && *vn == *n;
    }
    const auto* vl = std::get_if<Literal>(&value);
    return vl && *vl == std::get<Literal>(pattern);
  }

  std::optional<TermValue> resolve(const QueryTerm& t, const Binding& b) const {
    if (const auto* v = std::get_if<Variable>(&t)) return b[slot(v->name)];
    if (const auto* n = std::get_if<NodeId>(&t)) return TermValue{*n};
    return TermValue{std::get<Literal>(t)};
  }

  void extend_qualifiers(const TriplePattern& tp, const Statement& st, std::size_t qi, Binding b,
                         std::vector<Binding>& out) const {
    if (qi == tp.qualifiers.size()) {
      out.push_back(std::move(b));
      return;
    }
    const auto& qp = tp.qualifiers[qi];
    for (const auto& q : st.qualifiers) {
      if (q.predicate != qp.predicate) continue;
      Binding nb = b;
      if (unify(qp.object, q.value, nb)) extend_qualifiers(tp, st, qi + 1, std::move(nb), out);
    }
  }

  std::vector<Binding> extend_triple(const std::vector<Binding>& omega, const TriplePattern& tp) const {
    std::vector<Binding> out;
    for (const auto& b : omega) {
      StatementPattern sp;
      sp.predicate = tp.predicate;
      if (auto s = resolve(tp.subject, b)) {
        const auto* node = std::get_if<NodeId>(&*s);
        if (!node) continue;  // a literal can never be a subject
        sp.subject = *node;
      }
      if (auto o = resolve(tp.object, b)) sp.object = *o;
      for (const Statement* st : kb_.match_statements(sp)) {
        Binding nb = b;
        if (!unify(tp.subject, TermValue{st->subject}, nb)) continue;
        if (!unify(tp.object, st->object, nb)) continue;
        extend_qualifiers(tp, *st, 0, std::move(nb), out);
      }
    }
    return out;
  }

  bool passes(const FilterExpr& f, const Binding& b) const {
    auto lhs = resolve(f.lhs, b);
    auto rhs = resolve(f.rhs, b);
    if (!lhs || !rhs) return false;
    auto cmp = filter_compare(*lhs, *rhs);
    if (!cmp) return false;
    switch (f.op) {
      case CompareOp::Eq: return *cmp == 0;
      case CompareOp::Ne: return *cmp != 0;
      case CompareOp::Lt: return *cmp < 0;
      case CompareOp::Gt: return *cmp > 0;
      case CompareOp::Le: return *cmp <= 0;
      case CompareOp::Ge: return *cmp >= 0;
    }
    return false;
  }

  const KnowledgeBase& kb_;
  std::map<std::string, std::size_t> slots_;
};

}  // namespace

std::optional<std::partial_ordering> filter_compare(const TermValue& a, const TermValue& b) {
  const auto* na = std::get_if<NodeId>(&a);
  const auto* nb = std::get_if<NodeId>(&b);
  if (na || nb) {
    if (!na || !nb) return std::nullopt;
    return na->value <=> nb->value;
  }
  const auto& la = std::get<Literal>(a);
  const auto& lb = std::get<Literal>(b);
  if (is_numeric_kind(la.kind()) && is_numeric_kind(lb.kind())) return *la.numeric() <=> *lb.numeric();
  if (la.kind() != lb.kind()) return std::nullopt;
  if (la.kind() == LiteralKind::Date) return date_parts(la.lexical()) <=> date_parts(lb.lexical());
  return la.lexical() <=> lb.lexical();
}

std::weak_ordering order_compare(const std::optional<TermValue>& a, const std::optional<TermValue>& b) {
  if (!a || !b) return static_cast<bool>(a) <=> static_cast<bool>(b);
  int ga = order_group(*a), gb = order_group(*b);
  if (ga != gb) return ga <=> gb;
  if (ga == 2) {
    const auto& la = std::get<Literal>(*a);
    const auto& lb = std::get<Literal>(*b);
    auto c = from_partial(*la.numeric() <=> *lb.numeric());
    if (c != 0) return c;
    if (la.kind() != lb.kind()) return la.kind() <=> lb.kind();
    return la.lexical() <=> lb.lexical();
  }
  return from_partial(*filter_compare(*a, *b));
}

ResultSet evaluate(const Query& query, const KnowledgeBase& kb) {
  Evaluator ev(query, kb);
  auto omega = ev.eval_group(query.body);

  ResultSet rs;
  if (query.form == QueryForm::Ask) {
    rs.is_ask = true;
    rs.variables = {"ask"};
    rs.rows.push_back({TermValue{Literal::string(omega.empty() ? "false" : "true")}});
    return rs;
  }

  if (query.order) {
    std::size_t s = ev.slot(query.order->variable.name);
    bool desc = query.order->direction == SortDirection::Desc;
    std::stable_sort(omega.begin(), omega.end(), [&](const auto& x, const auto& y) {
      auto c = order_compare(x[s], y[s]);
      return desc ? c > 0 : c < 0;
    });
  }

  if (query.count) {
    std::size_t s = ev.slot(query.count->counted.name);
    long long n = 0;
    if (query.count->distinct) {
      std::set<std::string> seen;
      for (const auto& b : omega) {
        if (b[s]) seen.insert(term_key(*b[s]));
      }
      n = static_cast<long long>(seen.size());
    } else {
      for (const auto& b : omega) n += b[s] ? 1 : 0;
    }
    rs.variables = {query.count->alias.name};
    rs.rows.push_back({TermValue{Literal::integer(n)}});
    return rs;
  }

  std::vector<std::size_t> cols;
  for (const auto& v : query.projection) {
    rs.variables.push_back(v.name);
    cols.push_back(ev.slot(v.name));
  }
  std::set<std::vector<std::string>> seen;
  for (const auto& b : omega) {
    if (query.limit && rs.rows.size() >= *query.limit) break;
    Row row;
    row.reserve(cols.size());
    for (auto c : cols) row.push_back(b[c]);
    if (query.distinct) {
      std::vector<std::string> key;
      for (const auto& cell : row) key.push_back(cell ? term_key(*cell) : std::string());
      if (!seen.insert(std::move(key)).second) continue;
    }
    rs.rows.push_back(std::move(row));
  }
  for (const auto& row : rs.rows) {
    for (const auto& cell : row) {
      if (cell) {
        if (const auto* n = std::get_if<NodeId>(&*cell)) rs.labels.emplace(*n, kb.node_meta(*n).label);
      }
    }
  }
  return rs;
}

std::string render_term(const std::optional<TermValue>& term, const std::map<NodeId, std::string>& labels) {
  if (!term) return {};
  if (const auto* n = std::get_if<NodeId>(&*term)) {
    auto it = labels.find(*n);
    return it == labels.end() ? n->value : n->value + " (" + it->second + ")";
  }
  return std::get<Literal>(*term).lexical();
}

std::string render_row(const Row& row, const std::map<NodeId, std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += " | ";
    out += render_term(row[i], labels);
  }
  return out;
}

AnswerSet canonical_answers(const ResultSet& rs) {
  AnswerSet out;
  for (const auto& row : rs.rows) out.insert(render_row(row, rs.labels));
  return out;
}

std::string ResultSet::fingerprint() const {
  std::vector<std::string> rendered;
  rendered.reserve(rows.size());
  for (const auto& row : rows) rendered.push_back(render_row(row, labels));
  std::sort(rendered.begin(), rendered.end());
  std::string blob = is_ask ? "ask\n" : "select\n";
  for (const auto& r : rendered) {
    blob += r;
    blob += '\n';
  }
  return to_hex(fnv1a64(blob));
}

}  // namespace kbqa
