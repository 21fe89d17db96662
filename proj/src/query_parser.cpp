// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <sstream>

#include "kbqa/query.hpp"

namespace kbqa {

QueryError::QueryError(Kind kind, std::size_t offset, std::string message, std::string expected)
    : std::runtime_error(std::move(message)), kind_(kind), offset_(offset), expected_(std::move(expected)) {}

bool operator==(const UnionPattern& a, const UnionPattern& b) { return a.branches == b.branches; }

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

namespace {

enum class Tok { End, LBrace, RBrace, LParen, RParen, Dot, Var, Prefixed, String, Number, Word, Op, Caret2 };

struct Token {
  Tok type = Tok::End;
  std::string text;    // variable name, word, operator, string contents, number text
  std::string prefix;  // for Prefixed
  std::size_t offset = 0;
};

std::string describe(const Token& t) {
  switch (t.type) {
    case Tok::End: return "end of input";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Dot: return "'.'";
    case Tok::Var: return "'?" + t.text + "'";
    case Tok::Prefixed: return "'" + t.prefix + ":" + t.text + "'";
    case Tok::String: return "string literal";
    case Tok::Number: return "number '" + t.text + "'";
    case Tok::Word: return "'" + t.text + "'";
    case Tok::Op: return "'" + t.text + "'";
    case Tok::Caret2: return "'^^'";
  }
  return "token";
}

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_local_char(char c) { return is_name_char(c) || c == '-' || c == '.'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.offset = pos_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      switch (c) {
        case '{': t.type = Tok::LBrace; ++pos_; break;
        case '}': t.type = Tok::RBrace; ++pos_; break;
        case '(': t.type = Tok::LParen; ++pos_; break;
        case ')': t.type = Tok::RParen; ++pos_; break;
        case '.':
          if (pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            lex_number(t);
          } else {
            t.type = Tok::Dot;
            ++pos_;
          }
          break;
        case '?': lex_var(t); break;
        case '"':
        case '\'': lex_string(t, c); break;
        case '^':
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '^') {
            t.type = Tok::Caret2;
            pos_ += 2;
          } else {
            fail("unexpected character '^'");
          }
          break;
        case '=': t.type = Tok::Op; t.text = "="; ++pos_; break;
        case '!':
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
            t.type = Tok::Op;
            t.text = "!=";
            pos_ += 2;
          } else {
            fail("unexpected character '!'");
          }
          break;
        case '<':
        case '>':
          t.type = Tok::Op;
          t.text = std::string(1, c);
          ++pos_;
          if (pos_ < text_.size() && text_[pos_] == '=') {
            t.text += '=';
            ++pos_;
          }
          break;
        default:
          if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
            lex_number(t);
          } else if (is_name_start(c)) {
            lex_word(t);
          } else if (c == '*' || c == ',' || c == ';') {
            // Not part of the grammar; let the parser produce a positioned error.
            t.type = Tok::Word;
            t.text = std::string(1, c);
            ++pos_;
          } else {
            fail(std::string("unexpected character '") + c + "'");
          }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw QueryError(QueryError::Kind::Syntax, pos_, "syntax error at offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void lex_var(Token& t) {
    ++pos_;
    std::size_t start = pos_;
    if (pos_ >= text_.size() || !is_name_start(text_[pos_])) fail("expected variable name after '?'");
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    t.type = Tok::Var;
    t.text = std::string(text_.substr(start, pos_ - start));
  }

  void lex_string(Token& t, char quote) {
    ++pos_;
    std::string value;
    for (;;) {
      if (pos_ >= text_.size()) fail("unterminated string literal");
      char c = text_[pos_++];
      if (c == quote) break;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated string literal");
        char e = text_[pos_++];
        switch (e) {
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case '\\': value += '\\'; break;
          case '"': value += '"'; break;
          case '\'': value += '\''; break;
          default: fail(std::string("invalid escape '\\") + e + "'");
        }
      } else {
        value += c;
      }
    }
    t.type = Tok::String;
    t.text = std::move(value);
  }

  void lex_number(Token& t) {
    std::size_t start = pos_;
    if (text_[pos_] == '+' || text_[pos_] == '-') ++pos_;
    bool digits = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
      digits = true;
    }
    if (pos_ + 1 < text_.size() && text_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      digits = true;
    }
    if (!digits) fail("malformed number");
    t.type = Tok::Number;
    t.text = std::string(text_.substr(start, pos_ - start));
  }

  void lex_word(Token& t) {
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    std::string word(text_.substr(start, pos_ - start));
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      std::size_t local_start = pos_;
      while (pos_ < text_.size() && is_local_char(text_[pos_])) ++pos_;
      // A trailing '.' terminates the pattern rather than belonging to the name.
      while (pos_ > local_start && text_[pos_ - 1] == '.') --pos_;
      t.type = Tok::Prefixed;
      t.prefix = std::move(word);
      t.text = std::string(text_.substr(local_start, pos_ - local_start));
      if (t.text.empty()) fail("empty local name after '" + t.prefix + ":'");
      return;
    }
    t.type = Tok::Word;
    t.text = std::move(word);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Query parse() {
    Query q;
    if (is_word("SELECT")) {
      advance();
      q.form = QueryForm::Select;
      if (is_word("DISTINCT")) {
        advance();
        q.distinct = true;
      }
      parse_projection(q);
    } else if (is_word("ASK")) {
      advance();
      q.form = QueryForm::Ask;
    } else {
      fail_expected("'SELECT' or 'ASK'");
    }
    if (is_word("WHERE")) advance();
    q.body = parse_group();
    if (is_word("ORDER")) {
      advance();
      expect_word("BY");
      OrderKey key;
      if (is_word("ASC") || is_word("DESC")) {
        key.direction = upper(peek().text) == "DESC" ? SortDirection::Desc : SortDirection::Asc;
        advance();
        expect(Tok::LParen, "'('");
        key.variable = parse_variable();
        expect(Tok::RParen, "')'");
      } else {
        key.variable = parse_variable();
      }
      q.order = key;
    }
    if (is_word("LIMIT")) {
      advance();
      const Token& t = peek();
      if (t.type != Tok::Number || t.text.find_first_not_of("0123456789") != std::string::npos) {
        fail_expected("positive integer");
      }
      std::size_t value = 0;
      try {
        value = std::stoull(t.text);
      } catch (const std::exception&) {
        fail_expected("positive integer");
      }
      if (value == 0) fail_expected("positive integer");
      advance();
      q.limit = value;
    }
    if (peek().type != Tok::End) fail_expected("end of query");
    validate(q);
    return q;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  bool is_word(std::string_view w) const { return peek().type == Tok::Word && upper(peek().text) == w; }

  [[noreturn]] void fail_expected(const std::string& expected) const {
    const Token& t = peek();
    std::string where = t.type == Tok::End ? "end of input" : "offset " + std::to_string(t.offset);
    throw QueryError(QueryError::Kind::Syntax, t.offset,
                     "syntax error at " + where + ": expected " + expected + " but found " + describe(t), expected);
  }

  [[noreturn]] void fail_at(std::size_t offset, const std::string& msg) const {
    throw QueryError(QueryError::Kind::Syntax, offset, "syntax error at offset " + std::to_string(offset) + ": " + msg);
  }

  void expect(Tok type, const std::string& expected) {
    if (peek().type != type) fail_expected(expected);
    advance();
  }

  void expect_word(std::string_view w) {
    if (!is_word(w)) fail_expected("'" + std::string(w) + "'");
    advance();
  }

  Variable parse_variable() {
    if (peek().type != Tok::Var) fail_expected("variable");
    Variable v{peek().text};
    advance();
    return v;
  }

  void parse_projection(Query& q) {
    if (peek().type == Tok::LParen) {
      advance();
      expect_word("COUNT");
      expect(Tok::LParen, "'('");
      CountProjection c;
      if (is_word("DISTINCT")) {
        advance();
        c.distinct = true;
      }
      c.counted = parse_variable();
      expect(Tok::RParen, "')'");
      expect_word("AS");
      c.alias = parse_variable();
      expect(Tok::RParen, "')'");
      q.count = c;
      if (peek().type == Tok::Var) fail_at(peek().offset, "COUNT projection cannot be combined with other variables");
      return;
    }
    if (peek().type != Tok::Var) fail_expected("projection variable or '(COUNT(...) AS ?v)'");
    while (peek().type == Tok::Var) {
      q.projection.push_back({peek().text});
      advance();
    }
    if (peek().type == Tok::LParen) fail_at(peek().offset, "COUNT projection cannot be combined with other variables");
  }

  void check_prefix(const Token& t, std::initializer_list<std::string_view> allowed, const std::string& role) const {
    static const std::set<std::string> kKnown{"e", "p", "pq"};
    if (!kKnown.count(t.prefix)) {
      throw QueryError(QueryError::Kind::UnknownPrefix, t.offset,
                       "unknown prefix '" + t.prefix + ":' at offset " + std::to_string(t.offset) +
                           " (known prefixes: e:, p:, pq:)");
    }
    if (std::find(allowed.begin(), allowed.end(), t.prefix) == allowed.end()) {
      fail_at(t.offset, "prefix '" + t.prefix + ":' is not allowed in " + role + " position");
    }
  }

  Literal parse_literal() {
    const Token& t = peek();
    if (t.type == Tok::Number) {
      std::string text = t.text;
      advance();
      try {
        return Literal::make(text.find('.') == std::string::npos ? LiteralKind::Integer : LiteralKind::Decimal, text);
      } catch (const std::invalid_argument& e) {
        fail_at(t.offset, e.what());
      }
    }
    if (t.type != Tok::String) fail_expected("literal");
    std::string value = t.text;
    std::size_t offset = t.offset;
    advance();
    LiteralKind kind = LiteralKind::String;
    if (peek().type == Tok::Caret2) {
      advance();
      const Token& dt = peek();
      if (dt.type != Tok::Prefixed || dt.prefix != "xsd") fail_expected("xsd datatype");
      static const std::map<std::string, LiteralKind> kTypes{{"string", LiteralKind::String},
                                                              {"integer", LiteralKind::Integer},
                                                              {"decimal", LiteralKind::Decimal},
                                                              {"date", LiteralKind::Date},
                                                              {"gYear", LiteralKind::Year}};
      auto it = kTypes.find(dt.text);
      if (it == kTypes.end()) fail_at(dt.offset, "unsupported datatype 'xsd:" + dt.text + "'");
      kind = it->second;
      advance();
    }
    try {
      return Literal::make(kind, value);
    } catch (const std::invalid_argument& e) {
      fail_at(offset, e.what());
    }
  }

  QueryTerm parse_node_term(const std::string& role) {
    const Token& t = peek();
    if (t.type == Tok::Var) return parse_variable();
    if (t.type == Tok::Prefixed) {
      check_prefix(t, {"e"}, role);
      NodeId id{t.text};
      advance();
      return id;
    }
    if (role == "object" && (t.type == Tok::String || t.type == Tok::Number)) return parse_literal();
    fail_expected(role == "object" ? "variable, e:id or literal" : "variable or e:id");
  }

  QueryTerm parse_operand() {
    const Token& t = peek();
    if (t.type == Tok::Var) return parse_variable();
    if (t.type == Tok::Prefixed) {
      check_prefix(t, {"e"}, "filter operand");
      NodeId id{t.text};
      advance();
      return id;
    }
    if (t.type == Tok::String || t.type == Tok::Number) return parse_literal();
    fail_expected("variable, e:id or literal");
  }

  GroupPattern parse_group() {
    expect(Tok::LBrace, "'{'");
    GroupPattern g;
    // Index of the latest main triple in this group, for qualifier attachment.
    std::optional<std::size_t> last_main;
    while (peek().type != Tok::RBrace) {
      const Token& t = peek();
      if (t.type == Tok::End) fail_expected("'}'");
      if (t.type == Tok::Dot) {
        advance();
        continue;
      }
      if (is_word("FILTER")) {
        advance();
        expect(Tok::LParen, "'('");
        FilterExpr f;
        f.lhs = parse_operand();
        if (peek().type != Tok::Op) fail_expected("comparison operator");
        static const std::map<std::string, CompareOp> kOps{{"=", CompareOp::Eq},  {"!=", CompareOp::Ne},
                                                           {"<", CompareOp::Lt},  {">", CompareOp::Gt},
                                                           {"<=", CompareOp::Le}, {">=", CompareOp::Ge}};
        f.op = kOps.at(peek().text);
        advance();
        f.rhs = parse_operand();
        expect(Tok::RParen, "')'");
        g.elements.emplace_back(std::move(f));
        continue;
      }
      if (is_word("VALUES")) {
        advance();
        ValuesBlock vb;
        vb.variable = parse_variable();
        expect(Tok::LBrace, "'{'");
        while (peek().type != Tok::RBrace) {
          if (peek().type == Tok::End) fail_expected("'}'");
          QueryTerm term = parse_operand();
          if (auto* node = std::get_if<NodeId>(&term)) {
            vb.values.emplace_back(*node);
          } else if (auto* lit = std::get_if<Literal>(&term)) {
            vb.values.emplace_back(*lit);
          } else {
            fail_at(peek().offset, "VALUES entries must be constants");
          }
        }
        advance();
        g.elements.emplace_back(std::move(vb));
        continue;
      }
      if (t.type == Tok::LBrace) {
        UnionPattern u;
        u.branches.push_back(parse_group());
        if (!is_word("UNION")) fail_expected("'UNION'");
        while (is_word("UNION")) {
          advance();
          u.branches.push_back(parse_group());
        }
        g.elements.emplace_back(std::move(u));
        continue;
      }
      std::size_t subject_offset = t.offset;
      QueryTerm subject = parse_node_term("subject");
      const Token& pt = peek();
      if (pt.type != Tok::Prefixed) fail_expected("predicate (p:id or pq:id)");
      check_prefix(pt, {"p", "pq"}, "predicate");
      PredicateId pred{pt.text};
      bool qualifier = pt.prefix == "pq";
      advance();
      QueryTerm object = parse_node_term("object");
      if (qualifier) {
        if (!last_main) fail_at(subject_offset, "qualifier pattern must follow a main (p:) pattern in the same group");
        auto& main = std::get<TriplePattern>(g.elements[*last_main]);
        if (main.subject != subject) {
          fail_at(subject_offset, "qualifier pattern subject must match the subject of the preceding p: pattern");
        }
        main.qualifiers.push_back({std::move(pred), std::move(object)});
      } else {
        last_main = g.elements.size();
        g.elements.emplace_back(TriplePattern{std::move(subject), std::move(pred), std::move(object), {}});
      }
    }
    advance();
    validate_group(g);
    return g;
  }

  void validate_group(const GroupPattern& g) const {
    for (const auto& el : g.elements) {
      if (const auto* u = std::get_if<UnionPattern>(&el)) {
        for (const auto& branch : u->branches) {
          if (!has_triple(branch)) fail_at(peek().offset, "every UNION branch needs at least one triple pattern");
        }
      }
    }
  }

  static bool has_triple(const GroupPattern& g) {
    for (const auto& el : g.elements) {
      if (std::holds_alternative<TriplePattern>(el)) return true;
      if (const auto* u = std::get_if<UnionPattern>(&el)) {
        if (std::all_of(u->branches.begin(), u->branches.end(), has_triple)) return true;
      }
    }
    return false;
  }

  void validate(const Query& q) const {
    auto vars = body_variables(q.body);
    auto need = [&](const Variable& v) {
      if (!vars.count(v.name)) fail_at(0, "variable ?" + v.name + " does not appear in the query body");
    };
    for (const auto& v : q.projection) need(v);
    if (q.count) need(q.count->counted);
    if (q.order) need(q.order->variable);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void collect_vars(const QueryTerm& t, std::set<std::string>& out) {
  if (const auto* v = std::get_if<Variable>(&t)) out.insert(v->name);
}

void collect_group_vars(const GroupPattern& g, std::set<std::string>& out) {
  for (const auto& el : g.elements) {
    if (const auto* tp = std::get_if<TriplePattern>(&el)) {
      collect_vars(tp->subject, out);
      collect_vars(tp->object, out);
      for (const auto& q : tp->qualifiers) collect_vars(q.object, out);
    } else if (const auto* f = std::get_if<FilterExpr>(&el)) {
      collect_vars(f->lhs, out);
      collect_vars(f->rhs, out);
    } else if (const auto* u = std::get_if<UnionPattern>(&el)) {
      for (const auto& b : u->branches) collect_group_vars(b, out);
    } else if (const auto* vb = std::get_if<ValuesBlock>(&el)) {
      out.insert(vb->variable.name);
    }
  }
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string print_literal(const Literal& lit) {
  switch (lit.kind()) {
    case LiteralKind::String: return quote(lit.lexical());
    case LiteralKind::Integer: return lit.lexical();
    case LiteralKind::Decimal:
      return lit.lexical().find('.') == std::string::npos ? quote(lit.lexical()) + "^^xsd:decimal" : lit.lexical();
    case LiteralKind::Date: return quote(lit.lexical()) + "^^xsd:date";
    case LiteralKind::Year: return quote(lit.lexical()) + "^^xsd:gYear";
  }
  return quote(lit.lexical());
}

std::string print_term(const QueryTerm& t) {
  if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
  if (const auto* n = std::get_if<NodeId>(&t)) return "e:" + n->value;
  return print_literal(std::get<Literal>(t));
}

std::string print_term(const TermValue& t) {
  if (const auto* n = std::get_if<NodeId>(&t)) return "e:" + n->value;
  return print_literal(std::get<Literal>(t));
}

void print_group(const GroupPattern& g, std::ostringstream& out) {
  out << "{ ";
  for (const auto& el : g.elements) {
    if (const auto* tp = std::get_if<TriplePattern>(&el)) {
      out << print_term(tp->subject) << " p:" << tp->predicate.value << ' ' << print_term(tp->object) << " . ";
      for (const auto& q : tp->qualifiers) {
        out << print_term(tp->subject) << " pq:" << q.predicate.value << ' ' << print_term(q.object) << " . ";
      }
    } else if (const auto* f = std::get_if<FilterExpr>(&el)) {
      out << "FILTER(" << print_term(f->lhs) << ' ' << to_string(f->op) << ' ' << print_term(f->rhs) << ") ";
    } else if (const auto* u = std::get_if<UnionPattern>(&el)) {
      for (std::size_t i = 0; i < u->branches.size(); ++i) {
        if (i) out << "UNION ";
        print_group(u->branches[i], out);
        out << ' ';
      }
    } else if (const auto* vb = std::get_if<ValuesBlock>(&el)) {
      out << "VALUES ?" << vb->variable.name << " { ";
      for (const auto& v : vb->values) out << print_term(v) << ' ';
      out << "} ";
    }
  }
  out << '}';
}

}  // namespace

std::string to_query_syntax(const TermValue& term) { return print_term(term); }

std::set<std::string> body_variables(const GroupPattern& group) {
  std::set<std::string> out;
  collect_group_vars(group, out);
  return out;
}

Query parse_query(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.parse();
}

std::string serialize_query(const Query& q) {
  std::ostringstream out;
  if (q.form == QueryForm::Ask) {
    out << "ASK WHERE ";
  } else {
    out << "SELECT ";
    if (q.distinct) out << "DISTINCT ";
    if (q.count) {
      out << "(COUNT(" << (q.count->distinct ? "DISTINCT " : "") << '?' << q.count->counted.name << ") AS ?"
          << q.count->alias.name << ") ";
    } else {
      for (const auto& v : q.projection) out << '?' << v.name << ' ';
    }
    out << "WHERE ";
  }
  print_group(q.body, out);
  if (q.order) {
    out << " ORDER BY " << (q.order->direction == SortDirection::Desc ? "DESC" : "ASC") << "(?"
        << q.order->variable.name << ')';
  }
  if (q.limit) out << " LIMIT " << *q.limit;
  return out.str();
}

}  // namespace kbqa
