// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>

#include "doctest.h"
#include "kbqa/query.hpp"
#include "oracle.hpp"
#include "toy.hpp"

using namespace kbqa;

TEST_CASE("parse minimal select") {
  auto q = parse_query("SELECT ?x WHERE { ?x p:nationality e:USA . }");
  CHECK(q.form == QueryForm::Select);
  REQUIRE(q.body.elements.size() == 1);
  CHECK(std::holds_alternative<TriplePattern>(q.body.elements[0]));
}

TEST_CASE("syntax errors carry position and expectation") {
  try {
    parse_query("SELECT ?x WHERE { ?x p:a ?y");
    FAIL("expected a syntax error");
  } catch (const QueryError& e) {
    CHECK(e.kind() == QueryError::Kind::Syntax);
    CHECK(e.offset() == 27);
    CHECK(e.expected().find('}') != std::string::npos);
  }
  try {
    parse_query("SELECT ?x WHERE { ?x wd:P31 ?y }");
    FAIL("expected an unknown-prefix error");
  } catch (const QueryError& e) {
    CHECK(e.kind() == QueryError::Kind::UnknownPrefix);
  }
}

TEST_CASE("round trip of a query using every construct") {
  const char* text =
      "SELECT DISTINCT ?x ?d WHERE { { ?x p:nationality e:USA } UNION { ?x p:born_in e:Chicago } "
      "?x p:start ?d . FILTER(?d >= \"1900-01-01\"^^xsd:date) VALUES ?x { e:Obama e:MLK } } ORDER BY DESC(?d) LIMIT 3";
  auto q = parse_query(text);
  CHECK(parse_query(serialize_query(q)) == q);
  CHECK(serialize_query(parse_query(serialize_query(q))) == serialize_query(q));
}

TEST_CASE("parser never crashes on mutated input") {
  std::mt19937_64 rng(3);
  const std::string base = "SELECT (COUNT(DISTINCT ?x) AS ?c) WHERE { ?x p:a ?y . ?y pq:q 3 FILTER(?y != e:B) }";
  for (int i = 0; i < 2000; ++i) {
    std::string s = base;
    for (int k = 0; k < 3; ++k) {
      std::size_t pos = rng() % s.size();
      switch (rng() % 3) {
        case 0: s.erase(pos, 1); break;
        case 1: s.insert(pos, 1, "{}()?.:\"^<>=!"[rng() % 13]); break;
        default: s[pos] = static_cast<char>(32 + rng() % 95);
      }
    }
    try {
      auto q = parse_query(s);
      CHECK(parse_query(serialize_query(q)) == q);
    } catch (const QueryError&) {
    }
  }
}

TEST_CASE("evaluation basics") {
  auto kb = unit::toy_kb();
  CHECK(evaluate(parse_query("SELECT ?x WHERE { ?x p:capital e:Obama }"), kb).rows.empty());

  auto count = evaluate(parse_query("SELECT (COUNT(?x) AS ?n) WHERE { ?x p:type e:Person }"), kb);
  REQUIRE(count.rows.size() == 1);
  CHECK(canonical_answers(count) == AnswerSet{"3"});

  auto ask = evaluate(parse_query("ASK { e:Obama p:nationality e:USA }"), kb);
  CHECK(canonical_answers(ask) == AnswerSet{"true"});

  auto qual = evaluate(parse_query("SELECT ?y WHERE { e:USA p:capital ?c . e:USA pq:start ?y }"), kb);
  CHECK(canonical_answers(qual) == AnswerSet{"1800"});

  CHECK(evaluate(parse_query("SELECT ?x WHERE { ?x p:nationality e:USA } LIMIT 2"), kb).rows.size() == 2);
  CHECK_THROWS_AS(parse_query("SELECT ?x WHERE { ?x p:nationality e:USA } LIMIT 0"), QueryError);
  auto zero = parse_query("SELECT ?x WHERE { ?x p:nationality e:USA }");
  zero.limit = 0;
  CHECK(evaluate(zero, kb).rows.empty());
}

TEST_CASE("filters compare typed literals") {
  auto kb = unit::toy_kb();
  auto dates = evaluate(parse_query("SELECT ?x WHERE { ?x p:start ?d FILTER(?d > \"2000-01-01\"^^xsd:date) }"), kb);
  CHECK(canonical_answers(dates) == AnswerSet{"Obama (Barack Obama)"});
  auto nums = evaluate(parse_query("SELECT ?x WHERE { ?x p:start ?d FILTER(?d < 2000) }"), kb);
  CHECK(canonical_answers(nums) == AnswerSet{"Michelle (Michelle Obama)"});
  // Incomparable kinds never satisfy an ordering filter.
  CHECK(!filter_compare(TermValue{Literal::string("a")}, TermValue{Literal::integer(1)}));
}

TEST_CASE("canonical answers") {
  auto kb = unit::toy_kb();
  ResultSet rs;
  rs.variables = {"x"};
  rs.rows = {{TermValue{NodeId{"Obama"}}}, {TermValue{NodeId{"MLK"}}}, {TermValue{NodeId{"Obama"}}}};
  rs.labels = {{NodeId{"Obama"}, "Barack Obama"}, {NodeId{"MLK"}, "Martin Luther King"}};
  CHECK(canonical_answers(rs) == AnswerSet{"MLK (Martin Luther King)", "Obama (Barack Obama)"});
  CHECK(canonical_answers(ResultSet{}).empty());

  auto a = evaluate(parse_query("SELECT ?x WHERE { ?x p:nationality e:USA } ORDER BY ASC(?x)"), kb);
  auto b = evaluate(parse_query("SELECT ?x WHERE { ?x p:nationality e:USA } ORDER BY DESC(?x)"), kb);
  CHECK(a.rows != b.rows);
  CHECK(canonical_answers(a) == canonical_answers(b));
  CHECK(a.fingerprint() == b.fingerprint());
}

TEST_CASE("random queries agree with the brute-force evaluator") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    auto kb = testing::random_kb(rng, 80);
    auto q = parse_query(testing::random_query(rng, kb));
    auto got = evaluate(q, kb);
    auto want = testing::oracle_evaluate(q, kb);
    CHECK(got.rows == want.rows);
  }
}
