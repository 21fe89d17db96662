// SPDX-License-Identifier: Apache-2.0
// Brute-force reference evaluator and random generators for the query engine.
#pragma once

#include <random>
#include <string>

#include "kbqa/kb.hpp"
#include "kbqa/query.hpp"

namespace kbqa::testing {

/// Enumerates every combination of per-element choices (statement plus
/// qualifier picks, union branch solution, VALUES entry) in lexicographic
/// order, keeps the consistent ones, then filters, orders, counts, projects,
/// deduplicates and limits. Shares nothing with the engine except the AST and
/// the KB accessors.
ResultSet oracle_evaluate(const Query& query, const KnowledgeBase& kb);

/// Random KB with at most `max_statements` statements over a few predicates,
/// mixed literal kinds and some qualified statements.
KnowledgeBase random_kb(std::mt19937_64& rng, std::size_t max_statements);

/// Random query text: at most three triple patterns, at most one filter,
/// optional UNION, VALUES, qualifiers, COUNT, ASK, DISTINCT, ORDER BY, LIMIT.
std::string random_query(std::mt19937_64& rng, const KnowledgeBase& kb);

/// Deterministic high-precision UCT and increment values for cross-checking.
long double ref_uct(long double w, long double n, long double parent_visits);
long double ref_increment(long double r, long double depth, long double gamma, long double d_exp);

}  // namespace kbqa::testing
