// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbqa/kb.hpp"
#include "kbqa/query.hpp"

namespace kbqa {

struct DatasetRecord {
  std::string id;
  std::string question;
  std::string sparql;
  std::optional<AnswerSet> answers;  // computed from sparql when absent
  std::string type;
};

/// JSON-lines {id, question, sparql, answers?, type?}. Throws std::runtime_error
/// naming the line on malformed input or a duplicate id.
std::vector<DatasetRecord> parse_dataset(const std::string& text);
std::vector<DatasetRecord> load_dataset(const std::string& path);

/// The record's answers, or the canonical answers of its query on `kb`.
/// Throws QueryError when the query does not parse.
AnswerSet gold_answers(const DatasetRecord& record, const KnowledgeBase& kb);

struct SamplingPlan {
  double fraction = 0.1;
  /// Extra multiplier on the per-type quota for under-represented types.
  std::map<std::string, double> oversample{{"Compa", 2.0}, {"Super", 2.0}};
  std::uint64_t seed = 0;
};

/// Per-type sample of ceil(fraction * oversample * count) records (capped at
/// the type's size), drawn with a seeded shuffle. Output keeps input order.
std::vector<DatasetRecord> stratified_sample(const std::vector<DatasetRecord>& records, const SamplingPlan& plan);

std::string dataset_jsonl(const std::vector<DatasetRecord>& records);

}  // namespace kbqa
