// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "kbqa/query.hpp"

namespace kbqa {

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

PrecisionRecall precision_recall(const AnswerSet& pred, const AnswerSet& gold);
double f1(const AnswerSet& pred, const AnswerSet& gold);
/// Expected hit rate of one uniform pick from pred.
double rhits1(const AnswerSet& pred, const AnswerSet& gold);
/// 1 when any predicted answer is gold.
double em(const AnswerSet& pred, const AnswerSet& gold);
/// 1 when the sets are equal and non-empty.
double set_accuracy(const AnswerSet& pred, const AnswerSet& gold);
double max_at_k(const std::vector<AnswerSet>& branches, const AnswerSet& gold);
double empty_at_k(const std::vector<AnswerSet>& branches, const AnswerSet& gold);

struct EvalRecord {
  std::string id;
  std::string type;  // empty is reported as "unknown"
  AnswerSet pred;
  AnswerSet gold;
  std::vector<AnswerSet> branches;
};

struct MetricRow {
  std::string type;
  std::size_t count = 0;
  double f1 = 0, rhits1 = 0, em = 0, acc = 0, max_at_k = 0, empty_at_k = 0;
};

struct Report {
  std::vector<MetricRow> rows;  // per type in name order, then "overall" when non-empty
};

/// Macro average over records, per type and overall.
Report aggregate(const std::vector<EvalRecord>& records);
/// "type,count,f1,rhits1,em,acc,max_at_k,empty_at_k" with 6-decimal values.
std::string report_csv(const Report& report);

}  // namespace kbqa
