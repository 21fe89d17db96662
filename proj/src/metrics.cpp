// SPDX-License-Identifier: Apache-2.0
#include "kbqa/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace kbqa {

namespace {

std::size_t overlap(const AnswerSet& a, const AnswerSet& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

}  // namespace

PrecisionRecall precision_recall(const AnswerSet& pred, const AnswerSet& gold) {
  PrecisionRecall out;
  auto common = static_cast<double>(overlap(pred, gold));
  if (!pred.empty()) out.precision = common / static_cast<double>(pred.size());
  if (!gold.empty()) out.recall = common / static_cast<double>(gold.size());
  if (out.precision + out.recall > 0) out.f1 = 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double f1(const AnswerSet& pred, const AnswerSet& gold) { return precision_recall(pred, gold).f1; }

double rhits1(const AnswerSet& pred, const AnswerSet& gold) {
  if (pred.empty()) return 0;
  return static_cast<double>(overlap(pred, gold)) / static_cast<double>(pred.size());
}

double em(const AnswerSet& pred, const AnswerSet& gold) { return overlap(pred, gold) > 0 ? 1 : 0; }

double set_accuracy(const AnswerSet& pred, const AnswerSet& gold) { return !pred.empty() && pred == gold ? 1 : 0; }

double max_at_k(const std::vector<AnswerSet>& branches, const AnswerSet& gold) {
  double best = 0;
  for (const auto& b : branches) best = std::max(best, f1(b, gold));
  return best;
}

double empty_at_k(const std::vector<AnswerSet>& branches, const AnswerSet& gold) {
  return max_at_k(branches, gold) == 0 ? 1 : 0;
}

Report aggregate(const std::vector<EvalRecord>& records) {
  std::map<std::string, MetricRow> by_type;
  MetricRow overall{"overall"};
  for (const auto& r : records) {
    std::string type = r.type.empty() ? "unknown" : r.type;
    auto& row = by_type[type];
    row.type = type;
    for (auto* acc : {&row, &overall}) {
      ++acc->count;
      acc->f1 += f1(r.pred, r.gold);
      acc->rhits1 += rhits1(r.pred, r.gold);
      acc->em += em(r.pred, r.gold);
      acc->acc += set_accuracy(r.pred, r.gold);
      acc->max_at_k += max_at_k(r.branches, r.gold);
      acc->empty_at_k += empty_at_k(r.branches, r.gold);
    }
  }
  Report report;
  auto finish = [](MetricRow row) {
    auto n = static_cast<double>(row.count);
    for (double* v : {&row.f1, &row.rhits1, &row.em, &row.acc, &row.max_at_k, &row.empty_at_k}) *v /= n;
    return row;
  };
  for (auto& [type, row] : by_type) report.rows.push_back(finish(row));
  if (overall.count) report.rows.push_back(finish(overall));
  return report;
}

std::string report_csv(const Report& report) {
  std::string out = "type,count,f1,rhits1,em,acc,max_at_k,empty_at_k\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.type.c_str(), r.count, r.f1, r.rhits1,
                  r.em, r.acc, r.max_at_k, r.empty_at_k);
    out += buf;
  }
  return out;
}

}  // namespace kbqa
