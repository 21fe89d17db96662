// SPDX-License-Identifier: Apache-2.0
#include "kbqa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;

std::vector<DatasetRecord> parse_dataset(const std::string& text) {
  std::vector<DatasetRecord> out;
  std::set<std::string> ids;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string line = trim(std::string_view(text).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    DatasetRecord r;
    try {
      auto j = json::parse(line);
      r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      r.question = j.at("question").get<std::string>();
      r.sparql = j.at("sparql").get<std::string>();
      r.type = j.value("type", std::string());
      if (j.contains("answers") && !j["answers"].is_null()) {
        auto a = j["answers"].get<std::vector<std::string>>();
        r.answers = AnswerSet(a.begin(), a.end());
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(r.id).second) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": duplicate id '" + r.id + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DatasetRecord> load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

AnswerSet gold_answers(const DatasetRecord& record, const KnowledgeBase& kb) {
  if (record.answers) return *record.answers;
  return canonical_answers(evaluate(parse_query(record.sparql), kb));
}

std::vector<DatasetRecord> stratified_sample(const std::vector<DatasetRecord>& records, const SamplingPlan& plan) {
  std::map<std::string, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < records.size(); ++i) by_type[records[i].type].push_back(i);
  std::mt19937_64 rng(plan.seed);
  std::vector<std::size_t> keep;
  for (auto& [type, idx] : by_type) {
    double factor = plan.oversample.count(type) ? plan.oversample.at(type) : 1.0;
    auto quota = static_cast<std::size_t>(std::ceil(plan.fraction * factor * static_cast<double>(idx.size())));
    quota = std::min(quota, idx.size());
    // Fisher-Yates on the seeded engine; std::shuffle's algorithm is not portable.
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota));
  }
  std::sort(keep.begin(), keep.end());
  std::vector<DatasetRecord> out;
  for (auto i : keep) out.push_back(records[i]);
  return out;
}

std::string dataset_jsonl(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j{{"id", r.id}, {"question", r.question}, {"sparql", r.sparql}};
    if (r.answers) j["answers"] = *r.answers;
    if (!r.type.empty()) j["type"] = r.type;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace kbqa
