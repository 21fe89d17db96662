// SPDX-License-Identifier: Apache-2.0
#include "kbqa/scripted.hpp"

#include <random>
#include <stdexcept>

#include <json.hpp>

#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;

void ScriptedFixture::add(ScriptedQuestion q) {
  for (auto& b : q.branches) {
    b.parsed.clear();
    for (const auto& s : b.steps) {
      auto p = parse_agent_output(s);
      b.parsed.push_back(std::holds_alternative<Action>(p) ? std::optional<Action>(std::get<Action>(p)) : std::nullopt);
    }
  }
  if (!questions_.count(q.question)) order_.push_back(q.question);
  std::string key = q.question;
  questions_[key] = std::move(q);
}

ScriptedFixture ScriptedFixture::parse(const std::string& text) {
  ScriptedFixture f;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string line = trim(std::string_view(text).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      ScriptedQuestion q;
      q.question = j.at("question").get<std::string>();
      for (const auto& jb : j.at("branches")) {
        ScriptedBranch b;
        b.weight = jb.value("weight", 1.0);
        b.gold = jb.value("gold", false);
        b.steps = jb.at("steps").get<std::vector<std::string>>();
        if (!(b.weight > 0)) throw std::runtime_error("branch weight must be positive");
        q.branches.push_back(std::move(b));
      }
      f.add(std::move(q));
    } catch (const std::exception& e) {
      throw std::runtime_error("fixture line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return f;
}

ScriptedFixture ScriptedFixture::load(const std::string& path) { return parse(read_file(path)); }

const ScriptedQuestion* ScriptedFixture::find(const std::string& question) const {
  auto it = questions_.find(question);
  return it == questions_.end() ? nullptr : &it->second;
}

std::string ScriptedFixture::to_jsonl() const {
  std::string out;
  for (const auto& name : order_) {
    const auto& q = questions_.at(name);
    json jq{{"question", q.question}, {"branches", json::array()}};
    for (const auto& b : q.branches) jq["branches"].push_back({{"weight", b.weight}, {"gold", b.gold}, {"steps", b.steps}});
    out += jq.dump() + "\n";
  }
  return out;
}

bool branch_matches(const ScriptedBranch& branch, const std::vector<Step>& history) {
  if (history.size() > branch.parsed.size()) return false;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& want = branch.parsed[i];
    if (!want || want->tool != history[i].action.tool || want->argument != history[i].action.argument) return false;
  }
  return true;
}

std::uint64_t history_digest(std::uint64_t seed, const AgentState& state) {
  std::string key = std::to_string(seed) + '\x1f' + state.question;
  for (const auto& step : state.history) {
    key += '\x1f';
    key += to_string(step.action.tool);
    key += '\x1e';
    key += step.action.argument;
  }
  return fnv1a64(key);
}

std::vector<std::string> ScriptedAgent::complete(const AgentState& state, int n, double, std::uint64_t attempt) {
  std::vector<const std::string*> options;
  std::vector<double> weights;
  if (const auto* q = fixture_.find(state.question)) {
    std::size_t d = state.history.size();
    for (const auto& b : q->branches) {
      if (d >= b.steps.size() || !branch_matches(b, state.history)) continue;
      options.push_back(&b.steps[d]);
      weights.push_back(b.weight);
    }
  }
  std::vector<std::string> out;
  if (options.empty()) {
    out.assign(static_cast<std::size_t>(n), "Thought: Nothing else to try.\nAction: Done");
    return out;
  }
  std::mt19937_64 rng(history_digest(seed_, state) ^ (attempt * 0x9e3779b97f4a7c15ULL));
  double total = 0;
  for (double w : weights) total += w;
  for (int i = 0; i < n; ++i) {
    double x = uniform01(rng) * total;
    std::size_t pick = 0;
    while (pick + 1 < weights.size() && x >= weights[pick]) x -= weights[pick++];
    out.push_back(*options[pick]);
  }
  return out;
}

std::vector<std::string> ScriptedReward::complete(const std::vector<ChatMessage>&, const AgentState& state,
                                                  RewardMode mode, int n, double) {
  bool on_gold = false;
  if (const auto* q = fixture_.find(state.question)) {
    for (const auto& b : q->branches) on_gold = on_gold || (b.gold && branch_matches(b, state.history));
  }
  std::vector<std::string> out;
  std::mt19937_64 rng(history_digest(seed_ ^ 0x5bd1e995ULL, state));
  for (int i = 0; i < n; ++i) {
    int score = on_gold ? 10 : 0;
    if (mode == RewardMode::Direct) {
      int base = on_gold ? 4 : 0;
      score = base + static_cast<int>(uniform01(rng) * 7.0);
    }
    out.push_back("The trajectory was reviewed.\nScore: " + std::to_string(score));
  }
  return out;
}

}  // namespace kbqa
