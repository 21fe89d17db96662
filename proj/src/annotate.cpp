// SPDX-License-Identifier: Apache-2.0
#include "kbqa/annotate.hpp"

#include <stdexcept>

#include <json.hpp>

#include "kbqa/metrics.hpp"
#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;

AnnotationOutcome annotate_question(const DatasetRecord& record, const KnowledgeBase& kb, SearchBackends backends,
                                    const RewardConfig& reward, const SearchConfig& config, double threshold) {
  AnnotationOutcome out;
  AnswerSet gold;
  try {
    gold = gold_answers(record, kb);
  } catch (const std::exception& e) {
    out.skip_reason = std::string("gold_error: ") + e.what();
    return out;
  }
  if (gold.empty()) {
    out.skip_reason = "gold_empty";
    return out;
  }

  std::optional<std::size_t> hit;
  double hit_f1 = 0;
  SearchHooks hooks;
  hooks.on_valid_terminal = [&](const SearchTree& tree, std::size_t id) {
    double score = f1(tree.node(id).prediction->answers, gold);
    if (score < threshold) return false;
    hit = id;
    hit_f1 = score;
    return true;
  };
  out.search = run_search(record.question, kb, backends, reward, config, Strategy::Mcts, hooks);
  if (!hit) {
    out.skip_reason = "budget";
    return out;
  }
  const auto& tree = out.search.tree;
  Trajectory t;
  t.id = record.id;
  t.question = record.question;
  t.turns = tree.state_of(*hit).history;
  t.f1 = hit_f1;
  t.sparql = tree.node(*hit).prediction->sparql;
  t.gold_sparql = record.sparql;
  out.trajectory = std::move(t);
  return out;
}

std::string export_training_file(const std::vector<Trajectory>& trajectories, const AgentPrompt& prompt) {
  std::string out = json{{"kind", "manifest"}, {"format", "chat"}, {"count", trajectories.size()}}.dump() + "\n";
  for (const auto& t : trajectories) {
    json messages = json::array();
    for (const auto& m : render_state_prompt(AgentState{t.question, t.turns}, prompt)) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    json rec{{"kind", "trajectory"}, {"id", t.id},         {"question", t.question},    {"f1", t.f1},
             {"sparql", t.sparql},   {"gold_sparql", t.gold_sparql}, {"messages", messages}};
    out += rec.dump() + "\n";
  }
  return out;
}

std::vector<Trajectory> parse_training_file(const std::string& text) {
  std::vector<Trajectory> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string line = trim(std::string_view(text).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (line.empty()) continue;
    auto j = json::parse(line);
    if (j.value("kind", "") != "trajectory") continue;
    Trajectory t;
    t.id = j.at("id").get<std::string>();
    t.question = j.at("question").get<std::string>();
    t.f1 = j.at("f1").get<double>();
    t.sparql = j.at("sparql").get<std::string>();
    t.gold_sparql = j.at("gold_sparql").get<std::string>();
    const std::string kObs = "Observation: ";
    for (const auto& m : j.at("messages")) {
      auto role = m.at("role").get<std::string>();
      auto content = m.at("content").get<std::string>();
      if (role == "assistant") {
        auto parsed = parse_agent_output(content);
        if (!std::holds_alternative<Action>(parsed)) {
          throw std::runtime_error("unparseable assistant turn in '" + t.id + "'");
        }
        t.turns.push_back({std::get<Action>(parsed), std::nullopt});
      } else if (role == "user" && !t.turns.empty() && content.rfind(kObs, 0) == 0) {
        Observation obs;
        obs.text = content.substr(kObs.size());
        t.turns.back().observation = std::move(obs);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::size_t> replay_mismatches(const Trajectory& t, const KnowledgeBase& kb, const Scorer& scorer) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    const auto& step = t.turns[i];
    if (step.action.tool == Tool::Done) {
      if (step.observation) bad.push_back(i);
      continue;
    }
    auto fresh = execute_action(kb, step.action, scorer);
    if (!step.observation || step.observation->text != fresh.text) bad.push_back(i);
  }
  return bad;
}

std::string skip_report_csv(const std::vector<SkipRecord>& skips) {
  std::string out = "id,reason\n";
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& s : skips) out += field(s.id) + "," + field(s.reason) + "\n";
  return out;
}

}  // namespace kbqa
