// SPDX-License-Identifier: Apache-2.0
#include <json.hpp>

#include "doctest.h"
#include "kbqa/annotate.hpp"
#include "kbqa/metrics.hpp"
#include "kbqa/scripted.hpp"
#include "planted.hpp"
#include "toy.hpp"

using namespace kbqa;
using testing::step_done;
using testing::step_search_nodes;
using testing::step_sparql;

namespace {

const char* kQuestion = "Which people are from the United States?";

// Gold is {MLK, Michelle}. The first branch returns {Michelle, Obama} (F1 0.5),
// the second returns the gold set exactly.
ScriptedFixture partial_then_exact(double partial_weight) {
  ScriptedFixture f;
  ScriptedQuestion q;
  q.question = kQuestion;
  ScriptedBranch partial, exact;
  partial.weight = partial_weight;
  partial.gold = true;
  partial.steps = {step_sparql("SELECT ?x WHERE { ?x p:born_in ?c }"), step_done()};
  exact.gold = true;
  exact.steps = {step_search_nodes("United States"),
                 step_sparql("SELECT ?x WHERE { VALUES ?x { e:MLK e:Michelle } }"), step_done()};
  q.branches = {partial, exact};
  f.add(q);
  return f;
}

DatasetRecord record() {
  return {"r1", kQuestion, "SELECT ?x WHERE { VALUES ?x { e:Michelle e:MLK } }", std::nullopt, "Conj"};
}

}  // namespace

TEST_CASE("exact branch gives an F1 1 trajectory") {
  auto set = testing::make_planted({});
  ScriptedAgent agent(set.fixture, 1);
  ScriptedReward reward(set.fixture, 1);
  auto out = annotate_question(set.dataset[0], set.kb, {agent, reward}, RewardConfig{}, SearchConfig{});
  REQUIRE(out.trajectory);
  CHECK(out.trajectory->f1 == 1.0);
  CHECK(out.trajectory->turns.back().action.tool == Tool::Done);
  CHECK(out.search.stop_reason == "hook");
  CHECK(replay_mismatches(*out.trajectory, set.kb).empty());
}

TEST_CASE("a branch below the threshold does not stop the search") {
  auto kb = unit::toy_kb();
  auto fixture = partial_then_exact(2.0);
  ScriptedAgent agent(fixture, 1);
  ScriptedReward reward(fixture, 1);
  auto out = annotate_question(record(), kb, {agent, reward}, RewardConfig{}, SearchConfig{});
  REQUIRE(out.trajectory);
  CHECK(out.trajectory->f1 == 1.0);
  CHECK(out.search.terminal_predictions.size() == 2);
  CHECK(out.search.terminal_predictions.front().answers.size() == 2);
  CHECK(f1(out.search.terminal_predictions.front().answers, gold_answers(record(), kb)) == 0.5);
}

TEST_CASE("skips") {
  auto kb = unit::toy_kb();
  auto fixture = partial_then_exact(1.0);
  ScriptedAgent agent(fixture, 1);
  ScriptedReward reward(fixture, 1);

  auto bad = record();
  bad.sparql = "SELECT ?x WHERE {";
  auto e = annotate_question(bad, kb, {agent, reward}, RewardConfig{}, SearchConfig{});
  CHECK(!e.trajectory);
  CHECK(e.skip_reason.rfind("gold_error", 0) == 0);

  auto empty = record();
  empty.sparql = "SELECT ?x WHERE { ?x p:capital e:Chicago }";
  CHECK(annotate_question(empty, kb, {agent, reward}, RewardConfig{}, SearchConfig{}).skip_reason == "gold_empty");

  auto unreachable = record();
  unreachable.sparql = "SELECT ?x WHERE { VALUES ?x { e:Honolulu } }";
  CHECK(annotate_question(unreachable, kb, {agent, reward}, RewardConfig{}, SearchConfig{}).skip_reason == "budget");

  CHECK(skip_report_csv({{"a", "budget"}, {"b", "gold_error: x, y"}}) == "id,reason\na,budget\nb,\"gold_error: x, y\"\n");
}

TEST_CASE("training file") {
  auto empty = export_training_file({}, AgentPrompt{"sys"});
  auto manifest = nlohmann::json::parse(empty.substr(0, empty.find('\n')));
  CHECK(manifest["count"] == 0);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
  CHECK(parse_training_file(empty).empty());

  auto kb = unit::toy_kb();
  Trajectory t{"id1", "Where was Michelle Obama born?", {}, 1.0, "SELECT ?x WHERE { e:Michelle p:born_in ?x }", "g"};
  for (auto a : {Action{"find", Tool::SearchNodes, "Michelle Obama", ""},
                 Action{"query", Tool::ExecuteSPARQL, t.sparql, ""}}) {
    t.turns.push_back({a, execute_action(kb, a)});
  }
  t.turns.push_back({Action{"done", Tool::Done, "", ""}, std::nullopt});

  auto text = export_training_file({t}, AgentPrompt{"sys"});
  auto record = nlohmann::json::parse(text.substr(text.find('\n') + 1));
  int assistant = 0;
  for (const auto& m : record["messages"]) assistant += m["role"] == "assistant";
  CHECK(assistant == 3);

  auto back = parse_training_file(text);
  REQUIRE(back.size() == 1);
  REQUIRE(back[0].turns.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[0].turns[i].action.tool == t.turns[i].action.tool);
    CHECK(back[0].turns[i].action.argument == t.turns[i].action.argument);
  }
  CHECK(replay_mismatches(back[0], kb).empty());

  back[0].turns[0].observation->text = "tampered";
  CHECK(replay_mismatches(back[0], kb) == std::vector<std::size_t>{0});
}
