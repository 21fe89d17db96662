// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "kbqa/baselines.hpp"
#include "kbqa/scripted.hpp"
#include "planted.hpp"
#include "toy.hpp"

using namespace kbqa;
using testing::step_done;
using testing::step_search_nodes;
using testing::step_sparql;

namespace {

/// Answers attempt i with scripted chain i.
class Chains : public AgentBackend {
 public:
  std::vector<std::vector<std::string>> chains;
  std::vector<std::string> complete(const AgentState& s, int, double, std::uint64_t attempt) override {
    const auto& chain = chains[attempt % chains.size()];
    return {s.depth() < chain.size() ? chain[s.depth()] : step_done()};
  }
};

const char* kA = "SELECT ?x WHERE { e:Michelle p:born_in ?x }";
const char* kB = "SELECT ?x WHERE { e:Obama p:born_in ?x }";

}  // namespace

TEST_CASE("names") {
  for (auto b : {Baseline::Linear, Baseline::LinearVote, Baseline::Bfs, Baseline::Dfs, Baseline::Random}) {
    CHECK(baseline_from_string(to_string(b)) == b);
  }
  CHECK(!baseline_from_string("beam"));
}

TEST_CASE("linear runs vote") {
  auto kb = unit::toy_kb();
  SearchConfig cfg;
  Chains agent;
  agent.chains = {{step_sparql(kA), step_done()}};
  auto one = run_linear("q", kb, agent, 1, cfg);
  CHECK(one.answer == AnswerSet{"Chicago (Chicago)"});
  for (const auto& n : one.tree.nodes()) CHECK(n.children.size() <= 1);

  agent.chains = {{step_sparql(kA), step_done()},
                  {step_sparql(kA), step_done()},
                  {step_sparql(kB), step_done()},
                  {step_done()},
                  {step_search_nodes("Chicago"), step_sparql(kA), step_done()}};
  auto five = run_linear("q", kb, agent, 5, cfg);
  CHECK(five.answer == AnswerSet{"Chicago (Chicago)"});
  CHECK(five.terminal_predictions.size() == 4);

  agent.chains = {{step_done()}};
  CHECK(run_linear("q", kb, agent, 5, cfg).answer.empty());
}

TEST_CASE("bfs stays shallow, dfs follows the first branch down") {
  testing::PlantedOptions po;
  po.questions = 5;
  po.decoys = 1;  // one decoy leaving at the root
  po.decoy_depth = 6;
  po.gold_weight = 1.0;
  auto set = testing::make_planted(po);
  ScriptedAgent agent(set.fixture, 2);
  ScriptedReward reward(set.fixture, 2);
  SearchConfig cfg;
  cfg.k_early_stop = 1;
  for (const auto& rec : set.dataset) {
    auto b = run_bfs(rec.question, set.kb, {agent, reward}, RewardConfig{}, cfg);
    CHECK(b.answer == *rec.answers);
    // BFS expands every node above the gold terminal before going deeper.
    for (const auto& n : b.tree.nodes()) CHECK(n.depth <= set.gold_depth);
    for (const auto& n : b.tree.nodes()) CHECK(n.reward.value_or(0) == 0);

    auto d = run_dfs(rec.question, set.kb, {agent, reward}, RewardConfig{}, cfg);
    std::size_t deepest = 0;
    for (const auto& n : d.tree.nodes()) deepest = std::max(deepest, n.depth);
    CHECK(deepest >= b.stats.max_depth);
  }
}

TEST_CASE("random baseline is seeded") {
  testing::PlantedOptions po;
  po.questions = 2;
  po.decoy_end = testing::DecoyEnd::Wrong;
  auto set = testing::make_planted(po);
  ScriptedAgent agent(set.fixture, 2);
  ScriptedReward reward(set.fixture, 2);
  SearchConfig cfg;
  cfg.seed = 8;
  for (const auto& rec : set.dataset) {
    auto a = run_random(rec.question, set.kb, {agent, reward}, RewardConfig{}, cfg);
    auto b = run_random(rec.question, set.kb, {agent, reward}, RewardConfig{}, cfg);
    CHECK(trace_jsonl(a) == trace_jsonl(b));
    CHECK(a.strategy == "random");
  }
}

TEST_CASE("every strategy shares the budgets") {
  auto set = testing::make_termination_set(2, 1);
  ScriptedAgent agent(set.fixture, 2);
  ScriptedReward reward(set.fixture, 2);
  SearchConfig cfg;
  cfg.max_simulations = 3;
  cfg.k_early_stop = 5;
  for (auto b : {Baseline::Bfs, Baseline::Dfs, Baseline::Random}) {
    auto r = run_baseline(b, set.dataset[0].question, set.kb, {agent, reward}, RewardConfig{}, cfg);
    CHECK(r.stats.iterations <= 3);
    CHECK(r.stats.valid_terminals <= 5);
  }
}
