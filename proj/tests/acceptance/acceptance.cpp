// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "kbqa/annotate.hpp"
#include "kbqa/baselines.hpp"
#include "kbqa/harness.hpp"
#include "kbqa/metrics.hpp"
#include "kbqa/scripted.hpp"
#include "kbqa/util.hpp"
#include "oracle.hpp"
#include "planted.hpp"

namespace fs = std::filesystem;
using namespace kbqa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << std::fixed << v;
  return o.str();
}

// 1 ------------------------------------------------------------------------
Outcome query_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::size_t matched = 0, total = 500;
  std::string first_failure;
  std::optional<KnowledgeBase> kb;
  for (std::size_t i = 0; i < total; ++i) {
    if (i % 10 == 0) kb = testing::random_kb(rng, 200);
    std::string text = testing::random_query(rng, *kb);
    try {
      Query q = parse_query(text);
      bool round_trip = parse_query(serialize_query(q)) == q;
      ResultSet got = evaluate(q, *kb);
      ResultSet want = testing::oracle_evaluate(q, *kb);
      if (round_trip && got.variables == want.variables && got.rows == want.rows && got.is_ask == want.is_ask) {
        ++matched;
      } else if (first_failure.empty()) {
        first_failure = text;
      }
    } catch (const std::exception& e) {
      if (first_failure.empty()) first_failure = text + " (" + e.what() + ")";
    }
  }
  double secs = seconds_since(t0);
  Outcome o{matched == total && secs < 60, std::to_string(matched) + "/" + std::to_string(total) + " queries match, " +
                                               fmt(secs, 2) + "s"};
  if (!first_failure.empty()) o.detail += "; first mismatch: " + first_failure;
  return o;
}

// 2 ------------------------------------------------------------------------
double rel_err(long double got, long double want) {
  if (want == 0) return static_cast<double>(std::fabs(got));
  return static_cast<double>(std::fabs((got - want) / want));
}

Outcome uct_numerics() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0, 1);
  double worst = 0;
  std::size_t identity_checked = 0, clamp_checked = 0, failures = 0;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t n = 1 + rng() % 200;
    std::uint64_t parent = n + rng() % 1000;
    double w = unit(rng) * static_cast<double>(n);
    double gamma = unit(rng) * 0.99;
    int d_exp = static_cast<int>(rng() % 8);
    // A third of the cases sit exactly on the clamp boundary or beyond it.
    std::size_t depth;
    if (i % 3 == 0 && gamma > 0.05) {
      depth = static_cast<std::size_t>(d_exp + std::ceil(1.0 / gamma) + (rng() % 3));
    } else {
      depth = rng() % 20;
    }
    double r = unit(rng);

    worst = std::max(worst, rel_err(uct(w, n, parent), testing::ref_uct(w, n, parent)));

    SearchConfig cfg;
    cfg.gamma = gamma;
    cfg.d_exp = d_exp;
    SearchTree tree("q");
    std::size_t id = 0;
    for (std::size_t d = 0; d < depth; ++d) id = tree.add_child(id, Action{}, std::nullopt, std::to_string(d), 0);
    backpropagate(tree, id, r, cfg);
    long double want = testing::ref_increment(r, depth, gamma, d_exp);
    double got = tree.node(id).w;
    worst = std::max(worst, rel_err(got, want));
    if (depth <= static_cast<std::size_t>(d_exp)) {
      ++identity_checked;
      if (got != r) ++failures;
    }
    if (want == 0) {
      ++clamp_checked;
      if (got != 0) ++failures;
    }
    // Every ancestor gains its own decayed share and one visit.
    for (auto step : tree.path(id)) {
      const auto& node = tree.node(step);
      if (node.n != 1 || rel_err(node.w, testing::ref_increment(r, node.depth, gamma, d_exp)) > 1e-12) ++failures;
    }
  }
  // Spot values.
  if (std::fabs(uct(1, 1, 1) - 1.0) > 0) ++failures;
  if (rel_err(uct(2, 2, 10), testing::ref_uct(2, 2, 10)) > 1e-12) ++failures;
  return {worst <= 1e-12 && failures == 0 && identity_checked > 0 && clamp_checked > 0,
          "max relative error " + [&] {
            char b[32];
            std::snprintf(b, sizeof b, "%.3g", worst);
            return std::string(b);
          }() + " over 1000 tuples, " + std::to_string(identity_checked) + " identity and " +
              std::to_string(clamp_checked) + " clamp cases, " + std::to_string(failures) + " failures"};
}

// 3 ------------------------------------------------------------------------
std::optional<std::size_t> brute_force_select(const SearchTree& tree, int max_rounds) {
  std::optional<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t best_depth = 0;
  for (const auto& node : tree.nodes()) {
    if (node.terminal || node.exhausted || node.depth >= static_cast<std::size_t>(max_rounds)) continue;
    double score;
    if (node.n == 0) {
      score = std::numeric_limits<double>::infinity();
    } else {
      double big_n = node.parent ? static_cast<double>(tree.node(*node.parent).n) : static_cast<double>(node.n);
      score = node.w / static_cast<double>(node.n) + std::sqrt(2.0 * std::log(big_n) / static_cast<double>(node.n));
    }
    bool better = !best || score > best_score || (score == best_score && node.depth < best_depth);
    if (better) {
      best = node.id;
      best_score = score;
      best_depth = node.depth;
    }
  }
  return best;
}

Outcome selection() {
  std::mt19937_64 rng(7);
  std::size_t agree = 0, terminal_picked = 0;
  for (int t = 0; t < 200; ++t) {
    SearchTree tree("q");
    std::size_t size = 2 + rng() % 40;
    for (std::size_t i = 1; i < size; ++i) tree.add_child(rng() % i, Action{}, std::nullopt, std::to_string(i), 0);
    // Visits consistent with backpropagation: each node's n covers its subtree.
    for (std::size_t i = size; i-- > 0;) {
      auto& node = tree.node(i);
      std::uint64_t sub = 0;
      for (auto c : node.children) sub += tree.node(c).n;
      node.n = sub + (rng() % 4 == 0 && i != 0 ? 0 : rng() % 3);
      if (node.n == 0 && i == 0) node.n = 1;
      // Coarse rewards make exact ties common.
      node.w = node.n ? static_cast<double>(rng() % (node.n + 1)) / 2.0 : 0.0;
      node.terminal = i != 0 && rng() % 5 == 0 && node.children.empty();
      node.exhausted = rng() % 7 == 0;
    }
    SearchConfig cfg;
    cfg.max_rounds = 2 + static_cast<int>(rng() % 6);
    auto got = select(tree, cfg);
    auto want = brute_force_select(tree, cfg.max_rounds);
    if (got == want) ++agree;
    if (got && tree.node(*got).terminal) ++terminal_picked;
  }
  return {agree == 200 && terminal_picked == 0,
          std::to_string(agree) + "/200 trees agree with brute force, terminal selected " +
              std::to_string(terminal_picked) + " times"};
}

// 4 ------------------------------------------------------------------------
Outcome termination() {
  auto set = testing::make_termination_set(10, 5);
  ScriptedAgent agent(set.fixture, 3);
  ScriptedReward reward(set.fixture, 3);
  RewardConfig rc;
  std::size_t exact = 0, runs = 0, monotone = 0, invalid_seen = 0;
  for (const auto& rec : set.dataset) {
    std::size_t prev = 0;
    bool mono = true;
    for (int k = 1; k <= 5; ++k) {
      SearchConfig cfg;
      cfg.k_early_stop = k;
      cfg.seed = 11;
      auto res = run_search(rec.question, set.kb, {agent, reward}, rc, cfg);
      ++runs;
      std::size_t valid_nodes = 0, invalid_nodes = 0;
      std::size_t last_iteration = 0;
      for (const auto& n : res.tree.nodes()) last_iteration = std::max(last_iteration, n.created_iteration);
      std::size_t valid_before_last = 0;
      for (const auto& n : res.tree.nodes()) {
        if (n.valid_terminal) {
          ++valid_nodes;
          if (n.created_iteration < last_iteration) ++valid_before_last;
        } else if (n.terminal) {
          ++invalid_nodes;
        }
      }
      // Exits right after the expansion that produced the k-th valid terminal.
      bool ok = res.stop_reason == "early_stop" && valid_nodes == static_cast<std::size_t>(k) &&
                res.stats.valid_terminals == valid_nodes && res.stats.invalid_terminals == invalid_nodes &&
                valid_before_last < static_cast<std::size_t>(k);
      if (ok) ++exact;
      if (invalid_nodes > 0 && valid_nodes + invalid_nodes > static_cast<std::size_t>(k)) ++invalid_seen;
      if (res.stats.expansions < prev) mono = false;
      prev = res.stats.expansions;
    }
    if (mono) ++monotone;
  }
  return {exact == runs && monotone == set.dataset.size() && invalid_seen > 0,
          std::to_string(exact) + "/" + std::to_string(runs) + " runs stop exactly at k; expansions non-decreasing in k on " +
              std::to_string(monotone) + "/" + std::to_string(set.dataset.size()) + " questions; " +
              std::to_string(invalid_seen) + " runs ended with uncounted invalid terminals"};
}

// 5 ------------------------------------------------------------------------
std::string oracle_key(const Action& a, const KnowledgeBase& kb) {
  if (a.tool == Tool::Done) return "done";
  ResultSet rs = testing::oracle_evaluate(parse_query(a.argument), kb);
  std::set<std::string> rows;
  for (const auto& row : rs.rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += " | ";
      if (!row[i]) continue;
      if (const auto* n = std::get_if<NodeId>(&*row[i])) {
        line += n->value + " (" + kb.node_meta(*n).label + ")";
      } else {
        line += std::get<Literal>(*row[i]).lexical();
      }
    }
    rows.insert(line);
  }
  std::string key = "sparql";
  for (const auto& r : rows) key += "\n" + r;
  return key;
}

/// Replays a fixed list of completions per call.
class ListAgent : public AgentBackend {
 public:
  std::vector<std::vector<std::string>> batches;
  std::size_t next = 0;
  std::vector<std::string> complete(const AgentState&, int, double, std::uint64_t) override {
    return next < batches.size() ? batches[next++] : std::vector<std::string>{};
  }
};

Outcome dedup() {
  std::mt19937_64 rng(31);
  std::size_t ok = 0;
  std::optional<KnowledgeBase> kb;
  for (int c = 0; c < 200; ++c) {
    if (c % 10 == 0) kb = testing::random_kb(rng, 60);
    // A small pool, so repeats and distinct spellings with equal answers are frequent.
    std::vector<std::string> pool;
    for (int i = 0; i < 3; ++i) {
      std::string q = "SELECT ?a WHERE { ?a p:P" + std::to_string(rng() % 4) + " ?b }";
      pool.push_back(q);
      pool.push_back("SELECT DISTINCT ?a WHERE { ?a p:P" + q.substr(q.find("p:P") + 3, 1) + " ?z }");
    }
    ListAgent agent;
    std::vector<Action> all;
    for (int batch = 0; batch < 2; ++batch) {
      std::vector<std::string> texts;
      for (int i = 0; i < 5; ++i) {
        if (rng() % 6 == 0) {
          texts.push_back(testing::step_done());
        } else {
          texts.push_back(testing::step_sparql(pool[rng() % pool.size()]));
        }
      }
      for (const auto& t : texts) all.push_back(std::get<Action>(parse_agent_output(t)));
      agent.batches.push_back(texts);
    }
    SearchTree tree("q");
    SearchConfig cfg;
    expand(tree, 0, agent, *kb, cfg);
    expand(tree, 0, agent, *kb, cfg);
    std::set<std::string> keys;
    for (const auto& a : all) keys.insert(oracle_key(a, *kb));
    std::set<std::string> child_fps;
    for (auto ch : tree.root().children) child_fps.insert(tree.node(ch).fingerprint);
    if (tree.root().children.size() == keys.size() && child_fps.size() == keys.size()) ++ok;
  }
  return {ok == 200, std::to_string(ok) + "/200 cases yield one child per distinct result"};
}

// 6 ------------------------------------------------------------------------
Outcome planted_gold() {
  auto t0 = std::chrono::steady_clock::now();
  auto set = testing::make_planted({});
  ScriptedAgent agent(set.fixture, 1);
  ScriptedReward reward(set.fixture, 1);
  RewardConfig rc;
  SearchConfig cfg;
  cfg.k_early_stop = 1;
  cfg.max_simulations = 50;
  cfg.seed = 1;
  std::vector<EvalRecord> records;
  std::size_t fewer = 0, deep = 0;
  for (const auto& rec : set.dataset) {
    auto m = run_search(rec.question, set.kb, {agent, reward}, rc, cfg, Strategy::Mcts);
    auto b = run_bfs(rec.question, set.kb, {agent, reward}, rc, cfg);
    records.push_back({rec.id, rec.type, m.answer, *rec.answers, {}});
    if (rec.type == "deep") {
      ++deep;
      if (m.stats.expansions < b.stats.expansions) ++fewer;
    }
  }
  double f1_all = aggregate(records).rows.back().f1;
  double secs = seconds_since(t0);
  double share = deep ? static_cast<double>(fewer) / static_cast<double>(deep) : 0;
  return {f1_all == 1.0 && share >= 0.8 && secs < 30,
          "MCTS F1 " + fmt(f1_all) + "; fewer expansions than BFS on " + std::to_string(fewer) + "/" +
              std::to_string(deep) + " deep-decoy questions; " + fmt(secs, 2) + "s"};
}

// 7 ------------------------------------------------------------------------
Outcome scoring_modes() {
  testing::PlantedOptions po;
  po.decoy_end = testing::DecoyEnd::Wrong;
  auto set = testing::make_planted(po);
  ScriptedAgent agent(set.fixture, 1);
  ScriptedReward reward(set.fixture, 1);
  RewardConfig rc;
  SearchConfig cfg;
  cfg.seed = 1;
  std::vector<EvalRecord> rule, random;
  for (const auto& rec : set.dataset) {
    auto a = run_search(rec.question, set.kb, {agent, reward}, rc, cfg);
    auto b = run_random(rec.question, set.kb, {agent, reward}, rc, cfg);
    rule.push_back({rec.id, "", a.answer, *rec.answers, {}});
    random.push_back({rec.id, "", b.answer, *rec.answers, {}});
  }
  double fr = aggregate(rule).rows.back().f1, fx = aggregate(random).rows.back().f1;
  return {fr >= fx, "F1 rule " + fmt(fr) + " vs random " + fmt(fx)};
}

// 8 ------------------------------------------------------------------------
Outcome metrics_cases() {
  struct Case {
    AnswerSet pred, gold;
    double f1, rh, em, acc;
  };
  const std::vector<Case> cases{
      {{"a", "b"}, {"a", "b"}, 1, 1, 1, 1},
      {{"a", "b"}, {"b", "c"}, 0.5, 0.5, 1, 0},
      {{}, {"a"}, 0, 0, 0, 0},
      {{"a"}, {"a"}, 1, 1, 1, 1},
      {{"a", "b", "c", "d"}, {"a", "b"}, 2.0 / 3, 0.5, 1, 0},
      {{"x"}, {"a"}, 0, 0, 0, 0},
      {{"a", "x"}, {"a"}, 2.0 / 3, 0.5, 1, 0},
      {{"a"}, {"a", "b", "c"}, 0.5, 1, 1, 0},
      {{"a", "b", "c"}, {"c", "b", "a"}, 1, 1, 1, 1},
      {{"b", "a"}, {"a", "b"}, 1, 1, 1, 1},
      {{"a", "b", "c"}, {"c", "d"}, 0.4, 1.0 / 3, 1, 0},
      {{"a", "b"}, {"a", "b", "c", "d"}, 2.0 / 3, 1, 1, 0},
      {{"a", "b", "c", "d", "e"}, {"e"}, 1.0 / 3, 0.2, 1, 0},
      {{"x", "y"}, {"a", "b"}, 0, 0, 0, 0},
      {{"a", "b", "c", "d"}, {"b", "c", "d", "e"}, 0.75, 0.75, 1, 0},
      {{"a"}, {"b"}, 0, 0, 0, 0},
      {{"a", "b", "c"}, {"a"}, 0.5, 1.0 / 3, 1, 0},
      {{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"}, {"a"}, 2.0 / 11, 0.1, 1, 0},
      {{"true"}, {"true"}, 1, 1, 1, 1},
      {{"3"}, {"4"}, 0, 0, 0, 0},
  };
  auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-12; };
  std::size_t ok = 0;
  for (const auto& c : cases) {
    if (close(f1(c.pred, c.gold), c.f1) && close(rhits1(c.pred, c.gold), c.rh) && em(c.pred, c.gold) == c.em &&
        set_accuracy(c.pred, c.gold) == c.acc) {
      ++ok;
    }
  }
  bool boundaries = set_accuracy({}, {}) == 0 && f1({}, {"a"}) == 0 && rhits1({}, {"a"}) == 0 && em({}, {"a"}) == 0;
  AnswerSet gold{"a", "b"};
  bool branch_sets = max_at_k({{"a", "b"}, {"b", "c"}, {"x"}}, gold) == 1 && empty_at_k({{"a", "b"}, {"b", "c"}, {"x"}}, gold) == 0 &&
                     max_at_k({{"x"}, {"y"}}, gold) == 0 && empty_at_k({{"x"}, {"y"}}, gold) == 1 &&
                     max_at_k({}, gold) == 0 && empty_at_k({}, gold) == 1 &&
                     close(max_at_k({{"a"}, {"b", "c"}}, gold), 2.0 / 3) && empty_at_k({{"a"}, {"b", "c"}}, gold) == 0;
  auto report = aggregate({{"1", "Conj", {"a"}, {"a"}, {}}, {"2", "Compo", {"x"}, {"a"}, {}}});
  bool agg = report.rows.size() == 3 && report.rows[0].type == "Compo" && report.rows[0].f1 == 0 &&
             report.rows[1].f1 == 1 && report.rows[2].type == "overall" && report.rows[2].f1 == 0.5;
  return {ok == cases.size() && boundaries && branch_sets && agg,
          std::to_string(ok) + "/" + std::to_string(cases.size()) + " hand cases; boundaries " + (boundaries ? "ok" : "FAIL") +
              "; Max@k/Empty@k " + (branch_sets ? "ok" : "FAIL") + "; aggregate " + (agg ? "ok" : "FAIL")};
}

// 9 ------------------------------------------------------------------------
std::vector<RewardSample> samples(std::initializer_list<double> values) {
  std::vector<RewardSample> out;
  for (double v : values) out.push_back({"Score", v});
  return out;
}

Outcome stability() {
  std::vector<NodeSamples> table{
      {1, samples({0.2, 0.4})},       // std 0.1
      {1, samples({0.0, 0.6})},       // std 0.3
      {2, samples({0.0, 1.0})},       // std 0.5
      {2, samples({0.5, 0.5, 0.5})},  // std 0
      {3, samples({0.1, 0.2, 0.3, 0.4})},
      {3, samples({0.7})},                                     // excluded
      {4, {{"garbage", std::nullopt}, {"noise", std::nullopt}}},  // excluded
  };
  auto report = score_stability(table);
  bool rows = report.rows.size() == 3 && report.excluded == 2 && report.rows[0].depth == 1 &&
              report.rows[0].node_count == 2 && std::fabs(report.rows[0].mean_std - 0.2) < 1e-12 &&
              report.rows[1].node_count == 2 && std::fabs(report.rows[1].mean_std - 0.25) < 1e-12 &&
              report.rows[2].node_count == 1 && std::fabs(report.rows[2].mean_std - std::sqrt(0.0125)) < 1e-12;
  bool csv = stability_csv(report) == "depth,node_count,mean_std\n1,2,0.200000\n2,2,0.250000\n3,1,0.111803\n";
  auto flat = score_stability({{1, samples({0.3, 0.3})}, {2, samples({0.9, 0.9, 0.9})}});
  bool zeros = flat.rows.size() == 2 && flat.rows[0].mean_std == 0 && flat.rows[1].mean_std == 0;
  return {rows && csv && zeros, std::string("grouped table ") + (rows ? "ok" : "FAIL") + ", csv " + (csv ? "ok" : "FAIL") +
                                    ", identical samples " + (zeros ? "ok" : "FAIL")};
}

// 10 -----------------------------------------------------------------------
Outcome annotator() {
  testing::PlantedOptions po;
  po.questions = 20;
  auto set = testing::make_planted(po);
  ScriptedAgent agent(set.fixture, 2);
  ScriptedReward reward(set.fixture, 2);
  RewardConfig rc;
  SearchConfig cfg;
  cfg.seed = 2;
  std::vector<Trajectory> trajectories;
  std::size_t good = 0;
  for (const auto& rec : set.dataset) {
    auto out = annotate_question(rec, set.kb, {agent, reward}, rc, cfg);
    if (!out.trajectory) continue;
    const auto& t = *out.trajectory;
    bool ends_done = !t.turns.empty() && t.turns.back().action.tool == Tool::Done;
    if (t.f1 >= 0.67 && ends_done && replay_mismatches(t, set.kb).empty()) ++good;
    trajectories.push_back(t);
  }
  // The exported file must replay too, after re-parsing every assistant turn.
  auto exported = parse_training_file(export_training_file(trajectories, AgentPrompt{"system"}));
  std::size_t replayed = 0;
  for (const auto& t : exported) replayed += replay_mismatches(t, set.kb).empty() ? 1 : 0;

  testing::PlantedOptions none = po;
  none.gold = false;
  none.decoy_end = testing::DecoyEnd::Wrong;
  auto unreachable = testing::make_planted(none);
  ScriptedAgent agent2(unreachable.fixture, 2);
  ScriptedReward reward2(unreachable.fixture, 2);
  std::size_t budget = 0;
  for (const auto& rec : unreachable.dataset) {
    auto out = annotate_question(rec, unreachable.kb, {agent2, reward2}, rc, cfg);
    if (!out.trajectory && out.skip_reason == "budget") ++budget;
  }
  std::size_t n = set.dataset.size();
  return {good == n && replayed == n && budget == unreachable.dataset.size(),
          std::to_string(good) + "/" + std::to_string(n) + " trajectories reach F1>=0.67 and replay exactly; " +
              std::to_string(replayed) + "/" + std::to_string(n) + " exported records replay; " + std::to_string(budget) +
              "/" + std::to_string(unreachable.dataset.size()) + " unreachable questions skipped for budget"};
}

// 11 -----------------------------------------------------------------------
std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  }
  return out;
}

Outcome determinism() {
  fs::path root = fs::temp_directory_path() / ("kbqa_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  testing::PlantedOptions po;
  po.questions = 8;
  po.decoy_end = testing::DecoyEnd::Wrong;
  auto set = testing::make_planted(po);
  write_file((root / "kb.jsonl").string(), set.kb_jsonl);
  write_file((root / "dataset.jsonl").string(), dataset_jsonl(set.dataset));
  write_file((root / "fixture.jsonl").string(), set.fixture.to_jsonl());
  write_file((root / "config.json").string(), R"({"early_stop_k": 3, "max_simulations": 30, "seed": 9})");

  struct Run {
    std::string command, strategy, reward_mode;
  };
  std::vector<Run> runs{{"search", "", ""},        {"baseline", "linear", ""}, {"baseline", "linear-vote", ""},
                        {"baseline", "bfs", ""},   {"baseline", "dfs", ""},    {"baseline", "random", ""},
                        {"annotate", "", ""},      {"reward-stats", "", "direct"}};
  std::size_t identical = 0;
  std::ostringstream log;
  std::string failed;
  for (const auto& r : runs) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (int rep = 0; rep < 2; ++rep) {
      HarnessOptions opt;
      opt.command = r.command;
      opt.strategy = r.strategy;
      if (!r.reward_mode.empty()) opt.reward_mode = r.reward_mode;
      opt.config_path = (root / "config.json").string();
      opt.dataset_path = (root / "dataset.jsonl").string();
      opt.kb_path = (root / "kb.jsonl").string();
      opt.agent = "scripted:" + (root / "fixture.jsonl").string();
      opt.workers = 3;
      opt.out_dir = (root / (r.command + r.strategy + std::to_string(rep))).string();
      if (run_experiment(opt, log) != 0) break;
      HarnessOptions eval;
      eval.command = "eval";
      eval.out_dir = opt.out_dir + "_eval";
      eval.predictions_path = opt.out_dir + "/predictions.jsonl";
      if (run_experiment(eval, log) != 0) break;
      auto files = read_tree(opt.out_dir);
      files["eval/report.csv"] = read_file(eval.out_dir + "/report.csv");
      outputs.push_back(std::move(files));
    }
    bool same = outputs.size() == 2 && outputs[0] == outputs[1] && outputs[0].count("predictions.jsonl") &&
                outputs[0].size() > 3;
    if (same) {
      ++identical;
    } else if (failed.empty()) {
      failed = r.command + " " + r.strategy;
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(identical) + "/" + std::to_string(runs.size()) +
                       " commands produce byte-identical predictions, traces and reports";
  if (!failed.empty()) detail += "; first difference: " + failed;
  return {identical == runs.size(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"query engine matches brute-force oracle", query_oracle},
      {"UCT and backpropagation numerics", uct_numerics},
      {"selection equals brute-force argmax", selection},
      {"termination and early stop", termination},
      {"dedup by execution result", dedup},
      {"planted-gold end-to-end search", planted_gold},
      {"rule scoring beats random scoring", scoring_modes},
      {"answer-set metrics", metrics_cases},
      {"score stability tables", stability},
      {"annotator trajectories", annotator},
      {"determinism across runs", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
