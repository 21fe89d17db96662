// SPDX-License-Identifier: Apache-2.0
#include "kbqa/harness.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "kbqa/annotate.hpp"
#include "kbqa/baselines.hpp"
#include "kbqa/config.hpp"
#include "kbqa/dataset.hpp"
#include "kbqa/metrics.hpp"
#include "kbqa/scripted.hpp"
#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;
namespace fs = std::filesystem;

std::string safe_file_name(const std::string& id) {
  // '_' starts an escape, so distinct ids never share a file.
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (char c : id) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || (c == '.' && !out.empty())) {
      out += c;
    } else {
      out += '_';
      out += kHex[u >> 4];
      out += kHex[u & 15];
    }
  }
  if (out.empty()) out = "_";
  return out;
}

namespace {

/// Owns whatever the --agent option asks for and exposes the two backends.
struct Backends {
  std::unique_ptr<ScriptedFixture> fixture;
  std::unique_ptr<ChatTransport> agent_transport;
  std::unique_ptr<ChatTransport> reward_transport;
  std::unique_ptr<AgentBackend> agent;
  std::unique_ptr<RewardBackend> reward;
};

Backends make_backends(const HarnessOptions& opt, const RunConfig& cfg, std::vector<std::string>& errors) {
  Backends b;
  const std::string& spec = opt.agent;
  if (spec.rfind("scripted:", 0) == 0) {
    b.fixture = std::make_unique<ScriptedFixture>(ScriptedFixture::load(spec.substr(9)));
    b.agent = std::make_unique<ScriptedAgent>(*b.fixture, cfg.search.seed);
    b.reward = std::make_unique<ScriptedReward>(*b.fixture, cfg.search.seed);
    return b;
  }
  if (cfg.prompt_dir.empty()) {
    errors.push_back("prompt_dir is required for model-backed agents");
    return b;
  }
  AgentPrompt prompt = AgentPrompt::load(cfg.prompt_dir);
  if (spec.rfind("replay:", 0) == 0) {
    b.agent_transport = std::make_unique<ReplayTransport>(ReplayTransport::load(spec.substr(7)));
    b.agent = std::make_unique<ChatAgentBackend>(*b.agent_transport, "replay", prompt);
    b.reward = std::make_unique<ChatRewardBackend>(*b.agent_transport, "replay");
    return b;
  }
  if (spec != "endpoint") {
    errors.push_back("--agent: expected scripted:<fixture>, replay:<fixture> or endpoint");
    return b;
  }
  if (!cfg.agent_endpoint) {
    errors.push_back("agent_endpoint is required with --agent endpoint");
    return b;
  }
  b.agent_transport = std::make_unique<HttpChatTransport>(*cfg.agent_endpoint);
  b.agent = std::make_unique<ChatAgentBackend>(*b.agent_transport, cfg.agent_endpoint->model, prompt);
  const auto& reward_ep = cfg.reward_endpoint ? *cfg.reward_endpoint : *cfg.agent_endpoint;
  b.reward_transport = std::make_unique<HttpChatTransport>(reward_ep);
  b.reward = std::make_unique<ChatRewardBackend>(*b.reward_transport, reward_ep.model);
  return b;
}

json answers_json(const AnswerSet& a) { return json(std::vector<std::string>(a.begin(), a.end())); }

/// Runs `job(i)` for every index on `workers` threads. Jobs must not throw.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) job(i);
  };
  int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

struct QuestionOutput {
  json prediction;
  std::optional<EvalRecord> record;
  std::optional<Trajectory> trajectory;
  std::optional<SkipRecord> skip;
  std::vector<NodeSamples> samples;
};

void write_manifest(const fs::path& out, const HarnessOptions& opt, const RunConfig& cfg, std::size_t questions,
                    std::size_t failures, const std::string& strategy) {
  std::string config_json = cfg.to_json();
  json m{{"command", opt.command},
         {"strategy", strategy},
         {"seed", cfg.search.seed},
         {"config_digest", to_hex(fnv1a64(config_json))},
         {"config", json::parse(config_json)},
         {"agent", opt.agent},
         {"dataset", opt.dataset_path},
         {"kb", opt.kb_path},
         {"workers", opt.workers},
         {"questions", questions},
         {"failures", failures},
         {"versions",
          {{"kbqa", kVersion},
           {"kb-store", kVersion},
           {"query-engine", kVersion},
           {"kb-tools", kVersion},
           {"agent-gateway", kVersion},
           {"reward-scorer", kVersion},
           {"mcts-engine", kVersion},
           {"search-baselines", kVersion},
           {"metrics-eval", kVersion},
           {"annotate", kVersion}}}};
  write_file((out / "manifest.json").string(), m.dump(2) + "\n");
}

int run_eval(const HarnessOptions& opt, std::ostream& log) {
  fs::path out(opt.out_dir);
  std::string path = opt.predictions_path.empty() ? (out / "predictions.jsonl").string() : opt.predictions_path;
  std::vector<EvalRecord> records;
  try {
    std::string text = read_file(path);
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      std::string line = trim(std::string_view(text).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
      pos = nl == std::string::npos ? text.size() : nl + 1;
      if (line.empty()) continue;
      auto j = json::parse(line);
      if (!j.contains("gold")) continue;
      EvalRecord r;
      r.id = j.at("id").get<std::string>();
      r.type = j.value("type", std::string());
      auto pred = j.at("answers").get<std::vector<std::string>>();
      auto gold = j.at("gold").get<std::vector<std::string>>();
      r.pred = AnswerSet(pred.begin(), pred.end());
      r.gold = AnswerSet(gold.begin(), gold.end());
      for (const auto& b : j.value("branches", json::array())) {
        auto v = b.get<std::vector<std::string>>();
        r.branches.emplace_back(v.begin(), v.end());
      }
      records.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    log << "error: cannot read predictions " << path << ": " << e.what() << "\n";
    return 1;
  }
  fs::create_directories(out);
  write_file((out / "report.csv").string(), report_csv(aggregate(records)));
  log << "evaluated " << records.size() << " predictions\n";
  return 0;
}

}  // namespace

int run_experiment(const HarnessOptions& opt, std::ostream& log) {
  static const std::vector<std::string> kCommands{"search", "baseline", "annotate", "eval", "reward-stats"};
  std::vector<std::string> errors;
  if (std::find(kCommands.begin(), kCommands.end(), opt.command) == kCommands.end()) {
    errors.push_back("unknown command '" + opt.command + "'");
  }
  if (opt.out_dir.empty()) errors.push_back("--out is required");
  if (opt.command == "eval") {
    for (const auto& e : errors) log << "error: " << e << "\n";
    return errors.empty() ? run_eval(opt, log) : 2;
  }

  RunConfig cfg;
  if (!opt.config_path.empty()) {
    auto loaded = load_config(opt.config_path);
    cfg = loaded.config;
    errors.insert(errors.end(), loaded.errors.begin(), loaded.errors.end());
  }
  if (opt.seed) cfg.search.seed = *opt.seed;
  if (opt.reward_mode) {
    if (auto m = reward_mode_from_string(*opt.reward_mode)) {
      cfg.reward_mode = *m;
    } else {
      errors.push_back("--reward-mode: expected rule, direct or random");
    }
  }
  if (opt.workers < 1) errors.push_back("--workers must be >= 1");
  if (opt.dataset_path.empty()) errors.push_back("--dataset is required");
  if (opt.kb_path.empty()) errors.push_back("--kb is required");
  std::optional<Baseline> baseline;
  if (opt.command == "baseline") {
    baseline = baseline_from_string(opt.strategy);
    if (!baseline) errors.push_back("--strategy: unknown '" + opt.strategy + "'; expected linear, linear-vote, bfs, dfs or random");
  }
  if (opt.command == "reward-stats" && cfg.reward_mode == RewardMode::Random) {
    errors.push_back("reward-stats needs the rule or direct reward mode");
  }

  std::optional<KnowledgeBase> kb;
  std::vector<DatasetRecord> dataset;
  Backends backends;
  RewardConfig reward;
  if (errors.empty()) {
    try {
      kb = load_kb(opt.kb_path);
      dataset = load_dataset(opt.dataset_path);
      backends = make_backends(opt, cfg, errors);
      reward.mode = cfg.reward_mode;
      reward.samples = cfg.n_reward;
      reward.temperature = cfg.temperature_reward;
      if (!cfg.prompt_dir.empty() && cfg.reward_mode != RewardMode::Random) {
        reward.prompts = RewardPrompts::load(cfg.prompt_dir);
      }
    } catch (const std::exception& e) {
      log << "error: " << e.what() << "\n";
      return 1;
    }
  }
  if (!errors.empty()) {
    for (const auto& e : errors) log << "error: " << e << "\n";
    return 2;
  }

  fs::path out(opt.out_dir);
  fs::create_directories(out / "traces");
  std::string strategy = baseline ? std::string(to_string(*baseline)) : "mcts";
  std::vector<QuestionOutput> outputs(dataset.size());
  std::mutex log_mu;

  parallel_for(dataset.size(), opt.workers, [&](std::size_t i) {
    const auto& rec = dataset[i];
    auto& o = outputs[i];
    o.prediction = {{"id", rec.id}, {"question", rec.question}, {"type", rec.type}, {"strategy", strategy}};
    try {
      SearchBackends sb{*backends.agent, *backends.reward};
      AnswerSet gold;
      std::optional<std::string> gold_error;
      try {
        gold = gold_answers(rec, *kb);
      } catch (const std::exception& e) {
        gold_error = e.what();
      }
      SearchResult result;
      if (opt.command == "annotate") {
        auto outcome = annotate_question(rec, *kb, sb, reward, cfg.search, cfg.annotate_threshold);
        result = std::move(outcome.search);
        if (outcome.trajectory) {
          o.prediction["f1"] = outcome.trajectory->f1;
          o.trajectory = std::move(outcome.trajectory);
        } else {
          o.skip = SkipRecord{rec.id, outcome.skip_reason};
          o.prediction["skip_reason"] = outcome.skip_reason;
        }
      } else if (baseline) {
        result = run_baseline(*baseline, rec.question, *kb, sb, reward, cfg.search);
      } else {
        result = run_search(rec.question, *kb, sb, reward, cfg.search);
      }
      json branches = json::array();
      std::vector<AnswerSet> branch_sets;
      for (const auto& p : result.terminal_predictions) {
        branches.push_back(answers_json(p.answers));
        branch_sets.push_back(p.answers);
      }
      o.prediction["answers"] = answers_json(result.answer);
      o.prediction["sparql"] = result.chosen_sparql ? json(*result.chosen_sparql) : json(nullptr);
      o.prediction["branches"] = branches;
      o.prediction["stop_reason"] = result.stop_reason;
      o.prediction["node_count"] = result.stats.node_count;
      o.prediction["expansions"] = result.stats.expansions;
      if (gold_error) {
        o.prediction["gold_error"] = *gold_error;
      } else {
        o.prediction["gold"] = answers_json(gold);
        o.record = EvalRecord{rec.id, rec.type, result.answer, gold, branch_sets};
      }
      if (opt.command == "reward-stats") {
        for (const auto& node : result.tree.nodes()) {
          if (node.reward && !node.reward_samples.empty()) o.samples.push_back({node.depth, node.reward_samples});
        }
      }
      write_file((out / "traces" / (safe_file_name(rec.id) + ".jsonl")).string(), trace_jsonl(result));
    } catch (const std::exception& e) {
      o.prediction["error"] = e.what();
      std::lock_guard<std::mutex> lock(log_mu);
      log << "question " << rec.id << " failed: " << e.what() << "\n";
    }
  });

  std::string predictions;
  std::vector<EvalRecord> records;
  std::vector<Trajectory> trajectories;
  std::vector<SkipRecord> skips;
  std::vector<NodeSamples> samples;
  std::size_t failures = 0;
  for (auto& o : outputs) {
    predictions += o.prediction.dump() + "\n";
    failures += o.prediction.contains("error") ? 1 : 0;
    if (o.record) records.push_back(std::move(*o.record));
    if (o.trajectory) trajectories.push_back(std::move(*o.trajectory));
    if (o.skip) skips.push_back(std::move(*o.skip));
    samples.insert(samples.end(), o.samples.begin(), o.samples.end());
  }
  write_file((out / "predictions.jsonl").string(), predictions);
  write_file((out / "report.csv").string(), report_csv(aggregate(records)));
  if (opt.command == "annotate") {
    AgentPrompt prompt;
    if (!cfg.prompt_dir.empty()) prompt = AgentPrompt::load(cfg.prompt_dir);
    write_file((out / "training.jsonl").string(), export_training_file(trajectories, prompt));
    write_file((out / "skips.csv").string(), skip_report_csv(skips));
  }
  if (opt.command == "reward-stats") {
    write_file((out / "reward_stats.csv").string(), stability_csv(score_stability(samples)));
  }
  write_manifest(out, opt, cfg, dataset.size(), failures, strategy);
  log << opt.command << ": " << dataset.size() << " questions, " << failures << " failed\n";
  return 0;
}

}  // namespace kbqa
