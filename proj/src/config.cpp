// SPDX-License-Identifier: Apache-2.0
#include "kbqa/config.hpp"

#include <filesystem>
#include <set>

#include <json.hpp>

#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string scope, std::vector<std::string>& errors)
      : obj_(obj), scope_(std::move(scope)), errors_(errors) {}

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    bool ok;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_unsigned_v<T>) {
      ok = v.is_number_unsigned();
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else {
      ok = v.is_string();
    }
    if (!ok) {
      errors_.push_back(scope_ + key + ": wrong type");
      return;
    }
    out = v.get<T>();
  }

  void unknown_keys() {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) errors_.push_back(scope_ + it.key() + ": unknown key");
    }
  }

  void mark(const char* key) { seen_.insert(key); }

 private:
  const json& obj_;
  std::string scope_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

EndpointConfig read_endpoint(const json& j, const std::string& scope, std::vector<std::string>& errors) {
  EndpointConfig e;
  if (!j.is_object()) {
    errors.push_back(scope + ": must be an object");
    return e;
  }
  Reader r(j, scope + ".", errors);
  r.get("base_url", e.base_url);
  r.get("path", e.path);
  r.get("model", e.model);
  r.get("api_key_env", e.api_key_env);
  r.get("timeout_seconds", e.timeout_seconds);
  r.get("supports_n", e.supports_n);
  r.get("max_attempts", e.max_attempts);
  long backoff = static_cast<long>(e.initial_backoff.count());
  r.get("initial_backoff_ms", backoff);
  e.initial_backoff = std::chrono::milliseconds(backoff);
  r.unknown_keys();
  if (e.base_url.empty()) errors.push_back(scope + ".base_url: required");
  if (e.model.empty()) errors.push_back(scope + ".model: required");
  if (e.max_attempts < 1) errors.push_back(scope + ".max_attempts: must be >= 1");
  if (!(e.timeout_seconds > 0)) errors.push_back(scope + ".timeout_seconds: must be > 0");
  if (backoff < 0) errors.push_back(scope + ".initial_backoff_ms: must be >= 0");
  return e;
}

json endpoint_json(const EndpointConfig& e) {
  return {{"base_url", e.base_url},
          {"path", e.path},
          {"model", e.model},
          {"api_key_env", e.api_key_env},
          {"timeout_seconds", e.timeout_seconds},
          {"supports_n", e.supports_n},
          {"max_attempts", e.max_attempts},
          {"initial_backoff_ms", e.initial_backoff.count()}};
}

}  // namespace

ConfigResult parse_config(const std::string& text, const std::string& base_dir) {
  ConfigResult res;
  auto& c = res.config;
  auto& errors = res.errors;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return res;
  }
  if (!j.is_object()) {
    errors.push_back("config must be a JSON object");
    return res;
  }
  Reader r(j, "", errors);
  r.get("early_stop_k", c.search.k_early_stop);
  r.get("max_simulations", c.search.max_simulations);
  r.get("depth_penalty", c.search.gamma);
  r.get("max_preferred_depth", c.search.d_exp);
  r.get("max_rounds", c.search.max_rounds);
  r.get("n_agent", c.search.n_expand);
  r.get("n_reward", c.n_reward);
  r.get("temperature_agent", c.search.temperature_agent);
  r.get("temperature_reward", c.temperature_reward);
  r.get("seed", c.search.seed);
  r.get("exhaustion_limit", c.search.exhaustion_limit);
  r.get("prompt_dir", c.prompt_dir);
  r.get("annotate_threshold", c.annotate_threshold);

  std::string mode(to_string(c.reward_mode));
  r.get("reward_mode", mode);
  if (auto m = reward_mode_from_string(mode)) {
    c.reward_mode = *m;
  } else {
    errors.push_back("reward_mode: expected rule, direct or random");
  }
  std::string decay = "node";
  r.get("decay_depth", decay);
  if (decay == "node") {
    c.search.decay = DecayDepth::PerNode;
  } else if (decay == "evaluated") {
    c.search.decay = DecayDepth::Evaluated;
  } else {
    errors.push_back("decay_depth: expected node or evaluated");
  }
  for (const char* key : {"agent_endpoint", "reward_endpoint"}) {
    r.mark(key);
    if (!j.contains(key) || j[key].is_null()) continue;
    auto e = read_endpoint(j[key], key, errors);
    (std::string(key) == "agent_endpoint" ? c.agent_endpoint : c.reward_endpoint) = e;
  }
  r.unknown_keys();

  for (auto& e : c.search.validate()) errors.push_back(e);
  if (c.n_reward < 1) errors.push_back("n_reward must be >= 1");
  if (!(c.temperature_reward >= 0)) errors.push_back("temperature_reward must be >= 0");
  if (!(c.annotate_threshold > 0 && c.annotate_threshold <= 1)) errors.push_back("annotate_threshold must be in (0, 1]");
  if (!c.prompt_dir.empty() && !base_dir.empty() && std::filesystem::path(c.prompt_dir).is_relative()) {
    c.prompt_dir = (std::filesystem::path(base_dir) / c.prompt_dir).lexically_normal().string();
  }
  if (!c.prompt_dir.empty() && !std::filesystem::is_directory(c.prompt_dir)) {
    errors.push_back("prompt_dir: not a directory: " + c.prompt_dir);
  }
  return res;
}

ConfigResult load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    ConfigResult res;
    res.errors.push_back(e.what());
    return res;
  }
  return parse_config(text, std::filesystem::path(path).parent_path().string());
}

std::string RunConfig::to_json() const {
  json j{{"early_stop_k", search.k_early_stop},
         {"max_simulations", search.max_simulations},
         {"depth_penalty", search.gamma},
         {"max_preferred_depth", search.d_exp},
         {"max_rounds", search.max_rounds},
         {"n_agent", search.n_expand},
         {"n_reward", n_reward},
         {"temperature_agent", search.temperature_agent},
         {"temperature_reward", temperature_reward},
         {"seed", search.seed},
         {"exhaustion_limit", search.exhaustion_limit},
         {"decay_depth", search.decay == DecayDepth::PerNode ? "node" : "evaluated"},
         {"reward_mode", std::string(to_string(reward_mode))},
         {"prompt_dir", prompt_dir},
         {"annotate_threshold", annotate_threshold}};
  j["agent_endpoint"] = agent_endpoint ? endpoint_json(*agent_endpoint) : json(nullptr);
  j["reward_endpoint"] = reward_endpoint ? endpoint_json(*reward_endpoint) : json(nullptr);
  return j.dump(2);
}

}  // namespace kbqa
