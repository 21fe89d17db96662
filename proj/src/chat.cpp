// SPDX-License-Identifier: Apache-2.0
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "kbqa/chat.hpp"

#include <cstdlib>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kbqa/util.hpp"

namespace kbqa {

using nlohmann::json;

namespace {

json request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", request.model}, {"messages", messages}, {"n", request.n}, {"temperature", request.temperature}};
}

}  // namespace

std::string request_digest(const ChatRequest& request) { return to_hex(fnv1a64(request_body(request).dump())); }

HttpChatTransport::HttpChatTransport(EndpointConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw std::invalid_argument("endpoint base_url is empty");
  if (config_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

std::vector<std::string> HttpChatTransport::post_once(const ChatRequest& request) {
  httplib::Client client(config_.base_url);
  auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  auto res = client.Post(config_.path, headers, request_body(request).dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("choices") || !body["choices"].is_array()) {
    throw TransportError("malformed chat-completion response");
  }
  std::vector<std::string> out;
  for (const auto& choice : body["choices"]) {
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      out.push_back(choice["message"]["content"].get<std::string>());
    }
  }
  if (out.empty()) throw TransportError("chat-completion response had no choices");
  return out;
}

std::vector<std::string> HttpChatTransport::complete(const ChatRequest& request) {
  auto with_retries = [&](const ChatRequest& req) {
    auto delay = config_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
      try {
        return post_once(req);
      } catch (const TransportError&) {
        if (attempt >= config_.max_attempts) throw;
      }
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  };

  if (config_.supports_n || request.n <= 1) {
    auto out = with_retries(request);
    if (static_cast<int>(out.size()) > request.n) out.resize(static_cast<std::size_t>(request.n));
    return out;
  }
  ChatRequest single = request;
  single.n = 1;
  std::vector<std::string> out;
  for (int i = 0; i < request.n; ++i) {
    auto part = with_retries(single);
    out.push_back(part.front());
  }
  return out;
}

ReplayTransport ReplayTransport::load(const std::string& path) {
  ReplayTransport t;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.contains("digest") || !rec.contains("completions")) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed replay record");
    }
    t.add(rec["digest"].get<std::string>(), rec["completions"].get<std::vector<std::string>>());
  }
  return t;
}

void ReplayTransport::add(const std::string& digest, std::vector<std::string> completions) {
  records_[digest] = std::move(completions);
}

std::vector<std::string> ReplayTransport::complete(const ChatRequest& request) {
  auto digest = request_digest(request);
  auto it = records_.find(digest);
  if (it == records_.end()) throw TransportError("no recorded response for request " + digest);
  auto out = it->second;
  if (static_cast<int>(out.size()) > request.n) out.resize(static_cast<std::size_t>(request.n));
  return out;
}

std::vector<std::string> RecordingTransport::complete(const ChatRequest& request) {
  auto out = inner_.complete(request);
  std::lock_guard lock(mu_);
  log_.emplace_back(request_digest(request), out);
  return out;
}

std::string RecordingTransport::dump() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& [digest, completions] : log_) {
    out += json{{"digest", digest}, {"completions", completions}}.dump();
    out += '\n';
  }
  return out;
}

}  // namespace kbqa
