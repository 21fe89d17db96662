// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbqa {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  int n = 1;
  double temperature = 1.0;
};

/// Stable digest of (model, messages, n, temperature); keys replay fixtures.
std::string request_digest(const ChatRequest& request);

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Anything that turns a chat request into completions.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// Returns between 1 and request.n completions; throws TransportError.
  virtual std::vector<std::string> complete(const ChatRequest& request) = 0;
};

struct EndpointConfig {
  std::string base_url;                           // e.g. http://localhost:8000
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;                        // name of the env var holding the key; may be empty
  double timeout_seconds = 60;
  bool supports_n = true;                         // false: issue n single-completion calls
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};  // doubled after each failed attempt
};

/// OpenAI-style chat-completion client with bounded exponential backoff.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(EndpointConfig config);
  std::vector<std::string> complete(const ChatRequest& request) override;

 private:
  std::vector<std::string> post_once(const ChatRequest& request);
  EndpointConfig config_;
};

/// Serves completions recorded in a JSON-lines fixture of
/// {"digest": ..., "completions": [...]} records.
class ReplayTransport : public ChatTransport {
 public:
  static ReplayTransport load(const std::string& path);
  void add(const std::string& digest, std::vector<std::string> completions);
  std::vector<std::string> complete(const ChatRequest& request) override;

 private:
  std::map<std::string, std::vector<std::string>> records_;
};

/// Forwards to another transport and keeps every exchange for later replay.
class RecordingTransport : public ChatTransport {
 public:
  explicit RecordingTransport(ChatTransport& inner) : inner_(inner) {}
  std::vector<std::string> complete(const ChatRequest& request) override;
  /// JSON-lines in the ReplayTransport format, in call order.
  std::string dump() const;

 private:
  ChatTransport& inner_;
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, std::vector<std::string>>> log_;
};

}  // namespace kbqa
