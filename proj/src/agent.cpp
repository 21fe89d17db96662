// SPDX-License-Identifier: Apache-2.0
#include "kbqa/agent.hpp"

#include <cctype>

#include "kbqa/util.hpp"

namespace kbqa {

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

// Decodes `s` when it is exactly one quoted string; otherwise nullopt.
std::optional<std::string> unquote_whole(std::string_view s) {
  if (s.size() < 2 || (s.front() != '"' && s.front() != '\'')) return std::nullopt;
  char q = s.front();
  std::string out;
  std::size_t i = 1;
  while (i < s.size()) {
    char c = s[i++];
    if (c == q) return i == s.size() ? std::optional<std::string>(out) : std::nullopt;
    if (c == '\\' && i < s.size()) {
      char e = s[i++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: out += e;
      }
    } else {
      out += c;
    }
  }
  return std::nullopt;
}

bool starts_with_action(std::string_view line) {
  std::string t = trim(line);
  return t.rfind("Action:", 0) == 0;
}

}  // namespace

AgentPrompt AgentPrompt::load(const std::string& dir) { return AgentPrompt{read_file(dir + "/agent_system.txt")}; }

std::string render_tool_call(const Action& action) {
  std::string name(to_string(action.tool));
  switch (action.tool) {
    case Tool::Done: return name;
    case Tool::SearchNodes: return name + "(" + quote(action.argument) + ")";
    case Tool::SearchGraphPatterns: return name + "(" + action.argument + ")";
    case Tool::ExecuteSPARQL: {
      bool raw_ok = !action.argument.empty() && action.argument.front() != '"' && action.argument.front() != '\'' &&
                    trim(action.argument) == action.argument;
      return name + "(" + (raw_ok ? action.argument : quote(action.argument)) + ")";
    }
  }
  return name;
}

std::string render_action(const Action& action) {
  return "Thought: " + action.thought + "\nAction: " + render_tool_call(action);
}

std::vector<ChatMessage> render_state_prompt(const AgentState& state, const AgentPrompt& prompt) {
  std::vector<ChatMessage> out;
  out.push_back({"system", prompt.system});
  out.push_back({"user", "Question: " + state.question});
  for (const auto& step : state.history) {
    out.push_back({"assistant", render_action(step.action)});
    if (step.observation) out.push_back({"user", "Observation: " + step.observation->text});
  }
  return out;
}

std::variant<Action, ParseFailure> parse_agent_output(std::string_view text) {
  std::string body(text);
  // Models sometimes continue with an imagined observation; it is not part of the action.
  if (auto cut = body.find("\nObservation:"); cut != std::string::npos) body.resize(cut);

  std::vector<std::size_t> action_lines;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto nl = body.find('\n', pos);
    std::string_view line = std::string_view(body).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (starts_with_action(line)) action_lines.push_back(pos);
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  if (action_lines.empty()) return ParseFailure{"no tool line (expected 'Action: Tool(argument)')"};
  if (action_lines.size() > 1) return ParseFailure{"multiple tool lines"};

  Action action;
  action.raw = std::string(text);
  std::string thought = trim(std::string_view(body).substr(0, action_lines[0]));
  if (thought.rfind("Thought:", 0) == 0) thought = trim(std::string_view(thought).substr(8));
  action.thought = std::move(thought);

  std::string call = trim(std::string_view(body).substr(action_lines[0]));
  call = trim(std::string_view(call).substr(call.find("Action:") + 7));
  std::size_t name_end = 0;
  while (name_end < call.size() && (std::isalnum(static_cast<unsigned char>(call[name_end])) || call[name_end] == '_')) {
    ++name_end;
  }
  std::string name = call.substr(0, name_end);
  auto tool = tool_from_string(name);
  if (!tool) return ParseFailure{"unknown tool '" + name + "'"};
  action.tool = *tool;

  std::string rest = trim(std::string_view(call).substr(name_end));
  if (*tool == Tool::Done) {
    if (!rest.empty() && rest != "()") return ParseFailure{"Done takes no argument"};
    return action;
  }
  if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') {
    return ParseFailure{"expected '" + name + "(argument)'"};
  }
  std::string inner = trim(std::string_view(rest).substr(1, rest.size() - 2));
  if (inner.empty()) return ParseFailure{name + " needs an argument"};
  if (*tool == Tool::SearchGraphPatterns) {
    action.argument = inner;
  } else if (auto decoded = unquote_whole(inner)) {
    action.argument = *decoded;
  } else {
    action.argument = inner;
  }
  return action;
}

std::vector<std::string> ChatAgentBackend::complete(const AgentState& state, int n, double temperature,
                                                    std::uint64_t /*attempt*/) {
  ChatRequest req{model_, render_state_prompt(state, prompt_), n, temperature};
  return transport_.complete(req);
}

Proposal propose_actions(AgentBackend& backend, const AgentState& state, int n, double temperature,
                         std::uint64_t attempt) {
  Proposal p;
  std::vector<std::string> completions;
  try {
    completions = backend.complete(state, n, temperature, attempt);
  } catch (const TransportError& e) {
    p.transport_error = e.what();
    return p;
  }
  if (static_cast<int>(completions.size()) > n) completions.resize(static_cast<std::size_t>(n));
  for (const auto& c : completions) {
    auto parsed = parse_agent_output(c);
    if (auto* a = std::get_if<Action>(&parsed)) {
      p.actions.push_back(std::move(*a));
    } else {
      ++p.parse_failures;
    }
  }
  return p;
}

}  // namespace kbqa
