// SPDX-License-Identifier: Apache-2.0
#include "kbqa/tools.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "kbqa/util.hpp"

namespace kbqa {

namespace {

constexpr std::size_t kDescriptionChars = 80;

std::string truncate_text(const std::string& text, std::size_t limit) {
  if (text.size() <= limit) return text;
  return text.substr(0, limit) + "...";
}

Observation error_observation(std::string message) {
  Observation obs;
  obs.text = "Error: " + message;
  obs.error = std::move(message);
  return obs;
}

std::string render_sample(const KnowledgeBase& kb, const TermValue& term) {
  if (const auto* n = std::get_if<NodeId>(&term)) {
    return "e:" + n->value + " (" + kb.node_meta(*n).label + ")";
  }
  return to_query_syntax(term);
}

}  // namespace

std::string_view to_string(Tool tool) {
  switch (tool) {
    case Tool::SearchNodes: return "SearchNodes";
    case Tool::SearchGraphPatterns: return "SearchGraphPatterns";
    case Tool::ExecuteSPARQL: return "ExecuteSPARQL";
    case Tool::Done: return "Done";
  }
  return "Done";
}

std::optional<Tool> tool_from_string(std::string_view name) {
  for (auto t : {Tool::SearchNodes, Tool::SearchGraphPatterns, Tool::ExecuteSPARQL, Tool::Done}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

namespace {

template <typename T>
double sorted_jaccard(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common, ++i, ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

}  // namespace

std::shared_ptr<const LexicalScorer::Features> LexicalScorer::features(std::string_view text) const {
  std::string key(text);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto f = std::make_shared<Features>();
  f->normalized = normalize_label(text);
  f->tokens = tokenize(text);
  std::sort(f->tokens.begin(), f->tokens.end());
  f->tokens.erase(std::unique(f->tokens.begin(), f->tokens.end()), f->tokens.end());
  // Trigrams packed into integers; same sets as char_trigrams().
  std::string padded = " " + f->normalized + " ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    f->trigrams.push_back(static_cast<std::uint32_t>(static_cast<unsigned char>(padded[i])) << 16 |
                          static_cast<std::uint32_t>(static_cast<unsigned char>(padded[i + 1])) << 8 |
                          static_cast<unsigned char>(padded[i + 2]));
  }
  std::sort(f->trigrams.begin(), f->trigrams.end());
  f->trigrams.erase(std::unique(f->trigrams.begin(), f->trigrams.end()), f->trigrams.end());
  std::lock_guard<std::mutex> lock(mu_);
  if (cache_.size() >= kCacheLimit) cache_.clear();
  cache_.emplace(std::move(key), f);
  return f;
}

Relevance LexicalScorer::score(std::string_view query, std::string_view label) const {
  auto q = features(query);
  auto l = features(label);
  Relevance r;
  r.primary = (!q->normalized.empty() && q->normalized == l->normalized) ? 1.0 : 0.0;
  r.secondary = sorted_jaccard(q->tokens, l->tokens);
  r.tertiary = sorted_jaccard(q->trigrams, l->trigrams);
  return r;
}

bool LexicalScorer::matches(const Relevance& r) const {
  return r.primary > 0 || r.secondary > 0 || r.tertiary >= min_trigram_;
}

const Scorer& default_scorer() {
  static const LexicalScorer scorer;
  return scorer;
}

std::string render_list(const std::vector<std::string>& items, std::size_t total) {
  if (items.empty() && total == 0) return "No results.";
  std::ostringstream out;
  std::size_t shown = std::min(items.size(), kMaxObservationItems);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out << '\n';
    out << (i + 1) << ". " << items[i];
  }
  if (total > shown) out << "\n... and " << (total - shown) << " more";
  return out.str();
}

Observation search_nodes(const KnowledgeBase& kb, std::string_view query, const Scorer& scorer) {
  if (trim(query).empty()) return error_observation("SearchNodes needs a non-empty query");
  struct Hit {
    Relevance rel;
    const NodeId* id;
  };
  std::vector<Hit> hits;
  for (const auto& id : kb.nodes()) {
    Relevance rel = scorer.score(query, kb.node_meta(id).label);
    if (scorer.matches(rel)) hits.push_back({rel, &id});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.rel != b.rel) return a.rel > b.rel;
    return a.id->value < b.id->value;
  });

  Observation obs;
  obs.item_count = hits.size();
  std::vector<std::string> rendered;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const NodeId& id = *hits[i].id;
    obs.content.push_back(id.value);
    if (i >= kMaxObservationItems) continue;
    const auto& meta = kb.node_meta(id);
    std::string line = meta.label + " | e:" + id.value;
    if (meta.is_class) line += " | [class]";
    if (meta.description && !meta.description->empty()) line += " | " + truncate_text(*meta.description, kDescriptionChars);
    rendered.push_back(std::move(line));
  }
  obs.text = render_list(rendered, hits.size());
  return obs;
}

Observation search_graph_patterns(const KnowledgeBase& kb, std::string_view anchor_query,
                                  std::string_view semantic_hint, const Scorer& scorer) {
  Query q;
  try {
    q = parse_query(anchor_query);
  } catch (const QueryError& e) {
    return error_observation(std::string("invalid anchor query: ") + e.what());
  }
  if (q.form != QueryForm::Select || q.count || q.projection.empty()) {
    return error_observation("anchor query must be a SELECT binding an entity variable");
  }
  ResultSet rs = evaluate(q, kb);
  std::vector<NodeId> anchors;
  for (const auto& row : rs.rows) {
    if (!row.empty() && row[0]) {
      if (const auto* n = std::get_if<NodeId>(&*row[0])) {
        if (std::find(anchors.begin(), anchors.end(), *n) == anchors.end()) anchors.push_back(*n);
      }
    }
  }
  if (anchors.empty()) return error_observation("anchor query binds no entity");

  struct Pattern {
    bool outgoing;
    PredicateId predicate;
    std::string sample;
    std::set<std::string> qualifier_keys;
    Relevance rel;
  };
  std::map<std::pair<int, PredicateId>, Pattern> patterns;
  auto add = [&](bool outgoing, const Statement& st, const TermValue& sample) {
    auto key = std::make_pair(outgoing ? 0 : 1, st.predicate);
    auto it = patterns.find(key);
    if (it == patterns.end()) {
      it = patterns.emplace(key, Pattern{outgoing, st.predicate, render_sample(kb, sample), {}, {}}).first;
    }
    for (const auto& qual : st.qualifiers) it->second.qualifier_keys.insert(qual.predicate.value);
  };
  for (const auto& anchor : anchors) {
    for (const Statement* st : kb.match_statements({anchor, std::nullopt, std::nullopt})) add(true, *st, st->object);
    for (const Statement* st : kb.match_statements({std::nullopt, std::nullopt, TermValue{anchor}})) {
      add(false, *st, TermValue{st->subject});
    }
  }

  std::vector<Pattern> ranked;
  for (auto& [key, p] : patterns) {
    p.rel = scorer.score(semantic_hint, kb.predicate_label(p.predicate));
    ranked.push_back(std::move(p));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Pattern& a, const Pattern& b) {
    if (a.rel != b.rel) return a.rel > b.rel;
    if (a.predicate != b.predicate) return a.predicate < b.predicate;
    return a.outgoing && !b.outgoing;
  });

  Observation obs;
  obs.item_count = ranked.size();
  std::vector<std::string> rendered;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& p = ranked[i];
    obs.content.push_back((p.outgoing ? "out:" : "in:") + p.predicate.value);
    if (i >= kMaxObservationItems) continue;
    std::string line = p.outgoing ? "(?e, p:" + p.predicate.value + ", " + p.sample + ")"
                                  : "(" + p.sample + ", p:" + p.predicate.value + ", ?e)";
    if (!p.qualifier_keys.empty()) {
      line += " qualifiers:";
      for (const auto& k : p.qualifier_keys) line += " pq:" + k;
    }
    rendered.push_back(std::move(line));
  }
  obs.text = render_list(rendered, ranked.size());
  return obs;
}

Observation execute_sparql(const KnowledgeBase& kb, std::string_view query_text) {
  Query q;
  try {
    q = parse_query(query_text);
  } catch (const QueryError& e) {
    return error_observation(e.what());
  }
  ResultSet rs = evaluate(q, kb);
  Observation obs;
  obs.item_count = rs.rows.size();
  std::vector<std::string> rendered;
  for (std::size_t i = 0; i < rs.rows.size() && i < kMaxObservationItems; ++i) {
    rendered.push_back(render_row(rs.rows[i], rs.labels));
  }
  obs.text = render_list(rendered, rs.rows.size());
  obs.answers = canonical_answers(rs);
  obs.content.assign(obs.answers.begin(), obs.answers.end());
  return obs;
}

namespace {

// Reads a quoted string starting at `pos` (which must hold ' or ").
std::string read_quoted(std::string_view s, std::size_t& pos) {
  char quote = s[pos++];
  std::string out;
  while (pos < s.size()) {
    char c = s[pos++];
    if (c == quote) return out;
    if (c == '\\' && pos < s.size()) {
      char e = s[pos++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: out += e;
      }
    } else {
      out += c;
    }
  }
  throw std::invalid_argument("unterminated string in SearchGraphPatterns arguments");
}

void skip_ws(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

std::string escape_double(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace

GraphPatternArgs parse_graph_pattern_args(std::string_view argument) {
  GraphPatternArgs args;
  std::size_t pos = 0;
  skip_ws(argument, pos);
  if (pos >= argument.size()) throw std::invalid_argument("SearchGraphPatterns needs an anchor query");
  if (argument[pos] != '"' && argument[pos] != '\'') {
    auto sep = argument.rfind("semantic=");
    std::string_view anchor = argument.substr(0, sep);
    if (sep != std::string_view::npos) {
      auto comma = anchor.rfind(',');
      if (comma != std::string_view::npos) anchor = anchor.substr(0, comma);
      std::size_t hp = sep + 9;
      skip_ws(argument, hp);
      if (hp < argument.size() && (argument[hp] == '"' || argument[hp] == '\'')) {
        args.hint = read_quoted(argument, hp);
      } else {
        args.hint = trim(argument.substr(hp));
      }
    }
    args.anchor = trim(anchor);
    return args;
  }
  args.anchor = read_quoted(argument, pos);
  skip_ws(argument, pos);
  if (pos < argument.size() && argument[pos] == ',') {
    ++pos;
    skip_ws(argument, pos);
    if (argument.substr(pos, 9) == "semantic=") pos += 9;
    skip_ws(argument, pos);
    if (pos < argument.size() && (argument[pos] == '"' || argument[pos] == '\'')) {
      args.hint = read_quoted(argument, pos);
    } else {
      throw std::invalid_argument("expected quoted semantic hint");
    }
    skip_ws(argument, pos);
  }
  if (pos != argument.size()) throw std::invalid_argument("trailing text after SearchGraphPatterns arguments");
  return args;
}

std::string format_graph_pattern_args(const GraphPatternArgs& args) {
  return "\"" + escape_double(args.anchor) + "\", semantic=\"" + escape_double(args.hint) + "\"";
}

Observation execute_action(const KnowledgeBase& kb, const Action& action, const Scorer& scorer) {
  switch (action.tool) {
    case Tool::SearchNodes: return search_nodes(kb, action.argument, scorer);
    case Tool::SearchGraphPatterns: {
      GraphPatternArgs args;
      try {
        args = parse_graph_pattern_args(action.argument);
      } catch (const std::invalid_argument& e) {
        return error_observation(e.what());
      }
      return search_graph_patterns(kb, args.anchor, args.hint, scorer);
    }
    case Tool::ExecuteSPARQL: return execute_sparql(kb, action.argument);
    case Tool::Done: return {};
  }
  return {};
}

std::string observation_fingerprint(const Action& action, const Observation& obs) {
  std::string blob(to_string(action.tool));
  blob += '\n';
  if (obs.error) {
    blob += "error:" + *obs.error;
  } else {
    for (const auto& item : obs.content) {
      blob += item;
      blob += '\n';
    }
  }
  return to_hex(fnv1a64(blob));
}

}  // namespace kbqa
