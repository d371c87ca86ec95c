#pragma once

#include <string>

#include <json.hpp>

#include "bbc/bisim.hpp"
#include "bbc/printer.hpp"
#include "bbc/reduction.hpp"

namespace bbc {

inline nlohmann::json to_json(const RuleLabel& l) {
  nlohmann::json j;
  switch (l.kind) {
    case RuleLabel::Kind::Broad:
      j["rule"] = "Broad";
      j["sender"] = l.subject.id;
      break;
    case RuleLabel::Kind::Local:
      j["rule"] = "Local";
      j["location"] = l.subject.id;
      break;
    case RuleLabel::Kind::Coll:
      j["rule"] = "Coll";
      j["receiver"] = l.subject.id;
      break;
  }
  j["channel"] = l.channel.id;
  if (!l.peers.empty()) {
    nlohmann::json peers = nlohmann::json::array();
    for (auto& p : l.peers) peers.push_back(p.id);
    j[l.kind == RuleLabel::Kind::Coll ? "senders" : "receivers"] = peers;
  }
  j["payload"] = pretty_print(l.payload);
  return j;
}

inline nlohmann::json to_json(const StateGraph& g) {
  nlohmann::json j;
  j["initial"] = g.initial;
  j["truncated"] = g.truncated;
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    nlohmann::json s;
    s["id"] = i;
    s["network"] = g.keys[i];
    s["expanded"] = static_cast<bool>(g.expanded[i]);
    states.push_back(std::move(s));
  }
  j["states"] = std::move(states);
  nlohmann::json edges = nlohmann::json::array();
  for (auto& e : g.edges) {
    nlohmann::json je = to_json(e.label);
    je["from"] = e.from;
    je["to"] = e.to;
    edges.push_back(std::move(je));
  }
  j["edges"] = std::move(edges);
  return j;
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

inline std::string to_dot(const StateGraph& g, bool fullStates = false) {
  std::string out = "digraph bbc {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    std::string label = fullStates ? g.keys[i] : "s" + std::to_string(i);
    out += "  n" + std::to_string(i) + " [label=\"" + detail::dot_escape(label) + "\"";
    if (static_cast<int>(i) == g.initial) out += ", style=bold";
    if (!g.expanded[i]) out += ", style=dashed";
    out += "];\n";
  }
  for (auto& e : g.edges) {
    out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) + " [label=\"" +
           detail::dot_escape(e.label.str()) + "\"];\n";
  }
  out += "}\n";
  return out;
}

inline nlohmann::json to_json(const BisimVerdict& v) {
  nlohmann::json j;
  switch (v.kind) {
    case BisimVerdict::Kind::Bisimilar: {
      j["verdict"] = "Bisimilar";
      nlohmann::json w = nlohmann::json::array();
      for (auto& [a, b] : v.witness) w.push_back({a, b});
      j["witness_pairs"] = std::move(w);
      break;
    }
    case BisimVerdict::Kind::Distinguished: {
      j["verdict"] = "Distinguished";
      nlohmann::json t = nlohmann::json::array();
      for (auto& s : v.trace) {
        nlohmann::json js = to_json(s.label);
        js["side"] = s.side == 0 ? "left" : "right";
        t.push_back(std::move(js));
      }
      j["trace"] = std::move(t);
      j["reason"] = v.reason;
      break;
    }
    case BisimVerdict::Kind::Inconclusive:
      j["verdict"] = "Inconclusive";
      j["reason"] = v.reason;
      break;
  }
  return j;
}

}  // namespace bbc
