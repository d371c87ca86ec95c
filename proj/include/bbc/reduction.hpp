#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bbc/ast.hpp"
#include "bbc/congruence.hpp"
#include "bbc/eval.hpp"
#include "bbc/printer.hpp"
#include "bbc/subst.hpp"

namespace bbc {

enum class Mode { Default, Exhaustive };

// Which rule fired, where, and what was communicated. For Coll the payload is
// the collected multiset literal.
struct RuleLabel {
  enum class Kind { Broad, Local, Coll };
  Kind kind = Kind::Local;
  Name channel;
  Name subject;             // Broad: sender location; Local: the location; Coll: receiver
  std::vector<Name> peers;  // Broad: delivered locations; Coll: sender locations
  Message payload;

  std::string str() const {
    std::string s;
    switch (kind) {
      case Kind::Broad:
        s = "Broad " + channel.id + " " + subject.id + " -> {";
        break;
      case Kind::Local:
        s = "Local " + channel.id + " @ " + subject.id;
        break;
      case Kind::Coll:
        s = "Coll " + channel.id + " {";
        break;
    }
    if (kind != Kind::Local) {
      for (size_t i = 0; i < peers.size(); ++i) s += (i ? "," : "") + peers[i].id;
      s += "}";
      if (kind == Kind::Coll) s += " -> " + subject.id;
    }
    s += " : " + pretty_print(payload);
    return s;
  }
};

struct Limits {
  std::size_t maxStates = 50000;
  std::size_t unfoldBudget = 32;
  std::size_t maxSteps = 10000;
};

// ---------------------------------------------------------------------------
// State expansion: agent unfolding and redex exposure
// ---------------------------------------------------------------------------

namespace detail {

inline void all_names_proc(const Process& p, NameSet& out) {
  fn_into(p, out);
  struct W {
    NameSet& out;
    void proc(const Process& q) {
      for (auto& b : q.pattern.binders) out.insert(b);
      if (!q.setvar.id.empty()) out.insert(q.setvar);
      if (!q.newName.id.empty()) out.insert(q.newName);
      for (auto& k : q.kids) proc(k);
    }
  } w{out};
  w.proc(p);
}

struct VEntry {
  Name loc;
  Process proc;
  std::size_t origin;  // index into the source normal form's located list
};

struct Expanded {
  const NormalForm* nf = nullptr;
  std::vector<VEntry> ventries;
  std::map<std::size_t, std::vector<NfRestriction>> extruded;  // per origin
  bool unfoldCapped = false;
};

struct Engine {
  const Program& prog;
  const BuiltinRegistry& reg;
  std::size_t unfoldBudget = 32;

  std::optional<std::uint64_t> bound_of(const NormalForm& nf, const Name& chan,
                                        const Name& loc) const {
    if (const Bound* b = nf.restriction_bound(chan)) return b->lookup(loc);
    return prog.channel_bound(chan).lookup(loc);
  }

  Process unfold_call(const Process& call) const {
    auto it = prog.agents.find(call.agent.id);
    if (it == prog.agents.end()) throw EvalError("undefined agent " + call.agent.id);
    const AgentDef& def = it->second;
    bbc_assert(def.params.size() == call.callArgs.size(), "agent arity mismatch");
    Substitution s;
    for (size_t i = 0; i < def.params.size(); ++i) s.map.emplace(def.params[i], call.callArgs[i]);
    return apply_subst(def.body, s);
  }

  // Structurally splits a located process, unfolding agent calls (budgeted)
  // and extruding top-level restrictions with fresh names.
  void expand_entry(Expanded& ex, std::size_t origin, const Name& loc, const Process& p,
                    NameSet& used, std::size_t& budget) const {
    switch (p.kind) {
      case Process::Kind::Par:
        expand_entry(ex, origin, loc, p.kids[0], used, budget);
        expand_entry(ex, origin, loc, p.kids[1], used, budget);
        return;
      case Process::Kind::New: {
        Name fresh = fresh_name(p.newName, used);
        Process body = p.kids[0];
        if (!(fresh == p.newName)) {
          Substitution s;
          s.map.emplace(p.newName, Message::var(fresh));
          body = apply_subst(body, s);
        }
        ex.extruded[origin].push_back(NfRestriction{fresh, p.bound, p.newType});
        expand_entry(ex, origin, loc, body, used, budget);
        return;
      }
      case Process::Kind::Call: {
        if (budget == 0) {
          ex.unfoldCapped = true;
          ex.ventries.push_back(VEntry{loc, p, origin});
          return;
        }
        --budget;
        Process body = unfold_call(p);
        NameSet bodyNames;
        all_names_proc(body, bodyNames);
        used.insert(bodyNames.begin(), bodyNames.end());
        expand_entry(ex, origin, loc, body, used, budget);
        return;
      }
      default:
        ex.ventries.push_back(VEntry{loc, p, origin});
        return;
    }
  }

  Expanded expand(const NormalForm& nf) const {
    Expanded ex;
    ex.nf = &nf;
    NameSet used;
    for (auto& r : nf.restrictions) used.insert(r.name);
    for (auto& [l, m] : nf.conn.pairs) {
      used.insert(l);
      used.insert(m);
    }
    for (auto& [l, p] : nf.located) {
      used.insert(l);
      all_names_proc(p, used);
    }
    std::size_t budget = unfoldBudget;
    for (std::size_t i = 0; i < nf.located.size(); ++i)
      expand_entry(ex, i, nf.located[i].first, nf.located[i].second, used, budget);
    return ex;
  }
};

// An enabled communication capability at the head of a virtual entry.
struct Head {
  Process::Kind kind;  // Output, BInput or CInput
  Name chan;
  Message payload;  // Output only, evaluated
  Pattern pat;      // inputs
  Name setvar;      // CInput
  Process cont;
};

inline void collect_heads(const Process& p, const Engine& eng, std::size_t& budget, bool& capped,
                          std::vector<Head>& out) {
  switch (p.kind) {
    case Process::Kind::Output:
      out.push_back(Head{p.kind, p.channel, evaluate_partial(p.msg, eng.reg), {}, {}, p.kids[0]});
      return;
    case Process::Kind::BInput:
      out.push_back(Head{p.kind, p.channel, {}, p.pattern, {}, p.kids[0]});
      return;
    case Process::Kind::CInput:
      out.push_back(Head{p.kind, p.channel, {}, p.pattern, p.setvar, p.kids[0]});
      return;
    case Process::Kind::Sum:
      collect_heads(p.kids[0], eng, budget, capped, out);
      collect_heads(p.kids[1], eng, budget, capped, out);
      return;
    case Process::Kind::Call: {
      if (budget == 0) {
        capped = true;
        return;
      }
      --budget;
      collect_heads(eng.unfold_call(p), eng, budget, capped, out);
      return;
    }
    default:
      // Guards, restrictions and parallel compositions inside a choice have
      // no exposed redex.
      return;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// successors
// ---------------------------------------------------------------------------

struct SuccessorSet {
  std::vector<std::pair<RuleLabel, NormalForm>> list;
  bool unfoldCapped = false;
};

namespace detail {

inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(k);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == k) {
      f(idx);
      return;
    }
    for (std::size_t i = start; i + (k - depth) <= n; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

struct SuccessorBuilder {
  const Engine& eng;
  const NormalForm& nf;
  const Expanded& ex;
  std::set<std::string> seen;
  SuccessorSet out;

  // Rebuilds the state: fired virtual entries are replaced by their
  // continuations; origins with no fired entry stay folded.
  void emit(RuleLabel label, const std::map<std::size_t, Process>& fired) {
    std::set<std::size_t> firedOrigins;
    for (auto& [vi, p] : fired) {
      (void)p;
      firedOrigins.insert(ex.ventries[vi].origin);
    }
    NormalForm next;
    next.restrictions = nf.restrictions;
    next.conn = nf.conn;
    for (auto& [origin, rs] : ex.extruded)
      if (firedOrigins.count(origin))
        next.restrictions.insert(next.restrictions.end(), rs.begin(), rs.end());
    for (std::size_t i = 0; i < nf.located.size(); ++i)
      if (!firedOrigins.count(i)) next.located.push_back(nf.located[i]);
    for (std::size_t vi = 0; vi < ex.ventries.size(); ++vi) {
      const VEntry& v = ex.ventries[vi];
      if (!firedOrigins.count(v.origin)) continue;
      auto it = fired.find(vi);
      next.located.emplace_back(v.loc, it == fired.end() ? v.proc : it->second);
    }
    NormalForm canon = canonicalize(next, eng.reg);
    std::string key = label.str() + "\n" + nf_key(canon);
    if (seen.insert(key).second) out.list.emplace_back(std::move(label), std::move(canon));
  }
};

}  // namespace detail

// Enumerates the reduction successors of a canonical normal form.
//
// Broad: a located output delivers to a subset of the connected, matching,
// broadcast-input locations of size exactly min(#receivers, bound at the
// sender); every matching input at a delivered location receives. A broadcast
// with no eligible receiver does not fire.
// Local: an output and a matching broadcast input at one location, pairwise.
// Coll: a located collection input consumes one output from each of a set K
// of connected senders, 1 <= |K| <= bound at the receiver; default mode takes
// K maximal (capped at the bound), exhaustive mode enumerates every valid K.
inline SuccessorSet successors(const NormalForm& nf, const Program& prog,
                               const BuiltinRegistry& reg, Mode mode,
                               std::size_t unfoldBudget = 32) {
  detail::Engine eng{prog, reg, unfoldBudget};
  detail::Expanded ex = eng.expand(nf);
  detail::SuccessorBuilder sb{eng, nf, ex, {}, {}};
  sb.out.unfoldCapped = ex.unfoldCapped;

  // Per virtual entry, the exposed heads.
  std::vector<std::vector<detail::Head>> heads(ex.ventries.size());
  {
    std::size_t budget = unfoldBudget;
    for (std::size_t i = 0; i < ex.ventries.size(); ++i) {
      bool capped = false;
      detail::collect_heads(ex.ventries[i].proc, eng, budget, capped, heads[i]);
      if (capped) sb.out.unfoldCapped = true;
    }
  }

  auto fire_input = [&](const detail::Head& h, const Message& payload) -> Process {
    auto theta = match_broadcast(payload, h.pat);
    bbc_assert(theta.has_value(), "delivery without a match");
    return apply_subst(h.cont, *theta);
  };

  // --- Broad and Local: iterate over output heads --------------------------
  for (std::size_t si = 0; si < ex.ventries.size(); ++si) {
    const Name& sloc = ex.ventries[si].loc;
    for (auto& sh : heads[si]) {
      if (sh.kind != Process::Kind::Output) continue;

      // Local synchronisation: pairwise with one matching input at the same
      // location.
      for (std::size_t ri = 0; ri < ex.ventries.size(); ++ri) {
        if (ri == si || !(ex.ventries[ri].loc == sloc)) continue;
        for (auto& rh : heads[ri]) {
          if (rh.kind != Process::Kind::BInput || !(rh.chan == sh.chan)) continue;
          if (!match_broadcast(sh.payload, rh.pat)) continue;
          RuleLabel label;
          label.kind = RuleLabel::Kind::Local;
          label.channel = sh.chan;
          label.subject = sloc;
          label.payload = sh.payload;
          std::map<std::size_t, Process> fired;
          fired[si] = sh.cont;
          fired[ri] = fire_input(rh, sh.payload);
          sb.emit(std::move(label), fired);
        }
      }

      // Broadcast: receiver locations connected from the sender holding a
      // matching broadcast input.
      std::map<Name, std::vector<std::pair<std::size_t, std::vector<const detail::Head*>>>> recv;
      for (std::size_t ri = 0; ri < ex.ventries.size(); ++ri) {
        if (ri == si) continue;
        const Name& rloc = ex.ventries[ri].loc;
        if (rloc == sloc || !nf.conn.connected(sloc, rloc)) continue;
        std::vector<const detail::Head*> matching;
        for (auto& rh : heads[ri])
          if (rh.kind == Process::Kind::BInput && rh.chan == sh.chan &&
              match_broadcast(sh.payload, rh.pat))
            matching.push_back(&rh);
        if (!matching.empty()) recv[rloc].emplace_back(ri, std::move(matching));
      }
      if (recv.empty()) continue;  // no eligible receiver: the broadcast cannot fire

      std::vector<Name> locs;
      for (auto& [l, v] : recv) {
        (void)v;
        locs.push_back(l);
      }
      auto beta = eng.bound_of(nf, sh.chan, sloc);
      std::size_t kPrime = locs.size();
      if (beta && *beta < kPrime) kPrime = static_cast<std::size_t>(*beta);

      detail::for_each_subset(locs.size(), kPrime, [&](const std::vector<std::size_t>& subset) {
        // Delivery set chosen; every matching entry at each delivered
        // location receives. Enumerate the per-entry head choices.
        std::vector<std::pair<std::size_t, const std::vector<const detail::Head*>*>> targets;
        std::vector<Name> delivered;
        for (auto li : subset) {
          delivered.push_back(locs[li]);
          for (auto& [vi, hs] : recv[locs[li]]) targets.emplace_back(vi, &hs);
        }
        bbc_assert(!beta || delivered.size() <= *beta, "broadcast delivery exceeds the bound");
        std::map<std::size_t, Process> fired;
        fired[si] = sh.cont;
        std::function<void(std::size_t)> choose = [&](std::size_t t) {
          if (t == targets.size()) {
            RuleLabel label;
            label.kind = RuleLabel::Kind::Broad;
            label.channel = sh.chan;
            label.subject = sloc;
            label.peers = delivered;
            label.payload = sh.payload;
            sb.emit(std::move(label), fired);
            return;
          }
          for (const detail::Head* rh : *targets[t].second) {
            fired[targets[t].first] = fire_input(*rh, sh.payload);
            choose(t + 1);
          }
          fired.erase(targets[t].first);
        };
        choose(0);
      });
    }
  }

  // --- Coll: iterate over collection-input heads ----------------------------
  for (std::size_t ri = 0; ri < ex.ventries.size(); ++ri) {
    const Name& rloc = ex.ventries[ri].loc;
    for (auto& rh : heads[ri]) {
      if (rh.kind != Process::Kind::CInput) continue;

      // Candidate senders: entries at locations connected towards the
      // receiver offering a matching output.
      std::vector<std::pair<std::size_t, std::vector<const detail::Head*>>> senders;
      for (std::size_t si = 0; si < ex.ventries.size(); ++si) {
        if (si == ri) continue;
        const Name& sloc = ex.ventries[si].loc;
        if (sloc == rloc || !nf.conn.connected(sloc, rloc)) continue;
        std::vector<const detail::Head*> matching;
        for (auto& sh : heads[si])
          if (sh.kind == Process::Kind::Output && sh.chan == rh.chan &&
              match_broadcast(sh.payload, rh.pat))
            matching.push_back(&sh);
        if (!matching.empty()) senders.emplace_back(si, std::move(matching));
      }
      if (senders.empty()) continue;

      auto beta = eng.bound_of(nf, rh.chan, rloc);
      std::size_t cap = senders.size();
      if (beta && *beta < cap) cap = static_cast<std::size_t>(*beta);

      std::size_t loK = mode == Mode::Exhaustive ? 1 : cap;
      for (std::size_t k = loK; k <= cap; ++k) {
        detail::for_each_subset(senders.size(), k, [&](const std::vector<std::size_t>& subset) {
          bbc_assert(!beta || subset.size() <= *beta, "collection exceeds the bound");
          std::map<std::size_t, Process> fired;
          std::vector<Name> senderLocs;
          std::vector<Message> collected;
          std::function<void(std::size_t)> choose = [&](std::size_t t) {
            if (t == subset.size()) {
              Substitution s;
              s.map.emplace(rh.setvar, Message::mset(collected));
              fired[ri] = apply_subst(rh.cont, s);
              RuleLabel label;
              label.kind = RuleLabel::Kind::Coll;
              label.channel = rh.chan;
              label.subject = rloc;
              label.peers = senderLocs;
              std::sort(label.peers.begin(), label.peers.end());
              label.payload = Message::mset(collected);
              sb.emit(std::move(label), fired);
              fired.erase(ri);
              return;
            }
            auto& [vi, hs] = senders[subset[t]];
            for (const detail::Head* sh : hs) {
              fired[vi] = sh->cont;
              senderLocs.push_back(ex.ventries[vi].loc);
              collected.push_back(sh->payload);
              choose(t + 1);
              collected.pop_back();
              senderLocs.pop_back();
            }
            fired.erase(vi);
          };
          choose(0);
        });
      }
    }
  }

  return sb.out;
}

// ---------------------------------------------------------------------------
// Random execution
// ---------------------------------------------------------------------------

struct TraceStep {
  RuleLabel label;
  NormalForm state;
};

inline NormalForm initial_state(const Program& prog, const BuiltinRegistry& reg) {
  return canonical_form(prog.net, reg);
}

// Seeded uniformly random execution; deterministic for a fixed
// (program, seed, maxSteps, mode).
inline std::vector<TraceStep> run(const Program& prog, const BuiltinRegistry& reg,
                                  std::uint64_t seed, std::size_t maxSteps,
                                  Mode mode = Mode::Default, std::size_t unfoldBudget = 32) {
  std::vector<TraceStep> trace;
  NormalForm cur = initial_state(prog, reg);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < maxSteps; ++i) {
    SuccessorSet succ = successors(cur, prog, reg, mode, unfoldBudget);
    if (succ.list.empty()) break;
    std::size_t pick = static_cast<std::size_t>(rng() % succ.list.size());
    cur = succ.list[pick].second;
    trace.push_back(TraceStep{succ.list[pick].first, cur});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Bounded state-graph construction
// ---------------------------------------------------------------------------

struct StateGraph {
  struct Edge {
    int from;
    RuleLabel label;
    int to;
  };

  std::vector<NormalForm> states;
  std::vector<std::string> keys;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> adj;   // successor state indices
  std::vector<bool> expanded;          // false: frontier state, moves unknown
  int initial = 0;
  bool truncated = false;              // true iff a limit was hit during construction
  Limits limits;

  bool stuck(int s) const { return expanded[s] && adj[s].empty(); }
};

inline StateGraph state_graph(const Program& prog, const BuiltinRegistry& reg,
                              const Limits& limits, Mode mode = Mode::Default) {
  StateGraph g;
  g.limits = limits;
  std::map<std::string, int> index;

  auto intern = [&](NormalForm nf) -> int {
    std::string key = nf_key(nf);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (g.states.size() >= limits.maxStates) return -1;
    int id = static_cast<int>(g.states.size());
    index.emplace(key, id);
    g.states.push_back(std::move(nf));
    g.keys.push_back(std::move(key));
    g.adj.emplace_back();
    g.expanded.push_back(false);
    return id;
  };

  int init = intern(initial_state(prog, reg));
  bbc_assert(init == 0, "initial state interning failed");
  g.initial = init;

  std::vector<bool> processed;
  std::deque<int> queue{init};
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    if (static_cast<std::size_t>(s) < processed.size() && processed[s]) continue;
    processed.resize(g.states.size(), false);
    processed[s] = true;
    SuccessorSet succ = successors(g.states[s], prog, reg, mode, limits.unfoldBudget);
    bool complete = !succ.unfoldCapped;
    for (auto& [label, nf] : succ.list) {
      int t = intern(std::move(nf));
      if (t < 0) {
        g.truncated = true;
        complete = false;
        continue;
      }
      g.edges.push_back(StateGraph::Edge{s, label, t});
      g.adj[s].push_back(t);
      if (static_cast<std::size_t>(t) >= processed.size() || !processed[t]) queue.push_back(t);
    }
    if (succ.unfoldCapped) g.truncated = true;
    g.expanded[s] = complete;
  }
  return g;
}

}  // namespace bbc
