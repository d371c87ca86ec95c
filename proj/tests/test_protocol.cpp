#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "testutil.hpp"

using namespace bbc;

namespace {

HierarchySpec hspec(std::size_t depth, std::vector<std::size_t> branching,
                    LeafBody leaf = LeafBody::Echo, Rounds rounds = Rounds::Once) {
  HierarchySpec s;
  s.depth = depth;
  s.branching = std::move(branching);
  s.rounds = rounds;
  s.leafBody = leaf;
  return s;
}

// All chosen(m) payloads announced along an edge: the payload itself for
// Broad/Local, the chosen elements of the collected multiset for Coll.
std::vector<Message> announcements(const RuleLabel& l) {
  std::vector<Message> out;
  auto isChosen = [](const Message& m) {
    return m.kind == Message::Kind::Ctor && m.name == Name("chosen");
  };
  if (l.kind == RuleLabel::Kind::Coll) {
    for (auto& e : l.payload.args)
      if (isChosen(e)) out.push_back(e);
  } else if (isChosen(l.payload)) {
    out.push_back(l.payload);
  }
  return out;
}

// Exposed chosen(m) outputs at a stuck state.
std::vector<Message> pending_announcements(const NormalForm& nf, const Program& p,
                                           const BuiltinRegistry& reg) {
  std::vector<Message> out;
  std::function<void(const Process&)> walk = [&](const Process& q) {
    if (q.kind == Process::Kind::Output && q.msg.kind == Message::Kind::Ctor &&
        q.msg.name == Name("chosen"))
      out.push_back(q.msg);
    if (q.kind == Process::Kind::Sum) {
      walk(q.kids[0]);
      walk(q.kids[1]);
    }
  };
  (void)p;
  (void)reg;
  for (auto& [loc, proc] : nf.located) walk(proc);
  return out;
}

struct PathCheck {
  std::size_t maximalPaths = 0;
  bool everyPathAnnounces = true;
  bool uniqueLeaderPerPath = true;
};

// Enumerates every maximal path of a finite acyclic graph and checks the
// electoral property along each.
PathCheck check_paths(const StateGraph& g, const Program& p, const BuiltinRegistry& reg) {
  PathCheck res;
  std::vector<std::pair<int, std::vector<Message>>> stack;
  std::vector<const StateGraph::Edge*> from(g.states.size() * 0, nullptr);
  std::vector<std::vector<const StateGraph::Edge*>> out(g.states.size());
  for (auto& e : g.edges) out[e.from].push_back(&e);

  std::vector<Message> current;
  std::function<void(int)> dfs = [&](int s) {
    if (out[s].empty()) {
      ++res.maximalPaths;
      std::vector<Message> all = current;
      for (auto& m : pending_announcements(g.states[s], p, reg)) all.push_back(m);
      if (all.empty()) res.everyPathAnnounces = false;
      std::set<Message> distinct(all.begin(), all.end());
      if (distinct.size() > 1) res.uniqueLeaderPerPath = false;
      return;
    }
    for (auto* e : out[s]) {
      auto ann = announcements(e->label);
      for (auto& a : ann) current.push_back(a);
      dfs(e->to);
      current.resize(current.size() - ann.size());
    }
  };
  dfs(g.initial);
  return res;
}

}  // namespace

TEST_CASE("hierarchy shape: depth 0 with two leaves") {
  Program p = gen_hierarchical(hspec(0, {2}));
  NameSet fns = free_names(p.net);
  CHECK(fns.count(Name("lf0")));
  CHECK(fns.count(Name("lf1")));
  CHECK(fns.count(Name("hub")));
  CHECK(fns.count(Name("obs")));
  // Channels are restricted, not free.
  CHECK_FALSE(fns.count(Name("up0")));
  CHECK_FALSE(fns.count(Name("dn0")));
  NormalForm nf = normalize(p.net);
  // Each leaf splits into its contribution and its receive half.
  CHECK(nf.located.size() == 5);
  // Two channel restrictions plus one lifted leaf contribution per leaf.
  CHECK(nf.restrictions.size() == 4);
  for (auto& r : nf.restrictions)
    if (r.type) CHECK(r.bound.lookup(Name("lf0")) == std::uint64_t{2});
}

TEST_CASE("hierarchy shape: depth 1 branching [2,2]") {
  Program p = gen_hierarchical(hspec(1, {2, 2}));
  NormalForm nf = normalize(p.net);
  CHECK(nf.located.size() == 13);      // 4 leaves and 2 mids split in half, 1 root
  CHECK(nf.restrictions.size() == 8);  // up0,dn0,up1,dn1 + one w per leaf
  std::size_t channels = 0;
  for (auto& r : nf.restrictions)
    if (r.type) {
      ++channels;
      CHECK(r.bound.def == std::uint64_t{2});
    }
  CHECK(channels == 4);
  std::size_t conn = nf.conn.pairs.size();
  CHECK(conn == 12);  // 6 tree edges, both directions
}

TEST_CASE("generated programs parse, print and type-check") {
  for (auto spec : {hspec(0, {2}), hspec(1, {2, 2}), hspec(2, {2, 1, 2}),
                    hspec(1, {2, 2}, LeafBody::Inert), hspec(0, {3}, LeafBody::Echo,
                                                             Rounds::Repeat)}) {
    Program p = gen_hierarchical(spec);
    CHECK_NOTHROW(check_program(p));
    Program q = parse_program(pretty_print(p));
    CHECK(bbctest::program_alpha_eq(p, q));

    Program f = flatten(spec);
    CHECK_NOTHROW(check_program(f));
    Program fq = parse_program(pretty_print(f));
    CHECK(bbctest::program_alpha_eq(f, fq));
  }
  Program e = gen_electoral(ElectoralSpec{3, 1});
  CHECK_NOTHROW(check_program(e));
  CHECK(bbctest::program_alpha_eq(e, parse_program(pretty_print(e))));
}

TEST_CASE("flatten is the identity at depth 0 and idempotent on flat shapes") {
  CHECK(pretty_print(gen_hierarchical(hspec(0, {2}))) == pretty_print(flatten(hspec(0, {2}))));
  // Flattening a deeper spec equals generating the equivalent flat hierarchy.
  CHECK(pretty_print(flatten(hspec(1, {2, 2}))) == pretty_print(gen_hierarchical(hspec(0, {4}))));
  CHECK(pretty_print(flatten(hspec(1, {2, 2}))) == pretty_print(flatten(hspec(0, {4}))));
}

TEST_CASE("depth 0, one leaf, inert: two communication steps to inertness") {
  Program p = gen_hierarchical(hspec(0, {1}, LeafBody::Inert));
  auto reg = build_registry(p);
  StateGraph g = state_graph(p, reg, Limits{}, Mode::Exhaustive);
  CHECK_FALSE(g.truncated);
  CHECK(g.states.size() == 3);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].label.kind == RuleLabel::Kind::Coll);
  CHECK(g.edges[1].label.kind == RuleLabel::Kind::Broad);
  // Final state: everything inert.
  const NormalForm& last = g.states[2];
  for (auto& [loc, proc] : last.located) CHECK(proc.kind == Process::Kind::Nil);
}

TEST_CASE("rounds=once hierarchies have finite graphs") {
  for (auto spec : {hspec(0, {2}), hspec(1, {2, 2}), hspec(1, {2, 2}, LeafBody::Inert)}) {
    Program p = gen_hierarchical(spec);
    auto reg = build_registry(p);
    StateGraph g = state_graph(p, reg, Limits{}, Mode::Default);
    CHECK_FALSE(g.truncated);
    CHECK(g.states.size() >= 3);
  }
}

TEST_CASE("echoed decisions agree within every maximal default computation") {
  Program p = gen_hierarchical(hspec(1, {2, 2}));
  auto reg = build_registry(p);
  StateGraph g = state_graph(p, reg, Limits{}, Mode::Default);
  REQUIRE_FALSE(g.truncated);
  std::vector<std::vector<int>> out(g.states.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) out[g.edges[i].from].push_back(g.edges[i].to);

  int terminals = 0;
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    if (!out[s].empty()) continue;
    ++terminals;
    // Collect pending echoes obs!<v>: all v equal within the state.
    std::set<std::string> values;
    for (auto& [loc, proc] : g.states[s].located)
      if (proc.kind == Process::Kind::Output && proc.channel == Name("obs"))
        values.insert(pretty_print(proc.msg));
    CHECK(values.size() <= 1);
  }
  CHECK(terminals > 0);
}

TEST_CASE("electoral shape and validation") {
  Program p = gen_electoral(ElectoralSpec{2, 1});
  CHECK(p.channels[Name("a")].lookup(Name("l1")) == std::uint64_t{2});
  NormalForm nf = normalize(p.net);
  CHECK(nf.located.size() == 2);
  CHECK(nf.conn.pairs.size() == 2);  // full bidirectional connectivity on 2 nodes
  CHECK(nf.conn.connected(Name("l1"), Name("l2")));
  CHECK(nf.conn.connected(Name("l2"), Name("l1")));
  CHECK_THROWS_AS(gen_electoral(ElectoralSpec{1, 1}), BbcError);
}

TEST_CASE("electoral system: every maximal computation elects one leader") {
  for (std::size_t n : {2u, 3u}) {
    Program p = gen_electoral(ElectoralSpec{n, 1});
    auto reg = build_registry(p);
    StateGraph g = state_graph(p, reg, Limits{}, Mode::Default);
    REQUIRE_FALSE(g.truncated);
    PathCheck res = check_paths(g, p, reg);
    CAPTURE(n);
    CAPTURE(g.states.size());
    CHECK(res.maximalPaths > 0);
    CHECK(res.everyPathAnnounces);
    CHECK(res.uniqueLeaderPerPath);
  }
}

TEST_CASE("electoral system: two collection rounds still elect uniquely") {
  Program p = gen_electoral(ElectoralSpec{2, 2});
  auto reg = build_registry(p);
  StateGraph g = state_graph(p, reg, Limits{}, Mode::Default);
  REQUIRE_FALSE(g.truncated);
  PathCheck res = check_paths(g, p, reg);
  CHECK(res.uniqueLeaderPerPath);
}

TEST_CASE("repeating hierarchies run round after round under the unfold budget") {
  HierarchySpec s = hspec(0, {2}, LeafBody::Echo, Rounds::Repeat);
  Program p = gen_hierarchical(s);
  auto reg = build_registry(p);
  auto trace = run(p, reg, 11, 8);
  CHECK(trace.size() == 8);  // never goes stuck: each round restarts
  // State count grows without bound (fresh contributions each round), so the
  // graph truncates at the limit instead of diverging.
  Limits lim;
  lim.maxStates = 40;
  StateGraph g = state_graph(p, reg, lim, Mode::Default);
  CHECK(g.truncated);
  CHECK(g.states.size() == 40);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(gen_hierarchical(hspec(1, {2})), BbcError);       // wrong branching length
  CHECK_THROWS_AS(gen_hierarchical(hspec(0, {0})), BbcError);       // zero fan-out
  CHECK_THROWS_AS(gen_electoral(ElectoralSpec{2, 0}), BbcError);    // no rounds
}
