#pragma once

#include <string>
#include <vector>

#include "bbc/ast.hpp"

namespace bbc {

// ---------------------------------------------------------------------------
// Hierarchical collect-and-broadcast protocol
// ---------------------------------------------------------------------------

enum class Rounds { Once, Repeat };
enum class LeafBody { Inert, Echo };

// A tree of aggregating centrals: depth counts the intermediate central
// levels (0 = leaves directly under the root), branching lists the fan-out
// per level from the root down and therefore has depth+1 entries. Every
// channel of a level gets the level's fan-out as its bound.
struct HierarchySpec {
  std::size_t depth = 0;
  std::vector<std::size_t> branching;  // depth+1 entries, root fan-out first
  Rounds rounds = Rounds::Once;
  Name selection = Name("min");
  LeafBody leafBody = LeafBody::Echo;

  void validate() const {
    if (branching.size() != depth + 1)
      throw BbcError("hierarchy branching must list depth+1 fan-outs");
    for (auto f : branching)
      if (f < 1) throw BbcError("hierarchy fan-out must be >= 1");
  }

  std::size_t leaf_count() const {
    std::size_t k = 1;
    for (auto f : branching) k *= f;
    return k;
  }
};

namespace detail {

struct LevelChans {
  Name up;    // collected by the level's parent central
  Name down;  // broadcast back to the level's children
};

// Leaf: (new w) (up!<w>.0 | dn?<z>(z). (echo z . tail))
//
// The receive half runs beside the contribution instead of after it: with a
// strictly sequential leaf, a collection that happens to leave this leaf's
// contribution behind would also cut it off from the decision broadcast, and
// the flat network has no matching behaviour.
inline Process leaf_process(const Name& up, const Name& dn, LeafBody body, Process tail) {
  Process after = body == LeafBody::Echo
                      ? Process::output("obs", Message::var("z"), std::move(tail))
                      : std::move(tail);
  return Process::new_(
      "w", Bound::infinite(),
      Process::par(Process::output(up, Message::var("w"), Process::nil()),
                   Process::b_input(dn, Pattern{{Name("z")}, Message::var("z")},
                                    std::move(after))));
}

// Central: cu?*(x) as S. pu!<f{S}>.0 | pd?<z>(z). cd!<z>. tail
//
// The downward relay is likewise independent of the collect-and-forward half,
// so a decision arriving from above always reaches the children even when the
// collection raced ahead of a slow subtree.
inline Process central_process(const Name& sel, const Name& cu, const Name& cd, const Name& pu,
                               const Name& pd, Process tail) {
  return Process::par(
      Process::c_input(cu, Pattern{{Name("x")}, Message::var("x")}, "S",
                       Process::output(pu, Message::sel(sel, Message::setvar("S")),
                                       Process::nil())),
      Process::b_input(pd, Pattern{{Name("z")}, Message::var("z")},
                       Process::output(cd, Message::var("z"), std::move(tail))));
}

// Root: u?*(x) as S. d!<f{S}>. tail
inline Process root_process(const Name& sel, const Name& u, const Name& d, Process tail) {
  return Process::c_input(
      u, Pattern{{Name("x")}, Message::var("x")}, "S",
      Process::output(d, Message::sel(sel, Message::setvar("S")), std::move(tail)));
}

inline Network par_all(std::vector<Network> atoms) {
  bbc_assert(!atoms.empty(), "empty network");
  Network net = atoms.back();
  for (auto it = atoms.rbegin() + 1; it != atoms.rend(); ++it)
    net = Network::par(*it, std::move(net));
  return net;
}

inline std::vector<Message> to_args(const std::vector<Name>& names) {
  std::vector<Message> out;
  for (auto& n : names) out.push_back(Message::var(n));
  return out;
}

// In repeating mode each role becomes a recursive agent parameterised by the
// channels it touches.
struct RoleBuilder {
  Program& prog;
  bool recursive;
  LeafBody leafBody;
  Name selection;

  Process leaf(const LevelChans& c) {
    if (!recursive) return leaf_process(c.up, c.down, leafBody, Process::nil());
    if (!prog.agents.count("Leaf")) {
      AgentDef def;
      def.name = "Leaf";
      def.params = {Name("up"), Name("dn")};
      def.paramTypes = {Type::chan_c(ambient_type()), Type::chan_b(ambient_type())};
      if (leafBody == LeafBody::Echo) {
        def.params.push_back(Name("o"));
        def.paramTypes.push_back(Type::chan_b(ambient_type()));
      }
      Process tail = Process::call("Leaf", to_args(def.params));
      // The echo runs beside the next round, not in front of it: nothing
      // ever consumes the observable output.
      Process echoBody =
          leafBody == LeafBody::Echo
              ? Process::par(Process::output("o", Message::var("z"), Process::nil()),
                             std::move(tail))
              : std::move(tail);
      def.body = Process::new_(
          "w", Bound::infinite(),
          Process::par(Process::output("up", Message::var("w"), Process::nil()),
                       Process::b_input("dn", Pattern{{Name("z")}, Message::var("z")},
                                        std::move(echoBody))));
      prog.agents["Leaf"] = std::move(def);
    }
    std::vector<Name> args{c.up, c.down};
    if (leafBody == LeafBody::Echo) args.push_back(Name("obs"));
    return Process::call("Leaf", to_args(args));
  }

  Process central(const LevelChans& below, const LevelChans& above) {
    if (!recursive)
      return central_process(selection, below.up, below.down, above.up, above.down,
                             Process::nil());
    if (!prog.agents.count("Central")) {
      AgentDef def;
      def.name = "Central";
      def.params = {Name("cu"), Name("cd"), Name("pu"), Name("pd")};
      def.paramTypes = {Type::chan_c(ambient_type()), Type::chan_b(ambient_type()),
                        Type::chan_c(ambient_type()), Type::chan_b(ambient_type())};
      // The relay half restarts the whole central after a round.
      def.body = central_process(selection, "cu", "cd", "pu", "pd",
                                 Process::call("Central", to_args(def.params)));
      prog.agents["Central"] = std::move(def);
    }
    return Process::call("Central", to_args({below.up, below.down, above.up, above.down}));
  }

  Process root(const LevelChans& below) {
    if (!recursive) return root_process(selection, below.up, below.down, Process::nil());
    if (!prog.agents.count("Root")) {
      AgentDef def;
      def.name = "Root";
      def.params = {Name("u"), Name("d")};
      def.paramTypes = {Type::chan_c(ambient_type()), Type::chan_b(ambient_type())};
      def.body =
          root_process(selection, "u", "d", Process::call("Root", to_args(def.params)));
      prog.agents["Root"] = std::move(def);
    }
    return Process::call("Root", to_args({below.up, below.down}));
  }
};

}  // namespace detail

// Generates the full hierarchical network: leaves contribute fresh names
// upward on per-level collection channels, intermediate centrals forward the
// selection to their parent and relay the decision downward, the root decides
// and broadcasts back down. Per-level channels are restricted with the
// level's fan-out as bound; locations are free names and connectivity is
// bidirectional along tree edges.
inline Program gen_hierarchical(const HierarchySpec& spec) {
  spec.validate();
  Program prog;
  prog.selectors[spec.selection] = SelectorDecl{spec.selection.id, {}};
  detail::RoleBuilder roles{prog, spec.rounds == Rounds::Repeat, spec.leafBody, spec.selection};

  std::size_t levels = spec.depth + 1;  // central levels, root included
  std::vector<detail::LevelChans> chans(levels);
  for (std::size_t j = 0; j < levels; ++j)
    chans[j] = detail::LevelChans{Name("up" + std::to_string(j)), Name("dn" + std::to_string(j))};

  // locs[0] are the leaves, locs[j] for 1 <= j < levels the intermediate
  // centrals, locs[levels] the root.
  std::vector<std::vector<Name>> locs(levels + 1);
  locs[levels] = {Name("hub")};
  for (std::size_t j = levels; j-- > 0;) {
    std::size_t count = locs[j + 1].size() * spec.branching[spec.depth - j];
    for (std::size_t i = 0; i < count; ++i) {
      std::string stem = j == 0 ? "lf" : "c" + std::to_string(j) + "_";
      locs[j].push_back(Name(stem + std::to_string(i)));
    }
  }

  std::vector<Network> atoms;
  for (auto& l : locs[0]) atoms.push_back(Network::located(l, roles.leaf(chans[0])));
  for (std::size_t j = 1; j < levels; ++j)
    for (auto& l : locs[j])
      atoms.push_back(Network::located(l, roles.central(chans[j - 1], chans[j])));
  atoms.push_back(Network::located(locs[levels][0], roles.root(chans[levels - 1])));

  // Tree-edge connectivity, both directions (collection up, broadcast down).
  for (std::size_t j = 0; j < levels; ++j) {
    std::size_t fan = spec.branching[spec.depth - j];
    for (std::size_t i = 0; i < locs[j].size(); ++i) {
      const Name& parent = locs[j + 1][i / fan];
      atoms.push_back(Network::near(locs[j][i], parent));
      atoms.push_back(Network::near(parent, locs[j][i]));
    }
  }

  Network net = detail::par_all(std::move(atoms));
  for (std::size_t j = levels; j-- > 0;) {
    std::uint64_t beta = spec.branching[spec.depth - j];
    net = Network::new_(chans[j].down, Bound::uniform(beta), std::move(net),
                        Type::chan_b(ambient_type()));
    net = Network::new_(chans[j].up, Bound::uniform(beta), std::move(net),
                        Type::chan_c(ambient_type()));
  }
  prog.net = std::move(net);

  if (spec.leafBody == LeafBody::Echo) {
    prog.channels[Name("obs")] = Bound::infinite();
    prog.typeDecls[Name("obs")] = Type::chan_b(ambient_type());
  }
  return prog;
}

// The flat counterpart: the same leaf set, one central at `hub`, every leaf
// adjacent to the hub, a single channel pair whose bound is the leaf count.
inline Program flatten(const HierarchySpec& spec, const Name& hub = Name("hub")) {
  spec.validate();
  Program prog;
  prog.selectors[spec.selection] = SelectorDecl{spec.selection.id, {}};
  detail::RoleBuilder roles{prog, spec.rounds == Rounds::Repeat, spec.leafBody, spec.selection};

  std::size_t leaves = spec.leaf_count();
  detail::LevelChans c0{Name("up0"), Name("dn0")};

  std::vector<Network> atoms;
  for (std::size_t i = 0; i < leaves; ++i)
    atoms.push_back(Network::located(Name("lf" + std::to_string(i)), roles.leaf(c0)));
  atoms.push_back(Network::located(hub, roles.root(c0)));
  for (std::size_t i = 0; i < leaves; ++i) {
    atoms.push_back(Network::near(Name("lf" + std::to_string(i)), hub));
    atoms.push_back(Network::near(hub, Name("lf" + std::to_string(i))));
  }

  Network net = detail::par_all(std::move(atoms));
  net = Network::new_(c0.down, Bound::uniform(leaves), std::move(net),
                      Type::chan_b(ambient_type()));
  net = Network::new_(c0.up, Bound::uniform(leaves), std::move(net),
                      Type::chan_c(ambient_type()));
  prog.net = std::move(net);

  if (spec.leafBody == LeafBody::Echo) {
    prog.channels[Name("obs")] = Bound::infinite();
    prog.typeDecls[Name("obs")] = Type::chan_b(ambient_type());
  }
  return prog;
}

// ---------------------------------------------------------------------------
// Electoral system
// ---------------------------------------------------------------------------

// n participants on a common channel with bound n; k collection rounds each.
struct ElectoralSpec {
  std::size_t n = 2;
  std::size_t roundsK = 1;

  void validate() const {
    if (n < 2) throw BbcError("an electoral system needs at least two participants");
    if (roundsK < 1) throw BbcError("the electoral system needs at least one collection round");
  }
};

// Each participant announces its identity, collects k rounds of names and
// then announces chosen(g({g(S1),...,g(Sk)})); the selection propagates an
// already-made choice and otherwise picks the least identity. The identity
// output is offered in a choice with the collection phase: a pure output
// with no listener cannot fire under the reduction rules, so the sequential
// form would never start.
inline Program gen_electoral(const ElectoralSpec& spec) {
  spec.validate();
  Program prog;
  prog.selectors[Name("elect")] = SelectorDecl{"elect", {}};
  prog.constructors[Name("chosen")] = CtorDecl{"chosen"};
  prog.channels[Name("a")] = Bound::uniform(spec.n);
  prog.typeDecls[Name("a")] = Type::chan_c(ambient_type());

  std::vector<Network> atoms;
  for (std::size_t i = 1; i <= spec.n; ++i) {
    std::vector<Message> inner;
    for (std::size_t r = 1; r <= spec.roundsK; ++r)
      inner.push_back(Message::sel("elect", Message::setvar(Name("S" + std::to_string(r)))));
    Process collect = Process::output(
        "a", Message::ctor("chosen", Message::sel("elect", Message::mset(std::move(inner)))),
        Process::nil());
    for (std::size_t r = spec.roundsK; r >= 1; --r)
      collect = Process::c_input("a", Pattern{{Name("x")}, Message::var("x")},
                                 Name("S" + std::to_string(r)), std::move(collect));
    Process participant =
        Process::sum(Process::output("a", Message::var(Name(std::to_string(i))), collect),
                     collect);
    atoms.push_back(Network::located(Name("l" + std::to_string(i)), std::move(participant)));
  }
  for (std::size_t i = 1; i <= spec.n; ++i)
    for (std::size_t j = 1; j <= spec.n; ++j)
      if (i != j)
        atoms.push_back(
            Network::near(Name("l" + std::to_string(i)), Name("l" + std::to_string(j))));

  prog.net = detail::par_all(std::move(atoms));
  return prog;
}

}  // namespace bbc
