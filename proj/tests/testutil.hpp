#pragma once

// Seeded generators for random (well-formed) programs, a type-directed
// generator for well-typed ones, and congruence-preserving scramblers. Test
// support only; nothing here is part of the library.

#include <random>
#include <string>
#include <vector>

#include "bbc/bbc.hpp"

namespace bbctest {

using namespace bbc;

struct Gen {
  std::mt19937_64 rng;

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng() % n); }
  bool chance(int percent) { return static_cast<int>(rng() % 100) < percent; }

  const std::vector<Name> chans = {Name("a"), Name("b"), Name("c"), Name("d")};
  const std::vector<Name> locs = {Name("l1"), Name("l2"), Name("l3"), Name("m1"), Name("m2")};
  const std::vector<Name> vals = {Name("u"), Name("v"), Name("n1"), Name("n2"), Name("1"),
                                  Name("2")};

  Name any(const std::vector<Name>& pool) { return pool[pick(pool.size())]; }

  Message msg(int depth, const std::vector<Name>& setvars = {}) {
    int k = static_cast<int>(pick(depth > 0 ? 6 : 1));
    switch (k) {
      case 1: {
        std::vector<Message> comps;
        std::size_t arity = 2 + pick(2);
        for (std::size_t i = 0; i < arity; ++i) comps.push_back(msg(depth - 1, setvars));
        return Message::tuple(std::move(comps));
      }
      case 2:
        return Message::ctor(chance(50) ? Name("first") : Name("tag"), msg(depth - 1, setvars));
      case 3: {
        if (!setvars.empty() && chance(40))
          return Message::sel("min", Message::setvar(any(setvars)));
        std::vector<Message> elems;
        std::size_t n = 1 + pick(3);
        for (std::size_t i = 0; i < n; ++i) {
          // A singleton literal holding a bare setvar has no surface form
          // distinct from the setvar-argument reading, so avoid it.
          Message e = msg(depth - 1, setvars);
          if (n == 1 && e.kind == Message::Kind::SetVar) e = Message::var(any(vals));
          elems.push_back(std::move(e));
        }
        return Message::sel("min", Message::mset(std::move(elems)));
      }
      case 4:
        if (!setvars.empty()) return Message::setvar(any(setvars));
        [[fallthrough]];
      default:
        return Message::var(any(vals));
    }
  }

  Pattern pattern() {
    std::size_t nb = pick(3);  // 0..2 binders
    std::vector<Name> binders;
    for (std::size_t i = 0; i < nb; ++i) binders.push_back(Name("p" + std::to_string(i)));
    if (binders.empty()) {
      Message body = chance(50) ? Message::var(any(vals))
                                : Message::tuple({Message::var(any(vals)),
                                                  Message::var(any(vals))});
      return Pattern{{}, body};
    }
    std::vector<Message> comps;
    for (auto& b : binders) comps.push_back(Message::var(b));
    comps.push_back(Message::var(any(vals)));
    if (chance(30)) {
      Message inner = comps.size() >= 2 ? Message::tuple(comps) : comps[0];
      return Pattern{binders, Message::ctor("tag", inner)};
    }
    if (comps.size() < 2) comps.push_back(Message::var(any(vals)));
    return Pattern{binders, Message::tuple(std::move(comps))};
  }

  Bound bound() {
    Bound b;
    if (chance(60)) b.def = 1 + pick(3);
    if (chance(20)) b.at[any(locs)] = 1 + pick(3);
    return b;
  }

  Process proc(int depth, std::vector<Name> setvars = {}, int svCounter = 0,
               const std::vector<std::string>& agents = {}) {
    if (depth <= 0) return chance(60) ? Process::nil()
                                      : Process::output(any(chans), msg(1, setvars),
                                                        Process::nil());
    switch (pick(9)) {
      case 0:
        return Process::nil();
      case 1:
        return Process::output(any(chans), msg(2, setvars),
                               proc(depth - 1, setvars, svCounter, agents));
      case 2:
        return Process::b_input(any(chans), pattern(),
                                proc(depth - 1, setvars, svCounter, agents));
      case 3: {
        Name sv("S" + std::to_string(svCounter));
        std::vector<Name> inner = setvars;
        inner.push_back(sv);
        return Process::c_input(any(chans), pattern(), sv,
                                proc(depth - 1, inner, svCounter + 1, agents));
      }
      case 4: {
        Name x("r" + std::to_string(pick(3)));
        return Process::new_(x, bound(), proc(depth - 1, setvars, svCounter, agents));
      }
      case 5: {
        Message a = msg(1, setvars), b = msg(1, setvars);
        Process cont = proc(depth - 1, setvars, svCounter, agents);
        return chance(50) ? Process::match(a, b, cont) : Process::mismatch(a, b, cont);
      }
      case 6:
        return Process::par(proc(depth - 1, setvars, svCounter, agents),
                            proc(depth - 1, setvars, svCounter, agents));
      case 7:
        return Process::sum(proc(depth - 1, setvars, svCounter, agents),
                            proc(depth - 1, setvars, svCounter, agents));
      default:
        if (!agents.empty() && chance(50))
          return Process::call(Name(agents[pick(agents.size())]),
                               {Message::var(any(chans)), Message::var(any(vals))});
        return Process::output(any(chans), msg(2, setvars),
                               proc(depth - 1, setvars, svCounter, agents));
    }
  }

  Network net(int depth, const std::vector<std::string>& agents = {}) {
    if (depth <= 0 || chance(35))
      return Network::located(any(locs), proc(2 + static_cast<int>(pick(2)), {}, 0, agents));
    switch (pick(4)) {
      case 0: {
        Name l = any(locs), m = any(locs);
        if (l == m) return Network::located(l, proc(2, {}, 0, agents));
        return Network::near(l, m);
      }
      case 1: {
        Name x("r" + std::to_string(pick(3)));
        return Network::new_(x, bound(), net(depth - 1, agents));
      }
      default:
        return Network::par(net(depth - 1, agents), net(depth - 1, agents));
    }
  }

  Program program(int netDepth = 4) {
    Program p;
    for (auto& c : chans)
      p.channels[c] = chance(50) ? Bound::uniform(1 + pick(3)) : Bound::infinite();
    p.selectors[Name("min")] = SelectorDecl{"min", {}};
    p.constructors[Name("first")] = CtorDecl{"first"};
    p.constructors[Name("tag")] = CtorDecl{"tag"};
    std::vector<std::string> agents;
    if (chance(40)) {
      AgentDef def;
      def.name = "A";
      def.params = {Name("ch"), Name("w")};
      def.paramTypes = {ambient_type(), ambient_type()};
      def.body = Process::output(Name("ch"), Message::var("w"),
                                 chance(50) ? Process::call("A", {Message::var("ch"),
                                                                  Message::var("w")})
                                            : Process::nil());
      p.agents["A"] = std::move(def);
      agents.push_back("A");
    }
    p.net = net(netDepth, agents);
    return p;
  }

  // --- type-directed generation ---------------------------------------------

  // Channels: a,b carry `name`; c,d carry pairs; a,c broadcast; b,d collect.
  Program typed_program(int depth = 3) {
    Program p;
    p.channels[Name("a")] = chance(50) ? Bound::uniform(1 + pick(3)) : Bound::infinite();
    p.channels[Name("b")] = Bound::uniform(1 + pick(3));
    p.channels[Name("c")] = Bound::infinite();
    p.channels[Name("d")] = Bound::uniform(1 + pick(2));
    p.typeDecls[Name("a")] = Type::chan_b(ambient_type());
    p.typeDecls[Name("b")] = Type::chan_c(ambient_type());
    p.typeDecls[Name("c")] = Type::chan_b(Type::prod({ambient_type(), ambient_type()}));
    p.typeDecls[Name("d")] = Type::chan_c(Type::prod({ambient_type(), ambient_type()}));
    p.selectors[Name("min")] = SelectorDecl{"min", {}};
    p.constructors[Name("tag")] = CtorDecl{"tag"};
    p.typeDecls[Name("tag")] = Type::arrow(ambient_type(), ambient_type());

    std::vector<Network> atoms;
    std::size_t nloc = 2 + pick(2);
    for (std::size_t i = 0; i < nloc; ++i)
      atoms.push_back(Network::located(locs[i], typed_proc(depth, {})));
    for (std::size_t i = 0; i < nloc; ++i)
      for (std::size_t j = 0; j < nloc; ++j)
        if (i != j && chance(70)) atoms.push_back(Network::near(locs[i], locs[j]));
    Network n = atoms.back();
    for (auto it = atoms.rbegin() + 1; it != atoms.rend(); ++it) n = Network::par(*it, n);
    p.net = std::move(n);
    return p;
  }

  Message typed_value(bool pair, const std::vector<Name>& nameVars) {
    auto one = [&]() -> Message {
      if (!nameVars.empty() && chance(50)) return Message::var(nameVars[pick(nameVars.size())]);
      Message base = Message::var(any(vals));
      return chance(25) ? Message::ctor("tag", base) : base;
    };
    if (pair) return Message::tuple({one(), one()});
    return one();
  }

  Process typed_proc(int depth, std::vector<Name> nameVars, std::vector<Name> nameSets = {},
                     int svc = 0) {
    if (depth <= 0) return Process::nil();
    switch (pick(8)) {
      case 0:
        return Process::nil();
      case 1: {
        bool pair = chance(40);
        Name ch = pair ? (chance(50) ? Name("c") : Name("d"))
                       : (chance(50) ? Name("a") : Name("b"));
        return Process::output(ch, typed_value(pair, nameVars),
                               typed_proc(depth - 1, nameVars, nameSets, svc));
      }
      case 2: {
        bool pair = chance(40);
        Name ch = pair ? Name("c") : Name("a");
        Pattern pat = pair ? Pattern{{Name("px"), Name("py")},
                                     Message::tuple({Message::var("px"), Message::var("py")})}
                           : Pattern{{Name("px")}, Message::var("px")};
        std::vector<Name> inner = nameVars;
        inner.push_back(Name("px"));
        if (pair) inner.push_back(Name("py"));
        return Process::b_input(ch, pat, typed_proc(depth - 1, inner, nameSets, svc));
      }
      case 3: {
        Name sv("S" + std::to_string(svc));
        // collect plain names on b; the setvar supports min{S}
        std::vector<Name> sets = nameSets;
        sets.push_back(sv);
        Process cont = typed_proc(depth - 1, nameVars, sets, svc + 1);
        if (chance(60))
          cont = Process::output(chance(50) ? Name("a") : Name("b"),
                                 Message::sel("min", Message::setvar(sv)), std::move(cont));
        return Process::c_input(Name("b"), Pattern{{Name("px")}, Message::var("px")}, sv,
                                std::move(cont));
      }
      case 4: {
        // Restricted names are numbered from the same counter as setvars so
        // nested restrictions never shadow one another at different types.
        Name x("nu" + std::to_string(svc));
        Type t = chance(50) ? Type::chan_b(ambient_type()) : ambient_type();
        std::vector<Name> inner = nameVars;
        Process body;
        if (t.kind == Type::Kind::ChanB) {
          body = chance(50) ? Process::output(x, typed_value(false, nameVars), Process::nil())
                            : Process::b_input(x, Pattern{{Name("pz")}, Message::var("pz")},
                                               Process::nil());
        } else {
          inner.push_back(x);
          body = typed_proc(depth - 1, inner, nameSets, svc + 1);
        }
        return Process::new_(x, bound(), std::move(body), t);
      }
      case 5: {
        Message m1 = typed_value(false, nameVars);
        Message m2 = typed_value(false, nameVars);
        Process cont = typed_proc(depth - 1, nameVars, nameSets, svc);
        return chance(50) ? Process::match(m1, m2, cont) : Process::mismatch(m1, m2, cont);
      }
      case 6:
        return Process::par(typed_proc(depth - 1, nameVars, nameSets, svc),
                            typed_proc(depth - 1, nameVars, nameSets, svc));
      default:
        return Process::sum(typed_proc(depth - 1, nameVars, nameSets, svc),
                            typed_proc(depth - 1, nameVars, nameSets, svc));
    }
  }

  // --- congruence-preserving scrambling --------------------------------------

  // Structural congruence has no closure rule under prefixes, guards or
  // choice operands, so rewrites only happen at positions reachable through
  // parallel composition and restriction.
  Process scramble(const Process& p, bool congPosition = true) {
    Process out = p;
    for (auto& k : out.kids)
      k = scramble(k, congPosition && (p.kind == Process::Kind::Par ||
                                       p.kind == Process::Kind::New));
    if (!congPosition) return out;
    if (out.kind == Process::Kind::Par && chance(50)) std::swap(out.kids[0], out.kids[1]);
    if (out.kind == Process::Kind::Sum && chance(50)) std::swap(out.kids[0], out.kids[1]);
    if ((out.kind == Process::Kind::Match || out.kind == Process::Kind::Mismatch) && chance(50))
      std::swap(out.msg, out.msg2);
    if (chance(25)) out = Process::par(out, Process::nil());
    if (chance(15)) {
      Message m = Message::var(any(vals));
      out = Process::match(m, m, out);
    }
    return out;
  }

  Network scramble(const Network& n) {
    Network out = n;
    for (auto& k : out.kids) k = scramble(k);
    if (out.kind == Network::Kind::ParN && chance(50)) std::swap(out.kids[0], out.kids[1]);
    if (out.kind == Network::Kind::Located) out.proc = scramble(out.proc);
    return out;
  }
};

inline bool program_alpha_eq(const Program& a, const Program& b) {
  if (!(a.channels == b.channels) || !(a.typeDecls == b.typeDecls) ||
      !(a.baseTypes == b.baseTypes) || !(a.selectors == b.selectors) ||
      !(a.constructors == b.constructors))
    return false;
  if (a.agents.size() != b.agents.size()) return false;
  for (auto& [name, da] : a.agents) {
    auto it = b.agents.find(name);
    if (it == b.agents.end()) return false;
    const AgentDef& db = it->second;
    if (da.params != db.params || !(da.paramTypes == db.paramTypes)) return false;
    if (!alpha_equivalent(da.body, db.body)) return false;
  }
  return alpha_equivalent(a.net, b.net);
}

}  // namespace bbctest
