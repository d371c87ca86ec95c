#pragma once

#include <map>
#include <set>
#include <string>

#include "bbc/ast.hpp"
#include "bbc/printer.hpp"

namespace bbc {

// Gamma: types for names, selectors and constructors (three namespaces).
struct TypeEnv {
  std::map<Name, Type> names;
  std::map<Name, Type> selectors;
  std::map<Name, Type> constructors;

  const Type& name_type(const Name& n) const {
    auto it = names.find(n);
    if (it == names.end()) throw TypeError("name " + n.id + " has no type");
    return it->second;
  }
};

namespace detail {

// Names appearing in location position anywhere in the program: located
// labels, connectivity endpoints, bound-table keys.
struct LocCollector {
  NameSet locs;

  void bound(const Bound& b) {
    for (auto& [l, k] : b.at) {
      (void)k;
      locs.insert(l);
    }
  }
  void proc(const Process& p) {
    if (p.kind == Process::Kind::New) bound(p.bound);
    for (auto& k : p.kids) proc(k);
  }
  void net(const Network& n) {
    switch (n.kind) {
      case Network::Kind::Located:
        locs.insert(n.loc);
        proc(n.proc);
        break;
      case Network::Kind::Near:
        locs.insert(n.loc);
        locs.insert(n.nearR);
        break;
      case Network::Kind::NewN:
        bound(n.bound);
        net(n.kids[0]);
        break;
      case Network::Kind::ParN:
        net(n.kids[0]);
        net(n.kids[1]);
        break;
    }
  }
};

inline void check_well_formed(const Type& t, const std::set<std::string>& bases) {
  switch (t.kind) {
    case Type::Kind::Base:
      if (t.base != "name" && !bases.count(t.base))
        throw TypeError("unknown base type " + t.base);
      return;
    case Type::Kind::Loc:
      return;
    default:
      for (auto& a : t.args) check_well_formed(a, bases);
  }
}

}  // namespace detail

// The environment induced by a program: explicit `type` declarations take
// precedence; names in syntactic location position get Loc; every other free
// name gets the ambient base type; selectors and constructors get natural
// defaults when undeclared.
inline TypeEnv natural_env(const Program& prog) {
  TypeEnv env;

  detail::LocCollector lc;
  lc.net(prog.net);
  for (auto& [a, b] : prog.channels) {
    (void)a;
    lc.bound(b);
  }

  NameSet known;
  {
    NameSet fns = free_names(prog.net);
    known.insert(fns.begin(), fns.end());
    for (auto& [a, b] : prog.channels) {
      (void)b;
      known.insert(a);
    }
    for (auto& [s, decl] : prog.selectors) {
      (void)s;
      for (auto& m : decl.params) {
        NameSet pn = free_names(m);
        known.insert(pn.begin(), pn.end());
      }
    }
    known.insert(lc.locs.begin(), lc.locs.end());
  }

  for (auto& n : known) env.names[n] = lc.locs.count(n) ? Type::loc() : ambient_type();

  for (auto& [n, t] : prog.typeDecls) {
    detail::check_well_formed(t, prog.baseTypes);
    if (prog.selectors.count(n))
      env.selectors[n] = t;
    else if (prog.constructors.count(n))
      env.constructors[n] = t;
    else
      env.names[n] = t;
  }

  for (auto& [n, decl] : prog.selectors)
    if (!env.selectors.count(n))
      env.selectors[n] = Type::arrow(Type::mset(ambient_type()), ambient_type());
  for (auto& [n, decl] : prog.constructors) {
    if (env.constructors.count(n)) continue;
    if (decl.builtin == "first")
      env.constructors[n] =
          Type::arrow(Type::prod({ambient_type(), ambient_type()}), ambient_type());
    else
      env.constructors[n] = Type::arrow(ambient_type(), ambient_type());
  }
  return env;
}

// ---------------------------------------------------------------------------
// Message typing (syntax-directed)
// ---------------------------------------------------------------------------

inline Type type_of_message(const TypeEnv& env, const Message& m) {
  switch (m.kind) {
    case Message::Kind::Var:
    case Message::Kind::SetVar:
      return env.name_type(m.name);
    case Message::Kind::Tuple: {
      std::vector<Type> comps;
      for (auto& a : m.args) comps.push_back(type_of_message(env, a));
      return Type::prod(std::move(comps));
    }
    case Message::Kind::MsetLit: {
      if (m.args.empty()) throw TypeError("empty multiset literal has no type");
      Type elem = type_of_message(env, m.args[0]);
      for (auto& a : m.args)
        if (!(type_of_message(env, a) == elem))
          throw TypeError("multiset literal elements disagree in type");
      return Type::mset(std::move(elem), m.args.size());
    }
    case Message::Kind::Ctor: {
      auto it = env.constructors.find(m.name);
      if (it == env.constructors.end())
        throw TypeError("constructor " + m.name.id + " has no type");
      const Type& ft = it->second;
      if (ft.kind != Type::Kind::Arrow)
        throw TypeError("constructor " + m.name.id + " must have an arrow type");
      Type argT = type_of_message(env, m.args[0]);
      if (!(argT == ft.args[0]))
        throw TypeError("constructor " + m.name.id + " expects " + pretty_print(ft.args[0]) +
                        ", got " + pretty_print(argT));
      return ft.args[1];
    }
    case Message::Kind::Sel: {
      auto it = env.selectors.find(m.name);
      if (it == env.selectors.end()) throw TypeError("selector " + m.name.id + " has no type");
      const Type& gt = it->second;
      if (gt.kind != Type::Kind::Arrow || gt.args[0].kind != Type::Kind::Mset)
        throw TypeError("selector " + m.name.id + " must have a multiset-to-element type");
      Type argT = type_of_message(env, m.args[0]);
      if (argT.kind != Type::Kind::Mset)
        throw TypeError("selector " + m.name.id + " applied to a non-multiset");
      if (!(argT.args[0] == gt.args[0].args[0]))
        throw TypeError("selector " + m.name.id + " expects elements of type " +
                        pretty_print(gt.args[0].args[0]) + ", got " + pretty_print(argT.args[0]));
      // A declared exact arity must match; an arity-polymorphic selector
      // (wildcard domain) accepts any multiset, including setvar-typed ones.
      if (gt.args[0].arity && argT.arity != gt.args[0].arity)
        throw TypeError("selector " + m.name.id + " arity mismatch");
      return gt.args[1];
    }
  }
  throw BbcError("unreachable");
}

// ---------------------------------------------------------------------------
// Pattern typing: infer binder types against the expected payload type
// ---------------------------------------------------------------------------

namespace detail {

inline void type_pattern(const TypeEnv& env, const Message& body, const Type& expected,
                         const NameSet& binders, std::map<Name, Type>& out) {
  if (body.kind == Message::Kind::Var && binders.count(body.name)) {
    auto it = out.find(body.name);
    if (it != out.end()) {
      if (!(it->second == expected))
        throw TypeError("pattern binder " + body.name.id + " used at two types");
    } else {
      out.emplace(body.name, expected);
    }
    return;
  }
  switch (body.kind) {
    case Message::Kind::Var: {
      const Type& t = env.name_type(body.name);
      if (!(t == expected))
        throw TypeError("pattern name " + body.name.id + " has type " + pretty_print(t) +
                        ", expected " + pretty_print(expected));
      return;
    }
    case Message::Kind::Tuple: {
      if (expected.kind != Type::Kind::Prod || expected.args.size() != body.args.size())
        throw TypeError("tuple pattern does not fit expected type " + pretty_print(expected));
      for (size_t i = 0; i < body.args.size(); ++i)
        type_pattern(env, body.args[i], expected.args[i], binders, out);
      return;
    }
    case Message::Kind::Ctor: {
      auto it = env.constructors.find(body.name);
      if (it == env.constructors.end())
        throw TypeError("constructor " + body.name.id + " has no type");
      const Type& ft = it->second;
      if (ft.kind != Type::Kind::Arrow || !(ft.args[1] == expected))
        throw TypeError("constructor pattern " + body.name.id + " does not produce " +
                        pretty_print(expected));
      type_pattern(env, body.args[0], ft.args[0], binders, out);
      return;
    }
    default:
      throw TypeError("patterns are first-order (no selectors or multisets)");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Process and network checking
// ---------------------------------------------------------------------------

// Agent occurrences are discharged coinductively: a body is checked once with
// its own name assumed well-typed.
struct AgentSet {
  std::set<std::string> assumed;
};

namespace detail {

struct Checker {
  const Program& prog;
  std::set<std::string> checkedAgents;

  void process(TypeEnv env, AgentSet theta, const Process& p) {
    switch (p.kind) {
      case Process::Kind::Nil:
        return;
      case Process::Kind::Output: {
        const Type& ct = env.name_type(p.channel);
        if (ct.kind != Type::Kind::ChanB && ct.kind != Type::Kind::ChanC)
          throw TypeError("output subject " + p.channel.id + " is not a channel");
        Type mt = type_of_message(env, p.msg);
        if (!(mt == ct.args[0]))
          throw TypeError("output on " + p.channel.id + " carries " + pretty_print(mt) +
                          ", channel expects " + pretty_print(ct.args[0]));
        process(env, theta, p.kids[0]);
        return;
      }
      case Process::Kind::BInput: {
        const Type& ct = env.name_type(p.channel);
        if (ct.kind != Type::Kind::ChanB)
          throw TypeError("broadcast input needs a broadcast channel, " + p.channel.id +
                          " is " + pretty_print(ct));
        NameSet binders(p.pattern.binders.begin(), p.pattern.binders.end());
        std::map<Name, Type> bt;
        type_pattern(env, p.pattern.body, ct.args[0], binders, bt);
        TypeEnv inner = env;
        for (auto& [n, t] : bt) inner.names[n] = t;
        process(std::move(inner), theta, p.kids[0]);
        return;
      }
      case Process::Kind::CInput: {
        const Type& ct = env.name_type(p.channel);
        if (ct.kind != Type::Kind::ChanC)
          throw TypeError("collection input needs a collection channel, " + p.channel.id +
                          " is " + pretty_print(ct));
        NameSet binders(p.pattern.binders.begin(), p.pattern.binders.end());
        std::map<Name, Type> bt;
        type_pattern(env, p.pattern.body, ct.args[0], binders, bt);
        // Binders scope over the pattern only; the setvar gets a multiset
        // type of unknown arity in the continuation.
        TypeEnv inner = env;
        inner.names[p.setvar] = Type::mset(ct.args[0]);
        process(std::move(inner), theta, p.kids[0]);
        return;
      }
      case Process::Kind::New: {
        check_well_formed_bound(env, p.bound);
        TypeEnv inner = env;
        Type t = p.newType ? *p.newType : ambient_type();
        check_well_formed(t, prog.baseTypes);
        inner.names[p.newName] = std::move(t);
        process(std::move(inner), theta, p.kids[0]);
        return;
      }
      case Process::Kind::Match:
      case Process::Kind::Mismatch: {
        Type t1 = type_of_message(env, p.msg);
        Type t2 = type_of_message(env, p.msg2);
        if (!(t1 == t2))
          throw TypeError("match compares " + pretty_print(t1) + " with " + pretty_print(t2));
        process(env, theta, p.kids[0]);
        return;
      }
      case Process::Kind::Par:
      case Process::Kind::Sum:
        process(env, theta, p.kids[0]);
        process(env, theta, p.kids[1]);
        return;
      case Process::Kind::Call: {
        auto it = prog.agents.find(p.agent.id);
        if (it == prog.agents.end()) throw TypeError("unknown agent " + p.agent.id);
        const AgentDef& def = it->second;
        for (size_t i = 0; i < p.callArgs.size(); ++i) {
          Type at = type_of_message(env, p.callArgs[i]);
          if (!(at == def.paramTypes[i]))
            throw TypeError("agent " + def.name + " argument " + std::to_string(i + 1) +
                            " has type " + pretty_print(at) + ", expected " +
                            pretty_print(def.paramTypes[i]));
        }
        if (theta.assumed.count(def.name) || checkedAgents.count(def.name)) return;
        checkedAgents.insert(def.name);
        agent_body(def, theta);
        return;
      }
    }
  }

  void agent_body(const AgentDef& def, AgentSet theta) {
    TypeEnv bodyEnv = agent_env(def);
    theta.assumed.insert(def.name);
    process(std::move(bodyEnv), std::move(theta), def.body);
  }

  TypeEnv agent_env(const AgentDef& def) const {
    TypeEnv env = natural_env(prog);
    env.names.clear();
    for (size_t i = 0; i < def.params.size(); ++i) {
      check_well_formed(def.paramTypes[i], prog.baseTypes);
      env.names[def.params[i]] = def.paramTypes[i];
    }
    return env;
  }

  void check_well_formed_bound(const TypeEnv& env, const Bound& b) {
    for (auto& [l, k] : b.at) {
      (void)k;
      const Type& t = env.name_type(l);
      if (!(t == Type::loc()))
        throw TypeError("bound-table key " + l.id + " must be a location");
    }
  }

  void network(TypeEnv env, AgentSet theta, const Network& n) {
    switch (n.kind) {
      case Network::Kind::Located: {
        const Type& t = env.name_type(n.loc);
        if (!(t == Type::loc()))
          throw TypeError("located label " + n.loc.id + " must have type Loc, has " +
                          pretty_print(t));
        process(env, theta, n.proc);
        return;
      }
      case Network::Kind::Near: {
        if (!(env.name_type(n.loc) == Type::loc()) || !(env.name_type(n.nearR) == Type::loc()))
          throw TypeError("connectivity endpoints must have type Loc");
        return;
      }
      case Network::Kind::NewN: {
        check_well_formed_bound(env, n.bound);
        TypeEnv inner = env;
        Type t = n.newType ? *n.newType : ambient_type();
        check_well_formed(t, prog.baseTypes);
        inner.names[n.newName] = std::move(t);
        network(std::move(inner), theta, n.kids[0]);
        return;
      }
      case Network::Kind::ParN:
        network(env, theta, n.kids[0]);
        network(env, theta, n.kids[1]);
        return;
    }
  }
};

}  // namespace detail

inline void check_network(const TypeEnv& env, const Program& prog, const Network& n) {
  detail::Checker c{prog, {}};
  c.network(env, AgentSet{}, n);
}

inline void check_process(const TypeEnv& env, const Program& prog, const Process& p) {
  detail::Checker c{prog, {}};
  c.process(env, AgentSet{}, p);
}

// Checks the whole program under its natural environment: every agent body
// once, then the top-level network. Throws TypeError on the first violation.
inline TypeEnv check_program(const Program& prog) {
  TypeEnv env = natural_env(prog);
  for (auto& [n, t] : prog.typeDecls) {
    (void)n;
    detail::check_well_formed(t, prog.baseTypes);
  }
  detail::Checker c{prog, {}};
  for (auto& [name, def] : prog.agents) {
    if (c.checkedAgents.count(name)) continue;
    c.checkedAgents.insert(name);
    c.agent_body(def, AgentSet{});
  }
  c.network(env, AgentSet{}, prog.net);
  return env;
}

}  // namespace bbc
