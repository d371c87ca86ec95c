#pragma once

#include <map>
#include <string>

#include "bbc/ast.hpp"

namespace bbc {

// A finite, simultaneous substitution over names. Set variables may map to
// multiset literals; anything mapped to a name occurring as a bound-table key
// must itself be a name.
struct Substitution {
  std::map<Name, Message> map;

  bool empty() const { return map.empty(); }

  const Message* lookup(const Name& n) const {
    auto it = map.find(n);
    return it == map.end() ? nullptr : &it->second;
  }

  NameSet range_names() const {
    NameSet s;
    for (auto& [k, v] : map) {
      (void)k;
      detail::fn_into(v, s);
    }
    return s;
  }
};

namespace detail {

enum class MsgPos { FirstOrder, SelArg };

inline Message apply_subst_at(const Message& m, const Substitution& s, MsgPos pos) {
  switch (m.kind) {
    case Message::Kind::Var: {
      if (const Message* r = s.lookup(m.name)) {
        if (r->kind == Message::Kind::MsetLit || r->kind == Message::Kind::SetVar)
          throw IllSortedSubstitution("cannot substitute a multiset for " + m.name.id +
                                      " in a first-order position");
        return *r;
      }
      return m;
    }
    case Message::Kind::SetVar: {
      if (const Message* r = s.lookup(m.name)) {
        bool multi = r->kind == Message::Kind::MsetLit || r->kind == Message::Kind::SetVar;
        if (multi && pos != MsgPos::SelArg)
          throw IllSortedSubstitution("cannot substitute a multiset for " + m.name.id +
                                      " outside a selector argument");
        return *r;
      }
      return m;
    }
    case Message::Kind::Tuple: {
      std::vector<Message> out;
      out.reserve(m.args.size());
      for (auto& a : m.args) out.push_back(apply_subst_at(a, s, MsgPos::FirstOrder));
      return Message::tuple(std::move(out));
    }
    case Message::Kind::MsetLit: {
      std::vector<Message> out;
      out.reserve(m.args.size());
      for (auto& a : m.args) out.push_back(apply_subst_at(a, s, MsgPos::FirstOrder));
      return Message::mset(std::move(out));
    }
    case Message::Kind::Ctor:
      return Message::ctor(m.name, apply_subst_at(m.args[0], s, MsgPos::FirstOrder));
    case Message::Kind::Sel:
      return Message::sel(m.name, apply_subst_at(m.args[0], s, MsgPos::SelArg));
  }
  throw BbcError("unreachable");
}

// Renames a name reference through a substitution; only name-for-name
// replacements are meaningful here (bound-table keys, location labels).
inline Name apply_subst_name(const Name& n, const Substitution& s, const char* what) {
  if (const Message* r = s.lookup(n)) {
    if (r->kind != Message::Kind::Var)
      throw IllSortedSubstitution(std::string("cannot substitute a non-name for ") + n.id +
                                  " used as a " + what);
    return r->name;
  }
  return n;
}

inline Bound apply_subst_bound(const Bound& b, const Substitution& s) {
  Bound out;
  out.def = b.def;
  for (auto& [l, k] : b.at) out.at[apply_subst_name(l, s, "bound-table key")] = k;
  return out;
}

}  // namespace detail

inline Message apply_subst(const Message& m, const Substitution& s) {
  return detail::apply_subst_at(m, s, detail::MsgPos::FirstOrder);
}

// ---------------------------------------------------------------------------
// Capture-avoiding substitution over processes and networks
// ---------------------------------------------------------------------------

namespace detail {

// Shared machinery: at each binder, drop shadowed entries and rename the
// binder when it would capture a name free in the substitution range.
struct SubstCtx {
  NameSet avoid;  // names that binders must not collide with

  Name pick_fresh(const Name& base) {
    return fresh_name(base, avoid);
  }
};

Process subst_process(const Process& p, const Substitution& s, SubstCtx& ctx);

inline Substitution drop(const Substitution& s, const std::vector<Name>& binders) {
  Substitution out = s;
  for (auto& b : binders) out.map.erase(b);
  return out;
}

inline Substitution drop1(const Substitution& s, const Name& b) {
  Substitution out = s;
  out.map.erase(b);
  return out;
}

inline bool needs_rename(const Name& binder, const Substitution& s) {
  for (auto& [k, v] : s.map) {
    (void)k;
    NameSet rn;
    fn_into(v, rn);
    if (rn.count(binder)) return true;
  }
  return false;
}

inline Process subst_process(const Process& p, const Substitution& s, SubstCtx& ctx) {
  if (s.empty()) return p;
  switch (p.kind) {
    case Process::Kind::Nil:
      return p;
    case Process::Kind::Output: {
      return Process::output(apply_subst_name(p.channel, s, "channel"), apply_subst(p.msg, s),
                             subst_process(p.kids[0], s, ctx));
    }
    case Process::Kind::BInput: {
      Substitution inner = drop(s, p.pattern.binders);
      Pattern pat = p.pattern;
      Process cont = p.kids[0];
      for (auto& b : pat.binders) {
        if (needs_rename(b, inner)) {
          Name nb = ctx.pick_fresh(b);
          Substitution ren;
          ren.map.emplace(b, Message::var(nb));
          pat.body = apply_subst(pat.body, ren);
          cont = subst_process(cont, ren, ctx);
          for (auto& bb : pat.binders)
            if (bb == b) bb = nb;
        }
      }
      pat.body = apply_subst(pat.body, inner);
      return Process::b_input(apply_subst_name(p.channel, s, "channel"), std::move(pat),
                              subst_process(cont, inner, ctx));
    }
    case Process::Kind::CInput: {
      // Pattern binders scope over the body only; the setvar over the
      // continuation only.
      Substitution patSub = drop(s, p.pattern.binders);
      Pattern pat = p.pattern;
      for (auto& b : pat.binders) {
        if (needs_rename(b, patSub)) {
          Name nb = ctx.pick_fresh(b);
          Substitution ren;
          ren.map.emplace(b, Message::var(nb));
          pat.body = apply_subst(pat.body, ren);
          for (auto& bb : pat.binders)
            if (bb == b) bb = nb;
        }
      }
      pat.body = apply_subst(pat.body, patSub);

      Substitution contSub = drop1(s, p.setvar);
      Name sv = p.setvar;
      Process cont = p.kids[0];
      if (needs_rename(sv, contSub)) {
        Name nsv = ctx.pick_fresh(sv);
        Substitution ren;
        ren.map.emplace(sv, Message::setvar(nsv));
        cont = subst_process(cont, ren, ctx);
        sv = nsv;
      }
      return Process::c_input(apply_subst_name(p.channel, s, "channel"), std::move(pat), sv,
                              subst_process(cont, contSub, ctx));
    }
    case Process::Kind::New: {
      Substitution inner = drop1(s, p.newName);
      Name x = p.newName;
      Process body = p.kids[0];
      if (needs_rename(x, inner)) {
        Name nx = ctx.pick_fresh(x);
        Substitution ren;
        ren.map.emplace(x, Message::var(nx));
        body = subst_process(body, ren, ctx);
        x = nx;
      }
      return Process::new_(x, apply_subst_bound(p.bound, s), subst_process(body, inner, ctx),
                           p.newType);
    }
    case Process::Kind::Match:
      return Process::match(apply_subst(p.msg, s), apply_subst(p.msg2, s),
                            subst_process(p.kids[0], s, ctx));
    case Process::Kind::Mismatch:
      return Process::mismatch(apply_subst(p.msg, s), apply_subst(p.msg2, s),
                               subst_process(p.kids[0], s, ctx));
    case Process::Kind::Par:
      return Process::par(subst_process(p.kids[0], s, ctx), subst_process(p.kids[1], s, ctx));
    case Process::Kind::Sum:
      return Process::sum(subst_process(p.kids[0], s, ctx), subst_process(p.kids[1], s, ctx));
    case Process::Kind::Call: {
      std::vector<Message> args;
      args.reserve(p.callArgs.size());
      for (auto& a : p.callArgs) args.push_back(apply_subst(a, s));
      return Process::call(p.agent, std::move(args));
    }
  }
  throw BbcError("unreachable");
}

inline Network subst_network(const Network& n, const Substitution& s, SubstCtx& ctx) {
  if (s.empty()) return n;
  switch (n.kind) {
    case Network::Kind::Located:
      return Network::located(apply_subst_name(n.loc, s, "location"),
                              subst_process(n.proc, s, ctx));
    case Network::Kind::ParN:
      return Network::par(subst_network(n.kids[0], s, ctx), subst_network(n.kids[1], s, ctx));
    case Network::Kind::NewN: {
      Substitution inner = drop1(s, n.newName);
      Name x = n.newName;
      Network body = n.kids[0];
      if (needs_rename(x, inner)) {
        Name nx = ctx.pick_fresh(x);
        Substitution ren;
        ren.map.emplace(x, Message::var(nx));
        body = subst_network(body, ren, ctx);
        x = nx;
      }
      return Network::new_(x, apply_subst_bound(n.bound, s), subst_network(body, inner, ctx),
                           n.newType);
    }
    case Network::Kind::Near:
      return Network::near(apply_subst_name(n.loc, s, "location"),
                           apply_subst_name(n.nearR, s, "location"));
  }
  throw BbcError("unreachable");
}

}  // namespace detail

inline Process apply_subst(const Process& p, const Substitution& s) {
  detail::SubstCtx ctx;
  ctx.avoid = free_names(p);
  NameSet rn = s.range_names();
  ctx.avoid.insert(rn.begin(), rn.end());
  return detail::subst_process(p, s, ctx);
}

inline Network apply_subst(const Network& n, const Substitution& s) {
  detail::SubstCtx ctx;
  ctx.avoid = free_names(n);
  NameSet rn = s.range_names();
  ctx.avoid.insert(rn.begin(), rn.end());
  return detail::subst_network(n, s, ctx);
}

// ---------------------------------------------------------------------------
// Alpha-canonicalisation
// ---------------------------------------------------------------------------

namespace detail {

// Renames every binder to a position-indexed name "_0", "_1", ... assigned in
// a deterministic pre-order walk, skipping indices that collide with a free
// name. Alpha-equivalent terms come out syntactically identical; exchanging
// two binders does not (that is structural congruence, not alpha).
struct AlphaCtx {
  const NameSet* freeNames;
  std::uint64_t counter = 0;

  Name next() {
    for (;;) {
      Name cand("_" + std::to_string(counter++));
      if (!freeNames->count(cand)) return cand;
    }
  }
};

using RenEnv = std::map<Name, Name>;

inline Name alpha_name(const Name& n, const RenEnv& env) {
  auto it = env.find(n);
  return it == env.end() ? n : it->second;
}

inline Message alpha_msg(const Message& m, const RenEnv& env) {
  switch (m.kind) {
    case Message::Kind::Var:
      return Message::var(alpha_name(m.name, env));
    case Message::Kind::SetVar:
      return Message::setvar(alpha_name(m.name, env));
    case Message::Kind::Tuple: {
      std::vector<Message> out;
      for (auto& a : m.args) out.push_back(alpha_msg(a, env));
      return Message::tuple(std::move(out));
    }
    case Message::Kind::MsetLit: {
      std::vector<Message> out;
      for (auto& a : m.args) out.push_back(alpha_msg(a, env));
      return Message::mset(std::move(out));
    }
    case Message::Kind::Ctor:
      return Message::ctor(m.name, alpha_msg(m.args[0], env));
    case Message::Kind::Sel:
      return Message::sel(m.name, alpha_msg(m.args[0], env));
  }
  throw BbcError("unreachable");
}

inline Bound alpha_bound(const Bound& b, const RenEnv& env) {
  Bound out;
  out.def = b.def;
  for (auto& [l, k] : b.at) out.at[alpha_name(l, env)] = k;
  return out;
}

inline Process alpha_proc(const Process& p, RenEnv env, AlphaCtx& ctx) {
  switch (p.kind) {
    case Process::Kind::Nil:
      return p;
    case Process::Kind::Output:
      return Process::output(alpha_name(p.channel, env), alpha_msg(p.msg, env),
                             alpha_proc(p.kids[0], env, ctx));
    case Process::Kind::BInput: {
      Name chan = alpha_name(p.channel, env);
      Pattern pat;
      for (auto& b : p.pattern.binders) {
        Name nb = ctx.next();
        env[b] = nb;
        pat.binders.push_back(nb);
      }
      pat.body = alpha_msg(p.pattern.body, env);
      return Process::b_input(chan, std::move(pat), alpha_proc(p.kids[0], env, ctx));
    }
    case Process::Kind::CInput: {
      Name chan = alpha_name(p.channel, env);
      RenEnv patEnv = env;
      Pattern pat;
      for (auto& b : p.pattern.binders) {
        Name nb = ctx.next();
        patEnv[b] = nb;
        pat.binders.push_back(nb);
      }
      pat.body = alpha_msg(p.pattern.body, patEnv);
      Name sv = ctx.next();
      env[p.setvar] = sv;
      return Process::c_input(chan, std::move(pat), sv, alpha_proc(p.kids[0], env, ctx));
    }
    case Process::Kind::New: {
      Bound b = alpha_bound(p.bound, env);
      Name nx = ctx.next();
      env[p.newName] = nx;
      return Process::new_(nx, std::move(b), alpha_proc(p.kids[0], env, ctx), p.newType);
    }
    case Process::Kind::Match:
      return Process::match(alpha_msg(p.msg, env), alpha_msg(p.msg2, env),
                            alpha_proc(p.kids[0], env, ctx));
    case Process::Kind::Mismatch:
      return Process::mismatch(alpha_msg(p.msg, env), alpha_msg(p.msg2, env),
                               alpha_proc(p.kids[0], env, ctx));
    case Process::Kind::Par:
      return Process::par(alpha_proc(p.kids[0], env, ctx), alpha_proc(p.kids[1], env, ctx));
    case Process::Kind::Sum:
      return Process::sum(alpha_proc(p.kids[0], env, ctx), alpha_proc(p.kids[1], env, ctx));
    case Process::Kind::Call: {
      std::vector<Message> args;
      for (auto& a : p.callArgs) args.push_back(alpha_msg(a, env));
      return Process::call(p.agent, std::move(args));
    }
  }
  throw BbcError("unreachable");
}

inline Network alpha_net(const Network& n, RenEnv env, AlphaCtx& ctx) {
  switch (n.kind) {
    case Network::Kind::Located:
      return Network::located(alpha_name(n.loc, env), alpha_proc(n.proc, env, ctx));
    case Network::Kind::ParN:
      return Network::par(alpha_net(n.kids[0], env, ctx), alpha_net(n.kids[1], env, ctx));
    case Network::Kind::NewN: {
      Bound b = alpha_bound(n.bound, env);
      Name nx = ctx.next();
      env[n.newName] = nx;
      return Network::new_(nx, std::move(b), alpha_net(n.kids[0], env, ctx), n.newType);
    }
    case Network::Kind::Near:
      return Network::near(alpha_name(n.loc, env), alpha_name(n.nearR, env));
  }
  throw BbcError("unreachable");
}

}  // namespace detail

inline Network alpha_canonical(const Network& n) {
  NameSet fns = free_names(n);
  detail::AlphaCtx ctx{&fns, 0};
  return detail::alpha_net(n, {}, ctx);
}

inline Process alpha_canonical(const Process& p) {
  NameSet fns = free_names(p);
  detail::AlphaCtx ctx{&fns, 0};
  return detail::alpha_proc(p, {}, ctx);
}

inline bool alpha_equivalent(const Network& a, const Network& b) {
  return alpha_canonical(a) == alpha_canonical(b);
}

inline bool alpha_equivalent(const Process& a, const Process& b) {
  return alpha_canonical(a) == alpha_canonical(b);
}

}  // namespace bbc
