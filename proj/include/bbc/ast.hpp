#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbc {

struct BbcError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalError : BbcError {
  using BbcError::BbcError;
};

struct IllSortedSubstitution : BbcError {
  using BbcError::BbcError;
};

struct TypeError : BbcError {
  using BbcError::BbcError;
};

// Always-on assertion; the reduction engine checks its bound invariants with
// this regardless of build type.
inline void bbc_assert(bool cond, const char* what) {
  if (!cond) throw BbcError(std::string("internal invariant violated: ") + what);
}

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

// A name, drawn from one countably infinite namespace. Channels, locations
// and message variables are not syntactically separated; kind misuse is a
// type-checker concern.
struct Name {
  std::string id;

  Name() = default;
  explicit Name(std::string s) : id(std::move(s)) {}
  Name(const char* s) : id(s) {}

  bool numeric() const {
    if (id.empty()) return false;
    for (char c : id)
      if (c < '0' || c > '9') return false;
    return true;
  }

  friend bool operator==(const Name& a, const Name& b) { return a.id == b.id; }
  friend bool operator!=(const Name& a, const Name& b) { return a.id != b.id; }

  // Total order: numeric identifiers compare numerically and sort before
  // alphabetic ones, which compare as strings.
  friend bool operator<(const Name& a, const Name& b) {
    bool na = a.numeric(), nb = b.numeric();
    if (na != nb) return na;
    if (na && nb) {
      if (a.id.size() != b.id.size()) return a.id.size() < b.id.size();
      return a.id < b.id;
    }
    return a.id < b.id;
  }
  friend bool operator<=(const Name& a, const Name& b) { return !(b < a); }
  friend bool operator>(const Name& a, const Name& b) { return b < a; }
};

using NameSet = std::set<Name>;

// Picks a name based on `base` that is absent from `used` and records it.
inline Name fresh_name(const Name& base, NameSet& used) {
  if (!used.count(base)) {
    used.insert(base);
    return base;
  }
  std::string stem = base.id;
  // Strip a previous freshness suffix so renamings do not snowball.
  auto pos = stem.find('\'');
  if (pos != std::string::npos) stem.resize(pos);
  if (stem.empty()) stem = "x";
  std::string cand = stem + "'";
  while (used.count(Name(cand))) cand += "'";
  used.insert(Name(cand));
  return Name(cand);
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

// The bound of a channel: how many counterparts a communication on it may
// involve, per anchor location. Houses both b(a,l) for declared channels and
// the beta function attached to a restriction. A missing default means
// "unbounded".
struct Bound {
  std::optional<std::uint64_t> def;  // nullopt = infinite
  std::map<Name, std::uint64_t> at;  // per-location exceptions, all >= 1

  static Bound infinite() { return Bound{}; }
  static Bound uniform(std::uint64_t k) { return Bound{k, {}}; }

  std::optional<std::uint64_t> lookup(const Name& loc) const {
    auto it = at.find(loc);
    if (it != at.end()) return it->second;
    return def;
  }

  void validate() const {
    if (def && *def < 1) throw BbcError("channel bound must be >= 1");
    for (auto& [l, k] : at)
      if (k < 1) throw BbcError("channel bound entry for " + l.id + " must be >= 1");
  }

  friend bool operator==(const Bound& a, const Bound& b) {
    return a.def == b.def && a.at == b.at;
  }
};

// ---------------------------------------------------------------------------
// Types (surface syntax; checking lives in typesys.hpp)
// ---------------------------------------------------------------------------

struct Type {
  enum class Kind { ChanB, ChanC, Mset, Prod, Arrow, Loc, Base };

  Kind kind = Kind::Base;
  std::vector<Type> args;               // ChanB/ChanC/Mset: payload; Prod: components; Arrow: dom, cod
  std::optional<std::uint64_t> arity;   // Mset only; nullopt = any arity
  std::string base;                     // Base only

  static Type loc() { return Type{Kind::Loc, {}, {}, {}}; }
  static Type base_t(std::string n) { return Type{Kind::Base, {}, {}, std::move(n)}; }
  static Type chan_b(Type payload) { return Type{Kind::ChanB, {std::move(payload)}, {}, {}}; }
  static Type chan_c(Type payload) { return Type{Kind::ChanC, {std::move(payload)}, {}, {}}; }
  static Type mset(Type elem, std::optional<std::uint64_t> k = {}) {
    return Type{Kind::Mset, {std::move(elem)}, k, {}};
  }
  static Type prod(std::vector<Type> comps) { return Type{Kind::Prod, std::move(comps), {}, {}}; }
  static Type arrow(Type dom, Type cod) {
    return Type{Kind::Arrow, {std::move(dom), std::move(cod)}, {}, {}};
  }

  friend bool operator==(const Type& a, const Type& b) {
    return a.kind == b.kind && a.arity == b.arity && a.base == b.base && a.args == b.args;
  }
  friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }
};

// The ambient base type assigned to undeclared names.
inline Type ambient_type() { return Type::base_t("name"); }

// ---------------------------------------------------------------------------
// Messages
// ---------------------------------------------------------------------------

// Message terms. Multiset expressions are folded in: selector arguments are
// the messages of kind MsetLit or SetVar. MsetLit keeps its elements sorted,
// so structural equality is multiset equality.
struct Message {
  enum class Kind { Var, SetVar, Tuple, MsetLit, Ctor, Sel };

  Kind kind = Kind::Var;
  Name name;                  // Var/SetVar: the name; Ctor/Sel: the operator
  std::vector<Message> args;  // Tuple: >= 2 components; MsetLit: sorted elements; Ctor/Sel: 1 arg

  static Message var(Name n) { return Message{Kind::Var, std::move(n), {}}; }
  static Message setvar(Name n) { return Message{Kind::SetVar, std::move(n), {}}; }
  static Message tuple(std::vector<Message> comps) {
    if (comps.size() < 2) throw BbcError("tuple arity must be >= 2");
    return Message{Kind::Tuple, Name(), std::move(comps)};
  }
  static Message mset(std::vector<Message> elems);  // sorts; defined after compare
  static Message ctor(Name f, Message arg) {
    return Message{Kind::Ctor, std::move(f), {std::move(arg)}};
  }
  static Message sel(Name g, Message arg) {
    if (arg.kind != Kind::MsetLit && arg.kind != Kind::SetVar)
      throw BbcError("selector argument must be a multiset expression");
    return Message{Kind::Sel, std::move(g), {std::move(arg)}};
  }

  bool is_multiset_expr() const { return kind == Kind::MsetLit || kind == Kind::SetVar; }
};

inline int compare(const Message& a, const Message& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.name != b.name) return a.name < b.name ? -1 : 1;
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (int c = compare(a.args[i], b.args[i])) return c;
  return 0;
}

inline bool operator==(const Message& a, const Message& b) { return compare(a, b) == 0; }
inline bool operator!=(const Message& a, const Message& b) { return compare(a, b) != 0; }
inline bool operator<(const Message& a, const Message& b) { return compare(a, b) < 0; }

inline Message Message::mset(std::vector<Message> elems) {
  std::sort(elems.begin(), elems.end());
  return Message{Kind::MsetLit, Name(), std::move(elems)};
}

// An input pattern <x...>(M): binders are pairwise distinct and each occurs
// free in the body.
struct Pattern {
  std::vector<Name> binders;
  Message body;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Processes
// ---------------------------------------------------------------------------

struct Process {
  enum class Kind { BInput, CInput, Output, New, Match, Mismatch, Par, Sum, Nil, Call };

  Kind kind = Kind::Nil;
  Name channel;                 // BInput/CInput/Output
  Pattern pattern;              // BInput/CInput
  Name setvar;                  // CInput: the multiset variable bound in the continuation
  Message msg;                  // Output payload; Match/Mismatch lhs
  Message msg2;                 // Match/Mismatch rhs
  Name newName;                 // New
  Bound bound;                  // New
  std::optional<Type> newType;  // New, optional annotation
  Name agent;                   // Call
  std::vector<Message> callArgs;
  std::vector<Process> kids;    // prefix/New/guard continuation [0]; Par/Sum [0],[1]

  static Process nil() { return Process{}; }
  static Process output(Name a, Message m, Process cont) {
    Process p;
    p.kind = Kind::Output;
    p.channel = std::move(a);
    p.msg = std::move(m);
    p.kids.push_back(std::move(cont));
    return p;
  }
  static Process b_input(Name a, Pattern pat, Process cont) {
    pat.validate();
    Process p;
    p.kind = Kind::BInput;
    p.channel = std::move(a);
    p.pattern = std::move(pat);
    p.kids.push_back(std::move(cont));
    return p;
  }
  static Process c_input(Name a, Pattern pat, Name s, Process cont) {
    pat.validate();
    Process p;
    p.kind = Kind::CInput;
    p.channel = std::move(a);
    p.pattern = std::move(pat);
    p.setvar = std::move(s);
    p.kids.push_back(std::move(cont));
    return p;
  }
  static Process new_(Name x, Bound b, Process body, std::optional<Type> ty = {}) {
    b.validate();
    Process p;
    p.kind = Kind::New;
    p.newName = std::move(x);
    p.bound = std::move(b);
    p.newType = std::move(ty);
    p.kids.push_back(std::move(body));
    return p;
  }
  static Process match(Message a, Message b, Process cont) {
    Process p;
    p.kind = Kind::Match;
    p.msg = std::move(a);
    p.msg2 = std::move(b);
    p.kids.push_back(std::move(cont));
    return p;
  }
  static Process mismatch(Message a, Message b, Process cont) {
    Process p = match(std::move(a), std::move(b), std::move(cont));
    p.kind = Kind::Mismatch;
    return p;
  }
  static Process par(Process a, Process b) {
    Process p;
    p.kind = Kind::Par;
    p.kids.push_back(std::move(a));
    p.kids.push_back(std::move(b));
    return p;
  }
  static Process sum(Process a, Process b) {
    Process p = par(std::move(a), std::move(b));
    p.kind = Kind::Sum;
    return p;
  }
  static Process call(Name a, std::vector<Message> args) {
    Process p;
    p.kind = Kind::Call;
    p.agent = std::move(a);
    p.callArgs = std::move(args);
    return p;
  }
};

int compare(const Process& a, const Process& b);

inline bool operator==(const Process& a, const Process& b) { return compare(a, b) == 0; }
inline bool operator!=(const Process& a, const Process& b) { return compare(a, b) != 0; }

// ---------------------------------------------------------------------------
// Networks
// ---------------------------------------------------------------------------

struct Network {
  enum class Kind { Located, ParN, NewN, Near };

  Kind kind = Kind::Located;
  Name loc;                     // Located label; Near left endpoint
  Name nearR;                   // Near right endpoint
  Process proc;                 // Located
  Name newName;                 // NewN
  Bound bound;                  // NewN
  std::optional<Type> newType;  // NewN annotation
  std::vector<Network> kids;    // ParN [0],[1]; NewN body [0]

  static Network located(Name l, Process p) {
    Network n;
    n.kind = Kind::Located;
    n.loc = std::move(l);
    n.proc = std::move(p);
    return n;
  }
  static Network par(Network a, Network b) {
    Network n;
    n.kind = Kind::ParN;
    n.kids.push_back(std::move(a));
    n.kids.push_back(std::move(b));
    return n;
  }
  static Network new_(Name x, Bound b, Network body, std::optional<Type> ty = {}) {
    b.validate();
    Network n;
    n.kind = Kind::NewN;
    n.newName = std::move(x);
    n.bound = std::move(b);
    n.newType = std::move(ty);
    n.kids.push_back(std::move(body));
    return n;
  }
  static Network near(Name l, Name m) {
    if (l == m) throw BbcError("connectivity atom must relate distinct locations");
    Network n;
    n.kind = Kind::Near;
    n.loc = std::move(l);
    n.nearR = std::move(m);
    return n;
  }
};

int compare(const Network& a, const Network& b);

inline bool operator==(const Network& a, const Network& b) { return compare(a, b) == 0; }
inline bool operator!=(const Network& a, const Network& b) { return compare(a, b) != 0; }

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

struct AgentDef {
  std::string name;
  std::vector<Name> params;
  std::vector<Type> paramTypes;  // parallel to params; defaults to the ambient base type
  Process body;                  // fn(body) must be a subset of params
};

// Selector/constructor declarations bind surface names to shipped builtins.
struct SelectorDecl {
  std::string builtin;          // "min" | "find" | "elect" | ...
  std::vector<Message> params;  // e.g. find(target, fallback)

  friend bool operator==(const SelectorDecl& a, const SelectorDecl& b) {
    return a.builtin == b.builtin && a.params == b.params;
  }
};

struct CtorDecl {
  std::string builtin;  // "" = inert constructor

  friend bool operator==(const CtorDecl& a, const CtorDecl& b) { return a.builtin == b.builtin; }
};

struct Program {
  std::map<Name, Bound> channels;  // declared free-channel bounds
  std::map<Name, Type> typeDecls;
  std::set<std::string> baseTypes;
  std::map<Name, SelectorDecl> selectors;
  std::map<Name, CtorDecl> constructors;
  std::map<std::string, AgentDef> agents;
  Network net = Network::located(Name("l"), Process::nil());

  Bound channel_bound(const Name& a) const {
    auto it = channels.find(a);
    if (it != channels.end()) return it->second;
    return Bound::infinite();
  }
};

// ---------------------------------------------------------------------------
// Free names
// ---------------------------------------------------------------------------

namespace detail {

inline void fn_into(const Message& m, NameSet& out) {
  switch (m.kind) {
    case Message::Kind::Var:
    case Message::Kind::SetVar:
      out.insert(m.name);
      break;
    case Message::Kind::Tuple:
    case Message::Kind::MsetLit:
    case Message::Kind::Ctor:
    case Message::Kind::Sel:
      for (auto& a : m.args) fn_into(a, out);
      break;
  }
}

inline void erase_all(NameSet& s, const std::vector<Name>& names) {
  for (auto& n : names) s.erase(n);
}

// Bound tables reference location names; those references are free names of
// the restriction that carries them.
inline void fn_into(const Bound& b, NameSet& out) {
  for (auto& [l, k] : b.at) {
    (void)k;
    out.insert(l);
  }
}

inline void fn_into(const Process& p, NameSet& out) {
  switch (p.kind) {
    case Process::Kind::Nil:
      break;
    case Process::Kind::Output: {
      out.insert(p.channel);
      fn_into(p.msg, out);
      fn_into(p.kids[0], out);
      break;
    }
    case Process::Kind::BInput: {
      out.insert(p.channel);
      NameSet inner;
      fn_into(p.pattern.body, inner);
      fn_into(p.kids[0], inner);
      erase_all(inner, p.pattern.binders);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case Process::Kind::CInput: {
      // Pattern binders scope over the pattern body only; the setvar scopes
      // over the continuation only.
      out.insert(p.channel);
      NameSet pat;
      fn_into(p.pattern.body, pat);
      erase_all(pat, p.pattern.binders);
      out.insert(pat.begin(), pat.end());
      NameSet cont;
      fn_into(p.kids[0], cont);
      cont.erase(p.setvar);
      out.insert(cont.begin(), cont.end());
      break;
    }
    case Process::Kind::New: {
      NameSet inner;
      fn_into(p.kids[0], inner);
      inner.erase(p.newName);
      out.insert(inner.begin(), inner.end());
      fn_into(p.bound, out);
      break;
    }
    case Process::Kind::Match:
    case Process::Kind::Mismatch:
      fn_into(p.msg, out);
      fn_into(p.msg2, out);
      fn_into(p.kids[0], out);
      break;
    case Process::Kind::Par:
    case Process::Kind::Sum:
      fn_into(p.kids[0], out);
      fn_into(p.kids[1], out);
      break;
    case Process::Kind::Call:
      for (auto& a : p.callArgs) fn_into(a, out);
      break;
  }
}

inline void fn_into(const Network& n, NameSet& out) {
  switch (n.kind) {
    case Network::Kind::Located:
      out.insert(n.loc);
      fn_into(n.proc, out);
      break;
    case Network::Kind::ParN:
      fn_into(n.kids[0], out);
      fn_into(n.kids[1], out);
      break;
    case Network::Kind::NewN: {
      NameSet inner;
      fn_into(n.kids[0], inner);
      inner.erase(n.newName);
      out.insert(inner.begin(), inner.end());
      fn_into(n.bound, out);
      break;
    }
    case Network::Kind::Near:
      out.insert(n.loc);
      out.insert(n.nearR);
      break;
  }
}

}  // namespace detail

inline NameSet free_names(const Message& m) {
  NameSet s;
  detail::fn_into(m, s);
  return s;
}
inline NameSet free_names(const Process& p) {
  NameSet s;
  detail::fn_into(p, s);
  return s;
}
inline NameSet free_names(const Network& n) {
  NameSet s;
  detail::fn_into(n, s);
  return s;
}

inline void Pattern::validate() const {
  NameSet seen;
  NameSet bodyNames = free_names(body);
  for (auto& b : binders) {
    if (!seen.insert(b).second) throw BbcError("duplicate pattern binder " + b.id);
    if (!bodyNames.count(b)) throw BbcError("pattern binder " + b.id + " does not occur in the pattern body");
  }
}

// ---------------------------------------------------------------------------
// Structural comparison (total order used by AC-normalisation)
// ---------------------------------------------------------------------------

namespace detail {

inline int cmp_names(const Name& a, const Name& b) {
  if (a == b) return 0;
  return a < b ? -1 : 1;
}

inline int cmp_bounds(const Bound& a, const Bound& b) {
  if (a.def != b.def) {
    if (!a.def) return 1;  // infinite sorts last
    if (!b.def) return -1;
    return *a.def < *b.def ? -1 : 1;
  }
  if (a.at.size() != b.at.size()) return a.at.size() < b.at.size() ? -1 : 1;
  auto ia = a.at.begin();
  auto ib = b.at.begin();
  for (; ia != a.at.end(); ++ia, ++ib) {
    if (int c = cmp_names(ia->first, ib->first)) return c;
    if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
  }
  return 0;
}

int cmp_types(const Type& a, const Type& b);

inline int cmp_opt_types(const std::optional<Type>& a, const std::optional<Type>& b) {
  if (a.has_value() != b.has_value()) return a.has_value() ? 1 : -1;
  if (!a) return 0;
  return cmp_types(*a, *b);
}

inline int cmp_types(const Type& a, const Type& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.arity != b.arity) {
    if (!a.arity) return -1;
    if (!b.arity) return 1;
    return *a.arity < *b.arity ? -1 : 1;
  }
  if (a.base != b.base) return a.base < b.base ? -1 : 1;
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (int c = cmp_types(a.args[i], b.args[i])) return c;
  return 0;
}

}  // namespace detail

inline int compare(const Process& a, const Process& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (int c = detail::cmp_names(a.channel, b.channel)) return c;
  if (int c = detail::cmp_names(a.setvar, b.setvar)) return c;
  if (int c = detail::cmp_names(a.newName, b.newName)) return c;
  if (int c = detail::cmp_names(a.agent, b.agent)) return c;
  if (a.pattern.binders.size() != b.pattern.binders.size())
    return a.pattern.binders.size() < b.pattern.binders.size() ? -1 : 1;
  for (size_t i = 0; i < a.pattern.binders.size(); ++i)
    if (int c = detail::cmp_names(a.pattern.binders[i], b.pattern.binders[i])) return c;
  if (int c = compare(a.pattern.body, b.pattern.body)) return c;
  if (int c = compare(a.msg, b.msg)) return c;
  if (int c = compare(a.msg2, b.msg2)) return c;
  if (int c = detail::cmp_bounds(a.bound, b.bound)) return c;
  if (int c = detail::cmp_opt_types(a.newType, b.newType)) return c;
  if (a.callArgs.size() != b.callArgs.size()) return a.callArgs.size() < b.callArgs.size() ? -1 : 1;
  for (size_t i = 0; i < a.callArgs.size(); ++i)
    if (int c = compare(a.callArgs[i], b.callArgs[i])) return c;
  if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (int c = compare(a.kids[i], b.kids[i])) return c;
  return 0;
}

inline int compare(const Network& a, const Network& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (int c = detail::cmp_names(a.loc, b.loc)) return c;
  if (int c = detail::cmp_names(a.nearR, b.nearR)) return c;
  if (int c = detail::cmp_names(a.newName, b.newName)) return c;
  if (int c = compare(a.proc, b.proc)) return c;
  if (int c = detail::cmp_bounds(a.bound, b.bound)) return c;
  if (int c = detail::cmp_opt_types(a.newType, b.newType)) return c;
  if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (int c = compare(a.kids[i], b.kids[i])) return c;
  return 0;
}

}  // namespace bbc
