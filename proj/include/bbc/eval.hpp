#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "bbc/ast.hpp"
#include "bbc/subst.hpp"

namespace bbc {

// Shipped term constructors and multiset selectors, bound to surface names by
// the program's declarations. Selector functions are total on nonempty
// multisets of normal messages; constructor rewrites are deterministic and
// strictly shrink the term.
struct BuiltinRegistry {
  using CtorRewrite = std::function<std::optional<Message>(const Message& arg)>;
  using SelectorFn = std::function<Message(const std::vector<Message>& elems)>;

  std::map<Name, CtorRewrite> ctors;  // null function = inert
  std::map<Name, SelectorFn> sels;

  bool has_ctor(const Name& n) const { return ctors.count(n) != 0; }
  bool has_sel(const Name& n) const { return sels.count(n) != 0; }
};

namespace builtins {

// first((M1,M2,...)) -> M1; inert on non-tuples.
inline std::optional<Message> first_rewrite(const Message& arg) {
  if (arg.kind == Message::Kind::Tuple) return arg.args[0];
  return std::nullopt;
}

// chosen(chosen(M)) -> chosen(M): an announcement of an announcement carries
// no extra information, so nested wrappers collapse.
inline BuiltinRegistry::CtorRewrite chosen_rewrite(const Name& surface) {
  return [surface](const Message& arg) -> std::optional<Message> {
    if (arg.kind == Message::Kind::Ctor && arg.name == surface) return arg;
    return std::nullopt;
  };
}

// min: least element of the multiset in the term order (numeric names compare
// numerically).
inline Message min_selector(const std::vector<Message>& elems) {
  if (elems.empty()) throw EvalError("selector applied to an empty multiset");
  const Message* best = &elems[0];
  for (auto& e : elems)
    if (e < *best) best = &e;
  return *best;
}

// find(target, fallback): target if some element is a tuple whose first
// component is target, fallback otherwise.
inline BuiltinRegistry::SelectorFn find_selector(Message target, Message fallback) {
  return [target, fallback](const std::vector<Message>& elems) -> Message {
    for (auto& e : elems)
      if (e.kind == Message::Kind::Tuple && e.args[0] == target) return target;
    return fallback;
  };
}

// elect: if the multiset contains announcements chosen(m), propagate the one
// with the least payload; otherwise pick the least plain element.
inline BuiltinRegistry::SelectorFn elect_selector(const Name& chosenCtor) {
  return [chosenCtor](const std::vector<Message>& elems) -> Message {
    if (elems.empty()) throw EvalError("selector applied to an empty multiset");
    const Message* bestChosen = nullptr;
    for (auto& e : elems) {
      if (e.kind == Message::Kind::Ctor && e.name == chosenCtor) {
        if (!bestChosen || e.args[0] < bestChosen->args[0]) bestChosen = &e;
      }
    }
    if (bestChosen) return *bestChosen;
    return min_selector(elems);
  };
}

}  // namespace builtins

// Binds each declared selector/constructor to its shipped implementation.
// A constructor declared under its own unshipped name is inert; a selector
// must resolve to a shipped builtin.
inline BuiltinRegistry build_registry(const Program& prog) {
  BuiltinRegistry reg;
  for (auto& [name, decl] : prog.constructors) {
    if (decl.builtin == "first") {
      reg.ctors[name] = builtins::first_rewrite;
    } else if (decl.builtin == "chosen") {
      reg.ctors[name] = builtins::chosen_rewrite(name);
    } else if (decl.builtin == name.id || decl.builtin.empty()) {
      reg.ctors[name] = nullptr;  // inert
    } else {
      throw BbcError("constructor " + name.id + " binds to unknown builtin " + decl.builtin);
    }
  }
  for (auto& [name, decl] : prog.selectors) {
    if (decl.builtin == "min") {
      if (!decl.params.empty()) throw BbcError("selector min takes no parameters");
      reg.sels[name] = builtins::min_selector;
    } else if (decl.builtin == "elect") {
      if (!decl.params.empty()) throw BbcError("selector elect takes no parameters");
      reg.sels[name] = builtins::elect_selector(Name("chosen"));
    } else if (decl.builtin == "find") {
      if (decl.params.size() != 2)
        throw BbcError("selector " + name.id + " = find(target, fallback) needs two parameters");
      reg.sels[name] = builtins::find_selector(decl.params[0], decl.params[1]);
    } else {
      throw BbcError("selector " + name.id + " binds to unknown builtin " + decl.builtin);
    }
  }
  return reg;
}

// ---------------------------------------------------------------------------
// Evaluation to normal messages
// ---------------------------------------------------------------------------

// Normalises a message: evaluation descends into multiset literals,
// constructor arguments and selector arguments, constructor rewrites run to
// quiescence, and selectors apply once their argument is a literal multiset.
inline Message evaluate(const Message& m, const BuiltinRegistry& reg) {
  switch (m.kind) {
    case Message::Kind::Var:
    case Message::Kind::SetVar:
      return m;
    case Message::Kind::Tuple: {
      std::vector<Message> out;
      out.reserve(m.args.size());
      for (auto& a : m.args) out.push_back(evaluate(a, reg));
      return Message::tuple(std::move(out));
    }
    case Message::Kind::MsetLit: {
      std::vector<Message> out;
      out.reserve(m.args.size());
      for (auto& a : m.args) out.push_back(evaluate(a, reg));
      return Message::mset(std::move(out));
    }
    case Message::Kind::Ctor: {
      auto it = reg.ctors.find(m.name);
      if (it == reg.ctors.end()) throw EvalError("unknown constructor " + m.name.id);
      Message arg = evaluate(m.args[0], reg);
      if (it->second) {
        if (auto rw = it->second(arg)) return evaluate(*rw, reg);
      }
      return Message::ctor(m.name, std::move(arg));
    }
    case Message::Kind::Sel: {
      auto it = reg.sels.find(m.name);
      if (it == reg.sels.end()) throw EvalError("unknown selector " + m.name.id);
      const Message& arg = m.args[0];
      if (arg.kind == Message::Kind::SetVar)
        throw EvalError("selector " + m.name.id + " applied to uninstantiated multiset variable " +
                        arg.name.id);
      std::vector<Message> elems;
      elems.reserve(arg.args.size());
      for (auto& e : arg.args) elems.push_back(evaluate(e, reg));
      if (elems.empty()) throw EvalError("selector " + m.name.id + " applied to an empty multiset");
      return evaluate(it->second(elems), reg);
    }
  }
  throw BbcError("unreachable");
}

// Best-effort normalisation used by the structural canonicaliser: terms whose
// evaluation is blocked (free multiset variables under a selector) are kept.
inline Message evaluate_partial(const Message& m, const BuiltinRegistry& reg) {
  try {
    return evaluate(m, reg);
  } catch (const EvalError&) {
    return m;
  }
}

inline bool is_normal(const Message& m, const BuiltinRegistry& reg) {
  return evaluate_partial(m, reg) == m;
}

// ---------------------------------------------------------------------------
// Pattern matching
// ---------------------------------------------------------------------------

namespace detail {

inline bool match_into(const Message& candidate, const Message& body, const NameSet& binders,
                       Substitution& acc) {
  if (body.kind == Message::Kind::Var && binders.count(body.name)) {
    auto it = acc.map.find(body.name);
    if (it != acc.map.end()) return it->second == candidate;
    acc.map.emplace(body.name, candidate);
    return true;
  }
  switch (body.kind) {
    case Message::Kind::Var:
    case Message::Kind::SetVar:
      return candidate == body;
    case Message::Kind::Tuple:
      if (candidate.kind != Message::Kind::Tuple || candidate.args.size() != body.args.size())
        return false;
      for (size_t i = 0; i < body.args.size(); ++i)
        if (!match_into(candidate.args[i], body.args[i], binders, acc)) return false;
      return true;
    case Message::Kind::Ctor:
      if (candidate.kind != Message::Kind::Ctor || candidate.name != body.name) return false;
      return match_into(candidate.args[0], body.args[0], binders, acc);
    case Message::Kind::MsetLit:
    case Message::Kind::Sel:
      // Patterns are first-order; the loader rejects these shapes.
      return false;
  }
  return false;
}

}  // namespace detail

// Matches a normal candidate against a pattern: returns theta with domain
// exactly the binders such that candidate = body theta, if one exists.
inline std::optional<Substitution> match_broadcast(const Message& candidate, const Pattern& p) {
  NameSet binders(p.binders.begin(), p.binders.end());
  Substitution theta;
  if (!detail::match_into(candidate, p.body, binders, theta)) return std::nullopt;
  // Binders all occur in the body (pattern invariant), so theta is total on them.
  return theta;
}

// A nonempty multiset matches when every element matches individually, each
// with its own substitution; the value bound to the setvar is the whole
// multiset, multiplicity included.
inline std::optional<Message> match_collection(const std::vector<Message>& candidates,
                                               const Pattern& p) {
  if (candidates.empty()) throw BbcError("collection match requires a nonempty candidate multiset");
  for (auto& c : candidates)
    if (!match_broadcast(c, p)) return std::nullopt;
  return Message::mset(candidates);
}

// ---------------------------------------------------------------------------
// Idempotent-selection law
// ---------------------------------------------------------------------------

struct IdempotencyReport {
  bool ok = true;
  // On failure, the offending family of multisets.
  std::vector<std::vector<Message>> counterexample;
  std::uint64_t familiesChecked = 0;
};

// Checks f({f(S1),...,f(Sk)}) = f(S1 u ... u Sk) over every family of at most
// maxFamily multisets (sizes 1..maxSize) drawn from `universe`, up to
// reordering of the family. Exhaustive; `universe` should be small.
inline IdempotencyReport check_idempotent(const Name& selector, const BuiltinRegistry& reg,
                                          const std::vector<Message>& universe,
                                          std::size_t maxSize, std::size_t maxFamily) {
  auto it = reg.sels.find(selector);
  if (it == reg.sels.end()) throw EvalError("unknown selector " + selector.id);
  const auto& f = it->second;

  // All multisets over the universe with 1..maxSize elements, as sorted index
  // vectors (combinations with repetition).
  std::vector<std::vector<Message>> msets;
  std::vector<Message> cur;
  std::function<void(std::size_t)> gen = [&](std::size_t lo) {
    if (!cur.empty()) msets.push_back(cur);
    if (cur.size() == maxSize) return;
    for (std::size_t i = lo; i < universe.size(); ++i) {
      cur.push_back(universe[i]);
      gen(i);
      cur.pop_back();
    }
  };
  gen(0);

  std::vector<Message> results(msets.size());
  for (std::size_t i = 0; i < msets.size(); ++i) results[i] = f(msets[i]);

  IdempotencyReport rep;
  std::vector<std::size_t> family;
  std::vector<Message> unionElems;
  std::vector<Message> resultElems;

  std::function<bool(std::size_t)> walk = [&](std::size_t lo) -> bool {
    if (!family.empty()) {
      ++rep.familiesChecked;
      // Selectors are functions of the multiset, so element order is
      // irrelevant and the working buffers can be passed as-is.
      Message lhs = f(resultElems);
      Message rhs = f(unionElems);
      if (!(lhs == rhs)) {
        rep.ok = false;
        for (auto idx : family) rep.counterexample.push_back(msets[idx]);
        return false;
      }
    }
    if (family.size() == maxFamily) return true;
    for (std::size_t i = lo; i < msets.size(); ++i) {
      family.push_back(i);
      unionElems.insert(unionElems.end(), msets[i].begin(), msets[i].end());
      resultElems.push_back(results[i]);
      bool cont = walk(i);
      resultElems.pop_back();
      unionElems.resize(unionElems.size() - msets[i].size());
      family.pop_back();
      if (!cont) return false;
    }
    return true;
  };
  walk(0);
  return rep;
}

}  // namespace bbc
