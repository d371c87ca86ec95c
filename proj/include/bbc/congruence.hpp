#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bbc/ast.hpp"
#include "bbc/eval.hpp"
#include "bbc/printer.hpp"
#include "bbc/subst.hpp"

namespace bbc {

// The connectivity component C: a set of directed adjacency atoms l |> m.
struct Connectivity {
  std::set<std::pair<Name, Name>> pairs;

  void insert(const Name& l, const Name& m) {
    if (l == m) throw BbcError("connectivity atom must relate distinct locations");
    pairs.emplace(l, m);
  }

  bool connected(const Name& l, const Name& m) const { return pairs.count({l, m}) != 0; }

  friend bool operator==(const Connectivity& a, const Connectivity& b) {
    return a.pairs == b.pairs;
  }
};

struct NfRestriction {
  Name name;
  Bound bound;
  std::optional<Type> type;
};

// A network in normal form: a telescope of restrictions around the
// connectivity component and a multiset of located processes. Located entries
// carry no top-level parallel composition or restriction; both are split out
// on construction.
struct NormalForm {
  std::vector<NfRestriction> restrictions;  // outermost first
  Connectivity conn;
  std::vector<std::pair<Name, Process>> located;

  NameSet restricted_names() const {
    NameSet s;
    for (auto& r : restrictions) s.insert(r.name);
    return s;
  }

  const Bound* restriction_bound(const Name& n) const {
    for (auto& r : restrictions)
      if (r.name == n) return &r.bound;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// normalize: scope extension + location splitting
// ---------------------------------------------------------------------------

namespace detail {

struct NormalizeCtx {
  NameSet used;  // free names of the whole term + names committed to the telescope
  NormalForm nf;

  Name lift(const Name& x, Bound b, std::optional<Type> t) {
    Name fresh = fresh_name(x, used);
    nf.restrictions.push_back(NfRestriction{fresh, std::move(b), std::move(t)});
    return fresh;
  }
};

inline Name ren(const Name& n, const std::map<Name, Name>& env) {
  auto it = env.find(n);
  return it == env.end() ? n : it->second;
}

inline Substitution env_subst(const std::map<Name, Name>& env) {
  Substitution s;
  for (auto& [k, v] : env)
    if (!(k == v)) s.map.emplace(k, Message::var(v));
  return s;
}

inline Bound ren_bound(const Bound& b, const std::map<Name, Name>& env) {
  Bound out;
  out.def = b.def;
  for (auto& [l, k] : b.at) out.at[ren(l, env)] = k;
  return out;
}

// Splits a located process: N-Loc separates parallel components, N-Eq lifts
// top restrictions to network level (alpha-converting first, so neither
// capture nor the l = n side condition can bite).
inline void split_located(NormalizeCtx& ctx, const Name& loc, const Process& p,
                          std::map<Name, Name> env) {
  switch (p.kind) {
    case Process::Kind::Par:
      split_located(ctx, loc, p.kids[0], env);
      split_located(ctx, loc, p.kids[1], env);
      return;
    case Process::Kind::New: {
      Name fresh = ctx.lift(p.newName, ren_bound(p.bound, env), p.newType);
      env[p.newName] = fresh;
      split_located(ctx, loc, p.kids[0], env);
      return;
    }
    default: {
      Substitution s = env_subst(env);
      Process out = s.empty() ? p : apply_subst(p, s);
      ctx.nf.located.emplace_back(loc, std::move(out));
      return;
    }
  }
}

inline void normalize_into(NormalizeCtx& ctx, const Network& n, std::map<Name, Name> env) {
  switch (n.kind) {
    case Network::Kind::ParN:
      normalize_into(ctx, n.kids[0], env);
      normalize_into(ctx, n.kids[1], env);
      return;
    case Network::Kind::NewN: {
      Name fresh = ctx.lift(n.newName, ren_bound(n.bound, env), n.newType);
      env[n.newName] = fresh;
      normalize_into(ctx, n.kids[0], env);
      return;
    }
    case Network::Kind::Near:
      ctx.nf.conn.insert(ren(n.loc, env), ren(n.nearR, env));
      return;
    case Network::Kind::Located:
      split_located(ctx, ren(n.loc, env), n.proc, env);
      return;
  }
}

}  // namespace detail

inline NormalForm normalize(const Network& n) {
  detail::NormalizeCtx ctx;
  ctx.used = free_names(n);
  detail::normalize_into(ctx, n, {});
  return std::move(ctx.nf);
}

inline Network denote(const NormalForm& nf) {
  std::vector<Network> atoms;
  for (auto& [l, m] : nf.conn.pairs) atoms.push_back(Network::near(l, m));
  for (auto& [l, p] : nf.located) atoms.push_back(Network::located(l, p));
  bbc_assert(!atoms.empty(), "cannot denote an empty normal form");
  Network net = atoms.back();
  for (auto it = atoms.rbegin() + 1; it != atoms.rend(); ++it)
    net = Network::par(*it, std::move(net));
  for (auto it = nf.restrictions.rbegin(); it != nf.restrictions.rend(); ++it)
    net = Network::new_(it->name, it->bound, std::move(net), it->type);
  return net;
}

// ---------------------------------------------------------------------------
// Alpha-invariant serialisation (sort keys)
// ---------------------------------------------------------------------------

namespace detail {

// Binders become de Bruijn-style indices; names in `mask` serialise as an
// anonymous marker. Used to order AC operands and located entries without
// depending on bound-name spellings.
struct BlindSer {
  const NameSet* mask = nullptr;
  std::map<Name, int> env;
  int counter = 0;
  std::ostringstream os;

  void name(const Name& n) {
    auto it = env.find(n);
    if (it != env.end())
      os << "\x02" << it->second << ";";
    else if (mask && mask->count(n))
      os << "\x01;";
    else
      os << n.id << ";";
  }

  void bind(const Name& n) {
    env[n] = counter++;
    os << "\x03" << env[n] << ";";
  }

  void msg(const Message& m) {
    os << static_cast<int>(m.kind) << "(";
    if (m.kind == Message::Kind::Var || m.kind == Message::Kind::SetVar)
      name(m.name);
    else if (m.kind == Message::Kind::Ctor || m.kind == Message::Kind::Sel)
      os << m.name.id << ";";
    for (auto& a : m.args) msg(a);
    os << ")";
  }

  void bound(const Bound& b) {
    os << "b[";
    if (b.def) os << *b.def;
    os << ";";
    for (auto& [l, k] : b.at) {
      name(l);
      os << ":" << k << ";";
    }
    os << "]";
  }

  void proc(const Process& p) {
    os << "P" << static_cast<int>(p.kind) << "(";
    switch (p.kind) {
      case Process::Kind::Nil:
        break;
      case Process::Kind::Output:
        name(p.channel);
        msg(p.msg);
        proc(p.kids[0]);
        break;
      case Process::Kind::BInput: {
        name(p.channel);
        auto saved = env;
        int savedCounter = counter;
        for (auto& b : p.pattern.binders) bind(b);
        msg(p.pattern.body);
        proc(p.kids[0]);
        env = std::move(saved);
        counter = savedCounter;
        break;
      }
      case Process::Kind::CInput: {
        name(p.channel);
        auto saved = env;
        int savedCounter = counter;
        for (auto& b : p.pattern.binders) bind(b);
        msg(p.pattern.body);
        env = saved;
        counter = savedCounter;
        bind(p.setvar);
        proc(p.kids[0]);
        env = std::move(saved);
        counter = savedCounter;
        break;
      }
      case Process::Kind::New: {
        bound(p.bound);
        if (p.newType) os << "t" << pretty_print(*p.newType) << ";";
        auto saved = env;
        int savedCounter = counter;
        bind(p.newName);
        proc(p.kids[0]);
        env = std::move(saved);
        counter = savedCounter;
        break;
      }
      case Process::Kind::Match:
      case Process::Kind::Mismatch:
        msg(p.msg);
        msg(p.msg2);
        proc(p.kids[0]);
        break;
      case Process::Kind::Par:
      case Process::Kind::Sum:
        proc(p.kids[0]);
        proc(p.kids[1]);
        break;
      case Process::Kind::Call:
        os << p.agent.id << ";";
        for (auto& a : p.callArgs) msg(a);
        break;
    }
    os << ")";
  }
};

inline std::string ser_process(const Process& p, const NameSet* mask) {
  BlindSer s;
  s.mask = mask;
  s.proc(p);
  return std::move(s.os).str();
}

// --- process-level canonicalisation ----------------------------------------
//
// Applies the congruence axioms reachable through parallel composition and
// restriction: output and guard messages evaluate, decided guards resolve,
// nil units vanish, and parallel/sum operand lists sort in an alpha-invariant
// order. Prefix continuations and sum operands are not rewritten (structural
// congruence has no closure rule under prefixes, guards or choice).

inline void flatten_ops(const Process& p, Process::Kind k, std::vector<Process>& out) {
  if (p.kind == k) {
    flatten_ops(p.kids[0], k, out);
    flatten_ops(p.kids[1], k, out);
  } else {
    out.push_back(p);
  }
}

inline Process rebuild(std::vector<Process> ops, Process::Kind k) {
  Process acc = std::move(ops.back());
  for (auto it = ops.rbegin() + 1; it != ops.rend(); ++it) {
    Process node = k == Process::Kind::Par ? Process::par(std::move(*it), std::move(acc))
                                           : Process::sum(std::move(*it), std::move(acc));
    acc = std::move(node);
  }
  return acc;
}

inline void sort_ops(std::vector<Process>& ops, const NameSet* mask) {
  std::vector<std::pair<std::string, size_t>> keyed;
  keyed.reserve(ops.size());
  for (size_t i = 0; i < ops.size(); ++i)
    keyed.emplace_back(ser_process(ops[i], mask) + "\x04" + ser_process(ops[i], nullptr), i);
  std::sort(keyed.begin(), keyed.end());
  std::vector<Process> out;
  out.reserve(ops.size());
  for (auto& [k, i] : keyed) out.push_back(std::move(ops[i]));
  ops = std::move(out);
}

inline Process canon_process(const Process& p, const BuiltinRegistry& reg, const NameSet* mask) {
  switch (p.kind) {
    case Process::Kind::Par: {
      std::vector<Process> ops;
      flatten_ops(p, Process::Kind::Par, ops);
      std::vector<Process> canon;
      for (auto& o : ops) {
        Process c = canon_process(o, reg, mask);
        if (c.kind == Process::Kind::Par)
          flatten_ops(c, Process::Kind::Par, canon);
        else if (c.kind != Process::Kind::Nil)
          canon.push_back(std::move(c));
      }
      if (canon.empty()) return Process::nil();
      sort_ops(canon, mask);
      return rebuild(std::move(canon), Process::Kind::Par);
    }
    case Process::Kind::Sum: {
      std::vector<Process> ops;
      flatten_ops(p, Process::Kind::Sum, ops);
      sort_ops(ops, mask);
      return rebuild(std::move(ops), Process::Kind::Sum);
    }
    case Process::Kind::New:
      return Process::new_(p.newName, p.bound, canon_process(p.kids[0], reg, mask), p.newType);
    case Process::Kind::Output:
      return Process::output(p.channel, evaluate_partial(p.msg, reg), p.kids[0]);
    case Process::Kind::Match:
    case Process::Kind::Mismatch: {
      Message lhs = evaluate_partial(p.msg, reg);
      Message rhs = evaluate_partial(p.msg2, reg);
      if (lhs == rhs && p.kind == Process::Kind::Match) return canon_process(p.kids[0], reg, mask);
      if (!(lhs == rhs) && is_normal(lhs, reg) && is_normal(rhs, reg) &&
          p.kind == Process::Kind::Mismatch)
        return canon_process(p.kids[0], reg, mask);
      if (compare(rhs, lhs) < 0) std::swap(lhs, rhs);  // orient the stuck guard
      Process out = p;
      out.msg = std::move(lhs);
      out.msg2 = std::move(rhs);
      return out;
    }
    default:
      return p;
  }
}

inline void collect_restricted_occurrences(const Process& p, const NameSet& restricted,
                                           std::vector<Name>& order, NameSet& seen) {
  struct Walk {
    const NameSet& restricted;
    std::vector<Name>& order;
    NameSet& seen;
    void touch(const Name& n) {
      if (restricted.count(n) && !seen.count(n)) {
        seen.insert(n);
        order.push_back(n);
      }
    }
    void msg(const Message& m) {
      if (m.kind == Message::Kind::Var || m.kind == Message::Kind::SetVar) touch(m.name);
      for (auto& a : m.args) msg(a);
    }
    void proc(const Process& q) {
      touch(q.channel);
      if (q.kind == Process::Kind::Output) msg(q.msg);
      if (q.kind == Process::Kind::BInput || q.kind == Process::Kind::CInput)
        msg(q.pattern.body);
      if (q.kind == Process::Kind::Match || q.kind == Process::Kind::Mismatch) {
        msg(q.msg);
        msg(q.msg2);
      }
      if (q.kind == Process::Kind::New)
        for (auto& [l, k] : q.bound.at) {
          (void)k;
          touch(l);
        }
      for (auto& a : q.callArgs) msg(a);
      for (auto& k : q.kids) proc(k);
    }
  } w{restricted, order, seen};
  w.proc(p);
}

// Orders a restriction telescope by canonical position while keeping every
// bound-table reference pointing outward (a bound may mention a name bound
// further out, so exchange is not unconditional here).
inline std::vector<NfRestriction> order_telescope(std::vector<NfRestriction> rs,
                                                  const std::map<Name, size_t>& pos) {
  std::vector<NfRestriction> out;
  std::vector<bool> placed(rs.size(), false);
  NameSet available;
  while (out.size() < rs.size()) {
    size_t best = rs.size();
    for (size_t i = 0; i < rs.size(); ++i) {
      if (placed[i]) continue;
      bool ready = true;
      for (auto& [l, k] : rs[i].bound.at) {
        (void)k;
        for (size_t j = 0; j < rs.size(); ++j)
          if (!placed[j] && j != i && rs[j].name == l) ready = false;
      }
      if (!ready) continue;
      if (best == rs.size() || pos.at(rs[i].name) < pos.at(rs[best].name)) best = i;
    }
    bbc_assert(best < rs.size(), "restriction bound tables form a cycle");
    placed[best] = true;
    out.push_back(rs[best]);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Canonical normal form
// ---------------------------------------------------------------------------

// Fully canonicalises a normal form so that structurally congruent networks
// (agent unfolding aside) serialise identically: processes rewrite at
// congruence positions, redundant nil entries collapse, located entries sort
// in an alpha-invariant order, restricted names renumber by first use, and
// every binder is alpha-canonical.
inline NormalForm canonicalize(const NormalForm& input, const BuiltinRegistry& reg) {
  NormalForm nf = input;
  NameSet restricted = nf.restricted_names();

  for (auto& [l, p] : nf.located) p = detail::canon_process(p, reg, &restricted);

  // Guard resolution can expose parallel compositions or restrictions at the
  // top of an entry; re-split them.
  nf = normalize(denote(nf));
  restricted = nf.restricted_names();

  // Drop nil entries at locations that host another process (N-Loc + P-Nil),
  // keeping one nil when it is all the location has.
  {
    std::map<Name, int> nonNil;
    for (auto& [l, p] : nf.located)
      if (p.kind != Process::Kind::Nil) nonNil[l]++;
    std::vector<std::pair<Name, Process>> kept;
    std::set<Name> nilKept;
    for (auto& e : nf.located) {
      if (e.second.kind == Process::Kind::Nil) {
        if (nonNil.count(e.first) || nilKept.count(e.first)) continue;
        nilKept.insert(e.first);
      }
      kept.push_back(e);
    }
    nf.located = std::move(kept);
  }

  // Renumber restrictions by first occurrence in the sorted body; iterate so
  // the tie-breaking serialisation stabilises.
  for (int round = 0; round < 3; ++round) {
    restricted = nf.restricted_names();
    std::vector<std::pair<std::string, size_t>> keyed;
    for (size_t i = 0; i < nf.located.size(); ++i) {
      std::string blind =
          nf.located[i].first.id + "@" + detail::ser_process(nf.located[i].second, &restricted);
      std::string exact =
          nf.located[i].first.id + "@" + detail::ser_process(nf.located[i].second, nullptr);
      keyed.emplace_back(blind + "\x04" + exact, i);
    }
    std::sort(keyed.begin(), keyed.end());

    std::vector<Name> order;
    NameSet seen;
    for (auto& [k, i] : keyed)
      detail::collect_restricted_occurrences(nf.located[i].second, restricted, order, seen);
    for (auto& [l, m] : nf.conn.pairs) {
      for (const Name* n : {&l, &m}) {
        if (restricted.count(*n) && !seen.count(*n)) {
          seen.insert(*n);
          order.push_back(*n);
        }
      }
    }
    {
      // Restricted names referenced only from other bound tables, or not at
      // all, in a deterministic order.
      std::vector<std::pair<std::string, Name>> rest;
      for (auto& r : nf.restrictions)
        if (!seen.count(r.name))
          rest.emplace_back(
              pretty_print(r.bound) + (r.type ? ":" + pretty_print(*r.type) : std::string()),
              r.name);
      std::sort(rest.begin(), rest.end(), [](auto& a, auto& b) {
        return a.first < b.first || (a.first == b.first && a.second < b.second);
      });
      for (auto& [k, n] : rest) {
        (void)k;
        seen.insert(n);
        order.push_back(n);
      }
    }

    std::map<Name, Name> renaming;
    std::map<Name, size_t> pos;
    for (size_t i = 0; i < order.size(); ++i) {
      renaming[order[i]] = Name("\x05r" + std::to_string(i));
      pos[order[i]] = i;
    }

    std::vector<NfRestriction> rs = detail::order_telescope(nf.restrictions, pos);
    for (auto& r : rs) {
      r.name = detail::ren(r.name, renaming);
      r.bound = detail::ren_bound(r.bound, renaming);
    }
    nf.restrictions = std::move(rs);

    Connectivity conn;
    for (auto& [l, m] : nf.conn.pairs)
      conn.insert(detail::ren(l, renaming), detail::ren(m, renaming));
    nf.conn = std::move(conn);

    Substitution s = detail::env_subst(renaming);
    std::vector<std::pair<Name, Process>> located;
    located.reserve(nf.located.size());
    for (auto& [k, i] : keyed) {
      (void)k;
      const auto& e = nf.located[i];
      located.emplace_back(e.first, s.empty() ? e.second : apply_subst(e.second, s));
    }
    nf.located = std::move(located);
  }

  // Final pass: alpha-canonicalise the denoted network, which also replaces
  // the restriction placeholders with parseable position-indexed names.
  return normalize(alpha_canonical(denote(nf)));
}

inline std::string nf_key(const NormalForm& nf) { return pretty_print(denote(nf)); }

inline NormalForm canonical_form(const Network& n, const BuiltinRegistry& reg) {
  return canonicalize(normalize(n), reg);
}

// Sound, incomplete decision procedure for structural congruence: equality of
// canonical forms. Agent unfolding (P-AG) is deliberately not applied, so
// congruent networks that differ by unfolding are not identified.
inline bool cong_equiv(const Network& a, const Network& b, const BuiltinRegistry& reg) {
  return nf_key(canonical_form(a, reg)) == nf_key(canonical_form(b, reg));
}

}  // namespace bbc
