#pragma once

#include <sstream>
#include <string>

#include "bbc/ast.hpp"

namespace bbc {

namespace detail {

inline void print_type(std::ostream& os, const Type& t) {
  switch (t.kind) {
    case Type::Kind::Loc:
      os << "Loc";
      break;
    case Type::Kind::Base:
      os << t.base;
      break;
    case Type::Kind::ChanB:
      os << "B<";
      print_type(os, t.args[0]);
      os << ">";
      break;
    case Type::Kind::ChanC:
      os << "C<";
      print_type(os, t.args[0]);
      os << ">";
      break;
    case Type::Kind::Mset:
      os << "{";
      print_type(os, t.args[0]);
      os << "}";
      if (t.arity) os << "^" << *t.arity;
      break;
    case Type::Kind::Prod:
      os << "(";
      for (size_t i = 0; i < t.args.size(); ++i) {
        if (i) os << ",";
        print_type(os, t.args[i]);
      }
      os << ")";
      break;
    case Type::Kind::Arrow:
      print_type(os, t.args[0]);
      os << " -> ";
      print_type(os, t.args[1]);
      break;
  }
}

inline void print_msg(std::ostream& os, const Message& m) {
  switch (m.kind) {
    case Message::Kind::Var:
    case Message::Kind::SetVar:
      os << m.name.id;
      break;
    case Message::Kind::Tuple:
      os << "(";
      for (size_t i = 0; i < m.args.size(); ++i) {
        if (i) os << ",";
        print_msg(os, m.args[i]);
      }
      os << ")";
      break;
    case Message::Kind::MsetLit:
      os << "{";
      for (size_t i = 0; i < m.args.size(); ++i) {
        if (i) os << ",";
        print_msg(os, m.args[i]);
      }
      os << "}";
      break;
    case Message::Kind::Ctor:
      os << m.name.id << "(";
      print_msg(os, m.args[0]);
      os << ")";
      break;
    case Message::Kind::Sel: {
      os << m.name.id << "{";
      const Message& arg = m.args[0];
      if (arg.kind == Message::Kind::SetVar) {
        os << arg.name.id;
      } else {
        for (size_t i = 0; i < arg.args.size(); ++i) {
          if (i) os << ",";
          print_msg(os, arg.args[i]);
        }
      }
      os << "}";
      break;
    }
  }
}

inline void print_boundspec(std::ostream& os, const Bound& b) {
  os << "bound ";
  if (b.def)
    os << *b.def;
  else
    os << "inf";
  if (!b.at.empty()) {
    os << " {";
    for (auto& [l, k] : b.at) os << " " << l.id << ": " << k;
    os << " }";
  }
}

// Precedence levels: 0 = parallel, 1 = sum, 2 = prefix.
inline void print_proc(std::ostream& os, const Process& p, int level) {
  auto parens = [&](int need) { return need > 0; };
  switch (p.kind) {
    case Process::Kind::Nil:
      os << "0";
      break;
    case Process::Kind::Par: {
      // "|" parses right-associatively; a left-nested Par needs parentheses
      // so the tree survives a print/parse round trip.
      bool wrap = parens(level);
      if (wrap) os << "(";
      print_proc(os, p.kids[0], 1);
      os << " | ";
      print_proc(os, p.kids[1], 0);
      if (wrap) os << ")";
      break;
    }
    case Process::Kind::Sum: {
      bool wrap = level > 1;
      if (wrap) os << "(";
      print_proc(os, p.kids[0], 2);
      os << " + ";
      print_proc(os, p.kids[1], 1);
      if (wrap) os << ")";
      break;
    }
    case Process::Kind::Output:
      os << p.channel.id << "!<";
      print_msg(os, p.msg);
      os << ">.";
      print_proc(os, p.kids[0], 2);
      break;
    case Process::Kind::BInput: {
      os << p.channel.id << "?<";
      for (size_t i = 0; i < p.pattern.binders.size(); ++i) {
        if (i) os << ",";
        os << p.pattern.binders[i].id;
      }
      os << ">(";
      print_msg(os, p.pattern.body);
      os << ").";
      print_proc(os, p.kids[0], 2);
      break;
    }
    case Process::Kind::CInput: {
      os << p.channel.id << "?*<";
      for (size_t i = 0; i < p.pattern.binders.size(); ++i) {
        if (i) os << ",";
        os << p.pattern.binders[i].id;
      }
      os << ">(";
      print_msg(os, p.pattern.body);
      os << ") as " << p.setvar.id << ".";
      print_proc(os, p.kids[0], 2);
      break;
    }
    case Process::Kind::New:
      os << "new " << p.newName.id << " ";
      print_boundspec(os, p.bound);
      if (p.newType) {
        os << " : ";
        print_type(os, *p.newType);
      }
      os << " in ";
      print_proc(os, p.kids[0], 2);
      break;
    case Process::Kind::Match:
    case Process::Kind::Mismatch:
      os << "[";
      print_msg(os, p.msg);
      os << (p.kind == Process::Kind::Match ? " = " : " != ");
      print_msg(os, p.msg2);
      os << "]";
      print_proc(os, p.kids[0], 2);
      break;
    case Process::Kind::Call:
      os << p.agent.id << "(";
      for (size_t i = 0; i < p.callArgs.size(); ++i) {
        if (i) os << ",";
        print_msg(os, p.callArgs[i]);
      }
      os << ")";
      break;
  }
}

// Levels: 0 = parallel, 1 = atom.
inline void print_net(std::ostream& os, const Network& n, int level) {
  switch (n.kind) {
    case Network::Kind::ParN: {
      bool wrap = level > 0;
      if (wrap) os << "(";
      print_net(os, n.kids[0], 1);
      os << " | ";
      print_net(os, n.kids[1], 0);
      if (wrap) os << ")";
      break;
    }
    case Network::Kind::Located:
      os << n.loc.id << "::[ ";
      print_proc(os, n.proc, 0);
      os << " ]";
      break;
    case Network::Kind::NewN:
      os << "new " << n.newName.id << " ";
      print_boundspec(os, n.bound);
      if (n.newType) {
        os << " : ";
        print_type(os, *n.newType);
      }
      os << " in ";
      print_net(os, n.kids[0], 1);
      break;
    case Network::Kind::Near:
      os << n.loc.id << " -> " << n.nearR.id;
      break;
  }
}

}  // namespace detail

inline std::string pretty_print(const Message& m) {
  std::ostringstream os;
  detail::print_msg(os, m);
  return os.str();
}

inline std::string pretty_print(const Type& t) {
  std::ostringstream os;
  detail::print_type(os, t);
  return os.str();
}

inline std::string pretty_print(const Process& p) {
  std::ostringstream os;
  detail::print_proc(os, p, 0);
  return os.str();
}

inline std::string pretty_print(const Network& n) {
  std::ostringstream os;
  detail::print_net(os, n, 0);
  return os.str();
}

inline std::string pretty_print(const Bound& b) {
  std::ostringstream os;
  detail::print_boundspec(os, b);
  return os.str();
}

inline std::string pretty_print(const Program& p) {
  static const Type ambient = Type::base_t("name");
  std::ostringstream os;
  for (auto& b : p.baseTypes) os << "base " << b << "\n";
  for (auto& [a, bound] : p.channels) {
    os << "channel " << a.id << " ";
    detail::print_boundspec(os, bound);
    os << "\n";
  }
  for (auto& [n, t] : p.typeDecls) {
    os << "type " << n.id << " : ";
    detail::print_type(os, t);
    os << "\n";
  }
  for (auto& [n, sd] : p.selectors) {
    os << "selector " << n.id;
    if (sd.builtin != n.id || !sd.params.empty()) {
      os << " = " << sd.builtin;
      if (!sd.params.empty()) {
        os << "(";
        for (size_t i = 0; i < sd.params.size(); ++i) {
          if (i) os << ",";
          detail::print_msg(os, sd.params[i]);
        }
        os << ")";
      }
    }
    os << "\n";
  }
  for (auto& [n, cd] : p.constructors) {
    os << "constructor " << n.id;
    if (!cd.builtin.empty() && cd.builtin != n.id) os << " = " << cd.builtin;
    os << "\n";
  }
  for (auto& [name, def] : p.agents) {
    os << "agent " << name << "(";
    for (size_t i = 0; i < def.params.size(); ++i) {
      if (i) os << ",";
      os << def.params[i].id;
      if (i < def.paramTypes.size() && !(def.paramTypes[i] == ambient)) {
        os << " : ";
        detail::print_type(os, def.paramTypes[i]);
      }
    }
    os << ") = ";
    detail::print_proc(os, def.body, 0);
    os << "\n";
  }
  os << "net = ";
  detail::print_net(os, p.net, 0);
  os << "\n";
  return os.str();
}

}  // namespace bbc
