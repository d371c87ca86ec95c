#pragma once

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "bbc/ast.hpp"

namespace bbc {

struct ParseError : BbcError {
  int line = 0;
  int col = 0;
  std::vector<std::string> expected;

  ParseError(int l, int c, const std::string& msg, std::vector<std::string> exp = {})
      : BbcError("parse error at " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l),
        col(c),
        expected(std::move(exp)) {}
};

namespace detail {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int col = 1;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_cont(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {"net",  "channel", "agent", "selector", "constructor",
                                           "type", "base",    "bound", "inf",      "new",
                                           "in",   "as"};
  return kw;
}

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_trivia();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (ident_start(c)) {
      size_t start = pos_;
      while (pos_ < src_.size() && ident_cont(src_[pos_])) bump();
      tok_.kind = Token::Kind::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
      tok_.kind = Token::Kind::Number;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    tok_.kind = Token::Kind::Punct;
    auto two = [&](const char* s) {
      return pos_ + 1 < src_.size() && src_[pos_] == s[0] && src_[pos_ + 1] == s[1];
    };
    if (pos_ + 2 < src_.size() && src_[pos_] == '<' && src_[pos_ + 1] == '-' &&
        src_[pos_ + 2] == '>') {
      tok_.text = "<->";
      bump();
      bump();
      bump();
      return;
    }
    if (two("::") || two("->") || two("?*") || two("!=")) {
      tok_.text = src_.substr(pos_, 2);
      bump();
      bump();
      return;
    }
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_trivia() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
      if (pos_ + 1 < src_.size() && src_[pos_] == '-' && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Program parse_program() {
    Program prog;
    bool haveNet = false;
    while (!at_end()) {
      const Token& t = lex_.peek();
      if (t.kind != Token::Kind::Ident)
        fail("expected a declaration or 'net'", {"channel", "agent", "selector", "constructor",
                                                 "type", "base", "net"});
      if (t.text == "channel") {
        parse_channel_decl(prog);
      } else if (t.text == "agent") {
        parse_agent_decl(prog);
      } else if (t.text == "selector") {
        parse_selector_decl(prog);
      } else if (t.text == "constructor") {
        parse_constructor_decl(prog);
      } else if (t.text == "type") {
        parse_type_decl(prog);
      } else if (t.text == "base") {
        lex_.next();
        Token n = expect_ident("base type name");
        if (!prog.baseTypes.insert(n.text).second) fail_at(n, "duplicate base type " + n.text);
      } else if (t.text == "net") {
        lex_.next();
        expect_punct("=");
        prog.net = parse_network();
        haveNet = true;
        break;
      } else {
        fail("unknown declaration '" + t.text + "'",
             {"channel", "agent", "selector", "constructor", "type", "base", "net"});
      }
    }
    if (!haveNet) fail("expected 'net = <network>'", {"net"});
    if (!at_end()) fail("trailing input after the top-level network");
    check_program(prog);
    return prog;
  }

 private:
  Lexer lex_;
  std::set<Name> setvars_;  // setvar names currently in scope

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> exp = {}) {
    const Token& t = lex_.peek();
    throw ParseError(t.line, t.col, msg, std::move(exp));
  }
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg);
  }

  bool at_end() { return lex_.peek().kind == Token::Kind::End; }

  bool peek_punct(const std::string& p) {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
  }
  bool peek_ident(const std::string& id) {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == id;
  }

  bool eat_punct(const std::string& p) {
    if (peek_punct(p)) {
      lex_.next();
      return true;
    }
    return false;
  }
  void expect_punct(const std::string& p) {
    if (!eat_punct(p)) fail("expected '" + p + "'", {p});
  }
  bool eat_ident(const std::string& id) {
    if (peek_ident(id)) {
      lex_.next();
      return true;
    }
    return false;
  }
  void expect_ident_kw(const std::string& id) {
    if (!eat_ident(id)) fail("expected '" + id + "'", {id});
  }

  Token expect_ident(const std::string& what) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Ident) fail("expected " + what, {"identifier"});
    if (keywords().count(t.text)) fail("keyword '" + t.text + "' cannot be used as " + what);
    return lex_.next();
  }

  // A name: an identifier or a numeral (the calculus treats 1, 2, ... as names).
  Name expect_name(const std::string& what) {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Number) return Name(lex_.next().text);
    if (t.kind == Token::Kind::Ident) {
      if (keywords().count(t.text)) fail("keyword '" + t.text + "' cannot be used as " + what);
      return Name(lex_.next().text);
    }
    fail("expected " + what, {"name"});
  }

  std::uint64_t expect_number(const std::string& what) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Number) fail("expected " + what, {"number"});
    return std::stoull(lex_.next().text);
  }

  // --- declarations ---------------------------------------------------------

  Bound parse_boundspec() {
    expect_ident_kw("bound");
    Bound b;
    if (eat_ident("inf")) {
      b.def = std::nullopt;
    } else {
      std::uint64_t v = expect_number("bound value");
      if (v < 1) fail("channel bound must be >= 1");
      b.def = v;
    }
    if (eat_punct("{")) {
      do {
        Name l = expect_name("a location name");
        expect_punct(":");
        std::uint64_t v = expect_number("bound value");
        if (v < 1) fail("channel bound entry must be >= 1");
        b.at[l] = v;
        eat_punct(",");
      } while (!eat_punct("}"));
    }
    return b;
  }

  void parse_channel_decl(Program& prog) {
    lex_.next();
    Token n = expect_ident("channel name");
    if (prog.channels.count(Name(n.text))) fail_at(n, "duplicate channel declaration " + n.text);
    prog.channels[Name(n.text)] = parse_boundspec();
  }

  void parse_type_decl(Program& prog) {
    lex_.next();
    Token n = expect_ident("a name to type");
    expect_punct(":");
    Type t = parse_type();
    if (prog.typeDecls.count(Name(n.text))) fail_at(n, "duplicate type declaration for " + n.text);
    prog.typeDecls[Name(n.text)] = t;
  }

  Type parse_type() {
    Type t = parse_type_atom();
    if (eat_punct("->")) {
      Type cod = parse_type();
      return Type::arrow(std::move(t), std::move(cod));
    }
    return t;
  }

  Type parse_type_atom() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "Loc") {
        lex_.next();
        return Type::loc();
      }
      if ((t.text == "B" || t.text == "C")) {
        Token op = lex_.next();
        expect_punct("<");
        Type payload = parse_type();
        expect_punct(">");
        return op.text == "B" ? Type::chan_b(std::move(payload)) : Type::chan_c(std::move(payload));
      }
      Token n = lex_.next();
      return Type::base_t(n.text);
    }
    if (eat_punct("(")) {
      std::vector<Type> comps;
      comps.push_back(parse_type());
      while (eat_punct(",")) comps.push_back(parse_type());
      expect_punct(")");
      if (comps.size() < 2) fail("product type needs at least two components");
      return Type::prod(std::move(comps));
    }
    if (eat_punct("{")) {
      Type elem = parse_type();
      expect_punct("}");
      std::optional<std::uint64_t> arity;
      if (eat_punct("^")) arity = expect_number("multiset arity");
      return Type::mset(std::move(elem), arity);
    }
    fail("expected a type");
  }

  void parse_selector_decl(Program& prog) {
    lex_.next();
    Token n = expect_ident("selector name");
    SelectorDecl decl;
    decl.builtin = n.text;
    if (eat_punct("=")) {
      Token b = expect_ident("builtin selector name");
      decl.builtin = b.text;
      if (eat_punct("(")) {
        if (!peek_punct(")")) {
          decl.params.push_back(parse_msg());
          while (eat_punct(",")) decl.params.push_back(parse_msg());
        }
        expect_punct(")");
      }
    }
    if (prog.selectors.count(Name(n.text))) fail_at(n, "duplicate selector declaration " + n.text);
    prog.selectors[Name(n.text)] = std::move(decl);
  }

  void parse_constructor_decl(Program& prog) {
    lex_.next();
    Token n = expect_ident("constructor name");
    CtorDecl decl;
    decl.builtin = n.text;
    if (eat_punct("=")) {
      Token b = expect_ident("builtin constructor name");
      decl.builtin = b.text;
    }
    if (prog.constructors.count(Name(n.text)))
      fail_at(n, "duplicate constructor declaration " + n.text);
    prog.constructors[Name(n.text)] = std::move(decl);
  }

  void parse_agent_decl(Program& prog) {
    lex_.next();
    Token n = expect_ident("agent name");
    AgentDef def;
    def.name = n.text;
    expect_punct("(");
    if (!peek_punct(")")) {
      do {
        Name p = expect_name("agent parameter");
        Type t = Type::base_t("name");
        if (eat_punct(":")) t = parse_type();
        def.params.push_back(p);
        def.paramTypes.push_back(std::move(t));
      } while (eat_punct(","));
    }
    expect_punct(")");
    expect_punct("=");
    def.body = parse_process();
    if (prog.agents.count(def.name)) fail_at(n, "duplicate agent definition " + def.name);
    prog.agents[def.name] = std::move(def);
  }

  // --- networks -------------------------------------------------------------

  Network parse_network() {
    Network n = parse_netatom();
    if (eat_punct("|")) {
      Network rest = parse_network();
      return Network::par(std::move(n), std::move(rest));
    }
    return n;
  }

  Network parse_netatom() {
    const Token& t = lex_.peek();
    if (eat_punct("(")) {
      Network n = parse_network();
      expect_punct(")");
      return n;
    }
    if (t.kind == Token::Kind::Ident && t.text == "new") {
      Token kw = lex_.next();
      Name x = expect_name("restricted name");
      Bound b = parse_boundspec();
      std::optional<Type> ty;
      if (eat_punct(":")) ty = parse_type();
      expect_ident_kw("in");
      Network body = parse_netatom();
      NameSet labels;
      collect_free_located_labels(body, labels);
      if (labels.count(x))
        fail_at(kw, "location " + x.id + " cannot be restricted over its own located label");
      return Network::new_(x, std::move(b), std::move(body), std::move(ty));
    }
    Token first = lex_.peek();
    Name l = expect_name("a location");
    if (eat_punct("::")) {
      expect_punct("[");
      Process p = parse_process();
      expect_punct("]");
      return Network::located(l, std::move(p));
    }
    if (eat_punct("->")) {
      Name m = expect_name("a location");
      if (l == m) fail_at(first, "connectivity atom must relate distinct locations");
      return Network::near(l, m);
    }
    if (eat_punct("<->")) {
      Name m = expect_name("a location");
      if (l == m) fail_at(first, "connectivity atom must relate distinct locations");
      return Network::par(Network::near(l, m), Network::near(m, l));
    }
    fail("expected '::', '->' or '<->' after location " + l.id, {"::", "->", "<->"});
  }

  static void collect_free_located_labels(const Network& n, NameSet& out) {
    switch (n.kind) {
      case Network::Kind::Located:
        out.insert(n.loc);
        break;
      case Network::Kind::ParN:
        collect_free_located_labels(n.kids[0], out);
        collect_free_located_labels(n.kids[1], out);
        break;
      case Network::Kind::NewN: {
        NameSet inner;
        collect_free_located_labels(n.kids[0], inner);
        inner.erase(n.newName);
        out.insert(inner.begin(), inner.end());
        break;
      }
      case Network::Kind::Near:
        break;
    }
  }

  // --- processes --------------------------------------------------------------

  Process parse_process() {
    Process p = parse_sum();
    if (eat_punct("|")) {
      Process rest = parse_process();
      return Process::par(std::move(p), std::move(rest));
    }
    return p;
  }

  Process parse_sum() {
    Process p = parse_prefix();
    if (eat_punct("+")) {
      Process rest = parse_sum();
      return Process::sum(std::move(p), std::move(rest));
    }
    return p;
  }

  Process parse_prefix() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Number) {
      if (t.text == "0") {
        lex_.next();
        return Process::nil();
      }
      fail("a bare number is not a process (did you mean 0?)");
    }
    if (eat_punct("(")) {
      Process p = parse_process();
      expect_punct(")");
      return p;
    }
    if (eat_punct("[")) {
      Message lhs = parse_msg();
      bool neq;
      if (eat_punct("=")) {
        neq = false;
      } else if (eat_punct("!=")) {
        neq = true;
      } else {
        fail("expected '=' or '!=' in a match guard", {"=", "!="});
      }
      Message rhs = parse_msg();
      expect_punct("]");
      Process cont = parse_prefix();
      return neq ? Process::mismatch(std::move(lhs), std::move(rhs), std::move(cont))
                 : Process::match(std::move(lhs), std::move(rhs), std::move(cont));
    }
    if (t.kind != Token::Kind::Ident) fail("expected a process", {"process"});
    if (t.text == "new") {
      lex_.next();
      Name x = expect_name("restricted name");
      Bound b = parse_boundspec();
      std::optional<Type> ty;
      if (eat_punct(":")) ty = parse_type();
      expect_ident_kw("in");
      Process body = parse_prefix();
      return Process::new_(x, std::move(b), std::move(body), std::move(ty));
    }
    Token head = lex_.peek();
    Name subject = expect_name("a channel or agent name");
    if (eat_punct("!")) {
      expect_punct("<");
      Message m = parse_msg();
      expect_punct(">");
      expect_punct(".");
      Process cont = parse_prefix();
      return Process::output(subject, std::move(m), std::move(cont));
    }
    if (eat_punct("?")) {
      Pattern pat = parse_pattern(head);
      expect_punct(".");
      Process cont = parse_prefix();
      return make_checked<Process>(head, [&] {
        return Process::b_input(subject, std::move(pat), std::move(cont));
      });
    }
    if (eat_punct("?*")) {
      Pattern pat = parse_pattern(head);
      expect_ident_kw("as");
      Name sv = expect_name("a multiset variable");
      expect_punct(".");
      bool fresh = setvars_.insert(sv).second;
      Process cont = parse_prefix();
      if (fresh) setvars_.erase(sv);
      return make_checked<Process>(head, [&] {
        return Process::c_input(subject, std::move(pat), sv, std::move(cont));
      });
    }
    if (eat_punct("(")) {
      std::vector<Message> args;
      if (!peek_punct(")")) {
        args.push_back(parse_msg());
        while (eat_punct(",")) args.push_back(parse_msg());
      }
      expect_punct(")");
      return Process::call(subject, std::move(args));
    }
    fail("expected '!', '?', '?*' or '(' after name " + subject.id, {"!", "?", "?*", "("});
  }

  template <typename T, typename F>
  T make_checked(const Token& at, F&& f) {
    try {
      return f();
    } catch (const BbcError& e) {
      throw ParseError(at.line, at.col, e.what());
    }
  }

  Pattern parse_pattern(const Token& at) {
    expect_punct("<");
    Pattern pat;
    if (!peek_punct(">")) {
      pat.binders.push_back(expect_name("a pattern binder"));
      while (eat_punct(",")) pat.binders.push_back(expect_name("a pattern binder"));
    }
    expect_punct(">");
    expect_punct("(");
    pat.body = parse_msg();
    expect_punct(")");
    check_pattern_body(at, pat.body);
    return pat;
  }

  void check_pattern_body(const Token& at, const Message& m) {
    switch (m.kind) {
      case Message::Kind::Sel:
        fail_at(at, "patterns must not contain selector applications");
      case Message::Kind::SetVar:
        fail_at(at, "patterns must not contain multiset variables");
      case Message::Kind::MsetLit:
        fail_at(at, "patterns must not contain multiset literals");
      default:
        for (auto& a : m.args) check_pattern_body(at, a);
    }
  }

  // --- messages ---------------------------------------------------------------

  Message parse_msg() {
    const Token& t = lex_.peek();
    if (eat_punct("(")) {
      std::vector<Message> comps;
      comps.push_back(parse_msg());
      while (eat_punct(",")) comps.push_back(parse_msg());
      expect_punct(")");
      if (comps.size() < 2) fail("tuples need at least two components");
      return Message::tuple(std::move(comps));
    }
    if (eat_punct("{")) {
      std::vector<Message> elems;
      elems.push_back(parse_msg());
      while (eat_punct(",")) elems.push_back(parse_msg());
      expect_punct("}");
      return Message::mset(std::move(elems));
    }
    if (t.kind != Token::Kind::Ident && t.kind != Token::Kind::Number)
      fail("expected a message", {"message"});
    Name n = expect_name("a message");
    if (eat_punct("(")) {
      Message arg = parse_msg();
      expect_punct(")");
      return Message::ctor(n, std::move(arg));
    }
    if (eat_punct("{")) {
      // g{S} refers to a multiset variable in scope when S is the entire
      // brace content; any other content is a literal multiset of messages
      // (in which a bare in-scope setvar is an element).
      std::vector<Message> elems;
      if (lex_.peek().kind == Token::Kind::Ident && setvars_.count(Name(lex_.peek().text))) {
        Name sv(lex_.next().text);
        if (eat_punct("}")) return Message::sel(n, Message::setvar(sv));
        elems.push_back(Message::setvar(sv));
        expect_punct(",");
        elems.push_back(parse_msg());
      } else {
        elems.push_back(parse_msg());
      }
      while (eat_punct(",")) elems.push_back(parse_msg());
      expect_punct("}");
      return Message::sel(n, Message::mset(std::move(elems)));
    }
    if (setvars_.count(n)) return Message::setvar(n);
    return Message::var(n);
  }

  // --- load-time checks -------------------------------------------------------

  void check_program(Program& prog) {
    for (auto& [name, def] : prog.agents) {
      NameSet fns = free_names(def.body);
      for (auto& p : def.params) fns.erase(p);
      if (!fns.empty())
        throw ParseError(1, 1, "agent " + name + " mentions " + fns.begin()->id +
                                   " which is not a parameter");
      check_msgs_in_process(prog, def.body);
      check_calls_in_process(prog, def.body);
    }
    check_msgs_in_network(prog, prog.net);
    check_calls_in_network(prog, prog.net);
  }

  void require_known_symbols(const Program& prog, const Message& m) {
    switch (m.kind) {
      case Message::Kind::Ctor:
        if (!prog.constructors.count(m.name))
          throw ParseError(1, 1, "unknown constructor " + m.name.id);
        break;
      case Message::Kind::Sel:
        if (!prog.selectors.count(m.name))
          throw ParseError(1, 1, "unknown selector " + m.name.id);
        break;
      default:
        break;
    }
    for (auto& a : m.args) require_known_symbols(prog, a);
  }

  void check_msgs_in_process(const Program& prog, const Process& p) {
    switch (p.kind) {
      case Process::Kind::Output:
        require_known_symbols(prog, p.msg);
        break;
      case Process::Kind::BInput:
      case Process::Kind::CInput:
        require_known_symbols(prog, p.pattern.body);
        break;
      case Process::Kind::Match:
      case Process::Kind::Mismatch:
        require_known_symbols(prog, p.msg);
        require_known_symbols(prog, p.msg2);
        break;
      case Process::Kind::Call:
        for (auto& a : p.callArgs) require_known_symbols(prog, a);
        break;
      default:
        break;
    }
    for (auto& k : p.kids) check_msgs_in_process(prog, k);
  }

  void check_msgs_in_network(const Program& prog, const Network& n) {
    if (n.kind == Network::Kind::Located) check_msgs_in_process(prog, n.proc);
    for (auto& k : n.kids) check_msgs_in_network(prog, k);
  }

  void check_calls_in_process(const Program& prog, const Process& p) {
    if (p.kind == Process::Kind::Call) {
      auto it = prog.agents.find(p.agent.id);
      if (it == prog.agents.end()) throw ParseError(1, 1, "unknown agent " + p.agent.id);
      if (it->second.params.size() != p.callArgs.size())
        throw ParseError(1, 1, "agent " + p.agent.id + " expects " +
                                   std::to_string(it->second.params.size()) + " arguments, got " +
                                   std::to_string(p.callArgs.size()));
    }
    for (auto& k : p.kids) check_calls_in_process(prog, k);
  }

  void check_calls_in_network(const Program& prog, const Network& n) {
    if (n.kind == Network::Kind::Located) check_calls_in_process(prog, n.proc);
    for (auto& k : n.kids) check_calls_in_network(prog, k);
  }
};

}  // namespace detail

inline Program parse_program(const std::string& src) {
  detail::Parser p(src);
  return p.parse_program();
}

// Parses a network fragment in an empty declaration context (test helper).
inline Network parse_network_str(const std::string& src) {
  Program p = parse_program("net = " + src);
  return p.net;
}

}  // namespace bbc
