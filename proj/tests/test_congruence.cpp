#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"

using namespace bbc;

namespace {

BuiltinRegistry empty_registry() { return build_registry(parse_program("net = l::[ 0 ]")); }

BuiltinRegistry firstmin_registry() {
  return build_registry(parse_program("selector min\nconstructor first\nnet = l::[ 0 ]"));
}

bool nf_invariants_hold(const NormalForm& nf) {
  for (auto& [loc, p] : nf.located) {
    (void)loc;
    if (p.kind == Process::Kind::Par || p.kind == Process::Kind::New) return false;
  }
  for (auto& [l, m] : nf.conn.pairs)
    if (l == m) return false;
  NameSet seen;
  for (auto& r : nf.restrictions)
    if (!seen.insert(r.name).second) return false;
  return true;
}

}  // namespace

TEST_CASE("scope extension lifts a process restriction to the top") {
  Network n = parse_network_str(
      "(new x bound inf in l::[ x!<a>.0 ]) | m::[ b?<y>(y).0 ]");
  NormalForm nf = normalize(n);
  CHECK(nf.restrictions.size() == 1);
  CHECK(nf.conn.pairs.empty());
  CHECK(nf.located.size() == 2);
  CHECK(nf_invariants_hold(nf));
}

TEST_CASE("located parallel splits into separate entries") {
  Network n = parse_network_str("l::[ a!<m>.0 | b!<m>.0 ]");
  NormalForm nf = normalize(n);
  CHECK(nf.located.size() == 2);
  for (auto& [loc, p] : nf.located) {
    CHECK(loc == Name("l"));
    CHECK(p.kind == Process::Kind::Output);
  }
}

TEST_CASE("scope extension renames on capture") {
  // The inner restricted x must not capture the free x at m.
  Network n = parse_network_str("(new x bound inf in l::[ x!<a>.0 ]) | m::[ x?<y>(y).0 ]");
  NormalForm nf = normalize(n);
  REQUIRE(nf.restrictions.size() == 1);
  Name lifted = nf.restrictions[0].name;
  CHECK(lifted != Name("x"));
  // The free occurrence is untouched.
  bool sawFreeX = false;
  for (auto& [loc, p] : nf.located)
    if (loc == Name("m") && p.channel == Name("x")) sawFreeX = true;
  CHECK(sawFreeX);
  CHECK(free_names(denote(nf)) == free_names(n));
}

TEST_CASE("connectivity is directional") {
  Connectivity c;
  c.insert("l1", "l3");
  CHECK(c.connected("l1", "l3"));
  CHECK_FALSE(c.connected("l3", "l1"));
  Connectivity empty;
  CHECK_FALSE(empty.connected("l1", "l3"));
  CHECK_THROWS_AS(c.insert("l", "l"), BbcError);
}

TEST_CASE("P-Nil: parallel nil is congruent to the process alone") {
  auto reg = empty_registry();
  CHECK(cong_equiv(parse_network_str("l::[ a!<m>.0 | 0 ]"), parse_network_str("l::[ a!<m>.0 ]"),
                   reg));
}

TEST_CASE("guard evaluation and resolution: [first((a,b)) = a]P is P") {
  auto reg = firstmin_registry();
  Network guarded =
      parse_program("constructor first\nnet = l::[ [first((a,b)) = a]c!<m>.0 ]").net;
  CHECK(cong_equiv(guarded, parse_network_str("l::[ c!<m>.0 ]"), reg));
  // Mismatch on distinct normal terms proceeds.
  CHECK(cong_equiv(parse_network_str("l::[ [a != b]c!<m>.0 ]"),
                   parse_network_str("l::[ c!<m>.0 ]"), reg));
  // Match on distinct normal terms is stuck, not congruent to the body.
  CHECK_FALSE(cong_equiv(parse_network_str("l::[ [a = b]c!<m>.0 ]"),
                         parse_network_str("l::[ c!<m>.0 ]"), reg));
  // Mismatch on equal terms is stuck.
  CHECK_FALSE(cong_equiv(parse_network_str("l::[ [a != a]c!<m>.0 ]"),
                         parse_network_str("l::[ c!<m>.0 ]"), reg));
}

TEST_CASE("agent unfolding is deliberately not part of the decision") {
  Program p = parse_program(R"(
agent A(x) = x!<x>.0
net = l::[ A(a) ]
)");
  auto reg = build_registry(p);
  CHECK_FALSE(cong_equiv(p.net, parse_network_str("l::[ a!<a>.0 ]"), reg));
}

TEST_CASE("P-Out: output payloads evaluate under congruence") {
  auto reg = firstmin_registry();
  Network n = parse_program("constructor first\nnet = l::[ c!<first((a,b))>.0 ]").net;
  CHECK(cong_equiv(n, parse_network_str("l::[ c!<a>.0 ]"), reg));
}

TEST_CASE("AC laws for parallel and choice") {
  auto reg = empty_registry();
  CHECK(cong_equiv(parse_network_str("l::[ a!<m>.0 | b!<m>.0 ]"),
                   parse_network_str("l::[ b!<m>.0 | a!<m>.0 ]"), reg));
  CHECK(cong_equiv(parse_network_str("l::[ (a!<m>.0 + b!<m>.0) + c!<m>.0 ]"),
                   parse_network_str("l::[ c!<m>.0 + (b!<m>.0 + a!<m>.0) ]"), reg));
  CHECK(cong_equiv(parse_network_str("l::[ 0 ] | m::[ 0 ]"),
                   parse_network_str("m::[ 0 ] | l::[ 0 ]"), reg));
}

TEST_CASE("restriction exchange is absorbed by the canonical telescope") {
  auto reg = empty_registry();
  Network n1 = parse_network_str("new x bound 1 in new y bound 2 in l::[ a!<(x,y)>.0 ]");
  Network n2 = parse_network_str("new y bound 2 in new x bound 1 in l::[ a!<(x,y)>.0 ]");
  CHECK(cong_equiv(n1, n2, reg));
}

TEST_CASE("guard orientation: symmetric guards compare equal") {
  auto reg = empty_registry();
  CHECK(cong_equiv(parse_network_str("l::[ [a = b]c!<m>.0 ]"),
                   parse_network_str("l::[ [b = a]c!<m>.0 ]"), reg));
  CHECK(cong_equiv(parse_network_str("l::[ [a != a]c!<m>.0 ]"),
                   parse_network_str("l::[ [a != a]c!<m>.0 ]"), reg));
}

TEST_CASE("no rewriting under prefixes: continuations compare syntactically up to alpha") {
  auto reg = empty_registry();
  // P | 0 under a prefix is not congruent to P (no closure rule).
  CHECK_FALSE(cong_equiv(parse_network_str("l::[ a!<m>.(b!<m>.0 | 0) ]"),
                         parse_network_str("l::[ a!<m>.b!<m>.0 ]"), reg));
  // Alpha still applies everywhere.
  CHECK(cong_equiv(parse_network_str("l::[ a!<m>.b?<x>(x).0 ]"),
                   parse_network_str("l::[ a!<m>.b?<y>(y).0 ]"), reg));
}

TEST_CASE("normalize: theorem instance on generated networks (property)") {
  auto reg = firstmin_registry();
  bbctest::Gen gen(2024);
  for (int i = 0; i < 400; ++i) {
    Program p = gen.program(5);
    auto regP = build_registry(p);
    NormalForm nf = normalize(p.net);
    CAPTURE(pretty_print(p.net));
    CHECK(nf_invariants_hold(nf));
    CHECK(free_names(denote(nf)) == free_names(p.net));
    CHECK(cong_equiv(p.net, denote(nf), regP));
  }
}

TEST_CASE("cong_equiv is an equivalence and a ParN congruence (property)") {
  bbctest::Gen gen(99);
  for (int i = 0; i < 150; ++i) {
    Program p = gen.program(3);
    auto reg = build_registry(p);
    Network n1 = p.net;
    Network n2 = gen.scramble(n1);
    Network n3 = gen.scramble(n2);
    CAPTURE(pretty_print(n1));
    CAPTURE(pretty_print(n2));
    CHECK(cong_equiv(n1, n1, reg));  // reflexive
    REQUIRE(cong_equiv(n1, n2, reg));
    CHECK(cong_equiv(n2, n1, reg));  // symmetric
    REQUIRE(cong_equiv(n2, n3, reg));
    CHECK(cong_equiv(n1, n3, reg));  // transitive
    // Congruence for parallel contexts.
    Network ctx = gen.net(2);
    CHECK(cong_equiv(Network::par(n1, ctx), Network::par(n2, ctx), reg));
  }
}

TEST_CASE("canonicalize is a fixpoint") {
  bbctest::Gen gen(512);
  for (int i = 0; i < 100; ++i) {
    Program p = gen.program(4);
    auto reg = build_registry(p);
    NormalForm c1 = canonical_form(p.net, reg);
    NormalForm c2 = canonicalize(c1, reg);
    CHECK(nf_key(c1) == nf_key(c2));
  }
}
