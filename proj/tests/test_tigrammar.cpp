#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace modal;
using testing::GrammarText;
using testing::language_strings;
using testing::Loaded;
using testing::same_language;

namespace {

const char* kDefs = R"(
:- typedef list(T) -> ([] ; [T|list(T)]).
:- typedef abc -> (a ; b ; c).
:- typedef habc -> (a ; b ; c) deriving solver.
:- typedef hlist(T) -> ([] ; [T|hlist(T)]) deriving solver.
:- typedef sign -> (neg ; zero ; pos).
:- typedef erk(T) -> node(erk(list(T)), T).
:- instdef list(I) -> ([] ; [I|list(I)]).
:- instdef nelist(I) -> [I|list(I)].
:- instdef ab -> (a ; b).
:- instdef abd -> (a ; b ; d).
:- modedef out(I) -> (new -> I).
:- modedef in(I) -> (I -> I).
)";

const char* kOlabc1 = R"(
ti(hlist(abc),old) -> [] ; [ti(abc,old)|ti(hlist(abc),old)] ; #var#
ti(abc,old) -> a ; b ; c
)";

const char* kOlabc2 = R"(
ti(list(habc),old) -> [] ; [ti(habc,old)|ti(list(habc),old)]
ti(habc,old) -> a ; b ; c ; #var#
)";

const char* kHlistTOld = R"(
ti(hlist(T),old) -> [] ; [ti(T,old)|ti(hlist(T),old)] ; #var#
ti(T,old) -> $ground(T)$ ; $old(T)$
)";

const char* kNelistOld = R"(
ti(list(habc),nelist(old)) -> [ti(habc,old)|ti(list(habc),list(old))]
ti(list(habc),list(old)) -> [] ; [ti(habc,old)|ti(list(habc),list(old))]
ti(habc,old) -> a ; b ; c ; #var#
)";

const char* kNelistGround = R"(
ti(list(T),nelist(ground)) -> [ti(T,ground)|ti(list(T),list(ground))]
ti(list(T),list(ground)) -> [] ; [ti(T,ground)|ti(list(T),list(ground))]
ti(T,ground) -> $ground(T)$
)";

const char* kA2 = R"(
a2 -> $ipred$(ti(sign,ground), ti(sign,ground), new, ti(sign,ground))
ti(sign,ground) -> neg ; zero ; pos
)";

bool root_has_fresh(GrammarStore& s, Grammar g) {
  for (NtId nt : s.reachable(g))
    for (const auto& p : s.productions(nt))
      if (s.symbol(p.sym).kind == SymKind::Fresh) return true;
  return false;
}

}  // namespace

TEST_CASE("type grammar of a list of abc is the example list grammar") {
  Loaded l(kDefs);
  Grammar g = l.builder.grammar_of_type(expand_type(l.program, testing::term_of("list(abc)"), {}));
  GrammarStore s;
  Grammar r1 = GrammarText(s).build("list(abc) -> [] ; [abc|list(abc)]\nabc -> a ; b ; c");
  CHECK(same_language(l.store, g, s, r1, 4));
  CHECK(l.store.nt_name(g.root) == "list(abc)");
}

TEST_CASE("type grammar of a parametric list keeps a parameter non-terminal") {
  Loaded l(kDefs);
  Grammar g = l.builder.grammar_of_type(expand_type(l.program, testing::term_of("list(T)"), {}));
  CHECK(l.store.reachable(g).size() == 2);
  CHECK(l.store.dump(g).find("T -> $ground(T)$") != std::string::npos);
}

TEST_CASE("a non-regular type definition is rejected") {
  Loaded l(kDefs);
  CHECK_THROWS_AS(l.builder.grammar_of_type(expand_type(l.program, testing::term_of("erk(int)"), {})),
                  NonRegularError);
}

TEST_CASE("base of an old solver list marks the list non-terminal only") {
  Loaded l(kDefs);
  GrammarStore s;
  CHECK(same_language(l.store, l.base("hlist(abc)", "old"), s, GrammarText(s).build(kOlabc1), 4));
}

TEST_CASE("base of a list of old solver elements marks the element non-terminal only") {
  Loaded l(kDefs);
  GrammarStore s;
  CHECK(same_language(l.store, l.base("list(habc)", "old"), s, GrammarText(s).build(kOlabc2), 4));
}

TEST_CASE("base of a parametric solver list under old") {
  Loaded l(kDefs);
  GrammarStore s;
  CHECK(same_language(l.store, l.base("hlist(T)", "old"), s, GrammarText(s).build(kHlistTOld), 4));
}

TEST_CASE("base new is the new grammar for any type") {
  Loaded l(kDefs);
  CHECK(l.store.is_new(l.base("list(abc)", "new")));
  CHECK(l.store.is_new(l.base("T", "new")));
}

TEST_CASE("rt of a non-empty old list of solver elements") {
  Loaded l(kDefs);
  GrammarStore s;
  Grammar g = l.rt("list(habc)", "nelist(old)");
  CHECK(same_language(l.store, g, s, GrammarText(s).build(kNelistOld), 4));
  CHECK(l.store.nt_name(g.root) == "ti(list(habc),nelist(old))");
  CHECK(l.store.reachable(g).size() == 3);
}

TEST_CASE("rt of a non-empty ground parametric list") {
  Loaded l(kDefs);
  GrammarStore s;
  Grammar g = l.rt("list(T)", "nelist(ground)");
  CHECK(same_language(l.store, g, s, GrammarText(s).build(kNelistGround), 4));
  std::string d = l.store.dump(g);
  CHECK(d.rfind("ti(list(T),nelist(ground)) -> [ti(T,ground)|ti(list(T),list(ground))]", 0) == 0);
}

TEST_CASE("a parameter type with a structured instantiation is a mode error") {
  Loaded l(kDefs);
  CHECK(l.rt("T", "nelist(ground)").is_top());
}

TEST_CASE("rt of a higher-order type with a predicate instantiation") {
  Loaded l(kDefs);
  GrammarStore s;
  Grammar g = l.rt("pred(sign, sign)", "pred(in, out)");
  CHECK(same_language(l.store, g, s, GrammarText(s).build(kA2), 3));
  auto p = l.store.productions(g.root);
  REQUIRE(p.size() == 1);
  CHECK(l.store.symbol(p[0].sym).kind == SymKind::IPred);
  CHECK(p[0].kids.at(2) == GrammarStore::kNew);
}

TEST_CASE("higher-order types under base instantiations lose their mode information") {
  Loaded l(kDefs);
  Grammar g = l.base("pred(sign, sign)", "ground");
  CHECK(l.store.root_has(g, SymKind::GPred));
  Grammar o = l.base("pred(sign, sign)", "old");
  CHECK(l.store.lt(o, g));
  CHECK(l.store.lt(g, o));
  CHECK(l.rt("abc", "pred(in, out)").is_top());
}

TEST_CASE("ground is below old for every parameter and solver type") {
  Loaded l(kDefs);
  for (const char* t : {"T", "list(T)", "hlist(T)", "list(habc)", "hlist(abc)", "habc", "abc"})
    CHECK(l.store.lt(l.base(t, "ground"), l.base(t, "old")));
  CHECK(l.store.lt(l.rt("list(habc)", "nelist(ground)"), l.rt("list(habc)", "nelist(old)")));
}

TEST_CASE("fresh appears exactly when the instantiation is new") {
  Loaded l(kDefs);
  CHECK(root_has_fresh(l.store, l.rt("list(abc)", "new")));
  for (const char* i : {"ground", "old", "nelist(ground)", "list(old)"})
    CHECK_FALSE(root_has_fresh(l.store, l.rt("list(abc)", i)));
}

TEST_CASE("var productions sit exactly on solver type non-terminals") {
  Loaded l(kDefs);
  Grammar g = l.base("hlist(list(habc))", "old");
  int marked = 0;
  for (NtId nt : l.store.reachable(g)) {
    bool var = false;
    for (const auto& p : l.store.productions(nt)) var = var || l.store.symbol(p.sym).kind == SymKind::Var;
    std::string name = l.store.nt_name(nt);
    bool solver = name.rfind("ti(hlist", 0) == 0 || name.rfind("ti(habc", 0) == 0;
    CHECK(var == solver);
    marked += var;
  }
  CHECK(marked == 2);
}

TEST_CASE("rt is memoized and deterministic") {
  Loaded l(kDefs);
  Grammar a = l.rt("list(habc)", "nelist(old)");
  Grammar b = l.rt("list(habc)", "nelist(old)");
  CHECK(a == b);
  CHECK(l.store.dump(a) == l.store.dump(b));
}

TEST_CASE("instantiation alternatives absent from the type are dropped with a warning") {
  Loaded l(kDefs);
  Grammar g = l.rt("abc", "abd");
  CHECK(language_strings(l.store, g, 1) == std::vector<std::string>{"a", "b"});
  auto w = l.builder.take_warnings();
  REQUIRE(w.size() == 1);
  CHECK(w[0].code == "W002");
  l.rt("abc", "abd");
  CHECK(l.builder.take_warnings().empty());
}

TEST_CASE("ti-state operations are pointwise") {
  Loaded l(kDefs);
  GrammarStore& s = l.store;
  Grammar ng = l.rt("list(T)", "nelist(ground)");
  Grammar g = l.rt("T", "ground");
  TiState bottom{{Grammar::bottom(), Grammar::bottom()}};
  TiState ti2{{ng, g}};
  TiState joined = state_disj(s, bottom, ti2);
  CHECK(joined.vars == ti2.vars);
  TiState fresh{{s.new_grammar(), s.new_grammar()}};
  CHECK(state_conj(s, ti2, fresh).vars == ti2.vars);
  TiState mixed{{s.new_grammar(), g}};
  CHECK(state_disj(s, mixed, ti2).vars[0].is_top());
  CHECK(state_lt(s, bottom, ti2));
  CHECK_FALSE(state_lt(s, ti2, bottom));
}

TEST_CASE("collect set matches parameter leaves against the actual grammar") {
  Loaded l(kDefs);
  GrammarStore& s = l.store;
  Grammar r4 = l.rt("pred(sign, sign)", "pred(in, out)");
  Grammar r6 = l.rt("T", "ground");
  PolyMatchSet m = collect_set(s, r6, r4);
  REQUIRE(m.size() == 1);
  CHECK_FALSE(m.begin()->old);
  CHECK(m.begin()->param == "T");
  CHECK(m.begin()->grammar == r4);
  Grammar r5 = l.rt("list(T)", "ground");
  Grammar empty = s.construct(s.tree_symbol("[]", 0), {});
  CHECK(collect_set(s, r5, empty).empty());
  CHECK(collect_set(s, s.new_grammar(), r4).empty());
}

TEST_CASE("polymorphic improvement preserves higher-order element information") {
  Loaded l(kDefs);
  GrammarStore& s = l.store;
  Grammar r4 = l.rt("pred(sign, sign)", "pred(in, out)");
  PolyMatchSet m{{false, "T", r4}};
  Subst theta{{"T", testing::term_of("pred(sign, sign)")}};
  Term dt = expand_type(l.program, testing::term_of("list(T)"), {});
  Term si = expand_inst(l.program, testing::term_of("nelist(ground)"), {});
  Grammar improved = poly_improve(l.builder, dt, si, theta, m);
  REQUIRE(improved.is_rules());
  NtId elem = s.productions(improved.root).at(0).kids.at(0);
  CHECK(s.root_has(s.subg(elem), SymKind::IPred));
  Grammar plain = poly_improve(l.builder, dt, si, theta, {});
  NtId pelem = s.productions(plain.root).at(0).kids.at(0);
  CHECK(s.root_has(s.subg(pelem), SymKind::GPred));
  CHECK(s.lt(improved, plain));
}
