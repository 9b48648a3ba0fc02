#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "support.hpp"

using namespace modal;
using testing::GrammarText;
using testing::language_strings;
using testing::same_language;

namespace {

const char* kR1 = R"(
list(abc) -> [] ; [abc|list(abc)]
abc -> a ; b ; c
)";

const char* kR2 = R"(
evenlist(bcd) -> [] ; [bcd|oddlist(bcd)]
oddlist(bcd) -> [bcd|evenlist(bcd)]
bcd -> b ; c ; d
)";

const char* kMeet = R"(
meet(list(abc),evenlist(bcd)) -> [] ; [meet(abc,bcd)|meet(list(abc),oddlist(bcd))]
meet(abc,bcd) -> b ; c
meet(list(abc),oddlist(bcd)) -> [meet(abc,bcd)|meet(list(abc),evenlist(bcd))]
)";

const char* kJoin = R"(
join(list(abc),evenlist(bcd)) -> [] ; [join(abc,bcd)|join(list(abc),oddlist(bcd))]
join(abc,bcd) -> a ; b ; c ; d
join(list(abc),oddlist(bcd)) -> [] ; [join(abc,bcd)|join(list(abc),evenlist(bcd))]
)";

const char* kHo1 = R"(
ho1 -> $ipred$(gndab, gndab, new, gndab)
gndab -> a ; b
)";

const char* kHo2 = R"(
ho2 -> $ipred$(gndabc, gndabc, new, gndabc)
gndabc -> a ; b ; c
)";

const char* kHoJoin = R"(
ho -> $ipred$(gndab, gndabc, new, gndabc)
gndab -> a ; b
gndabc -> a ; b ; c
)";

NtId child(GrammarStore& s, Grammar g, std::size_t k) { return s.productions(g.root).at(0).kids.at(k); }

}  // namespace

TEST_CASE("root and sub-grammar of the example list grammar") {
  GrammarStore s;
  Grammar r1 = GrammarText(s).build(kR1);
  REQUIRE(r1.is_rules());
  CHECK(s.nt_name(r1.root) == "list(abc)");
  NtId abc = s.productions(r1.root).at(1).kids.at(0);
  Grammar sub = s.subg(abc);
  CHECK(sub.root == abc);
  CHECK(s.reachable(sub).size() == 1);
  CHECK(language_strings(s, sub, 1) == std::vector<std::string>{"a", "b", "c"});
  CHECK(same_language(s, s.subg(r1.root), s, r1, 4));
}

TEST_CASE("sub-grammar of the odd list non-terminal reaches every rule") {
  GrammarStore s;
  Grammar r2 = GrammarText(s).build(kR2);
  NtId odd = s.productions(r2.root).at(1).kids.at(1);
  CHECK(s.nt_name(odd) == "oddlist(bcd)");
  CHECK(s.reachable(s.subg(odd)).size() == 3);
}

TEST_CASE("bottom is below everything and top above everything") {
  GrammarStore s;
  Grammar r1 = GrammarText(s).build(kR1);
  CHECK(s.lt(Grammar::bottom(), r1));
  CHECK(s.lt(r1, Grammar::top()));
  CHECK(s.lt(Grammar::bottom(), Grammar::top()));
  CHECK_FALSE(s.lt(Grammar::top(), r1));
}

TEST_CASE("ordering on lists versus non-empty lists") {
  GrammarStore s;
  GrammarText gt(s);
  Grammar all = gt.build(kR1);
  Grammar ne = gt.build(R"(
ne -> [abc|l]
l -> [] ; [abc|l]
abc -> a ; b ; c
)");
  CHECK_FALSE(s.lt(all, ne));
  CHECK(s.lt(ne, all));
  auto la = language_strings(s, all, 4), ln = language_strings(s, ne, 4);
  CHECK_FALSE(std::includes(ln.begin(), ln.end(), la.begin(), la.end()));
}

TEST_CASE("conjunction with new, bottom and top") {
  GrammarStore s;
  Grammar r = GrammarText(s).build(kR1);
  CHECK(s.conj(s.new_grammar(), r) == r);
  CHECK(s.conj(r, s.new_grammar()) == r);
  CHECK(s.conj(Grammar::bottom(), r).is_bottom());
  CHECK(s.conj(r, Grammar::top()).is_top());
}

TEST_CASE("meet of the example grammars matches the printed meet") {
  GrammarStore s;
  GrammarText gt(s);
  Grammar m = s.conj(gt.build(kR1), gt.build(kR2));
  Grammar expect = gt.build(kMeet);
  CHECK(same_language(s, m, s, expect, 4));
  CHECK(s.reachable(m).size() == 3);
  NtId elem = s.productions(m.root).at(1).kids.at(0);
  CHECK(s.productions(elem).size() == 2);
}

TEST_CASE("disjunction with new and bottom") {
  GrammarStore s;
  Grammar r = GrammarText(s).build(kR1);
  CHECK(s.is_new(s.disj(s.new_grammar(), s.new_grammar())));
  CHECK(s.disj(s.new_grammar(), r).is_top());
  CHECK(s.disj(r, s.new_grammar()).is_top());
  CHECK(s.disj(Grammar::bottom(), r) == r);
}

TEST_CASE("join of the example grammars matches the printed join") {
  GrammarStore s;
  GrammarText gt(s);
  Grammar j = s.disj(gt.build(kR1), gt.build(kR2));
  CHECK(same_language(s, j, s, gt.build(kJoin), 4));
  NtId elem = s.productions(j.root).at(1).kids.at(0);
  CHECK(s.productions(elem).size() == 4);
}

TEST_CASE("joining the two higher-order objects meets calls and joins successes") {
  GrammarStore s;
  GrammarText gt(s);
  Grammar h1 = gt.build(kHo1), h2 = gt.build(kHo2);
  Grammar j = s.disj(h1, h2);
  REQUIRE(j.is_rules());
  CHECK(language_strings(s, s.subg(child(s, j, 0)), 1) == std::vector<std::string>{"a", "b"});
  CHECK(language_strings(s, s.subg(child(s, j, 1)), 1) == std::vector<std::string>{"a", "b", "c"});
  CHECK(child(s, j, 2) == GrammarStore::kNew);
  CHECK(language_strings(s, s.subg(child(s, j, 3)), 1) == std::vector<std::string>{"a", "b", "c"});
  Grammar expect = gt.build(kHoJoin);
  CHECK(s.lt(h1, expect));
  CHECK(s.lt(h2, expect));
  CHECK(s.lt(j, expect));
  CHECK(s.lt(expect, j));
  CHECK_FALSE(s.lt(expect, h1));
}

TEST_CASE("higher-order ordering is contravariant in calls and covariant in successes") {
  GrammarStore s;
  GrammarText gt(s);
  Grammar narrow = gt.build("h -> $ipred$(ab, ab, new, ab)\nab -> a ; b");
  Grammar wide_call = gt.build("h -> $ipred$(abc, ab, new, ab)\nabc -> a ; b ; c\nab -> a ; b");
  CHECK(s.lt(wide_call, narrow));
  CHECK_FALSE(s.lt(narrow, wide_call));
  Grammar gp = gt.build("g -> $gpred$");
  CHECK(s.lt(narrow, gp));
  CHECK_FALSE(s.lt(gp, narrow));
  CHECK_FALSE(s.lt(s.new_grammar(), gp));
}

TEST_CASE("deconstruct slicing keeps only the chosen constructor") {
  GrammarStore s;
  Grammar r1 = GrammarText(s).build(kR1);
  Grammar cons = s.slice(r1, s.tree_symbol(".", 2));
  auto l = language_strings(s, cons, 3);
  CHECK(std::find(l.begin(), l.end(), "[]") == l.end());
  CHECK(std::find(l.begin(), l.end(), "[a]") != l.end());
  Production p;
  CHECK_FALSE(s.find(r1.root, s.tree_symbol("f", 1), &p));
}

TEST_CASE("construct builds a one rule root over the argument grammars") {
  GrammarStore s;
  Grammar abc = GrammarText(s).build("abc -> a ; b ; c");
  Grammar nil = s.construct(s.tree_symbol("[]", 0), {});
  Grammar one = s.construct(s.tree_symbol(".", 2), {abc, nil});
  CHECK(language_strings(s, one, 3) == std::vector<std::string>{"[a]", "[b]", "[c]"});
}

TEST_CASE("meet of disjoint constructor sets is bottom") {
  GrammarStore s;
  GrammarText gt(s);
  CHECK(s.conj(gt.build("x -> a"), gt.build("y -> b")).is_bottom());
}

TEST_CASE("dump prints the root production first") {
  GrammarStore s;
  Grammar r1 = GrammarText(s).build(kR1);
  std::string d = s.dump(r1);
  CHECK(d.rfind("list(abc) -> []", 0) == 0);
  CHECK(d.find("abc -> a") != std::string::npos);
}

TEST_CASE("concurrent ordering queries agree with sequential answers") {
  GrammarStore s;
  GrammarGenerator gen(s, 77);
  std::vector<Grammar> gs;
  for (int k = 0; k < 60; ++k) {
    if (k % 6 == 0) gen.new_type();
    gs.push_back(gen.instance());
  }
  std::vector<char> expect;
  {
    GrammarStore fresh;
    GrammarGenerator g2(fresh, 77);
    std::vector<Grammar> hs;
    for (int k = 0; k < 60; ++k) {
      if (k % 6 == 0) g2.new_type();
      hs.push_back(g2.instance());
    }
    for (std::size_t a = 0; a < hs.size(); ++a)
      for (std::size_t b = a / 6 * 6; b < a / 6 * 6 + 6; ++b) expect.push_back(fresh.lt(hs[a], hs[b]));
  }
  std::vector<char> got(expect.size());
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      std::size_t i = 0;
      for (std::size_t a = 0; a < gs.size(); ++a)
        for (std::size_t b = a / 6 * 6; b < a / 6 * 6 + 6; ++b, ++i)
          if (i % 4 == static_cast<std::size_t>(t)) got[i] = s.lt(gs[a], gs[b]);
    });
  for (auto& th : pool) th.join();
  CHECK(got == expect);
}
