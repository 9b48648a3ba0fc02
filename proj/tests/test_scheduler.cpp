#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "support.hpp"

using namespace modal;
using testing::count_code;
using testing::procedure_text;

namespace {

CheckReport run(const std::string& file, Options opts = {}) { return check_source(testing::read_data(file), opts); }

const char* kDefs = R"(
:- typedef abc -> (a ; b ; c).
:- typedef list(T) -> ([] ; [T|list(T)]).
:- instdef ab -> (a ; b).
:- instdef nelist(I) -> [I|list(I)].
:- instdef list(I) -> ([] ; [I|list(I)]).
:- modedef out(I) -> (new -> I).
:- modedef in(I) -> (I -> I).
)";

CheckReport src(const std::string& body, Options opts = {}) { return check_source(std::string(kDefs) + body, opts); }

std::string first_message(const CheckReport& r, const std::string& code) {
  for (const auto& d : r.diagnostics)
    if (d.code == code) return d.message;
  return "";
}

void walk(const SGoal& g, const std::function<void(const SLit&)>& f) {
  if (g.kind == SGoal::Kind::Lit) {
    f(g.lit);
    return;
  }
  for (const auto& k : g.kids) walk(k, f);
}

}  // namespace

TEST_CASE("local reordering turns equations into assignments and a deconstruct") {
  CheckReport r = run("reorder.hal");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "shape_mode1") == "shape_mode1(X, Y) :- U2 := [], X =: [U1|U3], Y := [U1|U2].");
  const Procedure& p = r.procedures.at(0);
  CHECK(p.var_names[p.head[1]] == "Y");
}

TEST_CASE("a disjunct that must fail becomes fail") {
  CheckReport r = run("dupl.hal");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "dupl_mode1") ==
        "dupl_mode1(S0, S) :- fail. dupl_mode1(S0, S) :- pop_mode2(S0, A, S1), push_mode1(S0, A, S).");
}

TEST_CASE("initialization is inserted only for the mode that needs it") {
  CheckReport r = run("length.hal");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "length_mode1") ==
        "length_mode1(L, N) :- L := [], N == 0. length_mode1(L, N) :- +_mode2(N1, 1, N), N > 0, "
        "length_mode1(L1, N1), init(X), L := [X|L1].");
  CHECK(procedure_text(r, "length_mode2") ==
        "length_mode2(L, N) :- L == [], N := 0. length_mode2(L, N) :- L =: [X|L1], length_mode2(L1, N1), "
        "+_mode1(N1, 1, N), N > 0.");
}

TEST_CASE("initialization unblocks the inner list construction first") {
  CheckReport r = run("pairlist.hal");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "pairlist_mode1") ==
        "pairlist_mode1(L, N) :- N == 0, L := []. pairlist_mode1(L, N) :- N > 0, +_mode2(N1, 1, N), "
        "pairlist_mode1(L2, N1), init(V), L1 := [V|L2], L := [V|L1].");
}

TEST_CASE("without initialization the pair list is unschedulable") {
  Options o;
  o.init = false;
  CheckReport r = run("pairlist.hal", o);
  CHECK(r.exit_code == 1);
  CHECK(count_code(r, "E001") == 1);
}

TEST_CASE("untracked sharing leaves the list too weak") {
  CheckReport r = run("lcint.hal");
  CHECK(r.exit_code == 1);
  REQUIRE(count_code(r, "E002") == 1);
  CHECK(first_message(r, "E002").find("argument L ") != std::string::npos);
}

TEST_CASE("committed schedules are not revisited") {
  CheckReport r = run("noncheck.hal");
  CHECK(r.exit_code == 1);
  REQUIRE(count_code(r, "E001") == 1);
  CHECK(first_message(r, "E001").find("r(L1)") != std::string::npos);
}

TEST_CASE("deconstructing an old solver list warns once") {
  CheckReport r = run("append.hal");
  CHECK(r.exit_code == 0);
  CHECK(count_code(r, "W001") == 1);
  Options o;
  o.werror = true;
  CHECK(run("append.hal", o).exit_code == 1);
}

TEST_CASE("solver element types never raise the run-time warning") {
  CheckReport r = check_source(R"(
:- typedef habc -> (a ; b ; c) deriving solver.
:- typedef hlist(T) -> ([] ; [T|hlist(T)]) deriving solver.
:- pred append(hlist(habc), hlist(habc), hlist(habc)).
:- mode append(oo, oo, no) is nondet.
append(X, Y, Z) :- X = [], Y = Z.
append(X, Y, Z) :- X = [A|X1], append(X1, Y, Z1), Z = [A|Z1].
)");
  CHECK(r.exit_code == 0);
  CHECK(count_code(r, "W001") == 0);
}

TEST_CASE("the stack program checks in every mode") {
  CheckReport r = run("stack.hal");
  CHECK(r.exit_code == 0);
  CHECK(r.procedures.size() == 5);
  CHECK(r.diagnostics.empty());
}

TEST_CASE("copy goes from the bound side to the new side") {
  CheckReport r = src(":- pred p(abc, abc).\n:- mode p(in, out).\np(X, Y) :- X = Y.\n");
  CHECK(procedure_text(r, "p_mode1") == "p_mode1(X, Y) :- Y := X.");
}

TEST_CASE("equating two new variables delays until one is bound") {
  CheckReport r = src(":- pred p(abc, abc).\n:- mode p(in, out).\np(X, Y) :- Z = Y, Z = X.\n");
  CHECK(procedure_text(r, "p_mode1") == "p_mode1(X, Y) :- Z := X, Y := Z.");
  CheckReport bad = src(":- pred p(abc).\n:- mode p(in).\np(X) :- Z = W, p(Z).\n");
  CHECK(count_code(bad, "E001") == 1);
}

TEST_CASE("unifying disjoint values fails the conjunction") {
  CheckReport r = src("?- X = a, Y = b, X = Y.\n");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "?-") == "?- X := a, Y := b, fail.");
}

TEST_CASE("a bound argument of a deconstruct is split into a fresh variable") {
  CheckReport r = src("?- X = [], Y = [a], Y = [A|X].\n");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "?-") == "?- X := [], Y := [a], Y =: [A|Fresh_1], X == Fresh_1.");
}

TEST_CASE("mode selection prefers the most specific success state") {
  CheckReport r = check_source(testing::read_data("stack.hal") +
                               ":- typedef abc -> (a ; b ; c).\n"
                               "?- B0 = b, N = [], A = [B0|N], C = [], pop(A, B, C).\n");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "?-") ==
        "?- B0 := b, N := [], A := [B0|N], C := [], pop_mode2(A, B, Fresh_1), Fresh_1 == C.");
}

TEST_CASE("a new stack selects the constructing mode of empty") {
  CheckReport r = check_source(testing::read_data("stack.hal") + ":- typedef abc -> (a ; b ; c).\n"
                                                                 "?- empty(S0), S0 = [a].\n");
  CHECK(procedure_text(r, "?-").rfind("?- empty_mode2(S0), ", 0) == 0);
}

TEST_CASE("pop of an unbound stack cannot be scheduled") {
  CheckReport r = check_source(testing::read_data("stack.hal") + "?- pop(S, E, S1).\n");
  CHECK(r.exit_code == 1);
  CHECK(first_message(r, "E001").find("pop(S, E, S1)") != std::string::npos);
}

TEST_CASE("a success state disjoint from the argument makes the call fail") {
  CheckReport r = src(":- pred mk(abc).\n:- mode mk(ground -> ab).\n?- X = c, mk(X).\n");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "?-") == "?- X := c, fail.");
}

TEST_CASE("branches disagreeing on whether a variable is bound are rejected") {
  CheckReport r = src(":- pred p(abc, abc).\n:- mode p(in, out).\np(X, Y) :- ( X = a, Y = b ; X = b ).\n");
  CHECK(r.exit_code == 1);
  CHECK(count_code(r, "E003") == 1);
}

TEST_CASE("branch locals are dropped at the join") {
  CheckReport r = src(":- pred p(abc, abc).\n:- mode p(in, out).\np(X, Y) :- ( X = a, Z = b ; X = b ), Y = X.\n");
  CHECK(r.exit_code == 0);
}

TEST_CASE("if-then-else schedules the condition before the then branch") {
  CheckReport ok = src(":- pred p(abc, abc).\n:- mode p(in, out).\np(X, Y) :- ( X = a -> Y = b ; Y = c ).\n");
  CHECK(ok.exit_code == 0);
  CHECK(procedure_text(ok, "p_mode1").find("X == a") != std::string::npos);
  CheckReport stuck = src(":- pred p(abc, abc).\n:- mode p(in, out).\np(X, Y) :- ( Y = Z -> true ; Y = b ).\n");
  CHECK(count_code(stuck, "E001") == 1);
}

TEST_CASE("a structured instantiation of a parameter type is reported") {
  CheckReport r = src(":- pred p(T).\n:- mode p(nelist(ground) -> ground).\np(X) :- true.\n");
  CHECK(r.exit_code == 1);
  CHECK(count_code(r, "E004") == 1);
}

TEST_CASE("higher-order construction and call through map") {
  CheckReport r = run("map.hal");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "?-") == "?- H1 := mult_mode1(pos), map_mode1(H1, [neg, zero, pos], L1).");
  CHECK(procedure_text(r, "map_mode1").find("call(H, A, B)") != std::string::npos);
}

TEST_CASE("higher-order construction needs bound given arguments and a new target") {
  std::string defs = ":- typedef sign -> (neg ; zero ; pos).\n:- pred mult(sign, sign, sign).\n"
                     ":- mode mult(in, in, out) is det.\n:- pred use(pred(sign, sign)).\n"
                     ":- mode use(in(pred(in, out))).\n";
  CHECK(count_code(src(defs + "?- H = mult(X), use(H).\n"), "E001") == 1);
  CHECK(count_code(src(defs + "?- H = mult(pos), H = mult(neg).\n"), "E001") == 1);
  CHECK(src(defs + "?- H = mult(pos), use(H).\n").exit_code == 0);
}

TEST_CASE("polymorphic recovery keeps the stored closure callable") {
  CheckReport r = run("hopush.hal");
  CHECK(r.exit_code == 0);
  CHECK(procedure_text(r, "?-") ==
        "?- empty_mode2(S0), I0 := mult_mode1(pos), push_mode1(S0, I0, S1), pop_mode2(S1, I, S2), "
        "map_mode1(I, [neg], S).");
  Options o;
  o.poly_improve = false;
  CheckReport lost = run("hopush.hal", o);
  CHECK(lost.exit_code == 1);
  CHECK(first_message(lost, "E001").find("mode information was lost") != std::string::npos);
}

TEST_CASE("every init targets a new solver variable once") {
  for (const char* f : {"length.hal", "pairlist.hal", "append.hal"}) {
    CheckReport r = run(f);
    for (const auto& p : r.procedures) {
      std::set<int> seen;
      walk(p.body, [&](const SLit& l) {
        if (l.tag != STag::Init) return;
        CHECK(seen.insert(l.x).second);
        const Term& t = p.var_types[l.x];
        CHECK((t.is_var || t.name == "cint" || t.name == "hlist"));
      });
    }
  }
}

TEST_CASE("every emitted procedure passes the locked recheck") {
  for (const char* f : {"stack.hal", "dupl.hal", "length.hal", "pairlist.hal", "append.hal", "map.hal", "ho.hal",
                        "hopush.hal", "reorder.hal"}) {
    Program prog = load_program(testing::read_data(f));
    GrammarStore s;
    TiBuilder b(prog, s);
    for (const auto& d : prog.preds) {
      if (d.is_prelude || !d.normalized) continue;
      for (std::size_t k = 0; k < d.modes.size(); ++k) {
        ModeCheckResult m = check_mode(prog, d, static_cast<int>(k), b, {});
        REQUIRE(m.ok);
        CHECK(recheck(prog, m.proc, b, {}) == "");
      }
    }
  }
}

TEST_CASE("recheck rejects a reordered or retagged procedure") {
  Program prog = load_program(testing::read_data("reorder.hal"));
  GrammarStore s;
  TiBuilder b(prog, s);
  ModeCheckResult m = check_mode(prog, *prog.find_pred("shape", 2), 0, b, {});
  REQUIRE(m.ok);
  auto& kids = m.proc.body.kids;
  REQUIRE(kids.size() == 3);
  Procedure swapped = m.proc;
  std::swap(swapped.body.kids[1], swapped.body.kids[2]);
  CHECK(recheck(prog, swapped, b, {}) != "");
  Procedure dropped = m.proc;
  dropped.body.kids.pop_back();
  CHECK(recheck(prog, dropped, b, {}) != "");
  Procedure retagged = m.proc;
  retagged.body.kids[1].lit.tag = STag::Construct;
  CHECK(recheck(prog, retagged, b, {}) != "");
}

TEST_CASE("procedure names count modes from one") {
  CHECK(procedure_name("push", 0) == "push_mode1");
  CHECK(procedure_name("+", 1) == "+_mode2");
}
