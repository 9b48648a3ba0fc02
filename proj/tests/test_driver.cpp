#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modal/render.hpp"
#include "support.hpp"

using namespace modal;
using testing::count_code;

TEST_CASE("exit status distinguishes clean, mode errors and frontend errors") {
  CHECK(check_source(testing::read_data("stack.hal")).exit_code == 0);
  CHECK(check_source(testing::read_data("noncheck.hal")).exit_code == 1);
  CHECK(check_source("p(X :- q.").exit_code == 2);
}

TEST_CASE("non-regular types stop the check before scheduling") {
  CheckReport r = check_source(":- typedef erk(T) -> node(erk(list(T)), T).\n"
                               ":- typedef list(T) -> ([] ; [T|list(T)]).\n:- pred p(erk(int)).\n");
  CHECK(r.exit_code == 2);
  CHECK(count_code(r, "P003") == 1);
}

TEST_CASE("definition errors exit with status two") {
  CHECK(check_source(":- typedef a = b.\n:- typedef b = a.\n:- pred p(a).\n").exit_code == 2);
  CHECK(check_source(":- instdef bad -> [new|list(new)].\n").exit_code == 2);
}

TEST_CASE("warnings become errors only on request") {
  Options o;
  CHECK(check_source(testing::read_data("append.hal"), o).exit_code == 0);
  o.werror = true;
  CHECK(check_source(testing::read_data("append.hal"), o).exit_code == 1);
}

TEST_CASE("procedures print in source order and identically across runs") {
  std::string src = testing::read_data("dupl.hal");
  CheckReport a = check_source(src), b = check_source(src);
  CHECK(a.output == b.output);
  auto pos = [&](const std::string& n) { return a.output.find(n); };
  CHECK(pos("push_mode1") < pos("pop_mode1"));
  CHECK(pos("pop_mode2") < pos("empty_mode1"));
  CHECK(pos("empty_mode2") < pos("dupl_mode1"));
}

TEST_CASE("an empty body renders as true") {
  CheckReport r = check_source(":- typedef abc -> (a ; b).\n:- pred p(abc).\n:- mode p(in).\np(X) :- true.\n");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "p_mode1(X) :-\n    true.\n");
}

TEST_CASE("nested disjunctions render inside parentheses") {
  CheckReport r = check_source(testing::read_data("ho.hal"));
  CHECK(r.output.find("(   HO := HO1\n    ;   HO := HO2\n    )") != std::string::npos);
}

TEST_CASE("diagnostics carry code, position and procedure") {
  CheckReport r = check_source(testing::read_data("noncheck.hal"));
  std::string text = format_diagnostics(r.diagnostics);
  CHECK(text.find("error E001 [query1]") != std::string::npos);
  CHECK(text.find(":1:") != std::string::npos);
}

TEST_CASE("dump of a ti-grammar uses the rule listing format") {
  DumpReport d = dump_ti(testing::read_data("stack.hal"), "list(T)", "nelist(ground)");
  CHECK(d.exit_code == 0);
  CHECK(d.output ==
        "ti(list(T),nelist(ground)) -> [ti(T,ground)|ti(list(T),list(ground))]\n"
        "ti(T,ground) -> $ground(T)$\n"
        "ti(list(T),list(ground)) -> []\n"
        "ti(list(T),list(ground)) -> [ti(T,ground)|ti(list(T),list(ground))]\n");
  CHECK(dump_ti(testing::read_data("stack.hal"), "list(T)", "nosuch").exit_code == 2);
}
