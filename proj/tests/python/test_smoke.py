import os
from pathlib import Path

import pytest

import modal

DATA = Path(os.environ.get("MODAL_DATA", Path(__file__).resolve().parents[1] / "data"))


def test_reorder_listing():
    r = modal.check_file(DATA / "reorder.hal")
    assert r.exit_code == 0
    assert r.procedures == ["shape_mode1"]
    assert r.output == "shape_mode1(X, Y) :-\n    U2 := [],\n    X =: [U1|U3],\n    Y := [U1|U2].\n"


def test_noncheck_reports_unschedulable_literal():
    r = modal.check_file(DATA / "noncheck.hal")
    assert r.exit_code == 1
    [d] = [d for d in r.diagnostics if d.code == "E001"]
    assert d.severity == "error"
    assert "r(L1)" in d.message
    assert d.line == 22


def test_init_can_be_disabled():
    assert modal.check_file(DATA / "pairlist.hal").exit_code == 0
    assert modal.check_file(DATA / "pairlist.hal", init=False).exit_code == 1


def test_append_warns_once_and_werror_fails():
    r = modal.check_file(DATA / "append.hal")
    assert [d.code for d in r.diagnostics] == ["W001"]
    assert modal.check_file(DATA / "append.hal", werror=True).exit_code == 1


def test_syntax_error_exit_code():
    r = modal.check("foo(X :- bar.\n")
    assert r.exit_code == 2
    assert r.diagnostics[0].code == "P001"


def test_dump_ti():
    src = (DATA / "stack.hal").read_text()
    r = modal.dump_ti(src, "list(T)", "nelist(ground)")
    assert r.exit_code == 0
    assert r.output.splitlines()[0] == "ti(list(T),nelist(ground)) -> [ti(T,ground)|ti(list(T),list(ground))]"


@pytest.mark.parametrize("seed", [1, 2])
def test_oracle_small_run(seed):
    rep = modal.run_oracle(depth=3, samples=100, seed=seed)
    assert rep.samples == 100
    assert rep.total_failed == 0
    assert rep.passed["meet-exact"] == 100
