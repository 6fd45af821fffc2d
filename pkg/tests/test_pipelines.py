import json
from fractions import Fraction

import pytest

from conftest import EXAMPLE, formula_corpus
from surfred.compiler import PowerM
from surfred.decoders import OracleFault, support_dqmld, support_qmld
from surfred.formula import brute_force_count, parse_expression
from surfred.pipelines import (
    TIE,
    approx_separation_report,
    count_sat,
    dqmld_decision,
    localize_count,
    majority_sat,
    pivot,
    solve_sat,
)


def F(text):
    return parse_expression(text)


def test_solve_example():
    rep = solve_sat(F(EXAMPLE))
    assert rep.verdict == "SAT" and rep.agrees and rep.calls == 1
    assert solve_sat(F("(x1&!x1)")).verdict == "UNSAT"


def test_solve_with_support_oracle():
    assert solve_sat(F("(x1&x2)"), decoder=support_qmld).verdict == "SAT"


@pytest.mark.parametrize("f", formula_corpus(12, seed=7, max_vars=3))
def test_solve_corpus(f):
    assert solve_sat(f).agrees


def test_pivot():
    assert pivot(0, 1) == Fraction(1, 4)
    assert pivot(3, 2) == Fraction(7, 8)


def test_count_example():
    rep = count_sat(F(EXAMPLE))
    assert rep.verdict == 2 == rep.reference
    assert rep.calls <= 4
    assert [s["r"] for s in rep.transcript] == ["9/16", "13/16", "11/16"]


@pytest.mark.parametrize("f", formula_corpus(10, seed=11, max_vars=3))
def test_count_corpus(f):
    rep = count_sat(f)
    assert rep.verdict == brute_force_count(f)
    assert rep.calls <= f.num_vars + 1


def test_count_with_support_oracle():
    assert count_sat(F("(x1|x2)"), decoder=support_dqmld).verdict == 3


def test_decision_flips_around_the_ratio():
    f = F("(x1|x2)")  # a = 3, b = 1
    n = 2
    assert dqmld_decision(f, Fraction(1, 4) + Fraction(1, 16)) is True
    assert dqmld_decision(f, Fraction(1, 4) - Fraction(1, 16)) is False
    assert dqmld_decision(f, Fraction(1, 4)) is None


@pytest.mark.parametrize("text,expected", [("x1", TIE), ("(x1|x2)", True), ("(x1&x2)", False), ("(x1&!x1)", False)])
def test_majority(text, expected):
    rep = majority_sat(F(text))
    assert rep.verdict == expected == rep.reference


def test_count_rejects_a_tying_oracle():
    def liar(inst):
        from surfred.decoders import structured_dqmld

        res = structured_dqmld(inst)
        res.tie = True
        return res

    with pytest.raises(OracleFault):
        count_sat(F("x1"), decoder=liar)


@pytest.mark.parametrize("adversary", ["sat", "unsat"])
def test_localize_count(adversary):
    M = Fraction(2)
    loc = localize_count(F("(x1|x2)"), M, adversary)
    assert loc["contains_truth"]
    assert loc["upper"] is None or loc["upper"] / max(loc["lower"], Fraction(1, 2 ** 10)) <= 2 * M * M * 4


def test_approx_report():
    rep = approx_separation_report(F("(x1&x2)"), PowerM(1))
    assert rep.ok, rep.checks
    assert {"approx.bounds", "uniform.bounds", "uniform.tail_length", "dqmld.localize.sat"} <= set(rep.checks)
    text = rep.to_text()
    data = json.loads(text.split("--- machine-readable\n")[1])
    assert data["verdict"] is True
