import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import EXAMPLE, random_formula
from surfred.formula import (
    FormulaParseError,
    Not,
    Or,
    brute_force_count,
    eliminate_or,
    evaluate,
    has_or,
    parse_dimacs,
    parse_expression,
    parse_formula,
    simulate,
    to_expression,
    to_planar_circuit,
)


def truth_table(f):
    return [evaluate(f, a) for a in itertools.product((False, True), repeat=f.num_vars)]


def test_dimacs():
    assert str(parse_dimacs("p cnf 2 1\n1 2 0")) == "(x1|x2)"
    assert str(parse_dimacs("p cnf 1 2\n1 0\n-1 0")) == "(x1&!x1)"
    ex = parse_dimacs("c example\np cnf 3 3\n1 2 0\n-2 3 0\n-1 -3 0\n")
    assert str(ex) == EXAMPLE


@pytest.mark.parametrize("text,msg", [
    ("p cnf 1 1\n2 0", "line 2"),
    ("1 2 0", "line 1"),
    ("p cnf 2 2\n1 0", "declares 2"),
    ("p cnf 2 1\n1 x 0", "bad literal"),
    ("p cnf 3 1\n1 2 0", "never referenced"),
])
def test_dimacs_errors(text, msg):
    with pytest.raises(FormulaParseError, match=msg):
        parse_dimacs(text)


def test_expressions():
    assert truth_table(parse_expression("(x1&!x1)")) == [False, False]
    f = parse_expression(EXAMPLE)
    assert f.num_vars == 3 and str(f) == EXAMPLE
    assert parse_expression("x1").num_vars == 1
    assert parse_formula(" x1 ") == parse_expression("x1")
    with pytest.raises(FormulaParseError, match="position"):
        parse_expression("(x1&")
    with pytest.raises(FormulaParseError, match="position"):
        parse_expression("(x1^x2)")
    with pytest.raises(FormulaParseError, match="never referenced"):
        parse_expression("(x1&x3)")


def test_example_semantics():
    f = parse_expression(EXAMPLE)
    assert evaluate(f, (True, False, False))
    # truth-table oracle: only 011 and 100 satisfy the three clauses
    assert brute_force_count(f) == 2
    assert brute_force_count(parse_expression("(x1|x2)")) == 3
    assert brute_force_count(parse_expression("(x1&!x1)")) == 0
    with pytest.raises(ValueError):
        evaluate(f, (True,))


def test_eliminate_or():
    g = eliminate_or(parse_expression("(x1|x2)"))
    assert str(g) == "!(!x1&!x2)"
    f = parse_expression("(x1&!x2)")
    assert eliminate_or(f) == f
    ex = parse_expression(EXAMPLE)
    assert not has_or(eliminate_or(ex).root)
    assert truth_table(eliminate_or(ex)) == truth_table(ex)


def test_planar_circuit_shapes():
    c = to_planar_circuit(parse_expression("x1"))
    assert c.crossings == [] and c.fanouts == [] and c.gate_count() == {"NOT": 0, "AND": 0, "LEAF": 1}
    c = to_planar_circuit(eliminate_or(parse_expression("(x1|x2)")))
    assert c.gate_count() == {"NOT": 3, "AND": 1, "LEAF": 2}
    assert c.leaf_variables == [1, 2]
    c = to_planar_circuit(parse_expression("((x1&x2)&x1)"))
    assert c.leaf_variables == [1, 2, 1]
    assert len(c.fanouts) == 1 and c.crossings == [(1, 0)]
    with pytest.raises(ValueError):
        to_planar_circuit(parse_expression("(x1|x2)"))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 3), st.randoms(use_true_random=False))
def test_rewrites_preserve_semantics(n, extra, rnd):
    f = random_formula(rnd, n, extra)
    g = eliminate_or(f)
    assert not has_or(g.root)
    c = to_planar_circuit(g)
    assert sorted(c.leaf_variables) == sorted(v for v in c.leaf_variables)
    for v, slots in c.copies.items():
        assert len(slots) == c.leaf_variables.count(v)
    assert sum(len(s) - 1 for s in c.copies.values()) == len(c.fanouts)
    for a in itertools.product((False, True), repeat=n):
        want = evaluate(f, a)
        assert evaluate(g, a) == want
        assert simulate(c, a) == want
    assert parse_expression(to_expression(f.root)) == f
