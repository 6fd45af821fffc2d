from __future__ import annotations

import random
from fractions import Fraction

import pytest

from surfred.formula import And, Formula, Not, Or, Var, to_expression
from surfred.noise import NoiseModel, QubitNoise

EXAMPLE = "((x1|x2)&((!x2|x3)&(!x1|!x3)))"


def random_formula(rng: random.Random, n: int, extra: int = 1) -> Formula:
    """Random formula over x1..xn using every variable once plus ``extra``
    repeated leaves."""
    leaves = list(range(1, n + 1)) + [rng.randint(1, n) for _ in range(extra)]
    rng.shuffle(leaves)
    nodes = [Not(Var(v)) if rng.random() < 0.4 else Var(v) for v in leaves]
    while len(nodes) > 1:
        i = rng.randrange(len(nodes) - 1)
        op = And if rng.random() < 0.5 else Or
        node = op(nodes[i], nodes[i + 1])
        if rng.random() < 0.15:
            node = Not(node)
        nodes[i:i + 2] = [node]
    return Formula(nodes[0], n)


def formula_corpus(count: int, seed: int, max_vars: int = 4, max_extra: int = 1):
    rng = random.Random(seed)
    out, seen = [], set()
    while len(out) < count:
        n = rng.randint(1, max_vars)
        f = random_formula(rng, n, rng.randint(0, max_extra) if n < max_vars else 0)
        key = to_expression(f.root)
        if key not in seen:
            seen.add(key)
            out.append(f)
    return out


def random_qubit_noise(rng: random.Random, max_den: int = 12) -> QubitNoise:
    d = rng.randint(1, max_den)
    while True:
        a = [rng.randint(0, d) for _ in range(3)]
        if sum(a) <= d:
            return QubitNoise(*(Fraction(x, d) for x in a))


def random_noise(rng: random.Random, n: int, max_den: int = 12) -> NoiseModel:
    return NoiseModel(n, {q: random_qubit_noise(rng, max_den) for q in range(n)})


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


# criterion number -> (title, passed, seconds, limit), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed, dt, limit = ACCEPTANCE[n]
        terminalreporter.write_line(
            f"criterion {n}: {'PASS' if passed else 'FAIL'}  {title}  ({dt:.1f}s, limit {limit}s)"
        )
