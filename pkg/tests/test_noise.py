import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_noise
from surfred.gadgets import template
from surfred.noise import NoiseModel, QubitNoise, allowed_letters, probability_of, support
from surfred.pauli import DimensionError, PauliOperator

p = Fraction(1, 4)


def test_three_errors_three_idle_option_counts():
    noise = NoiseModel(8, {
        0: QubitNoise(pX=p), 1: QubitNoise(pZ=p), 2: QubitNoise(pX=p, pZ=p),
        3: QubitNoise(pX=p), 4: QubitNoise(pX=p, pZ=p), 5: QubitNoise(p, p, p),
    })
    e = PauliOperator.from_literal("X0 Z1 Z2", 8)
    assert probability_of(noise, e) == p ** 3 * (1 - p) * (1 - 2 * p) * (1 - 3 * p)


def test_identity_probability(rng):
    noise = random_noise(rng, 5)
    expect = Fraction(1)
    for q in range(5):
        n = noise[q]
        expect *= 1 - n.pX - n.pY - n.pZ
    assert probability_of(noise, PauliOperator.identity(5)) == expect


def test_forbidden_letter_gives_zero():
    noise = NoiseModel(2, {0: QubitNoise(pX=p)})
    assert probability_of(noise, PauliOperator.from_literal("Z0", 2)) == 0
    assert probability_of(noise, PauliOperator.from_literal("X1", 2)) == 0


def test_validation():
    with pytest.raises(ValueError):
        QubitNoise(pX=Fraction(3, 4), pZ=Fraction(1, 2))
    with pytest.raises(ValueError):
        QubitNoise(pX=-1)
    with pytest.raises(IndexError):
        NoiseModel(2, {2: QubitNoise(pX=p)})
    with pytest.raises(DimensionError):
        probability_of(NoiseModel(2), PauliOperator.identity(3))


def test_allowed_letters_and_support():
    noise = NoiseModel(3, {1: QubitNoise(pX=p), 2: QubitNoise(pX=1 - p ** 40)})
    assert allowed_letters(noise, 0) == {"I"}
    assert allowed_letters(noise, 1) == {"I", "X"}
    assert allowed_letters(noise, 2) == {"I", "X"}
    assert support(NoiseModel(4)) == []
    assert support(noise) == [1, 2]


def test_variable_gadget_support_is_one_column():
    t = template("VARIABLE")
    cols = {c for c, _ in t.qubits}
    assert len(cols) == 1
    assert set(t.qubits.values()) == {"X"}
    assert len(t.qubits) == t.height


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.randoms(use_true_random=False))
def test_normalization(n, rnd):
    noise = random_noise(rnd, n)
    total = sum(
        (probability_of(noise, PauliOperator(dict(enumerate(letters)), n)) for letters in itertools.product("IXYZ", repeat=n)),
        Fraction(0),
    )
    assert total == 1


@settings(max_examples=50, deadline=None)
@given(st.randoms(use_true_random=False))
def test_probability_factorizes(rnd):
    noise = random_noise(rnd, 6)
    e = PauliOperator({q: rnd.choice("IXYZ") for q in range(6)}, 6)
    expect = Fraction(1)
    for q in range(6):
        expect *= noise[q].prob(e[q])
    assert probability_of(noise, e) == expect
