"""Phaseless Pauli operators stored as sparse support maps.

Letters map to symplectic bit pairs (x, z):

    I = (0, 0)   X = (1, 0)   Y = (1, 1)   Z = (0, 1)

Multiplication is the XOR of bit pairs, so phases never appear.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Tuple

# Special-qubit probabilities like 1 - p^l have thousands of digits.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

LETTERS = "IXYZ"
BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
FROM_BITS = {v: k for k, v in BITS.items()}
LETTER_RANK = {"X": 0, "Y": 1, "Z": 2}


class DimensionError(ValueError):
    """Operands live on different numbers of qubits."""


def letter_product(a: str, b: str) -> str:
    ax, az = BITS[a]
    bx, bz = BITS[b]
    return FROM_BITS[(ax ^ bx, az ^ bz)]


def parse_rational(text: str) -> Fraction:
    """Parse ``num/den`` or an integer into an exact Fraction."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class PauliOperator:
    """An immutable phaseless Pauli on ``num_qubits`` qubits."""

    __slots__ = ("_support", "_num_qubits", "_key")

    def __init__(self, support: Mapping[int, str] | Iterable[Tuple[int, str]], num_qubits: int):
        items = support.items() if isinstance(support, Mapping) else support
        clean: Dict[int, str] = {}
        for index, letter in items:
            if letter not in BITS:
                raise ValueError(f"unknown Pauli letter {letter!r}")
            if not 0 <= index < num_qubits:
                raise ValueError(f"qubit {index} outside 0..{num_qubits - 1}")
            if letter != "I":
                clean[index] = letter
        self._support = clean
        self._num_qubits = num_qubits
        self._key = tuple(sorted((i, LETTER_RANK[l]) for i, l in clean.items()))

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliOperator":
        return cls({}, num_qubits)

    @classmethod
    def from_literal(cls, text: str, num_qubits: int) -> "PauliOperator":
        """Parse tokens like ``X0 Y3 Z17``; the empty string is the identity."""
        support: Dict[int, str] = {}
        for token in text.split():
            letter, index = token[0], token[1:]
            if letter not in "XYZ" or not index.isdigit():
                raise ValueError(f"bad Pauli token {token!r}")
            q = int(index)
            if q in support:
                raise ValueError(f"qubit {q} listed twice")
            support[q] = letter
        return cls(support, num_qubits)

    @property
    def num_qubits(self) -> int:
        return self._num_qubits

    @property
    def support(self) -> Dict[int, str]:
        return dict(self._support)

    def __getitem__(self, index: int) -> str:
        return self._support.get(index, "I")

    def items(self) -> Iterator[Tuple[int, str]]:
        return iter(sorted(self._support.items()))

    def weight(self) -> int:
        return len(self._support)

    def to_literal(self) -> str:
        return " ".join(f"{l}{i}" for i, l in sorted(self._support.items()))

    def to_symplectic(self) -> Tuple[int, int]:
        """Dense view as two bit masks (x bits, z bits), qubit i at bit i."""
        x = z = 0
        for i, l in self._support.items():
            bx, bz = BITS[l]
            x |= bx << i
            z |= bz << i
        return x, z

    @classmethod
    def from_symplectic(cls, x: int, z: int, num_qubits: int) -> "PauliOperator":
        support = {}
        for i in range(num_qubits):
            bits = ((x >> i) & 1, (z >> i) & 1)
            if bits != (0, 0):
                support[i] = FROM_BITS[bits]
        return cls(support, num_qubits)

    def sort_key(self) -> tuple:
        """Canonical total order: lexicographic over (qubit, letter) pairs."""
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return self._num_qubits == other._num_qubits and self._support == other._support

    def __hash__(self) -> int:
        return hash((self._num_qubits, self._key))

    def __lt__(self, other: "PauliOperator") -> bool:
        return self._key < other._key

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def __repr__(self) -> str:
        return f"PauliOperator({self.to_literal()!r}, n={self._num_qubits})"


def _check(p: PauliOperator, q: PauliOperator) -> None:
    if p.num_qubits != q.num_qubits:
        raise DimensionError(f"{p.num_qubits} qubits vs {q.num_qubits} qubits")


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Letterwise product with phases dropped."""
    _check(p, q)
    out = dict(p._support)
    for i, l in q._support.items():
        out[i] = letter_product(out.get(i, "I"), l)
    return PauliOperator(out, p.num_qubits)


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    """True iff the two operators differ (non-trivially) on an even number of qubits."""
    _check(p, q)
    small, big = (p._support, q._support) if len(p._support) <= len(q._support) else (q._support, p._support)
    count = 0
    for i, l in small.items():
        other = big.get(i)
        if other is not None and other != l:
            count += 1
    return count % 2 == 0


def weight(p: PauliOperator) -> int:
    return p.weight()
