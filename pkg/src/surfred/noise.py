"""Independent, non-identically distributed Pauli noise with exact probabilities."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Tuple

from surfred.pauli import DimensionError, PauliOperator

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class QubitNoise:
    pX: Fraction = ZERO
    pY: Fraction = ZERO
    pZ: Fraction = ZERO

    def __post_init__(self):
        for name in ("pX", "pY", "pZ"):
            value = Fraction(getattr(self, name))
            object.__setattr__(self, name, value)
            if value < 0:
                raise ValueError(f"{name} = {value} is negative")
        if self.pX + self.pY + self.pZ > 1:
            raise ValueError("letter probabilities sum above 1")

    @property
    def idle(self) -> Fraction:
        return 1 - self.pX - self.pY - self.pZ

    def prob(self, letter: str) -> Fraction:
        if letter == "I":
            return self.idle
        return {"X": self.pX, "Y": self.pY, "Z": self.pZ}[letter]

    def allowed(self) -> FrozenSet[str]:
        return frozenset(l for l in "IXYZ" if self.prob(l) > 0)

    def is_zero(self) -> bool:
        return self.pX == 0 and self.pY == 0 and self.pZ == 0

    @classmethod
    def uniform_over(cls, letters: Iterable[str], p: Fraction) -> "QubitNoise":
        """Each listed letter gets probability p, the rest zero."""
        letters = set(letters)
        return cls(p if "X" in letters else ZERO, p if "Y" in letters else ZERO, p if "Z" in letters else ZERO)


NO_NOISE = QubitNoise()


class NoiseModel:
    """Per-qubit noise; qubits without an entry never err."""

    def __init__(self, num_qubits: int, per_qubit: Mapping[int, QubitNoise] | None = None):
        self.num_qubits = num_qubits
        clean: Dict[int, QubitNoise] = {}
        for q, n in (per_qubit or {}).items():
            if not 0 <= q < num_qubits:
                raise IndexError(f"noise on qubit {q} outside 0..{num_qubits - 1}")
            if not n.is_zero():
                clean[q] = n
        self._noise = clean

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NoiseModel) and self.num_qubits == other.num_qubits and self._noise == other._noise

    def __getitem__(self, q: int) -> QubitNoise:
        return self._noise.get(q, NO_NOISE)

    def items(self) -> List[Tuple[int, QubitNoise]]:
        return sorted(self._noise.items())

    def with_qubit(self, q: int, noise: QubitNoise) -> "NoiseModel":
        d = dict(self._noise)
        d[q] = noise
        return NoiseModel(self.num_qubits, d)


def probability_of(noise: NoiseModel, error: PauliOperator) -> Fraction:
    """Exact probability of ``error``; identity qubits contribute their idle factor."""
    if noise.num_qubits != error.num_qubits:
        raise DimensionError(f"noise on {noise.num_qubits} qubits, error on {error.num_qubits}")
    # group by object identity: hashing big Fractions is slow
    counts: Dict[Tuple[int, str], int] = {}
    objs: Dict[int, QubitNoise] = {}
    per = noise._noise
    sup = error.support
    for q, letter in sup.items():
        n = per.get(q, NO_NOISE)
        key = (id(n), letter)
        counts[key] = counts.get(key, 0) + 1
        objs[key[0]] = n
    for q, n in per.items():
        if q not in sup:
            key = (id(n), "I")
            counts[key] = counts.get(key, 0) + 1
            objs[key[0]] = n
    result = ONE
    for (i, letter), k in counts.items():
        pl = objs[i].prob(letter)
        if pl == 0:
            return ZERO
        result *= pl ** k
    return result


def allowed_letters(noise: NoiseModel, q: int) -> FrozenSet[str]:
    if not 0 <= q < noise.num_qubits:
        raise IndexError(f"qubit {q} outside 0..{noise.num_qubits - 1}")
    return noise[q].allowed()


def support(noise: NoiseModel) -> List[int]:
    return [q for q, _ in noise.items()]
