"""Rotated surface code on a w x h grid.

Conventions
-----------
Qubits sit at integer (col, row), row 0 at the bottom, index = row * w + col.
The plaquette anchored at (c, r) covers (c, r), (c+1, r), (c, r+1), (c+1, r+1)
and is X-type iff c + r is odd.  Anchors with c = -1, c = w-1, r = -1 or
r = h-1 are two-qubit boundary generators; only those whose kind matches the
side are kept (X on top/bottom, Z on left/right).  Generators are indexed in
(row, col) order of their anchors.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

from surfred.pauli import PauliOperator, commutes, multiply

Coord = Tuple[int, int]


class InvalidDimension(ValueError):
    pass


class SizeError(ValueError):
    """An exhaustive operation was asked to exceed its configured cap."""


class PreconditionError(ValueError):
    pass


def plaquette_kind(c: int, r: int) -> str:
    return "X" if (c + r) % 2 else "Z"


@dataclass(frozen=True)
class StabilizerGenerator:
    kind: str
    qubits: FrozenSet[int]
    position: Coord

    def as_pauli(self, num_qubits: int) -> PauliOperator:
        return PauliOperator({q: self.kind for q in self.qubits}, num_qubits)


@dataclass(frozen=True)
class SyndromeVector:
    flipped: FrozenSet[int] = frozenset()

    def __xor__(self, other: "SyndromeVector") -> "SyndromeVector":
        return SyndromeVector(self.flipped ^ other.flipped)

    def sorted(self) -> List[int]:
        return sorted(self.flipped)


def _count_parity(n: int, parity: int) -> int:
    """Number of integers r in [0, n) with r % 2 == parity."""
    return (n + 1) // 2 if parity == 0 else n // 2


class RotatedLayout:
    """Immutable description of a w x h rotated surface code.

    Generators are computed on demand, so very tall or wide layouts cost
    nothing until they are queried.
    """

    def __init__(self, width: int, height: int):
        if width < 2 or height < 2:
            raise InvalidDimension(f"need w, h >= 2, got {width}x{height}")
        self.width = width
        self.height = height
        self.num_qubits = width * height

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RotatedLayout) and (self.width, self.height) == (other.width, other.height)

    def __hash__(self) -> int:
        return hash((self.width, self.height))

    def __repr__(self) -> str:
        return f"RotatedLayout({self.width}x{self.height})"

    # -- qubits -------------------------------------------------------
    def qubit_index(self, col: int, row: int) -> int:
        if not (0 <= col < self.width and 0 <= row < self.height):
            raise IndexError(f"qubit ({col},{row}) outside {self.width}x{self.height}")
        return row * self.width + col

    def qubit_coords(self, index: int) -> Coord:
        return index % self.width, index // self.width

    # -- generators ---------------------------------------------------
    def has_generator(self, c: int, r: int) -> bool:
        w, h = self.width, self.height
        if not (-1 <= c <= w - 1 and -1 <= r <= h - 1):
            return False
        kind = plaquette_kind(c, r)
        on_x_side = r in (-1, h - 1)
        on_z_side = c in (-1, w - 1)
        if on_x_side and on_z_side:
            return False
        if on_x_side:
            return kind == "X"
        if on_z_side:
            return kind == "Z"
        return True

    def _row_count(self, r: int) -> int:
        w, h = self.width, self.height
        if r == -1:
            return _count_parity(w - 1, 0)
        if r == h - 1:
            return _count_parity(w - 1, h % 2)
        return (w - 1) + (r % 2) + (1 if (w - 1 + r) % 2 == 0 else 0)

    def _row_offset(self, r: int) -> int:
        """Number of generators anchored in rows strictly below r."""
        w = self.width
        if r <= -1:
            return 0
        offset = self._row_count(-1)
        bulk_rows = min(r, self.height - 1)
        offset += bulk_rows * (w - 1)
        offset += _count_parity(bulk_rows, 1)
        offset += _count_parity(bulk_rows, (w - 1) % 2)
        if r > self.height - 1:
            offset += self._row_count(self.height - 1)
        return offset

    @cached_property
    def num_generators(self) -> int:
        return self._row_offset(self.height)

    def generator_index(self, c: int, r: int) -> int:
        if not self.has_generator(c, r):
            raise KeyError(f"no generator anchored at ({c},{r})")
        w, h = self.width, self.height
        base = self._row_offset(r)
        if r == -1:
            return base + _count_parity(c, 0)
        if r == h - 1:
            return base + _count_parity(c, h % 2)
        left = r % 2
        if c == -1:
            return base
        return base + left + c

    def generator_anchor(self, index: int) -> Coord:
        if not 0 <= index < self.num_generators:
            raise IndexError(index)
        lo, hi = -1, self.height - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._row_offset(mid) <= index:
                lo = mid
            else:
                hi = mid - 1
        r = lo
        k = index - self._row_offset(r)
        for c in range(-1, self.width):
            if self.has_generator(c, r):
                if k == 0:
                    return c, r
                k -= 1
        raise AssertionError("generator index bookkeeping broken")

    def generator_qubits(self, c: int, r: int) -> FrozenSet[int]:
        out = []
        for dc in (0, 1):
            for dr in (0, 1):
                x, y = c + dc, r + dr
                if 0 <= x < self.width and 0 <= y < self.height:
                    out.append(y * self.width + x)
        return frozenset(out)

    def generator(self, index: int) -> StabilizerGenerator:
        c, r = self.generator_anchor(index)
        return StabilizerGenerator(plaquette_kind(c, r), self.generator_qubits(c, r), (c, r))

    def iter_generator_anchors(self) -> Iterator[Coord]:
        for r in range(-1, self.height):
            for c in range(-1, self.width):
                if self.has_generator(c, r):
                    yield c, r

    @cached_property
    def generators(self) -> List[StabilizerGenerator]:
        return [
            StabilizerGenerator(plaquette_kind(c, r), self.generator_qubits(c, r), (c, r))
            for c, r in self.iter_generator_anchors()
        ]

    def anchors_touching(self, index: int) -> List[Coord]:
        col, row = self.qubit_coords(index)
        out = []
        for dc in (-1, 0):
            for dr in (-1, 0):
                if self.has_generator(col + dc, row + dr):
                    out.append((col + dc, row + dr))
        return out

    # -- logical operators ----------------------------------------------
    @cached_property
    def logical_x(self) -> PauliOperator:
        """X on every qubit of column 0, bottom boundary to top boundary."""
        return PauliOperator({self.qubit_index(0, r): "X" for r in range(self.height)}, self.num_qubits)

    @cached_property
    def logical_z(self) -> PauliOperator:
        """Z on every qubit of row 0, left boundary to right boundary."""
        return PauliOperator({self.qubit_index(c, 0): "Z" for c in range(self.width)}, self.num_qubits)

    def anticommutes_logical_x(self, p: PauliOperator) -> bool:
        count = 0
        for i, l in p.items():
            if i % self.width == 0 and l != "X":
                count += 1
        return count % 2 == 1

    def anticommutes_logical_z(self, p: PauliOperator) -> bool:
        count = 0
        for i, l in p.items():
            if i < self.width and l != "Z":
                count += 1
        return count % 2 == 1


def build_rotated_layout(w: int, h: int) -> RotatedLayout:
    return RotatedLayout(w, h)


def syndrome_of(layout: RotatedLayout, error: PauliOperator) -> SyndromeVector:
    """Indices of generators anticommuting with ``error``."""
    if error.num_qubits != layout.num_qubits:
        raise PreconditionError(f"error on {error.num_qubits} qubits, layout has {layout.num_qubits}")
    # parity per anchor first; index lookups only for the odd ones
    w = layout.width
    odd = set()
    for q, letter in error.support.items():
        col, row = q % w, q // w
        for c in (col - 1, col):
            for r in (row - 1, row):
                # an X-type plaquette ((c + r) odd) detects Y and Z, a Z-type one X and Y
                if letter == "Y" or ((c + r) % 2 == 1) == (letter == "Z"):
                    odd ^= {(c, r)}
    flipped = frozenset(layout.generator_index(c, r) for c, r in odd if layout.has_generator(c, r))
    return SyndromeVector(flipped)


def logical_class(layout: RotatedLayout, error: PauliOperator, reference: PauliOperator) -> str:
    """Which of I, X, Y, Z separates two errors with the same syndrome."""
    if syndrome_of(layout, error) != syndrome_of(layout, reference):
        raise PreconditionError("errors have different syndromes")
    return logical_class_unchecked(layout, multiply(error, reference))


def logical_class_unchecked(layout: RotatedLayout, difference: PauliOperator) -> str:
    ax = layout.anticommutes_logical_x(difference)
    az = layout.anticommutes_logical_z(difference)
    return {(False, False): "I", (False, True): "X", (True, False): "Z", (True, True): "Y"}[(ax, az)]


def logical_operator(layout: RotatedLayout, cls: str) -> PauliOperator:
    ident = PauliOperator.identity(layout.num_qubits)
    return {
        "I": ident,
        "X": layout.logical_x,
        "Z": layout.logical_z,
        "Y": multiply(layout.logical_x, layout.logical_z),
    }[cls]


def enumerate_stabilizer_group(layout: RotatedLayout, cap: int = 16) -> List[PauliOperator]:
    """All 2^(wh-1) products of generator subsets, in Gray-code order."""
    gens = layout.generators
    if len(gens) > cap:
        raise SizeError(f"{len(gens)} generators exceed enumeration cap {cap}")
    n = layout.num_qubits
    masks = []
    for g in gens:
        x = z = 0
        for q in g.qubits:
            if g.kind == "X":
                x |= 1 << q
            else:
                z |= 1 << q
        masks.append((x, z))
    out = []
    x = z = 0
    seen = set()
    for k in range(1 << len(gens)):
        if k:
            bit = (k & -k).bit_length() - 1
            x ^= masks[bit][0]
            z ^= masks[bit][1]
        seen.add((x, z))
        out.append(PauliOperator.from_symplectic(x, z, n))
    assert len(seen) == len(out), "generators are not independent"
    return out


def stabilizer_masks(layout: RotatedLayout) -> List[Tuple[str, int]]:
    """(kind, qubit bit mask) per generator, for dense enumeration."""
    out = []
    for g in layout.generators:
        m = 0
        for q in g.qubits:
            m |= 1 << q
        out.append((g.kind, m))
    return out


def commutation_table_ok(layout: RotatedLayout) -> bool:
    """Pairwise commutation of generators plus the logical pattern."""
    paulis = [g.as_pauli(layout.num_qubits) for g in layout.generators]
    for i in range(len(paulis)):
        for j in range(i + 1, len(paulis)):
            if not commutes(paulis[i], paulis[j]):
                return False
    for p in paulis:
        if not (commutes(p, layout.logical_x) and commutes(p, layout.logical_z)):
            return False
    return not commutes(layout.logical_x, layout.logical_z)
