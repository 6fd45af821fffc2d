"""Backtracking enumeration of Pauli errors under parity constraints.

Each variable is one qubit with a domain of allowed letters (bit mask over
I, X, Y, Z).  Each constraint says the x bits (or z bits) of a set of
qubits XOR to a target.  Commutation of an error with an X-type generator
is a z-bit parity, with a Z-type generator an x-bit parity.

Domains need not be affine ({I, X, Z} is fine), so the solver branches on
the first undecided qubit in the given order and runs unit propagation
after every choice.  The result is the complete solution set.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

LETTER_INDEX = {"I": 0, "X": 1, "Y": 2, "Z": 3}
INDEX_LETTER = "IXYZ"
# masks of letters whose (x or z) bit is 1 / 0
BIT_ONE = (0b0110, 0b1100)
BIT_ZERO = (0b1001, 0b0011)
X_BIT, Z_BIT = 0, 1


def letters_mask(letters: Iterable[str]) -> int:
    m = 0
    for l in letters:
        m |= 1 << LETTER_INDEX[l]
    return m


def mask_letters(mask: int) -> str:
    return "".join(INDEX_LETTER[i] for i in range(4) if mask >> i & 1)


class SearchBudgetExceeded(RuntimeError):
    """Enumeration hit its node budget before finishing."""


@dataclass
class SearchStats:
    nodes: int = 0
    solutions: int = 0
    seconds: float = 0.0


@dataclass(frozen=True)
class Constraint:
    variables: Tuple[int, ...]
    bit: int
    target: int


class ParitySearch:
    def __init__(self, domains: Sequence[int], constraints: Sequence[Constraint]):
        self.domains = list(domains)
        self.constraints = list(constraints)
        self.watch: List[List[int]] = [[] for _ in self.domains]
        for ci, c in enumerate(self.constraints):
            for v in c.variables:
                self.watch[v].append(ci)
        self.stats = SearchStats()

    def _propagate(self, dom: List[int], trail: List[Tuple[int, int]], queue: List[int]) -> bool:
        constraints = self.constraints
        watch = self.watch
        pending = set(queue)
        while queue:
            ci = queue.pop()
            pending.discard(ci)
            c = constraints[ci]
            one, zero = BIT_ONE[c.bit], BIT_ZERO[c.bit]
            parity = c.target
            unknown = -1
            n_unknown = 0
            for v in c.variables:
                m = dom[v]
                if not m & one:
                    continue
                if not m & zero:
                    parity ^= 1
                    continue
                n_unknown += 1
                unknown = v
                if n_unknown > 1:
                    break
            if n_unknown == 0:
                if parity:
                    return False
            elif n_unknown == 1:
                new = dom[unknown] & (one if parity else zero)
                if not new:
                    return False
                trail.append((unknown, dom[unknown]))
                dom[unknown] = new
                for cj in watch[unknown]:
                    if cj not in pending:
                        pending.add(cj)
                        queue.append(cj)
        return True

    def solve(self, max_nodes: Optional[int] = None, max_solutions: Optional[int] = None) -> List[List[int]]:
        """All solutions as lists of letter indices (0..3) per variable."""
        start = time.perf_counter()
        dom = list(self.domains)
        trail: List[Tuple[int, int]] = []
        solutions: List[List[int]] = []
        if any(m == 0 for m in dom) or not self._propagate(dom, trail, list(range(len(self.constraints)))):
            self.stats.seconds = time.perf_counter() - start
            return solutions
        n = len(dom)
        # stack entries: (variable, remaining letter masks, trail mark)
        stack: List[Tuple[int, List[int], int]] = []
        pointer = 0

        def next_open(i: int) -> int:
            while i < n and dom[i] & (dom[i] - 1) == 0:
                i += 1
            return i

        pointer = next_open(0)
        descend = True
        while True:
            if descend:
                self.stats.nodes += 1
                if max_nodes is not None and self.stats.nodes > max_nodes:
                    raise SearchBudgetExceeded(f"more than {max_nodes} search nodes")
                if pointer >= n:
                    solutions.append([dom[i].bit_length() - 1 for i in range(n)])
                    if max_solutions is not None and len(solutions) >= max_solutions:
                        break
                    descend = False
                    continue
                choices = [1 << k for k in range(4) if dom[pointer] >> k & 1]
                stack.append((pointer, choices, len(trail)))
            if not stack:
                break
            var, choices, mark = stack[-1]
            while len(trail) > mark:
                v, old = trail.pop()
                dom[v] = old
            if not choices:
                stack.pop()
                descend = False
                continue
            choice = choices.pop(0)
            trail.append((var, dom[var]))
            dom[var] = choice
            if self._propagate(dom, trail, list(self.watch[var])):
                pointer = next_open(var + 1)
                descend = True
            else:
                descend = False
        self.stats.solutions = len(solutions)
        self.stats.seconds = time.perf_counter() - start
        return solutions


def plane_kind(c: int, r: int, checker: int = 1) -> str:
    """Plaquette kind on an unbounded plane: X iff (c + r) % 2 == checker."""
    return "X" if (c + r) % 2 == checker else "Z"


def plane_system(
    domains: Dict[Tuple[int, int], str],
    minus: Iterable[Tuple[int, int]] = (),
    checker: int = 1,
    constrained: Optional[Iterable[Tuple[int, int]]] = None,
) -> Tuple[List[Tuple[int, int]], ParitySearch]:
    """Parity system for a patch on an unbounded plane.

    ``domains`` maps qubit coordinates to allowed letters (including I if the
    qubit may be idle).  Constraints come from every plaquette touching a
    qubit in ``constrained`` (default: all qubits).
    """
    order = sorted(domains, key=lambda q: (q[1], q[0]))
    index = {q: i for i, q in enumerate(order)}
    minus = set(minus)
    core = set(domains) if constrained is None else set(constrained)
    anchors = set()
    for c, r in core:
        for dc in (-1, 0):
            for dr in (-1, 0):
                anchors.add((c + dc, r + dr))
    constraints = []
    for c, r in sorted(anchors, key=lambda a: (a[1], a[0])):
        kind = plane_kind(c, r, checker)
        members = tuple(index[q] for q in ((c, r), (c + 1, r), (c, r + 1), (c + 1, r + 1)) if q in index)
        bit = Z_BIT if kind == "X" else X_BIT
        constraints.append(Constraint(members, bit, 1 if (c, r) in minus else 0))
    dom = [letters_mask(domains[q]) for q in order]
    return order, ParitySearch(dom, constraints)
