"""Exact QMLD / DQMLD oracles and their decision versions.

Three ways to decode:

* dense brute force over all 4^n Paulis (numpy filters the syndrome, exact
  fractions score the survivors), for codes of up to a dozen qubits;
* support-restricted enumeration, which only branches over the noisy
  qubits and propagates the parity checks;
* structured decoding of compiled instances, which scores one witness per
  assignment.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from surfred.lattice import (
    PreconditionError,
    RotatedLayout,
    SizeError,
    SyndromeVector,
    enumerate_stabilizer_group,
    logical_class_unchecked,
    logical_operator,
    plaquette_kind,
    syndrome_of,
)
from surfred.noise import NoiseModel, QubitNoise, probability_of
from surfred.pauli import PauliOperator, multiply
from surfred.search import BIT_ONE, INDEX_LETTER, LETTER_INDEX, X_BIT, Z_BIT, Constraint, ParitySearch, letters_mask

CLASSES = ("I", "X", "Y", "Z")

# Resource caps.  SURFRED_CAPS=large raises them for patient runs.
_PROFILES = {
    "default": {"dense": 12, "stabilizer": 16, "search_qubits": 20_000, "search_nodes": 2_000_000},
    "large": {"dense": 13, "stabilizer": 20, "search_qubits": 200_000, "search_nodes": 50_000_000},
}


def caps() -> Dict[str, int]:
    name = os.environ.get("SURFRED_CAPS", "default")
    if name not in _PROFILES:
        raise ValueError(f"unknown cap profile {name!r}; choose from {sorted(_PROFILES)}")
    return dict(_PROFILES[name])


class OracleFault(RuntimeError):
    """A decision oracle gave answers no single instance could produce."""


@dataclass(frozen=True)
class DecodingInstance:
    layout: RotatedLayout
    noise: NoiseModel
    syndrome: SyndromeVector

    def __post_init__(self):
        if self.noise.num_qubits != self.layout.num_qubits:
            raise PreconditionError("noise model and layout disagree on qubit count")
        if any(i >= self.layout.num_generators for i in self.syndrome.flipped):
            raise PreconditionError("syndrome index out of range")


def as_decoding(inst) -> DecodingInstance:
    if isinstance(inst, DecodingInstance):
        return inst
    return DecodingInstance(inst.layout, inst.noise, inst.syndrome)


@dataclass
class DecodeResult:
    error: PauliOperator
    probability: Fraction
    cls: Optional[str] = None
    cosets: Optional[Dict[str, Fraction]] = None
    reference: Optional[PauliOperator] = None
    tie: bool = False
    zero_probability: bool = False
    assignment: Optional[Tuple[bool, ...]] = None
    calls: int = 0


# -- dense enumeration ----------------------------------------------------------------

def _popcount_table() -> np.ndarray:
    t = np.zeros(1 << 16, dtype=np.uint8)
    for i in range(1, 1 << 16):
        t[i] = t[i >> 1] + (i & 1)
    return t


_POP = None


def _parity(a: np.ndarray, mask: int) -> np.ndarray:
    global _POP
    if _POP is None:
        _POP = _popcount_table()
    return _POP[a & mask] & 1


@dataclass
class _Dense:
    errors: List[PauliOperator]
    probs: List[Fraction]
    classes: List[str]  # relative to the identity (raw logical signature)


def _dense(inst: DecodingInstance, cap: Optional[int] = None) -> _Dense:
    """All syndrome-consistent Paulis with exact probabilities."""
    layout, noise = inst.layout, inst.noise
    n = layout.num_qubits
    cap = caps()["dense"] if cap is None else cap
    if n > cap:
        raise SizeError(f"{n} qubits exceed the dense cap {cap}")
    idx = np.arange(4 ** n, dtype=np.uint32)
    xs = np.zeros(idx.shape, dtype=np.uint16)
    zs = np.zeros(idx.shape, dtype=np.uint16)
    for q in range(n):
        letter = (idx >> (2 * q)) & 3  # 0 I, 1 X, 2 Y, 3 Z
        xs |= (((letter == 1) | (letter == 2)).astype(np.uint16) << q)
        zs |= (((letter == 2) | (letter == 3)).astype(np.uint16) << q)
    keep = np.ones(idx.shape, dtype=bool)
    for gi, g in enumerate(layout.generators):
        mask = sum(1 << q for q in g.qubits)
        checked = zs if g.kind == "X" else xs
        target = 1 if gi in inst.syndrome.flipped else 0
        keep &= _parity(checked, mask) == target
    lx = sum(1 << q for q in layout.logical_x.support)
    lz = sum(1 << q for q in layout.logical_z.support)
    survivors = idx[keep]
    ax = _parity(zs[keep], lx).astype(bool)  # anticommutes with logical X
    az = _parity(xs[keep], lz).astype(bool)
    errors, probs, classes = [], [], []
    for k, a, b in zip(survivors.tolist(), ax.tolist(), az.tolist()):
        support = {}
        for q in range(n):
            l = (k >> (2 * q)) & 3
            if l:
                support[q] = INDEX_LETTER[l]
        e = PauliOperator(support, n)
        errors.append(e)
        probs.append(probability_of(noise, e))
        classes.append({(False, False): "I", (False, True): "X", (True, False): "Z", (True, True): "Y"}[(a, b)])
    return _Dense(errors, probs, classes)


def _best(errors: Sequence[PauliOperator], probs: Sequence[Fraction]) -> int:
    best = None
    for i, (e, p) in enumerate(zip(errors, probs)):
        if best is None or p > probs[best] or (p == probs[best] and e < errors[best]):
            best = i
    return best


def brute_force_qmld(inst, cap: Optional[int] = None) -> DecodeResult:
    """Maximum-probability consistent error over all 4^n Paulis."""
    inst = as_decoding(inst)
    d = _dense(inst, cap)
    if not d.errors:
        raise PreconditionError("no Pauli has this syndrome")
    i = _best(d.errors, d.probs)
    return DecodeResult(d.errors[i], d.probs[i], zero_probability=d.probs[i] == 0)


def _class_product(a: str, b: str) -> str:
    table = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
    x = table[a][0] ^ table[b][0]
    z = table[a][1] ^ table[b][1]
    return {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x, z)]


def _reference(errors: Sequence[PauliOperator], probs: Sequence[Fraction]) -> int:
    nonzero = [i for i, p in enumerate(probs) if p > 0]
    pool = nonzero or list(range(len(errors)))
    return min(pool, key=lambda i: errors[i].sort_key())


def brute_force_dqmld(inst, cap: Optional[int] = None, stabilizer_cap: Optional[int] = None) -> DecodeResult:
    """Four coset probabilities relative to the canonical reference error."""
    inst = as_decoding(inst)
    limits = caps()
    stabilizer_cap = limits["stabilizer"] if stabilizer_cap is None else stabilizer_cap
    if inst.layout.num_generators > stabilizer_cap:
        raise SizeError(f"{inst.layout.num_generators} generators exceed the cap {stabilizer_cap}")
    d = _dense(inst, cap)
    if not d.errors:
        raise PreconditionError("no Pauli has this syndrome")
    ref = _reference(d.errors, d.probs)
    cosets = {c: Fraction(0) for c in CLASSES}
    members: Dict[str, List[int]] = {c: [] for c in CLASSES}
    for i, (p, c) in enumerate(zip(d.probs, d.classes)):
        rel = _class_product(c, d.classes[ref])
        cosets[rel] += p
        members[rel].append(i)
    top = max(cosets.values())
    winners = [c for c in CLASSES if cosets[c] == top]
    cls = winners[0]
    i = _best([d.errors[j] for j in members[cls]], [d.probs[j] for j in members[cls]])
    j = members[cls][i]
    return DecodeResult(d.errors[j], d.probs[j], cls=cls, cosets=cosets, reference=d.errors[ref],
                        tie=len(winners) > 1, zero_probability=top == 0)


def coset_probabilities_by_group(inst, reference: PauliOperator, stabilizer_cap: Optional[int] = None) -> Dict[str, Fraction]:
    """Coset probabilities summed over T.L.S for every stabilizer S.

    Independent of the dense grouping: it walks the stabilizer group rather
    than filtering all Paulis by syndrome.
    """
    inst = as_decoding(inst)
    cap = caps()["stabilizer"] if stabilizer_cap is None else stabilizer_cap
    group = enumerate_stabilizer_group(inst.layout, cap)
    out = {}
    for c in CLASSES:
        base = multiply(reference, logical_operator(inst.layout, c))
        out[c] = sum((probability_of(inst.noise, multiply(base, s)) for s in group), Fraction(0))
    return out


def total_consistent_mass(inst, cap: Optional[int] = None) -> Fraction:
    return sum(_dense(as_decoding(inst), cap).probs, Fraction(0))


# -- support-restricted enumeration -------------------------------------------------------

def support_restricted_enumerate(inst, max_nodes: Optional[int] = None,
                                 max_qubits: Optional[int] = None) -> List[Tuple[PauliOperator, Fraction]]:
    """Every nonzero-probability error consistent with the syndrome.

    Only qubits with noise are variables; every generator touching them
    becomes a parity constraint.  Raises SearchBudgetExceeded when the
    node budget runs out (an inconclusive answer, never a partial one).
    """
    inst = as_decoding(inst)
    layout, noise = inst.layout, inst.noise
    limits = caps()
    max_nodes = limits["search_nodes"] if max_nodes is None else max_nodes
    max_qubits = limits["search_qubits"] if max_qubits is None else max_qubits
    qubits = [q for q, _ in noise.items()]
    if len(qubits) > max_qubits:
        raise SizeError(f"{len(qubits)} noisy qubits exceed the search cap {max_qubits}")
    index = {q: i for i, q in enumerate(qubits)}
    domains = [letters_mask(noise[q].allowed()) for q in qubits]
    anchors = set()
    for q in qubits:
        anchors.update(layout.anchors_touching(q))
    constraints = []
    touched = set()
    for c, r in sorted(anchors, key=lambda a: (a[1], a[0])):
        gi = layout.generator_index(c, r)
        touched.add(gi)
        members = tuple(index[q] for q in sorted(layout.generator_qubits(c, r)) if q in index)
        bit = Z_BIT if plaquette_kind(c, r) == "X" else X_BIT
        constraints.append(Constraint(members, bit, 1 if gi in inst.syndrome.flipped else 0))
    if inst.syndrome.flipped - touched:
        return []  # a flipped generator no noisy qubit can explain
    search = ParitySearch(domains, constraints)
    out = []
    for sol in search.solve(max_nodes=max_nodes):
        e = PauliOperator({qubits[i]: INDEX_LETTER[l] for i, l in enumerate(sol) if l}, layout.num_qubits)
        out.append((e, probability_of(noise, e)))
    out.sort(key=lambda ep: ep[0].sort_key())
    return out


def support_qmld(inst, **kw) -> DecodeResult:
    found = support_restricted_enumerate(inst, **kw)
    if not found:
        raise PreconditionError("no nonzero-probability error has this syndrome")
    i = _best([e for e, _ in found], [p for _, p in found])
    return DecodeResult(found[i][0], found[i][1])


def support_dqmld(inst, **kw) -> DecodeResult:
    """Coset probabilities over the nonzero-probability consistent errors."""
    inst = as_decoding(inst)
    found = support_restricted_enumerate(inst, **kw)
    if not found:
        raise PreconditionError("no nonzero-probability error has this syndrome")
    ref = found[0][0]  # already in canonical order
    cosets = {c: Fraction(0) for c in CLASSES}
    members: Dict[str, List[int]] = {c: [] for c in CLASSES}
    for i, (e, p) in enumerate(found):
        c = logical_class_unchecked(inst.layout, multiply(e, ref))
        cosets[c] += p
        members[c].append(i)
    top = max(cosets.values())
    winners = [c for c in CLASSES if cosets[c] == top]
    cls = winners[0]
    i = _best([found[j][0] for j in members[cls]], [found[j][1] for j in members[cls]])
    j = members[cls][i]
    return DecodeResult(found[j][0], found[j][1], cls=cls, cosets=cosets, reference=ref, tie=len(winners) > 1)


# -- structured decoding of compiled instances -------------------------------------------

def _witness_table(inst):
    from surfred.compiler import all_assignments, assignment_witness, output_value

    rows = []
    for a in all_assignments(inst.num_vars):
        e = assignment_witness(inst, a)
        rows.append((a, e, probability_of(inst.noise, e), output_value(inst, e, check=False)))
    return rows


def structured_qmld(inst) -> DecodeResult:
    """Best witness over all assignments."""
    rows = _witness_table(inst)
    best = None
    for a, e, p, _ in rows:
        if best is None or p > best[2] or (p == best[2] and e < best[1]):
            best = (a, e, p)
    return DecodeResult(best[1], best[2], assignment=best[0])


def structured_dqmld(inst) -> DecodeResult:
    """Coset probabilities a*q*r and b*q*(1-r) from the witness table."""
    if not inst.mode.kind.startswith("dqmld"):
        raise ValueError("structured DQMLD needs a DQMLD-mode instance")
    rows = _witness_table(inst)
    sat = [row for row in rows if row[3]]
    unsat = [row for row in rows if not row[3]]
    ref = min(rows, key=lambda row: row[1].sort_key())
    mass_sat = sum((row[2] for row in sat), Fraction(0))
    mass_unsat = sum((row[2] for row in unsat), Fraction(0))
    sat_cls = "I" if ref[3] else "X"
    unsat_cls = "X" if ref[3] else "I"
    cosets = {c: Fraction(0) for c in CLASSES}
    cosets[sat_cls] = mass_sat
    cosets[unsat_cls] = mass_unsat
    tie = mass_sat == mass_unsat
    if mass_sat > mass_unsat or (tie and ref[3]):
        pick, cls = min(sat, key=lambda row: row[1].sort_key()), sat_cls
    else:
        pick, cls = min(unsat, key=lambda row: row[1].sort_key()), unsat_cls
    return DecodeResult(pick[1], pick[2], cls=cls, cosets=cosets, reference=ref[1], tie=tie, assignment=pick[0])


# -- decision problems ---------------------------------------------------------------------

def decision_qmld(inst, threshold: Fraction, method: str = "auto") -> bool:
    """Is there a consistent error with probability at least ``threshold``?"""
    threshold = Fraction(threshold)
    if threshold > 1:
        return False
    inst_d = as_decoding(inst)
    if method == "auto":
        method = "brute" if inst_d.layout.num_qubits <= caps()["dense"] else "support"
    if method == "brute":
        d = _dense(inst_d)
        return any(p >= threshold for p in d.probs)
    if method == "support":
        if threshold <= 0:
            if inst_d.syndrome.flipped:
                raise SizeError("zero threshold needs dense enumeration on large codes")
            return True
        return any(p >= threshold for _, p in support_restricted_enumerate(inst_d))
    if method == "structured":
        return structured_qmld(inst).probability >= threshold
    raise ValueError(f"unknown method {method!r}")


class CallCounter:
    """Wraps a decision oracle and counts its calls."""

    def __init__(self, oracle: Callable[[DecodingInstance, Fraction], bool]):
        self.oracle = oracle
        self.calls = 0

    def __call__(self, inst: DecodingInstance, threshold: Fraction) -> bool:
        self.calls += 1
        return self.oracle(inst, threshold)


def probability_denominator(noise: NoiseModel) -> int:
    """D such that every error probability is an integer over D."""
    d = 1
    for _, n in noise.items():
        d *= math.lcm(n.pX.denominator, n.pY.denominator, n.pZ.denominator, n.idle.denominator)
    return d


def call_bound(inst) -> int:
    inst = as_decoding(inst)
    d = probability_denominator(inst.noise)
    return math.ceil(math.log2(d + 1)) + 1 + 4 * len(inst.noise.items())


_PINNED = {"I": QubitNoise(), "X": QubitNoise(pX=1), "Y": QubitNoise(pY=1), "Z": QubitNoise(pZ=1)}


def qmld_from_decision(inst, oracle: Optional[Callable[[DecodingInstance, Fraction], bool]] = None) -> DecodeResult:
    """Recover a QMLD answer from a threshold oracle.

    First a binary search finds the largest integer A with a consistent error
    of probability >= A / D; then each noisy qubit is pinned to the first
    letter for which the rescaled threshold is still met.
    """
    inst = as_decoding(inst)
    counter = oracle if isinstance(oracle, CallCounter) else CallCounter(oracle or decision_qmld)
    D = probability_denominator(inst.noise)
    if not counter(inst, Fraction(0)):
        raise PreconditionError("no Pauli has this syndrome")
    lo, hi = 0, D  # invariant: oracle(lo / D) is true
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if counter(inst, Fraction(mid, D)):
            lo = mid
        else:
            hi = mid - 1
    best = Fraction(lo, D)
    if best == 0:
        # only zero-probability errors remain; fall back to the dense answer
        res = brute_force_qmld(inst)
        res.calls = counter.calls
        return res
    noise = inst.noise
    target = best
    letters: Dict[int, str] = {}
    for q, n in inst.noise.items():
        for l in "IXYZ":
            pl = n.prob(l)
            if pl == 0:
                continue
            trial = DecodingInstance(inst.layout, noise.with_qubit(q, _PINNED[l]), inst.syndrome)
            if counter(trial, target / pl):
                noise = trial.noise
                target = target / pl
                if l != "I":
                    letters[q] = l
                break
        else:
            raise OracleFault(f"no letter on qubit {q} keeps the maximum reachable")
    error = PauliOperator(letters, inst.layout.num_qubits)
    p = probability_of(inst.noise, error)
    if p != best or syndrome_of(inst.layout, error) != inst.syndrome:
        raise OracleFault("pinned error does not reach the maximum")
    return DecodeResult(error, p, calls=counter.calls)


def _cosets_relative(inst: DecodingInstance, e: PauliOperator) -> Dict[str, Fraction]:
    if syndrome_of(inst.layout, e) != inst.syndrome:
        raise PreconditionError("error does not match the syndrome")
    if inst.layout.num_generators > caps()["stabilizer"]:
        raise SizeError("too many generators for coset enumeration")
    d = _dense(inst)
    cosets = {c: Fraction(0) for c in CLASSES}
    sig = logical_class_unchecked(inst.layout, e)
    for p, c in zip(d.probs, d.classes):
        cosets[_class_product(c, sig)] += p
    return cosets


def decision_dqmld(inst, e: PauliOperator) -> bool:
    """Is the coset of ``e`` a most likely one?"""
    cosets = _cosets_relative(as_decoding(inst), e)
    return cosets["I"] == max(cosets.values())


def acceptance_probability(inst, e: PauliOperator) -> Fraction:
    """Pr[coset of e] + 1/2 * Pr[error inconsistent with the syndrome]."""
    inst = as_decoding(inst)
    cosets = _cosets_relative(inst, e)
    consistent = sum(cosets.values(), Fraction(0))
    return cosets["I"] + (1 - consistent) / 2


def logical_variants(layout: RotatedLayout, e: PauliOperator) -> Dict[str, PauliOperator]:
    """E, X.E, Z.E and X.Z.E keyed by the logical applied."""
    return {c: multiply(logical_operator(layout, c), e) for c in CLASSES}
