"""Gadget templates: loading, stretching and exhaustive verification.

A template is a patch of qubits with allowed letters, a list of plaquettes
forced to -1, and ports.  A port is a virtual qubit one step outside the
box on the given side; input ports are pinned to present/absent during
verification and every other port is free to carry its string or not.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from surfred.pauli import PauliOperator
from surfred.search import (
    LETTER_INDEX,
    INDEX_LETTER,
    SearchBudgetExceeded,
    SearchStats,
    plane_kind,
    plane_system,
)

Coord = Tuple[int, int]
KINDS = ("VARIABLE", "NOT", "FANOUT", "AND", "CONVERT_X_TO_Z", "CONVERT_Z_TO_X", "CROSS_XZ", "WIRE_X", "WIRE_Z")
FILES = {
    "VARIABLE": "variable.gadget",
    "NOT": "not.gadget",
    "FANOUT": "fanout.gadget",
    "AND": "and.gadget",
    "CONVERT_X_TO_Z": "convert_x_to_z.gadget",
    "CONVERT_Z_TO_X": "convert_z_to_x.gadget",
    "CROSS_XZ": "cross_xz.gadget",
}


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class Port:
    name: str
    side: str  # bottom | top | left | right
    offset: int
    kind: str  # X | Z
    direction: str  # in | out

    def virtual(self, width: int, height: int) -> Coord:
        return {
            "bottom": (self.offset, -1),
            "top": (self.offset, height),
            "left": (-1, self.offset),
            "right": (width, self.offset),
        }[self.side]

    def inner(self, width: int, height: int) -> Coord:
        return {
            "bottom": (self.offset, 0),
            "top": (self.offset, height - 1),
            "left": (0, self.offset),
            "right": (width - 1, self.offset),
        }[self.side]

    @property
    def outward(self) -> Coord:
        return {"bottom": (0, -1), "top": (0, 1), "left": (-1, 0), "right": (1, 0)}[self.side]


@dataclass(frozen=True)
class Witness:
    pattern: Dict[Coord, str]
    outputs: Dict[str, int]


@dataclass
class GadgetTemplate:
    id: str
    width: int
    height: int
    checker: int
    qubits: Dict[Coord, str]
    minus: List[Tuple[int, int, str]]
    ports: List[Port]
    witnesses: Dict[str, Witness]
    labels: Dict[str, Coord] = field(default_factory=dict)
    params: Dict[str, int] = field(default_factory=dict)

    @property
    def inputs(self) -> List[Port]:
        return [p for p in self.ports if p.direction == "in"]

    @property
    def outputs(self) -> List[Port]:
        return [p for p in self.ports if p.direction == "out"]

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise KeyError(name)

    def option_count(self) -> int:
        return len(self.qubits)

    def key(self, inputs: Mapping[str, bool] | Sequence[bool]) -> str:
        if isinstance(inputs, Mapping):
            missing = [p.name for p in self.inputs if p.name not in inputs]
            if missing:
                raise TemplateError(f"missing input ports {missing}")
            bits = [inputs[p.name] for p in self.inputs]
        else:
            bits = list(inputs)
            if len(bits) != len(self.inputs):
                raise TemplateError(f"{self.id} has {len(self.inputs)} inputs, got {len(bits)}")
        return "".join("1" if b else "0" for b in bits)


# -- file format --------------------------------------------------------------

def parse_template(text: str) -> GadgetTemplate:
    gid = None
    width = height = None
    checker = 1
    qubits: Dict[Coord, str] = {}
    minus: List[Tuple[int, int, str]] = []
    ports: List[Port] = []
    labels: Dict[str, Coord] = {}
    witnesses: Dict[str, Witness] = {}
    current: Optional[Tuple[str, Dict[Coord, str], Dict[str, int]]] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if current is not None:
                if tag == "w":
                    current[1][(int(parts[1]), int(parts[2]))] = parts[3]
                elif tag == "out":
                    current[2][parts[1]] = int(parts[2])
                elif tag == "end":
                    witnesses[current[0]] = Witness(current[1], current[2])
                    current = None
                else:
                    raise TemplateError(f"unexpected {tag!r} inside witness")
                continue
            if tag == "gadget":
                gid = parts[1]
            elif tag == "box":
                width, height = int(parts[1]), int(parts[2])
            elif tag == "checker":
                checker = int(parts[1])
            elif tag == "q":
                letters = parts[3]
                if not letters or set(letters) - set("XYZ"):
                    raise TemplateError(f"bad letters {letters!r}")
                qubits[(int(parts[1]), int(parts[2]))] = "".join(sorted(set(letters)))
            elif tag == "s":
                minus.append((int(parts[1]), int(parts[2]), parts[3]))
            elif tag == "label":
                labels[parts[1]] = (int(parts[2]), int(parts[3]))
            elif tag == "port":
                ports.append(Port(parts[1], parts[2], int(parts[3]), parts[4], parts[5]))
            elif tag == "witness":
                current = (parts[1] if len(parts) > 1 else "", {}, {})
            else:
                raise TemplateError(f"unknown record {tag!r}")
        except (IndexError, ValueError) as exc:
            raise TemplateError(f"line {lineno}: {exc}") from None
    if current is not None:
        raise TemplateError("unterminated witness section")
    if gid is None or width is None:
        raise TemplateError("missing gadget or box record")
    t = GadgetTemplate(gid, width, height, checker, qubits, minus, ports, witnesses, labels)
    _check_template(t)
    return t


def _check_template(t: GadgetTemplate) -> None:
    if t.checker not in (0, 1):
        raise TemplateError(f"{t.id}: checker must be 0 or 1")
    if t.width < 1 or t.height < 1:
        raise TemplateError(f"{t.id}: empty box")
    for (c, r) in t.qubits:
        if not (0 <= c < t.width and 0 <= r < t.height):
            raise TemplateError(f"{t.id}: qubit ({c},{r}) outside box")
    for c, r, kind in t.minus:
        if plane_kind(c, r, t.checker) != kind:
            raise TemplateError(f"{t.id}: plaquette ({c},{r}) is not {kind}-type")
    for key, w in t.witnesses.items():
        for q, l in w.pattern.items():
            if l not in t.qubits.get(q, ""):
                raise TemplateError(f"{t.id}: witness {key} uses {l} at {q}, not allowed there")


def format_template(t: GadgetTemplate) -> str:
    lines = [f"gadget {t.id}", f"box {t.width} {t.height}", f"checker {t.checker}"]
    for (c, r) in sorted(t.qubits, key=lambda q: (q[1], q[0])):
        lines.append(f"q {c} {r} {t.qubits[(c, r)]}")
    for c, r, k in t.minus:
        lines.append(f"s {c} {r} {k}")
    for name, (c, r) in t.labels.items():
        lines.append(f"label {name} {c} {r}")
    for p in t.ports:
        lines.append(f"port {p.name} {p.side} {p.offset} {p.kind} {p.direction}")
    for key, w in t.witnesses.items():
        lines.append(f"witness {key}")
        for (c, r) in sorted(w.pattern, key=lambda q: (q[1], q[0])):
            lines.append(f"w {c} {r} {w.pattern[(c, r)]}")
        for name, v in w.outputs.items():
            lines.append(f"out {name} {v}")
        lines.append("end")
    return "\n".join(lines) + "\n"


def load_template_file(path: str | Path) -> GadgetTemplate:
    return parse_template(Path(path).read_text())


_CACHE: Dict[str, GadgetTemplate] = {}


def _base(kind: str) -> GadgetTemplate:
    if kind not in _CACHE:
        text = resources.files("surfred").joinpath("templates", FILES[kind]).read_text()
        _CACHE[kind] = parse_template(text)
    return _CACHE[kind]


# -- stretching -------------------------------------------------------------------

def stretch(t: GadgetTemplate, axis: str, at: int, amount: int) -> GadgetTemplate:
    """Insert ``amount`` columns (axis='col') or rows before index ``at``.

    Only straight strings may cross the cut; they are extended through the
    new space.  ``amount`` must be even so plaquette kinds are unchanged.
    """
    if amount == 0:
        return t
    if amount < 0 or amount % 2:
        raise TemplateError("stretch amount must be a non-negative even number")
    col = axis == "col"

    def move(q: Coord) -> Coord:
        c, r = q
        if col:
            return (c + amount, r) if c >= at else (c, r)
        return (c, r + amount) if r >= at else (c, r)

    def fill(src: Mapping[Coord, str], same) -> Dict[Coord, str]:
        out = {move(q): v for q, v in src.items()}
        span = t.height if col else t.width
        for k in range(span):
            a = (at - 1, k) if col else (k, at - 1)
            b = (at, k) if col else (k, at)
            if a in src and b in src and same(src[a], src[b]):
                for d in range(amount):
                    out[(at + d, k) if col else (k, at + d)] = src[a]
        return out

    for (c, r, _) in t.minus:
        if (c if col else r) == at - 1:
            raise TemplateError("cannot stretch through a -1 plaquette")
    qubits = fill(t.qubits, lambda x, y: x == y and len(x) == 1)
    witnesses = {}
    for key, w in t.witnesses.items():
        witnesses[key] = Witness(fill(w.pattern, lambda x, y: x == y), dict(w.outputs))
    for key, w in witnesses.items():
        for q in list(w.pattern):
            if q not in qubits:
                del w.pattern[q]
    ports = []
    for p in t.ports:
        along = p.side in (("bottom", "top") if col else ("left", "right"))
        ports.append(replace(p, offset=p.offset + amount) if along and p.offset >= at else p)
    minus = []
    for c, r, k in t.minus:
        c2, r2 = move((c, r))
        minus.append((c2, r2, k))
    labels = {n: move(q) for n, q in t.labels.items()}
    params = dict(t.params)
    params[f"stretch_{axis}_{at}"] = params.get(f"stretch_{axis}_{at}", 0) + amount
    return GadgetTemplate(
        t.id,
        t.width + (amount if col else 0),
        t.height + (0 if col else amount),
        t.checker,
        qubits,
        minus,
        ports,
        witnesses,
        labels,
        params,
    )


def _wire(kind: str, length: int) -> GadgetTemplate:
    if length < 1:
        raise TemplateError("wire length must be at least 1")
    if kind == "WIRE_X":
        cells = {(0, r): "X" for r in range(length)}
        ports = [Port("in", "bottom", 0, "X", "in"), Port("out", "top", 0, "X", "out")]
        w, h = 1, length
    else:
        cells = {(c, 0): "Z" for c in range(length)}
        ports = [Port("in", "left", 0, "Z", "in"), Port("out", "right", 0, "Z", "out")]
        w, h = length, 1
    witnesses = {"0": Witness({}, {"out": 0}), "1": Witness(dict(cells), {"out": 1})}
    return GadgetTemplate(kind, w, h, 1, dict(cells), [], ports, witnesses, {}, {"length": length})


FANOUT_LEFT_CUT = 5
FANOUT_RIGHT_CUT = 13


def template(kind: str, **params: int) -> GadgetTemplate:
    """Return a template by id.

    FANOUT accepts ``left`` (extra columns between output 1 and the input)
    and ``right`` (extra columns between the return string and output 2).
    WIRE_X / WIRE_Z accept ``length``.
    """
    kind = kind.upper()
    if kind not in KINDS:
        raise TemplateError(f"unknown gadget {kind!r}")
    if kind in ("WIRE_X", "WIRE_Z"):
        return _wire(kind, params.get("length", 5))
    t = _base(kind)
    if kind == "FANOUT":
        left, right = params.get("left", 0), params.get("right", 0)
        t = stretch(t, "col", FANOUT_RIGHT_CUT, right)
        t = stretch(t, "col", FANOUT_LEFT_CUT, left)
    elif params:
        raise TemplateError(f"{kind} takes no parameters")
    return t


# -- witnesses and verification ------------------------------------------------------

def witness_error(t: GadgetTemplate, inputs) -> Tuple[PauliOperator, Dict[str, bool]]:
    """Local error for the given input values, as a Pauli on the box
    (qubit (c, r) has index r * width + c), plus the output port values."""
    w = t.witnesses[t.key(inputs)]
    op = PauliOperator({r * t.width + c: l for (c, r), l in w.pattern.items()}, t.width * t.height)
    return op, {k: bool(v) for k, v in w.outputs.items()}


def probability_class(t: GadgetTemplate, pattern: Mapping[Coord, str], p: Fraction) -> Fraction:
    """Probability of a local pattern when each drawn letter has probability p."""
    prob = Fraction(1)
    for q, letters in t.qubits.items():
        if q in pattern:
            prob *= p
        else:
            prob *= 1 - len(letters) * p
    return prob


@dataclass
class VerificationReport:
    template_id: str
    count: int
    match: bool
    per_input: Dict[str, int]
    mismatches: List[str]
    stats: SearchStats

    def summary(self) -> str:
        status = "ok" if self.match else "MISMATCH"
        return f"{self.template_id}: {self.count} consistent errors, {status} ({self.stats.nodes} nodes, {self.stats.seconds:.3f}s)"


def enumerate_local(
    t: GadgetTemplate,
    inputs: Mapping[str, bool],
    pins: Optional[Mapping[Coord, str]] = None,
    domain_override: Optional[Mapping[Coord, str]] = None,
    max_nodes: int = 2_000_000,
) -> Tuple[List[Tuple[Dict[Coord, str], Dict[str, int]]], SearchStats]:
    """All local errors consistent with the template syndrome for fixed inputs."""
    domains: Dict[Coord, str] = {}
    for q, letters in t.qubits.items():
        domains[q] = "I" + letters
    for q, letters in (domain_override or {}).items():
        domains[q] = letters
    for q, letter in (pins or {}).items():
        domains[q] = letter
    virtual: Dict[str, Coord] = {}
    for p in t.ports:
        v = p.virtual(t.width, t.height)
        virtual[p.name] = v
        if p.direction == "in":
            domains[v] = p.kind if inputs[p.name] else "I"
        else:
            domains[v] = "I" + p.kind
    minus = [(c, r) for c, r, _ in t.minus]
    order, search = plane_system(domains, minus, t.checker, constrained=t.qubits.keys())
    raw = search.solve(max_nodes=max_nodes)
    out = []
    for sol in raw:
        pattern = {}
        for q, li in zip(order, sol):
            if li and q in t.qubits:
                pattern[q] = INDEX_LETTER[li]
        ports = {}
        for p in t.outputs:
            li = sol[order.index(virtual[p.name])]
            ports[p.name] = 1 if li else 0
        out.append((pattern, ports))
    return out, search.stats


def verify_gadget(t: GadgetTemplate, max_nodes: int = 2_000_000) -> VerificationReport:
    start = time.perf_counter()
    total = SearchStats()
    per_input: Dict[str, int] = {}
    mismatches: List[str] = []
    count = 0
    for bits in itertools.product((0, 1), repeat=len(t.inputs)):
        inputs = {p.name: bool(b) for p, b in zip(t.inputs, bits)}
        key = t.key(inputs)
        try:
            sols, stats = enumerate_local(t, inputs, max_nodes=max_nodes)
        except SearchBudgetExceeded as exc:
            mismatches.append(f"{key}: inconclusive ({exc})")
            continue
        total.nodes += stats.nodes
        per_input[key] = len(sols)
        count += len(sols)
        expected = t.witnesses.get(key)
        if expected is None:
            mismatches.append(f"{key}: no witness recorded")
            continue
        if len(sols) != 1:
            mismatches.append(f"{key}: {len(sols)} consistent errors")
            continue
        pattern, ports = sols[0]
        if pattern != expected.pattern:
            mismatches.append(f"{key}: enumerated error differs from witness")
        if ports != {k: int(v) for k, v in expected.outputs.items()}:
            mismatches.append(f"{key}: port values {ports} differ from {expected.outputs}")
    extra = set(t.witnesses) - set(per_input)
    for key in sorted(extra):
        mismatches.append(f"{key}: witness for a non-existent input combination")
    total.solutions = count
    total.seconds = time.perf_counter() - start
    return VerificationReport(t.id, count, not mismatches, per_input, mismatches, total)


@dataclass
class ExclusionReport:
    case1_completions: int
    xz4_domain: str
    y_at_xz4_completions: int
    unforced_count: int

    @property
    def ok(self) -> bool:
        return (
            self.case1_completions == 0
            and self.xz4_domain == "XZ"
            and self.y_at_xz4_completions == 0
            and self.unforced_count == 4
        )


def verify_exclusions(t: Optional[GadgetTemplate] = None) -> ExclusionReport:
    """Impossible AND configurations: Z on Z1, Z2, Z3 together, and Y at XZ4."""
    t = t or template("AND")
    lab = t.labels
    case1 = {lab["Z1"]: "Z", lab["Z2"]: "Z", lab["Z3"]: "Z"}
    c1 = 0
    y4 = 0
    for bits in itertools.product((False, True), repeat=len(t.inputs)):
        inputs = {p.name: b for p, b in zip(t.inputs, bits)}
        c1 += len(enumerate_local(t, inputs, pins=case1)[0])
        # widen the domain so the pin is admissible, then ask for a completion
        y4 += len(enumerate_local(t, inputs, pins={lab["XZ4"]: "Y"})[0])
    report = verify_gadget(t)
    return ExclusionReport(c1, t.qubits[lab["XZ4"]], y4, report.count)


def all_reports(kinds: Iterable[str] = KINDS) -> List[VerificationReport]:
    out = []
    for k in kinds:
        if k == "FANOUT":
            out.append(verify_gadget(template(k)))
            wide = verify_gadget(template(k, left=6, right=4))
            wide.template_id = "FANOUT(wide)"
            out.append(wide)
        else:
            out.append(verify_gadget(template(k)))
    return out
