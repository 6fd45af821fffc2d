"""Compile a planar circuit into a surface-code decoding instance.

Layout
------
Every leaf of the gate tree owns a 14-column slot with base column B: the
fan-out input column B+2, the fan-out return column B+6 and the leaf wire
B+10.  An AND between subtrees L and R puts its box over the right end of L,
reserves a gap for the two strings it sends to the bottom boundary, and
adds a channel right of R for its third bottom-bound string.

Rows, bottom to top: variable gadgets on row 0, one band of 12 rows per
fan-out, then one band per tree gate in post-order.  Every horizontal
string (Z strings to the left boundary, the AND's rightward X string) lives
in its gate's own band, where every other wire is a straight vertical line,
so all contacts between unrelated elements are plain X/Z crossings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from surfred.formula import Formula, PlanarCircuit, eliminate_or, evaluate, to_expression, to_planar_circuit
from surfred.gadgets import GadgetTemplate, Port, template
from surfred.lattice import (
    PreconditionError,
    RotatedLayout,
    SizeError,
    SyndromeVector,
    build_rotated_layout,
    logical_class,
    syndrome_of,
)
from surfred.noise import NoiseModel, QubitNoise, probability_of
from surfred.pauli import PauliOperator, letter_product

Coord = Tuple[int, int]

DEFAULT_P = Fraction(1, 4)
DEFAULT_MAX_CELLS = 50_000_000
SLOT = 14
LEFT_MARGIN = 4
FANOUT_BASE = 7
FANOUT_PITCH = 12


class LayoutError(RuntimeError):
    """The deterministic layout produced an inconsistent geometry."""


# -- modes --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerM:
    """The approximation factor 2^(l^c), resolved once l is known."""

    c: int = 1

    def resolve(self, ell: int) -> int:
        return 2 ** (ell ** self.c)

    def __str__(self) -> str:
        return f"2^l^{self.c}"


MValue = Fraction | PowerM


def parse_m(text: str) -> MValue:
    text = text.strip()
    if text.startswith("2^l"):
        rest = text[3:]
        c = int(rest[1:]) if rest.startswith("^") else 1
        if c < 1:
            raise ValueError("exponent must be positive")
        return PowerM(c)
    value = Fraction(text)
    if value < 1:
        raise ValueError("M must be at least 1")
    return value


def format_m(m: MValue) -> str:
    return str(m) if isinstance(m, PowerM) else f"{m.numerator}/{m.denominator}"


MODES = ("qmld", "qmld-approx", "qmld-uniform", "dqmld", "dqmld-majority")


@dataclass(frozen=True)
class CompileMode:
    kind: str
    p: Fraction = DEFAULT_P
    M: Optional[MValue] = None
    r: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in MODES:
            raise ValueError(f"unknown mode {self.kind!r}")
        p = Fraction(self.p)
        object.__setattr__(self, "p", p)
        if not (0 < p <= Fraction(1, 4)):
            raise ValueError(f"p = {p} outside (0, 1/4]")
        if self.kind == "qmld-approx" and self.M is None:
            raise ValueError("qmld-approx needs M")
        if isinstance(self.M, (int, Fraction)):
            object.__setattr__(self, "M", Fraction(self.M))
            if self.M < 1:
                raise ValueError("M must be at least 1")
        if self.kind == "dqmld":
            if self.r is None:
                raise ValueError("dqmld needs r")
            r = Fraction(self.r)
            object.__setattr__(self, "r", r)
            if not (0 < r < 1):
                raise ValueError(f"r = {r} outside (0, 1)")

    @classmethod
    def qmld(cls, p=DEFAULT_P) -> "CompileMode":
        return cls("qmld", p)

    @classmethod
    def approx(cls, p=DEFAULT_P, M: MValue = PowerM(1)) -> "CompileMode":
        return cls("qmld-approx", p, M)

    @classmethod
    def uniform(cls, p=DEFAULT_P, M: Optional[MValue] = None) -> "CompileMode":
        return cls("qmld-uniform", p, M)

    @classmethod
    def dqmld(cls, r) -> "CompileMode":
        return cls("dqmld", r=Fraction(r))

    @classmethod
    def majority(cls) -> "CompileMode":
        return cls("dqmld-majority")

    @property
    def is_qmld(self) -> bool:
        return self.kind.startswith("qmld")

    def resolve_m(self, ell: int) -> Fraction:
        if self.M is None:
            return Fraction(1)
        if isinstance(self.M, PowerM):
            return Fraction(self.M.resolve(ell))
        return self.M


def log_ceil(base_inv: Fraction, m: Fraction) -> int:
    """Smallest t >= 0 with base_inv**t >= m, for base_inv > 1."""
    if m <= 1:
        return 0
    est = (m.numerator.bit_length() - m.denominator.bit_length()) / math.log2(base_inv)
    t = max(0, int(est) - 2)
    while t > 0 and base_inv ** t >= m:
        t -= 1
    while base_inv ** t < m:
        t += 1
    return t


# -- placements and routes --------------------------------------------------------------

@dataclass(frozen=True)
class Placement:
    kind: str
    anchor: Coord
    params: Tuple[Tuple[str, int], ...] = ()
    inputs: Tuple[Tuple[str, int], ...] = ()  # input port -> route index
    variable: Optional[int] = None
    node: Optional[int] = None

    def template(self) -> GadgetTemplate:
        return template(self.kind, **dict(self.params))

    def at(self, local: Coord) -> Coord:
        return (local[0] + self.anchor[0], local[1] + self.anchor[1])

    def port_virtual(self, name: str) -> Coord:
        t = self.template()
        return self.at(t.port(name).virtual(t.width, t.height))

    def port_inner(self, name: str) -> Coord:
        t = self.template()
        return self.at(t.port(name).inner(t.width, t.height))


@dataclass(frozen=True)
class Route:
    """A wire of one letter.  ``source`` is (placement index, output port);
    ``sink`` is (placement index, input port) or a boundary name."""

    letter: str
    path: Tuple[Coord, ...]
    source: Tuple[int, str]
    sink: Tuple[int, str] | str


@dataclass
class CompiledInstance:
    layout: RotatedLayout
    noise: NoiseModel
    syndrome: SyndromeVector
    mode: CompileMode
    placements: List[Placement]
    routes: List[Route]
    output_wire: List[int]
    special_qubit: Optional[int]
    variable_ports: Dict[int, Coord]
    ell: int
    num_vars: int
    source: str = ""
    crossings: List[Coord] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.layout.width

    @property
    def height(self) -> int:
        return self.layout.height

    def formula(self) -> Formula:
        from surfred.formula import parse_expression

        return parse_expression(self.source)

    def cross_placements(self) -> List[Placement]:
        return [Placement("CROSS_XZ", (c - 3, r - 3)) for c, r in self.crossings]

    def domains(self) -> Dict[Coord, str]:
        return element_domains(self.placements, self.routes)


# -- path checking --------------------------------------------------------------

def path_ok(path: Sequence[Coord], letter: str, head: Optional[Coord], tail: Optional[Coord],
            skip: Callable[[int, int], bool] = lambda c, r: False) -> bool:
    """A string of ``letter`` on ``path`` flips no plaquette, given that it
    continues into ``head`` and ``tail`` (None where it meets a boundary)."""
    cells = set(path)
    if len(cells) != len(path):
        return False
    full = set(cells)
    for q in (head, tail):
        if q is not None:
            full.add(q)
    detecting = 0 if letter == "X" else 1  # Z-type plaquettes have c + r even
    anchors = set()
    for c, r in cells:
        for dc in (-1, 0):
            for dr in (-1, 0):
                anchors.add((c + dc, r + dr))
    for c, r in anchors:
        if (c + r) % 2 != detecting or skip(c, r):
            continue
        n = sum(1 for q in ((c, r), (c + 1, r), (c, r + 1), (c + 1, r + 1)) if q in full)
        if n % 2:
            return False
    return True


def _vertical(x: int, y0: int, y1: int) -> List[Coord]:
    step = 1 if y1 >= y0 else -1
    return [(x, y) for y in range(y0, y1 + step, step)]


def _horizontal(y: int, x0: int, x1: int) -> List[Coord]:
    step = 1 if x1 >= x0 else -1
    return [(x, y) for x in range(x0, x1 + step, step)]


def route_up(start: Coord, end: Coord, head: Coord, tail: Optional[Coord], lo: int,
             skip: Callable[[int, int], bool] = lambda c, r: False) -> List[Coord]:
    """An X path climbing from ``start`` to ``end``; any sideways move uses
    rows >= ``lo`` and stays at least two rows below ``end``."""
    (a, y0), (b, y1) = start, end
    if a == b:
        path = _vertical(a, y0, y1)
        if path_ok(path, "X", head, tail, skip):
            return path
        raise LayoutError(f"straight wire at column {a} is invalid")
    s = 1 if b > a else -1
    for y in range(max(lo, y0), y1 - 2):
        candidates = [
            _vertical(a, y0, y) + _horizontal(y, a + s, b) + _vertical(b, y + 1, y1),
            _vertical(a, y0, y) + _horizontal(y, a + s, b - s)[: abs(b - a) - 1 if abs(b - a) > 1 else 0]
            + [(b, y + 1)] + _vertical(b, y + 2, y1),
            _vertical(a, y0, y) + [(a + s, y + 1)] + _horizontal(y + 1, a + 2 * s, b)
            + _vertical(b, y + 2, y1) if abs(b - a) > 1 else [],
        ]
        for path in candidates:
            if path and path[-1] == (b, y1) and path_ok(path, "X", head, tail, skip):
                return path
    raise LayoutError(f"no route from {start} to {end}")


# -- geometry bookkeeping -----------------------------------------------------------

def element_domains(placements: Sequence[Placement], routes: Sequence[Route]) -> Dict[Coord, str]:
    """Allowed letters per qubit.  Where an X element crosses a Z element the
    product Y is allowed too; a template's own domains are kept as given."""
    dom: Dict[Coord, List[str]] = {}
    for pl in placements:
        t = pl.template()
        for q, letters in t.qubits.items():
            dom.setdefault(pl.at(q), []).append(letters)
    for rt in routes:
        for q in rt.path:
            dom.setdefault(q, []).append(rt.letter)
    out = {}
    for q, parts in dom.items():
        if len(parts) == 1:
            out[q] = parts[0]
        else:
            out[q] = "XYZ"
    return out


def check_geometry(placements: Sequence[Placement], routes: Sequence[Route], width: int, height: int) -> List[Coord]:
    """Verify elements touch only at crossings and port connections.

    Returns the list of crossing points.
    """
    owner: Dict[Coord, List[Tuple[str, int, str]]] = {}
    for i, pl in enumerate(placements):
        t = pl.template()
        for q, letters in t.qubits.items():
            owner.setdefault(pl.at(q), []).append(("p", i, letters))
    for i, rt in enumerate(routes):
        for q in rt.path:
            owner.setdefault(q, []).append(("r", i, rt.letter))
    linked = set()
    for i, rt in enumerate(routes):
        linked.add((("p", rt.source[0]), ("r", i)))
        if not isinstance(rt.sink, str):
            linked.add((("p", rt.sink[0]), ("r", i)))
    linked |= {(b, a) for a, b in linked}
    crossings: Dict[Coord, Tuple] = {}
    for q, owners in owner.items():
        c, r = q
        if not (0 <= c < width and 0 <= r < height):
            raise LayoutError(f"qubit {q} lies outside the {width}x{height} lattice")
        if len(owners) > 2:
            raise LayoutError(f"qubit {q} is used by {len(owners)} elements")
        if len(owners) == 2:
            (k1, i1, l1), (k2, i2, l2) = owners
            if {l1, l2} != {"X", "Z"}:
                raise LayoutError(f"qubit {q}: overlapping {l1} and {l2}")
            crossings[q] = ((k1, i1), (k2, i2))
    for q, owners in owner.items():
        mine = {(k, i) for k, i, _ in owners}
        for dc in (-1, 0, 1):
            for dr in (-1, 0, 1):
                n = (q[0] + dc, q[1] + dr)
                if n == q or n not in owner:
                    continue
                for k, i, _ in owner[n]:
                    e = (k, i)
                    if e in mine:
                        continue
                    if any((m, e) in linked for m in mine):
                        continue
                    near = False
                    for x in _neighbours(q) | _neighbours(n):
                        pair = crossings.get(x)
                        if pair and e in pair and mine & set(pair):
                            near = True
                            break
                    if not near:
                        raise LayoutError(f"qubits {q} and {n} of unrelated elements touch")
    return sorted(crossings, key=lambda q: (q[1], q[0]))


def _neighbours(q: Coord) -> set:
    return {(q[0] + dc, q[1] + dr) for dc in (-1, 0, 1) for dr in (-1, 0, 1)}


# -- layout ---------------------------------------------------------------------------

@dataclass
class _Wire:
    """A pending output: the port it leaves from and where the path starts."""

    source: Tuple[int, str]
    start: Coord
    head: Coord


class _Builder:
    def __init__(self, circuit: PlanarCircuit):
        self.c = circuit
        self.placements: List[Placement] = []
        self.routes: List[Route] = []
        self.slot_base: Dict[int, int] = {}
        self.and_ox: Dict[int, int] = {}
        self.and_channel: Dict[int, int] = {}
        self.right = 0

    def place(self, pl: Placement) -> int:
        t = pl.template()
        ox, oy = pl.anchor
        if (t.checker + ox + oy) % 2 != 1:
            raise LayoutError(f"{pl.kind} at {pl.anchor} breaks the plaquette colouring")
        self.placements.append(pl)
        return len(self.placements) - 1

    def add_route(self, rt: Route) -> int:
        self.routes.append(rt)
        return len(self.routes) - 1

    def wire(self, idx: int, port: str) -> _Wire:
        pl = self.placements[idx]
        return _Wire((idx, port), pl.port_virtual(port), pl.port_inner(port))

    def connect(self, w: _Wire, idx: int, port: str, lo: int) -> int:
        pl = self.placements[idx]
        end = pl.port_virtual(port)
        path = route_up(w.start, end, w.head, pl.port_inner(port), lo)
        return self.add_route(Route("X", tuple(path), w.source, (idx, port)))

    def to_bottom(self, idx: int, port: str) -> None:
        pl = self.placements[idx]
        (x, y), head = pl.port_virtual(port), pl.port_inner(port)
        path = _vertical(x, y, 0)
        if not path_ok(path, "X", head, None, lambda c, r: r < 0):
            raise LayoutError(f"bottom string from {pl.kind}.{port} is invalid")
        self.add_route(Route("X", tuple(path), (idx, port), "bottom"))

    def to_left(self, idx: int, port: str) -> None:
        pl = self.placements[idx]
        (x, y), head = pl.port_virtual(port), pl.port_inner(port)
        path = _horizontal(y, x, 0)
        if not path_ok(path, "Z", head, None, lambda c, r: c < 0):
            raise LayoutError(f"left string from {pl.kind}.{port} is invalid")
        self.add_route(Route("Z", tuple(path), (idx, port), "left"))

    # columns ---------------------------------------------------------------------

    def columns(self, nid: int, col: int) -> int:
        """Assign columns to the subtree; returns the first free column."""
        node = self.c.node(nid)
        if node.kind == "LEAF":
            self.slot_base[node.slot] = col
            return col + SLOT
        if node.kind == "NOT":
            return self.columns(node.children[0], col)
        left, right = node.children
        end_l = self.columns(left, col) - 1
        ox = end_l - 7
        self.and_ox[nid] = ox
        end_r = self.columns(right, end_l + 9) - 1
        ch = max(ox + 31, end_r + 3)
        self.and_channel[nid] = ch
        nxt = ch + 3
        return nxt + (nxt % 2)

    def output_column(self, nid: int) -> int:
        node = self.c.node(nid)
        if node.kind == "LEAF":
            return self.slot_base[node.slot] + 10
        if node.kind == "NOT":
            return self.output_column(node.children[0])
        return self.and_ox[nid] + 11


def _fanout_columns(circuit: PlanarCircuit, base: Mapping[int, int]):
    """Input column, first-output column and peeled slot of every fan-out."""
    out = []
    for fo in circuit.fanouts:
        b = base[fo.out2] + 2
        out1 = base[fo.out1] + 10 if fo.out1_is_leaf else base[fo.out1] + 2
        out.append((fo, b, out1))
    return out


def build_layout(circuit: PlanarCircuit, max_cells: int = DEFAULT_MAX_CELLS):
    """Place gadgets and routes; returns (builder, width, height, output wire)."""
    bld = _Builder(circuit)
    right = bld.columns(circuit.output, LEFT_MARGIN)
    base = bld.slot_base

    # variable gadgets: at the first fan-out input, or at the single leaf
    var_idx: Dict[int, int] = {}
    for v in sorted(circuit.copies):
        slots = circuit.copies[v]
        x = base[slots[-1]] + 2 if len(slots) > 1 else base[slots[0]] + 10
        var_idx[v] = bld.place(Placement("VARIABLE", (x - 2, 0), variable=v))
    pending: Dict[int, _Wire] = {}  # leaf slot -> wire heading for the tree
    carry: Dict[int, _Wire] = {}  # variable -> wire heading for its next fan-out
    for v, idx in var_idx.items():
        slots = circuit.copies[v]
        w = bld.wire(idx, "out")
        if len(slots) > 1:
            carry[v] = w
        else:
            pending[slots[0]] = w

    top = 5
    for fo, b, out1 in _fanout_columns(circuit, base):
        oy = FANOUT_BASE + FANOUT_PITCH * fo.band
        left = b - out1 - 4
        pl = Placement("FANOUT", (out1 - 3, oy), params=(("left", left),), variable=fo.variable)
        idx = bld.place(pl)
        if pl.port_virtual("in")[0] != b or pl.port_virtual("o2")[0] != base[fo.out2] + 10:
            raise LayoutError("fan-out ports do not meet their columns")
        rid = bld.connect(carry.pop(fo.variable), idx, "in", lo=0)
        bld.placements[idx] = Placement(pl.kind, pl.anchor, pl.params, (("in", rid),), pl.variable)
        for port in ("o1b", "ret", "o2b"):
            bld.to_bottom(idx, port)
        for port in ("z1", "z2"):
            bld.to_left(idx, port)
        pending[fo.out2] = bld.wire(idx, "o2")
        if fo.out1_is_leaf:
            pending[fo.out1] = bld.wire(idx, "o1")
        else:
            carry[fo.variable] = bld.wire(idx, "o1")
        top = oy + 9
    if carry:
        raise LayoutError("fan-out chain left a dangling copy")

    cursor = top + 3
    outputs: Dict[int, _Wire] = {}

    def gate(nid: int) -> None:
        nonlocal cursor
        node = circuit.node(nid)
        if node.kind == "LEAF":
            outputs[nid] = pending[node.slot]
            return
        for ch in node.children:
            gate(ch)
        if node.kind == "NOT":
            w = outputs[node.children[0]]
            x = w.start[0]
            y = cursor + 1
            if (x - 1 + y) % 2:
                y += 1
            idx = bld.place(Placement("NOT", (x - 1, y), node=nid))
            rid = bld.connect(w, idx, "in", lo=cursor)
            bld.placements[idx] = Placement("NOT", (x - 1, y), (), (("in", rid),), node=nid)
            outputs[nid] = bld.wire(idx, "out")
            cursor = y + 7
            return
        ox = bld.and_ox[nid]
        oy = cursor + 7
        if (ox + oy) % 2 == 0:
            oy += 1
        pl = Placement("AND", (ox, oy), node=nid)
        idx = bld.place(pl)
        r1 = bld.connect(outputs[node.children[0]], idx, "in1", lo=cursor)
        r2 = bld.connect(outputs[node.children[1]], idx, "in2", lo=cursor)
        bld.placements[idx] = Placement("AND", (ox, oy), (), (("in1", r1), ("in2", r2)), node=nid)
        for port in ("xd1", "xd2"):
            bld.to_bottom(idx, port)
        for port in ("zl1", "zl2", "zl3", "zl4"):
            bld.to_left(idx, port)
        # rightward string: along its row to the channel, then down
        (sx, sy), head = pl.port_virtual("xr"), pl.port_inner("xr")
        ch0 = bld.and_channel[nid]
        for ch in (ch0, ch0 + 1):
            path = _horizontal(sy, sx, ch) + _vertical(ch, sy - 1, 0)
            if path_ok(path, "X", head, None, lambda c, r: r < 0):
                break
        else:
            raise LayoutError("no valid corner for the AND side string")
        bld.add_route(Route("X", tuple(path), (idx, "xr"), "bottom"))
        right_edge = ch + 2
        bld.right = max(bld.right, right_edge)
        outputs[nid] = bld.wire(idx, "out")
        cursor = oy + 31

    gate(circuit.output)
    width = max(right, bld.right) + 2
    height = cursor + 2
    if width * height > max_cells:
        raise SizeError(f"layout {width}x{height} exceeds {max_cells} cells")
    root = outputs[circuit.output]
    x, y = root.start
    path = _vertical(x, y, height - 1)
    if not path_ok(path, "X", root.head, None, lambda c, r: r >= height - 1):
        raise LayoutError("output wire cannot reach the top boundary")
    out_route = bld.add_route(Route("X", tuple(path), root.source, "top"))
    return bld, width, height, out_route


# -- compilation -------------------------------------------------------------------------

def _noise_for(domains: Mapping[Coord, str], layout: RotatedLayout, mode: CompileMode,
               special: Optional[Coord], ell: int, M: Fraction) -> NoiseModel:
    per: Dict[int, QubitNoise] = {}
    shared: Dict[str, QubitNoise] = {}
    dq = mode.kind.startswith("dqmld")
    for (c, r), letters in domains.items():
        if letters not in shared:
            if dq:
                prob = {1: Fraction(1, 2), 2: Fraction(1, 3), 3: Fraction(1, 4)}[len(letters)]
            else:
                prob = mode.p
            shared[letters] = QubitNoise.uniform_over(letters, prob)
        per[layout.qubit_index(c, r)] = shared[letters]
    if special is not None:
        q = layout.qubit_index(*special)
        if mode.kind == "qmld":
            per[q] = QubitNoise(pX=1 - mode.p ** ell)
        elif mode.kind == "qmld-approx":
            per[q] = QubitNoise(pX=1 - mode.p ** ell / M)
        elif mode.kind == "dqmld":
            per[q] = QubitNoise(pX=mode.r)
    return NoiseModel(layout.num_qubits, per)


def _circuit_of(f: Formula | PlanarCircuit) -> Tuple[PlanarCircuit, str]:
    if isinstance(f, PlanarCircuit):
        return f, ""
    g = eliminate_or(f)
    return to_planar_circuit(g), to_expression(f.root)


@dataclass(frozen=True)
class _Geometry:
    placements: Tuple[Placement, ...]
    routes: Tuple[Route, ...]
    width: int
    height: int
    out_route: int
    ell: int
    crossings: Tuple[Coord, ...]


_GEOMETRY: Dict[Tuple, _Geometry] = {}
_GEOMETRY_LIMIT = 64


def clear_cache() -> None:
    """Forget cached layouts so the next compile rebuilds from scratch."""
    _GEOMETRY.clear()


def _geometry(circuit: PlanarCircuit, source: str, mode: CompileMode, max_cells: int) -> Tuple[_Geometry, bool]:
    """Placements and routes for the circuit; cached per formula and tail
    length.  The flag says whether the geometry was freshly built."""
    key = (source, max_cells, None)
    base = _GEOMETRY.get(key) if source else None
    fresh = base is None
    if base is None:
        bld, width, height, out_route = build_layout(circuit, max_cells)
        crossings = check_geometry(bld.placements, bld.routes, width, height)
        base = _Geometry(tuple(bld.placements), tuple(bld.routes), width, height, out_route,
                         width * height, tuple(crossings))
        if source:
            if len(_GEOMETRY) >= _GEOMETRY_LIMIT:
                _GEOMETRY.clear()
            _GEOMETRY[key] = base
    if mode.kind != "qmld-uniform":
        return base, fresh
    extra = 2 * base.ell + 2 * log_ceil(1 / mode.p, mode.resolve_m(base.ell))
    key = (source, max_cells, extra)
    geo = _GEOMETRY.get(key) if source else None
    if geo is not None:
        return geo, False
    # a NOT on the output wire followed by a long wire to the new top
    placements, routes = list(base.placements), list(base.routes)
    out = routes[base.out_route]
    x, ytop = out.path[-1]
    y = ytop + 1
    if (x - 1 + y) % 2:
        y += 1
    nidx = len(placements)
    routes[base.out_route] = Route("X", tuple(_vertical(x, out.path[0][1], y - 1)), out.source, (nidx, "in"))
    placements.append(Placement("NOT", (x - 1, y), (), (("in", base.out_route),)))
    height = y + 6 + extra
    if base.width * height > max_cells:
        raise SizeError(f"layout {base.width}x{height} exceeds {max_cells} cells")
    routes.append(Route("X", tuple(_vertical(x, y + 6, height - 1)), (nidx, "out"), "top"))
    crossings = check_geometry(placements, routes, base.width, height)
    geo = _Geometry(tuple(placements), tuple(routes), base.width, height, base.out_route, base.ell, tuple(crossings))
    if source:
        _GEOMETRY[key] = geo
    return geo, True


def compile_formula(f: Formula | PlanarCircuit, mode: CompileMode = CompileMode.qmld(),
                    max_cells: int = DEFAULT_MAX_CELLS, check: bool = True) -> CompiledInstance:
    """Compile a formula (or an already planar circuit) in the given mode.

    ``ell`` is the qubit count of the base lattice; in uniform mode the
    lattice then grows by a NOT and a tail wire of 2*ell + 2*ceil(log_{1/p} M)
    qubits.
    """
    circuit, source = _circuit_of(f)
    geo, fresh = _geometry(circuit, source, mode, max_cells)
    placements, routes = list(geo.placements), list(geo.routes)
    ell = geo.ell
    M = mode.resolve_m(ell)
    layout = build_rotated_layout(geo.width, geo.height)
    out_path = routes[geo.out_route].path
    special = out_path[-1] if mode.kind in ("qmld", "qmld-approx", "dqmld") else None
    noise = _noise_for(element_domains(placements, routes), layout, mode, special, ell, M)

    flipped = set()
    for pl in placements:
        for c, r, _ in pl.template().minus:
            flipped.add(layout.generator_index(*pl.at((c, r))))
    inst = CompiledInstance(
        layout=layout,
        noise=noise,
        syndrome=SyndromeVector(frozenset(flipped)),
        mode=mode,
        placements=placements,
        routes=routes,
        output_wire=[layout.qubit_index(*q) for q in out_path],
        special_qubit=None if special is None else layout.qubit_index(*special),
        variable_ports={pl.variable: pl.anchor for pl in placements if pl.kind == "VARIABLE"},
        ell=ell,
        num_vars=circuit.num_vars,
        source=source,
        crossings=list(geo.crossings),
    )
    if check and fresh:
        check_witnesses(inst)
    return inst


compile = compile_formula


# -- witnesses -----------------------------------------------------------------------------

def simulate_ports(inst: CompiledInstance, assignment: Sequence[bool]) -> Dict[Tuple[int, str], bool]:
    if len(assignment) != inst.num_vars:
        raise ValueError(f"assignment has {len(assignment)} values, formula has {inst.num_vars} variables")
    values: Dict[Tuple[int, str], bool] = {}
    for i, pl in enumerate(inst.placements):
        t = pl.template()
        if pl.kind == "VARIABLE":
            ins = {"value": bool(assignment[pl.variable - 1])}
        else:
            ins = {port: values[inst.routes[rid].source] for port, rid in pl.inputs}
        w = t.witnesses[t.key(ins)]
        for port, v in w.outputs.items():
            values[(i, port)] = bool(v)
    return values


def assignment_witness(inst: CompiledInstance, assignment: Sequence[bool]) -> PauliOperator:
    """The full-lattice error for one assignment of the variables."""
    values = simulate_ports(inst, assignment)
    letters: Dict[Coord, str] = {}

    def put(q: Coord, l: str) -> None:
        letters[q] = letter_product(letters.get(q, "I"), l)

    for i, pl in enumerate(inst.placements):
        t = pl.template()
        if pl.kind == "VARIABLE":
            ins = {"value": bool(assignment[pl.variable - 1])}
        else:
            ins = {port: values[inst.routes[rid].source] for port, rid in pl.inputs}
        for q, l in t.witnesses[t.key(ins)].pattern.items():
            put(pl.at(q), l)
    for rt in inst.routes:
        if values[rt.source]:
            for q in rt.path:
                put(q, rt.letter)
    lay = inst.layout
    return PauliOperator({lay.qubit_index(*q): l for q, l in letters.items() if l != "I"}, lay.num_qubits)


def all_assignments(n: int):
    for k in range(2 ** n):
        yield tuple(bool((k >> (n - 1 - i)) & 1) for i in range(n))


def check_witnesses(inst: CompiledInstance, limit: int = 64) -> None:
    """Every witness (up to ``limit`` of them) has the instance syndrome,
    nonzero probability and the output its assignment dictates."""
    f = inst.formula() if inst.source else None
    for k, a in enumerate(all_assignments(inst.num_vars)):
        if k >= limit:
            break
        e = assignment_witness(inst, a)
        if syndrome_of(inst.layout, e) != inst.syndrome:
            raise LayoutError(f"witness for {a} has the wrong syndrome")
        if probability_of(inst.noise, e) == 0:
            raise LayoutError(f"witness for {a} has probability zero")
        if f is not None and _wire_value(inst, e) != evaluate(f, a):
            raise LayoutError(f"witness for {a} carries the wrong output")


def _wire_value(inst: CompiledInstance, e: PauliOperator) -> bool:
    marks = [e[q] in ("X", "Y") for q in inst.output_wire]
    if any(marks) and not all(marks):
        raise PreconditionError("output wire is partially errored")
    return all(marks)


def output_value(inst: CompiledInstance, e: PauliOperator, check: bool = True) -> bool:
    """True iff ``e`` carries the output string."""
    if check:
        if syndrome_of(inst.layout, e) != inst.syndrome:
            raise PreconditionError("error does not match the instance syndrome")
        if probability_of(inst.noise, e) == 0:
            raise PreconditionError("error has probability zero")
    return _wire_value(inst, e)


def separation_bounds(inst: CompiledInstance) -> Tuple[Fraction, Fraction]:
    """(lower bound on any satisfying witness, upper bound on any other)."""
    mode, p, ell = inst.mode, inst.mode.p, inst.ell
    if mode.kind == "qmld":
        return (1 - p ** ell) * p ** (ell - 1), p ** ell
    if mode.kind == "qmld-approx":
        M = mode.resolve_m(ell)
        return (1 - p ** ell / M) * p ** (ell - 1), p ** ell / M
    if mode.kind == "qmld-uniform":
        length = 2 * ell + 2 * log_ceil(1 / p, mode.resolve_m(ell))
        return p ** ell * (1 - p) ** length, p ** length
    raise ValueError(f"no separation bounds in mode {mode.kind}")


def witness_table(inst: CompiledInstance) -> Dict[Tuple[bool, ...], PauliOperator]:
    return {a: assignment_witness(inst, a) for a in all_assignments(inst.num_vars)}


def coset_relation_check(inst: CompiledInstance, a: Sequence[bool], b: Sequence[bool],
                         witnesses: Optional[Mapping[Tuple[bool, ...], PauliOperator]] = None) -> str:
    """'stabilizer' when the two witnesses share a coset, 'logical-X' when
    they differ by the logical X operator (anything else is reported as is)."""
    if witnesses is None:
        wa, wb = assignment_witness(inst, a), assignment_witness(inst, b)
    else:
        wa, wb = witnesses[tuple(a)], witnesses[tuple(b)]
    cls = logical_class(inst.layout, wa, wb)
    return {"I": "stabilizer", "X": "logical-X"}.get(cls, f"logical-{cls}")
