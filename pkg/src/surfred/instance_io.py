"""Line-oriented text format for decoding instances.

::

    surfred-instance 1
    dims <w> <h>
    order row-col-kind
    mode <none | kind p=<p> M=<M|-> r=<r|->>
    noise <k>
    q <index> <pX> <pY> <pZ>          (k lines, rationals as num/den)
    syndrome <i1> <i2> ...
    [sidecar block, compiled instances only]
    end

The sidecar lists gadget placements and routes so witnesses can be rebuilt
from the file.  Paths are stored by their corners; every segment between
two corners is a straight horizontal, vertical or diagonal run.
"""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from surfred.compiler import CompiledInstance, CompileMode, Placement, Route, format_m, parse_m
from surfred.decoders import DecodingInstance
from surfred.lattice import SyndromeVector, build_rotated_layout
from surfred.noise import NoiseModel, QubitNoise
from surfred.pauli import format_rational, parse_rational

MAGIC = "surfred-instance"
VERSION = 1
ORDER_TAG = "row-col-kind"

Coord = Tuple[int, int]


class InstanceFormatError(ValueError):
    pass


# -- paths ----------------------------------------------------------------------

def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def compress_path(path: Sequence[Coord]) -> List[Coord]:
    if len(path) <= 2:
        return list(path)
    out = [path[0]]
    for prev, cur, nxt in zip(path, path[1:], path[2:]):
        if (cur[0] - prev[0], cur[1] - prev[1]) != (nxt[0] - cur[0], nxt[1] - cur[1]):
            out.append(cur)
    out.append(path[-1])
    return out


def expand_path(corners: Sequence[Coord]) -> List[Coord]:
    if not corners:
        return []
    out = [corners[0]]
    for (x0, y0), (x1, y1) in zip(corners, corners[1:]):
        dx, dy = x1 - x0, y1 - y0
        if dx and dy and abs(dx) != abs(dy):
            raise InstanceFormatError(f"segment ({x0},{y0})-({x1},{y1}) is not straight")
        sx, sy = _sign(dx), _sign(dy)
        x, y = x0, y0
        while (x, y) != (x1, y1):
            x, y = x + sx, y + sy
            out.append((x, y))
    return out


def _coords(text: str) -> List[Coord]:
    if text == "-":
        return []
    out = []
    for tok in text.split(";"):
        a, b = tok.split(",")
        out.append((int(a), int(b)))
    return out


def _fmt_coords(cs: Sequence[Coord]) -> str:
    return ";".join(f"{a},{b}" for a, b in cs) if cs else "-"


def _pairs(text: str) -> Tuple[Tuple[str, int], ...]:
    if text == "-":
        return ()
    out = []
    for tok in text.split(","):
        k, v = tok.split(":")
        out.append((k, int(v)))
    return tuple(out)


def _fmt_pairs(pairs) -> str:
    return ",".join(f"{k}:{v}" for k, v in pairs) if pairs else "-"


def _opt(v) -> str:
    return "-" if v is None else str(v)


def _opt_int(text: str) -> Optional[int]:
    return None if text == "-" else int(text)


# -- serialize -------------------------------------------------------------------

def _mode_line(mode: Optional[CompileMode]) -> str:
    if mode is None:
        return "mode none"
    m = "-" if mode.M is None else format_m(mode.M)
    r = "-" if mode.r is None else format_rational(mode.r)
    return f"mode {mode.kind} p={format_rational(mode.p)} M={m} r={r}"


def serialize(inst) -> str:
    lay = inst.layout
    compiled = isinstance(inst, CompiledInstance)
    lines = [
        f"{MAGIC} {VERSION}",
        f"dims {lay.width} {lay.height}",
        f"order {ORDER_TAG}",
        _mode_line(inst.mode if compiled else None),
    ]
    items = inst.noise.items()
    lines.append(f"noise {len(items)}")
    for q, n in items:
        lines.append(f"q {q} {format_rational(n.pX)} {format_rational(n.pY)} {format_rational(n.pZ)}")
    lines.append(" ".join(["syndrome"] + [str(i) for i in inst.syndrome.sorted()]))
    if compiled:
        lines.append(f"sidecar {len(inst.placements)} {len(inst.routes)}")
        lines.append(f"ell {inst.ell}")
        lines.append(f"vars {inst.num_vars}")
        lines.append(f"source {inst.source}")
        for pl in inst.placements:
            lines.append(
                f"placement {pl.kind} {pl.anchor[0]},{pl.anchor[1]} {_fmt_pairs(pl.params)} "
                f"{_fmt_pairs(pl.inputs)} {_opt(pl.variable)} {_opt(pl.node)}"
            )
        for rt in inst.routes:
            sink = rt.sink if isinstance(rt.sink, str) else f"{rt.sink[0]}:{rt.sink[1]}"
            lines.append(
                f"route {rt.letter} {rt.source[0]}:{rt.source[1]} {sink} {_fmt_coords(compress_path(rt.path))}"
            )
        wire = [lay.qubit_coords(q) for q in inst.output_wire]
        lines.append(f"output {_fmt_coords(compress_path(wire))}")
        lines.append(f"special {_opt(inst.special_qubit)}")
        lines.append(f"crossings {_fmt_coords(inst.crossings)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


# -- parse -------------------------------------------------------------------------

class _Lines:
    def __init__(self, text: str):
        self.lines = [l.rstrip("\n") for l in text.splitlines() if l.strip() and not l.startswith("#")]
        self.pos = 0

    def next(self, key: str) -> str:
        if self.pos >= len(self.lines):
            raise InstanceFormatError(f"unexpected end of file, wanted {key!r}")
        line = self.lines[self.pos]
        self.pos += 1
        head, _, rest = line.partition(" ")
        if head != key:
            raise InstanceFormatError(f"line {self.pos}: expected {key!r}, got {head!r}")
        return rest

    def peek(self) -> str:
        return self.lines[self.pos].partition(" ")[0] if self.pos < len(self.lines) else ""


def _parse_mode(rest: str) -> Optional[CompileMode]:
    parts = rest.split()
    if parts == ["none"]:
        return None
    kind, fields = parts[0], dict(p.split("=", 1) for p in parts[1:])
    m = None if fields.get("M", "-") == "-" else parse_m(fields["M"])
    r = None if fields.get("r", "-") == "-" else parse_rational(fields["r"])
    return CompileMode(kind, parse_rational(fields["p"]), m, r)


def parse(text: str):
    """Inverse of :func:`serialize`; returns a CompiledInstance when the file
    has a sidecar and a DecodingInstance otherwise."""
    ls = _Lines(text)
    if not ls.lines:
        raise InstanceFormatError("empty instance file")
    magic, _, version = ls.lines[0].partition(" ")
    if magic != MAGIC:
        raise InstanceFormatError(f"not an instance file (header {magic!r})")
    if version.strip() != str(VERSION):
        raise InstanceFormatError(f"format version {version.strip()!r} unsupported; this reader handles {VERSION}")
    ls.pos = 1
    try:
        w, h = map(int, ls.next("dims").split())
        order = ls.next("order").strip()
        if order != ORDER_TAG:
            raise InstanceFormatError(f"generator order {order!r} unsupported")
        mode = _parse_mode(ls.next("mode"))
        layout = build_rotated_layout(w, h)
        per: Dict[int, QubitNoise] = {}
        for _ in range(int(ls.next("noise"))):
            q, px, py, pz = ls.next("q").split()
            per[int(q)] = QubitNoise(parse_rational(px), parse_rational(py), parse_rational(pz))
        noise = NoiseModel(layout.num_qubits, per)
        syndrome = SyndromeVector(frozenset(int(t) for t in ls.next("syndrome").split()))
        if ls.peek() != "sidecar":
            ls.next("end")
            return DecodingInstance(layout, noise, syndrome)
        if mode is None:
            raise InstanceFormatError("sidecar without a compile mode")
        n_pl, n_rt = map(int, ls.next("sidecar").split())
        ell = int(ls.next("ell"))
        num_vars = int(ls.next("vars"))
        source = ls.next("source").strip()
        placements = []
        for _ in range(n_pl):
            kind, anchor, params, inputs, var, node = ls.next("placement").split()
            placements.append(Placement(kind, _coords(anchor)[0], _pairs(params), _pairs(inputs),
                                        _opt_int(var), _opt_int(node)))
        routes = []
        for _ in range(n_rt):
            letter, src, sink, path = ls.next("route").split()
            a, b = src.split(":")
            if ":" in sink:
                c, d = sink.split(":")
                sink_v: Tuple[int, str] | str = (int(c), d)
            else:
                sink_v = sink
            routes.append(Route(letter, tuple(expand_path(_coords(path))), (int(a), b), sink_v))
        output = [layout.qubit_index(*q) for q in expand_path(_coords(ls.next("output").strip()))]
        special = _opt_int(ls.next("special").strip())
        crossings = _coords(ls.next("crossings").strip())
        ls.next("end")
    except InstanceFormatError:
        raise
    except (ValueError, KeyError, IndexError) as exc:
        raise InstanceFormatError(f"line {ls.pos}: {exc}") from exc
    return CompiledInstance(
        layout=layout,
        noise=noise,
        syndrome=syndrome,
        mode=mode,
        placements=placements,
        routes=routes,
        output_wire=output,
        special_qubit=special,
        variable_ports={pl.variable: pl.anchor for pl in placements if pl.kind == "VARIABLE"},
        ell=ell,
        num_vars=num_vars,
        source=source,
        crossings=crossings,
    )


def write_instance(inst, path: str | Path) -> None:
    Path(path).write_text(serialize(inst))


def read_instance(path: str | Path):
    return parse(Path(path).read_text())
