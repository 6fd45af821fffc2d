"""ASCII and SVG pictures of decoding instances.

The ASCII grid interleaves qubits and stabilizer anchors: qubit (c, r) sits
at text column 2c+1 and text row 2r+1 counted from the bottom, the anchor
of the plaquette whose lower-left qubit is (c, r) at (2c+2, 2r+2).
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import List, Optional

from surfred.lattice import plaquette_kind
from surfred.pauli import PauliOperator

FORMATS = ("ascii", "svg")
CELL = 14
PLAQUETTE_LIMIT = 4000  # larger codes skip the background plaquettes in SVG


def _qubit_char(inst, q: int, error: Optional[PauliOperator]) -> str:
    if error is not None and error[q] != "I":
        return error[q].lower()
    if getattr(inst, "special_qubit", None) == q:
        return "*"
    letters = sorted(inst.noise[q].allowed() - {"I"})
    if not letters:
        return "."
    return letters[0] if len(letters) == 1 else "+"


def render_ascii(inst, error: Optional[PauliOperator] = None) -> str:
    """Noise letters ('+' for several options, '*' for the special qubit),
    '#' at -1 stabilizers, lowercase letters for an overlaid error."""
    lay = inst.layout
    w, h = lay.width, lay.height
    grid = [[" "] * (2 * w + 1) for _ in range(2 * h + 1)]
    for r in range(h):
        for c in range(w):
            grid[2 * r + 1][2 * c + 1] = _qubit_char(inst, lay.qubit_index(c, r), error)
    for i in inst.syndrome.flipped:
        c, r = lay.generator_anchor(i)
        grid[2 * r + 2][2 * c + 2] = "#"
    lines = ["".join(row).rstrip() for row in reversed(grid)]
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    for pl in getattr(inst, "placements", []) or []:
        t = pl.template()
        lines.append(f"{pl.kind} at ({pl.anchor[0]},{pl.anchor[1]}) size {t.width}x{t.height}")
    return "\n".join(lines) + "\n"


def render_svg(inst, error: Optional[PauliOperator] = None) -> str:
    lay = inst.layout
    w, h = lay.width, lay.height
    pad = CELL
    width, height = w * CELL + 2 * pad, h * CELL + 2 * pad

    def xy(c: float, r: float):
        return pad + (c + 0.5) * CELL, pad + (h - r - 0.5) * CELL

    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "version": "1.1",
        "width": str(width),
        "height": str(height),
        "viewBox": f"0 0 {width} {height}",
    })
    ET.SubElement(svg, "rect", {"x": "0", "y": "0", "width": str(width), "height": str(height), "fill": "white"})
    flipped = {lay.generator_anchor(i) for i in inst.syndrome.flipped}
    anchors = lay.iter_generator_anchors() if lay.num_qubits <= PLAQUETTE_LIMIT else iter(sorted(flipped))
    for c, r in anchors:
        x0, y1 = xy(max(c, 0), max(r, 0))
        x1, y0 = xy(min(c + 1, w - 1), min(r + 1, h - 1))
        fill = "#f4d6d6" if plaquette_kind(c, r) == "X" else "#d6e2f4"
        attrs = {"x": f"{x0:g}", "y": f"{y0:g}", "width": f"{max(x1 - x0, 2):g}", "height": f"{max(y1 - y0, 2):g}",
                 "fill": fill}
        if (c, r) in flipped:
            attrs.update({"stroke": "black", "stroke-width": "2"})
        ET.SubElement(svg, "rect", attrs)
    for c, r in sorted(flipped):
        x, y = xy(c + 0.5, r + 0.5)
        ET.SubElement(svg, "circle", {"cx": f"{x:g}", "cy": f"{y:g}", "r": str(CELL // 4), "fill": "black"})
    for pl in getattr(inst, "placements", []) or []:
        t = pl.template()
        x0, y0 = xy(pl.anchor[0] - 0.5, pl.anchor[1] + t.height - 0.5)
        g = ET.SubElement(svg, "g", {"class": "gadget"})
        ET.SubElement(g, "rect", {"x": f"{x0:g}", "y": f"{y0:g}", "width": str(t.width * CELL),
                                  "height": str(t.height * CELL), "fill": "none", "stroke": "#2a7a2a",
                                  "stroke-dasharray": "4 2"})
        label = ET.SubElement(g, "text", {"x": f"{x0 + 2:g}", "y": f"{y0 + 10:g}", "font-size": "9",
                                          "fill": "#2a7a2a"})
        label.text = pl.kind
    for q in range(lay.num_qubits):
        ch = _qubit_char(inst, q, error)
        if ch == ".":
            continue
        x, y = xy(*lay.qubit_coords(q))
        text = ET.SubElement(svg, "text", {"x": f"{x:g}", "y": f"{y + 4:g}", "font-size": "11",
                                           "text-anchor": "middle", "font-family": "monospace"})
        text.text = ch
    return ET.tostring(svg, encoding="unicode") + "\n"


def render(inst, fmt: str = "ascii", error: Optional[PauliOperator] = None) -> str:
    if fmt == "ascii":
        return render_ascii(inst, error)
    if fmt == "svg":
        return render_svg(inst, error)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
