import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from surfred.compiler import compile_formula
from surfred.decoders import DecodingInstance
from surfred.formula import parse_expression
from surfred.lattice import SyndromeVector, build_rotated_layout
from surfred.noise import NoiseModel, QubitNoise
from surfred.pauli import PauliOperator
from surfred.render import render


def test_empty_instance_ascii():
    lay = build_rotated_layout(3, 3)
    inst = DecodingInstance(lay, NoiseModel(9), SyndromeVector(frozenset()))
    lines = render(inst).splitlines()
    assert len(lines) == 5
    assert set("".join(lines)) <= {".", " "}


def test_letters_flips_and_errors():
    lay = build_rotated_layout(3, 3)
    noise = NoiseModel(9, {0: QubitNoise(pX=Fraction(1, 4)), 4: QubitNoise(Fraction(1, 8), 0, Fraction(1, 8))})
    inst = DecodingInstance(lay, noise, SyndromeVector(frozenset({lay.generator_index(0, 0)})))
    art = render(inst)
    assert "X" in art and "+" in art and "#" in art
    art = render(inst, error=PauliOperator({0: "X"}, 9))
    assert "x" in art


def test_compiled_ascii_has_variable_column():
    inst = compile_formula(parse_expression("x1"))
    art = render(inst)
    assert "*" in art and "VARIABLE at" in art
    grid = [l for l in art.splitlines() if not l[:1].isalpha()]
    cols = {i for l in grid for i, ch in enumerate(l) if ch in "XZ+*"}
    assert len(cols) == 1


def test_svg_parses():
    inst = compile_formula(parse_expression("!x1"))
    root = ET.fromstring(render(inst, "svg"))
    assert root.tag.endswith("svg")
    ns = "{http://www.w3.org/2000/svg}"
    assert root.findall(f"{ns}circle")
    assert [g for g in root.iter(f"{ns}g")]


def test_unknown_format():
    lay = build_rotated_layout(2, 2)
    with pytest.raises(ValueError):
        render(DecodingInstance(lay, NoiseModel(4), SyndromeVector(frozenset())), "png")
