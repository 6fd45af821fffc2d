import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import EXAMPLE, random_noise
from surfred.compiler import CompileMode, PowerM, compile_formula
from surfred.decoders import DecodingInstance
from surfred.formula import parse_expression
from surfred.instance_io import (
    InstanceFormatError,
    compress_path,
    expand_path,
    parse,
    read_instance,
    serialize,
    write_instance,
)
from surfred.lattice import SyndromeVector, build_rotated_layout

MODES = [
    CompileMode.qmld(),
    CompileMode.approx(Fraction(1, 4), PowerM(1)),
    CompileMode.uniform(Fraction(1, 8)),
    CompileMode.dqmld(Fraction(5, 16)),
    CompileMode.majority(),
]


@pytest.mark.parametrize("mode", MODES, ids=lambda m: m.kind)
def test_compiled_round_trip(mode):
    inst = compile_formula(parse_expression("(x1|!x2)"), mode)
    text = serialize(inst)
    back = parse(text)
    assert serialize(back) == text
    assert back.noise == inst.noise and back.syndrome == inst.syndrome
    assert back.output_wire == inst.output_wire and back.special_qubit == inst.special_qubit


def test_plain_round_trip(tmp_path, rng):
    lay = build_rotated_layout(3, 2)
    inst = DecodingInstance(lay, random_noise(rng, lay.num_qubits), SyndromeVector(frozenset({0, 3})))
    path = tmp_path / "i.txt"
    write_instance(inst, path)
    assert read_instance(path) == inst


def test_header_checks():
    text = serialize(compile_formula(parse_expression("x1")))
    with pytest.raises(InstanceFormatError, match="version"):
        parse(text.replace("surfred-instance 1", "surfred-instance 2", 1))
    with pytest.raises(InstanceFormatError):
        parse("hello 1\n")
    with pytest.raises(InstanceFormatError):
        parse(text.replace("order row-col-kind", "order col-row-kind"))
    with pytest.raises(InstanceFormatError):
        parse(text.rsplit("end", 1)[0])
    with pytest.raises(InstanceFormatError):
        parse("")


def test_example_is_byte_stable():
    a = serialize(compile_formula(parse_expression(EXAMPLE)))
    assert serialize(parse(a)) == a


def test_crooked_segment_rejected():
    with pytest.raises(InstanceFormatError):
        expand_path([(0, 0), (2, 1)])


steps = st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)])


@given(st.lists(steps, max_size=40), st.integers(-5, 5), st.integers(-5, 5))
def test_path_compression_round_trip(moves, x, y):
    path = [(x, y)]
    for dx, dy in moves:
        path.append((path[-1][0] + dx, path[-1][1] + dy))
    corners = compress_path(path)
    assert expand_path(corners) == path
    assert len(corners) <= len(path)
