import json
from fractions import Fraction

import pytest

from conftest import EXAMPLE
from surfred.cli import main
from surfred.decoders import DecodingInstance
from surfred.instance_io import read_instance, write_instance
from surfred.lattice import SyndromeVector, build_rotated_layout
from surfred.noise import NoiseModel, QubitNoise


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def small(tmp_path):
    lay = build_rotated_layout(2, 2)
    n = QubitNoise(Fraction(1, 10), Fraction(1, 20), Fraction(1, 10))
    inst = DecodingInstance(lay, NoiseModel(4, {q: n for q in range(4)}), SyndromeVector(frozenset({0})))
    path = tmp_path / "small.txt"
    write_instance(inst, path)
    return path


def test_compile_and_decode(tmp_path, capsys):
    path = tmp_path / "x.txt"
    code, out, err = run(capsys, "compile", "(x1&x2)", "-o", str(path))
    assert code == 0 and out.startswith("w=")
    assert read_instance(path).num_vars == 2
    code, out, _ = run(capsys, "decode", str(path), "--method", "structured", "--approx-digits")
    assert code == 0 and "assignment: 11" in out and "~2^" in out
    code, out, _ = run(capsys, "decode", str(path), "--method", "support")
    assert code == 0 and out.startswith("error: ")


def test_compile_dimacs_file(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 2 2\n1 2 0\n-1 0\n")
    code, out, err = run(capsys, "compile", str(cnf), "-o", str(tmp_path / "out.txt"))
    assert code == 0


def test_decode_brute_dqmld(small, capsys):
    code, out, _ = run(capsys, "decode", str(small), "--method", "brute", "--problem", "dqmld")
    assert code == 0
    assert "class: " in out and out.count("coset ") == 4 and "total: " in out


def test_brute_refuses_large(tmp_path, capsys):
    path = tmp_path / "x.txt"
    run(capsys, "compile", "x1", "-o", str(path))
    code, _, err = run(capsys, "decode", str(path), "--method", "brute")
    assert code == 3 and "refused" in err


def test_structured_needs_sidecar(small, capsys):
    code, _, _ = run(capsys, "decode", str(small), "--method", "structured")
    assert code == 2


def test_validation_and_usage_codes(tmp_path, capsys):
    assert run(capsys, "compile", "x1", "--p", "1/2")[0] == 2
    assert run(capsys, "compile", "x1", "--mode", "dqmld")[0] == 1
    assert run(capsys, "compile", "x1", "--bogus")[0] == 1
    assert run(capsys, "decode", str(tmp_path / "missing.txt"))[0] == 1
    assert run(capsys, "solve", "(x1&")[0] == 2
    bad = tmp_path / "v2.txt"
    bad.write_text("surfred-instance 2\n")
    assert run(capsys, "decode", str(bad))[0] == 2


def test_solve_count_majority(capsys):
    code, out, _ = run(capsys, "solve", EXAMPLE)
    assert code == 0 and "verdict: SAT" in out
    code, out, _ = run(capsys, "count", "(x1|x2)", "--json")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == 3 and data["calls"] <= 3
    code, out, _ = run(capsys, "majority", "x1", "--method", "support")
    assert code == 0 and "verdict: tie" in out


def test_separation(capsys):
    code, out, _ = run(capsys, "separation", "(x1|x2)", "--json")
    assert code == 0 and json.loads(out)["verdict"] is True


def test_verify_gadgets(capsys, tmp_path):
    code, out, _ = run(capsys, "verify-gadgets")
    assert code == 0 and "AND exclusions" in out and "MISMATCH" not in out
    code, out, _ = run(capsys, "verify-gadgets", "--gadget", "not")
    assert code == 0
    assert run(capsys, "verify-gadgets", "--gadget", "nope")[0] == 1


def test_verify_tampered_template(capsys, tmp_path):
    from importlib.resources import files

    text = (files("surfred") / "templates" / "not.gadget").read_text()
    lines = text.splitlines()
    drop = next(i for i, l in enumerate(lines) if l.startswith("s "))
    bad = tmp_path / "bad.gadget"
    bad.write_text("\n".join(lines[:drop] + lines[drop + 1:]) + "\n")
    code, _, _ = run(capsys, "verify-gadgets", "--template-file", str(bad))
    assert code in (2, 4)


def test_render(tmp_path, capsys):
    path = tmp_path / "x.txt"
    run(capsys, "compile", "!x1", "-o", str(path))
    code, out, _ = run(capsys, "render", str(path))
    assert code == 0 and "#" in out
    svg = tmp_path / "x.svg"
    assert run(capsys, "render", str(path), "--format", "svg", "-o", str(svg))[0] == 0
    assert svg.read_text().startswith("<svg")


def test_report(tmp_path, capsys):
    code, out, _ = run(capsys, "report", "x1", "(x1&!x1)", "-o", str(tmp_path / "rep"))
    assert code == 0
    rows = (tmp_path / "rep" / "separation.tsv").read_text().splitlines()
    assert len(rows) == 1 + 2 + 2
    assert all(r.endswith("\t1") for r in rows[1:])
    assert (tmp_path / "rep" / "separation.png").read_bytes()[:4] == b"\x89PNG"
