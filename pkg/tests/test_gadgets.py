from fractions import Fraction

import pytest

from surfred.gadgets import (
    FILES,
    KINDS,
    TemplateError,
    all_reports,
    format_template,
    load_template_file,
    parse_template,
    probability_class,
    stretch,
    template,
    verify_exclusions,
    verify_gadget,
    witness_error,
)

EXPECTED = {
    "VARIABLE": 2, "NOT": 2, "FANOUT": 2, "AND": 4, "CONVERT_X_TO_Z": 2,
    "CONVERT_Z_TO_X": 2, "CROSS_XZ": 4, "WIRE_X": 2, "WIRE_Z": 2,
}


@pytest.mark.parametrize("kind", KINDS)
def test_each_gadget_has_exactly_its_witnesses(kind):
    rep = verify_gadget(template(kind))
    assert rep.match, rep.mismatches
    assert rep.count == EXPECTED[kind]
    assert all(v == 1 for v in rep.per_input.values())


def test_gate_truth_tables():
    t = template("AND")
    for a in (False, True):
        for b in (False, True):
            _, out = witness_error(t, {"in1": a, "in2": b})
            assert out["out"] == (a and b)
    _, out = witness_error(template("NOT"), {"in": True})
    assert out["out"] is False
    _, out = witness_error(template("FANOUT"), {"in": True})
    assert out["o1"] and out["o2"]


def test_and_exclusions():
    rep = verify_exclusions()
    assert rep.ok
    assert rep.case1_completions == 0
    assert rep.xz4_domain == "XZ"
    assert rep.y_at_xz4_completions == 0
    assert rep.unforced_count == 4


def test_wide_fanout_and_stretch():
    reports = {r.template_id: r for r in all_reports(["FANOUT"])}
    assert reports["FANOUT(wide)"].match and reports["FANOUT(wide)"].count == 2
    t = template("NOT")
    longer = stretch(t, "row", 2, 4)
    assert longer.height == t.height + 4
    assert verify_gadget(longer).match
    with pytest.raises(TemplateError):
        stretch(t, "row", 2, 3)


@pytest.mark.parametrize("kind", sorted(FILES))
def test_template_text_round_trip(kind):
    t = template(kind)
    assert parse_template(format_template(t)) == t


def test_tampered_template_fails(tmp_path):
    text = format_template(template("AND"))
    lines = text.splitlines()
    i = next(k for k, l in enumerate(lines) if l.startswith("s "))
    del lines[i]
    path = tmp_path / "and.gadget"
    path.write_text("\n".join(lines) + "\n")
    rep = verify_gadget(load_template_file(path))
    assert not rep.match
    assert rep.mismatches


def test_bad_template_rejected():
    with pytest.raises(TemplateError):
        parse_template("gadget NOT\nbox 3 3\nchecker 2\n")


def test_probability_class():
    t = template("NOT")
    p = Fraction(1, 4)
    assert probability_class(t, {}, p) == (1 - p) ** len(t.qubits)
    w = t.witnesses[t.key({"in": True})]
    assert probability_class(t, w.pattern, p) == p ** len(w.pattern) * (1 - p) ** (len(t.qubits) - len(w.pattern))
