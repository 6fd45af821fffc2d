"""One test per acceptance criterion; each records a pass/fail line that is
printed in the terminal summary."""
import functools
import itertools
import random
import time
from fractions import Fraction

from conftest import ACCEPTANCE, EXAMPLE, formula_corpus, random_noise
from surfred.cli import main
from surfred.compiler import (
    CompileMode,
    PowerM,
    all_assignments,
    clear_cache,
    compile_formula,
    coset_relation_check,
    separation_bounds,
    witness_table,
)
from surfred.decoders import (
    CallCounter,
    DecodingInstance,
    acceptance_probability,
    brute_force_dqmld,
    brute_force_qmld,
    call_bound,
    decision_dqmld,
    decision_qmld,
    logical_variants,
    qmld_from_decision,
    support_restricted_enumerate,
)
from surfred.formula import brute_force_count, evaluate, parse_expression
from surfred.gadgets import all_reports, verify_exclusions
from surfred.instance_io import parse, serialize
from surfred.lattice import build_rotated_layout, syndrome_of
from surfred.noise import probability_of
from surfred.pauli import PauliOperator, commutes
from surfred.pipelines import count_sat, dqmld_decision, pivot, solve_sat

P = Fraction(1, 4)


def criterion(n, limit, title):
    def deco(fn):
        @functools.wraps(fn)
        def run():
            start = time.perf_counter()
            ok = False
            try:
                fn()
                ok = True
            finally:
                dt = time.perf_counter() - start
                passed = ok and dt < limit
                ACCEPTANCE[n] = (title, passed, dt, limit)
                print(f"criterion {n}: {'PASS' if passed else 'FAIL'}")
            assert dt < limit, f"took {dt:.1f}s, limit {limit}s"
        return run
    return deco


@criterion(1, 300, "gadget case analysis")
def test_criterion_01_gadgets():
    expected = {"VARIABLE": 2, "NOT": 2, "FANOUT": 2, "FANOUT(wide)": 2, "AND": 4, "CONVERT_X_TO_Z": 2,
                "CONVERT_Z_TO_X": 2, "CROSS_XZ": 4, "WIRE_X": 2, "WIRE_Z": 2}
    reports = all_reports()
    assert {r.template_id: r.count for r in reports} == expected
    assert all(r.match for r in reports)
    assert verify_exclusions().ok
    assert main(["verify-gadgets"]) == 0


@criterion(2, 60, "lattice invariants for 2 <= w, h <= 6")
def test_criterion_02_lattice():
    for w, h in itertools.product(range(2, 7), repeat=2):
        lay = build_rotated_layout(w, h)
        gens = [g.as_pauli(lay.num_qubits) for g in lay.generators]
        assert len(gens) == lay.num_generators == w * h - 1
        assert all(commutes(a, b) for a, b in itertools.combinations(gens, 2))
        lx, lz = lay.logical_x, lay.logical_z
        assert all(commutes(g, lx) and commutes(g, lz) for g in gens)
        assert not commutes(lx, lz)


@criterion(3, 120, "probability normalization")
def test_criterion_03_normalization():
    rnd = random.Random(3)
    sizes = [8] * 5 + [rnd.randint(1, 7) for _ in range(45)]
    for n in sizes:
        noise = random_noise(rnd, n, max_den=16)
        total = sum(
            (probability_of(noise, PauliOperator.from_symplectic(x, z, n)) for x in range(1 << n) for z in range(1 << n)),
            Fraction(0),
        )
        assert total == 1


@criterion(4, 120, "QMLD witness separation")
def test_criterion_04_separation():
    corpus = formula_corpus(20, seed=4, max_vars=4) + [parse_expression(EXAMPLE)]
    for f in corpus:
        inst = compile_formula(f)
        sat, unsat = [], []
        for a, e in witness_table(inst).items():
            (sat if evaluate(f, a) else unsat).append(probability_of(inst.noise, e))
        if sat and unsat:
            assert min(sat) > max(unsat)
        lo, hi = separation_bounds(inst)
        ell = inst.ell
        assert lo == (1 - P ** ell) * P ** (ell - 1) and hi == P ** ell and lo > hi
        assert all(p >= lo for p in sat) and all(p <= hi for p in unsat)


@criterion(5, 300, "support enumeration certifies single gates")
def test_criterion_05_property_one():
    for text in ("x1", "!x1", "(x1&x2)"):
        inst = compile_formula(parse_expression(text))
        found = support_restricted_enumerate(inst)
        assert len(found) == 2 ** inst.num_vars
        assert {e for e, _ in found} == set(witness_table(inst).values())


@criterion(6, 300, "SAT round trip")
def test_criterion_06_sat():
    corpus = formula_corpus(48, seed=6, max_vars=4) + [parse_expression(EXAMPLE), parse_expression("(x1&!x1)")]
    verdicts = {}
    for f in corpus:
        rep = solve_sat(f)
        assert rep.verdict == ("SAT" if brute_force_count(f) else "UNSAT")
        verdicts[str(f)] = rep.verdict
    assert verdicts[str(parse_expression(EXAMPLE))] == "SAT"
    assert verdicts["(x1&!x1)"] == "UNSAT"


@criterion(7, 600, "#SAT round trip and flip location")
def test_criterion_07_count():
    corpus = formula_corpus(30, seed=7, max_vars=4)
    for f in corpus:
        n = f.num_vars
        rep = count_sat(f)
        a = brute_force_count(f)
        assert rep.verdict == a and rep.calls <= n + 1
        b = 2 ** n - a
        at = Fraction(b, 2 ** n)
        delta = Fraction(1, 2 ** (n + 2))
        if at + delta < 1:
            assert dqmld_decision(f, at + delta) is True
        if at - delta > 0:
            assert dqmld_decision(f, at - delta) is False


@criterion(8, 600, "coset structure of witness pairs")
def test_criterion_08_cosets():
    for f in formula_corpus(12, seed=8, max_vars=3):
        inst = compile_formula(f)
        table = witness_table(inst)
        for a, b in itertools.combinations_with_replacement(all_assignments(f.num_vars), 2):
            rel = coset_relation_check(inst, a, b, table)
            assert rel == ("stabilizer" if evaluate(f, a) == evaluate(f, b) else "logical-X")


@criterion(9, 120, "approximation separations")
def test_criterion_09_approx():
    for text in ("x1", "(x1&x2)", "(x1|!x2)"):
        f = parse_expression(text)
        inst = compile_formula(f, CompileMode.approx(P, PowerM(1)))
        lo, hi = separation_bounds(inst)
        assert lo > 2 ** inst.ell * hi
        for p in (Fraction(1, 4), Fraction(1, 8)):
            uni = compile_formula(f, CompileMode.uniform(p))
            ell = uni.ell
            lo, hi = separation_bounds(uni)
            assert lo == p ** ell * (1 - p) ** (2 * ell) and hi == p ** (2 * ell)
            assert p ** ell * (1 - p) ** (2 * ell) > p ** (2 * ell)


def _random_instance(rnd):
    side = rnd.choice([2, 3])
    lay = build_rotated_layout(side, side)
    noise = random_noise(rnd, lay.num_qubits, max_den=6)
    e = PauliOperator({q: rnd.choice("XYZ") for q in range(lay.num_qubits) if rnd.random() < 0.3}, lay.num_qubits)
    return DecodingInstance(lay, noise, syndrome_of(lay, e))


@criterion(10, 600, "decision/search equivalences")
def test_criterion_10_equivalences():
    rnd = random.Random(10)
    sides = set()
    for _ in range(25):
        inst = _random_instance(rnd)
        sides.add(inst.layout.width)
        counter = CallCounter(decision_qmld)
        res = qmld_from_decision(inst, counter)
        assert res.probability == brute_force_qmld(inst).probability
        assert counter.calls <= call_bound(inst)
        d = brute_force_dqmld(inst)
        top = max(d.cosets.values())
        variants = logical_variants(inst.layout, d.reference)
        acc = {c: acceptance_probability(inst, v) for c, v in variants.items()}
        for c, v in variants.items():
            assert decision_dqmld(inst, v) == (d.cosets[c] == top)
        for c1, c2 in itertools.combinations(variants, 2):
            assert (acc[c1] > acc[c2]) == (d.cosets[c1] > d.cosets[c2])
            assert (acc[c1] == acc[c2]) == (d.cosets[c1] == d.cosets[c2])
    assert sides == {2, 3}


@criterion(11, 60, "determinism and serialization")
def test_criterion_11_serialization():
    modes = [CompileMode.qmld(), CompileMode.dqmld(Fraction(3, 8)), CompileMode.majority(),
             CompileMode.approx(P, PowerM(1)), CompileMode.uniform(Fraction(1, 8))]
    corpus = formula_corpus(8, seed=11, max_vars=3) + [parse_expression(EXAMPLE)]
    for f in corpus:
        for mode in modes:
            clear_cache()
            a = serialize(compile_formula(f, mode))
            clear_cache()
            b = serialize(compile_formula(f, mode))
            assert a == b
            assert serialize(parse(a)) == a
