"""SAT, #SAT and Majority-SAT solved through decoding oracles.

Each pipeline compiles the formula, asks an oracle, and interprets the
answer through the compiled instance.  Any callable with the signature of
the structured decoders can be plugged in, so heuristic decoders can be
tested against the reductions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

from surfred.compiler import (
    CompiledInstance,
    CompileMode,
    MValue,
    all_assignments,
    assignment_witness,
    compile_formula,
    log_ceil,
    output_value,
    separation_bounds,
)
from surfred.decoders import DecodeResult, OracleFault, structured_dqmld, structured_qmld
from surfred.formula import Formula, brute_force_count, evaluate
from surfred.lattice import logical_class
from surfred.noise import probability_of
from surfred.pauli import format_rational

Oracle = Callable[[CompiledInstance], DecodeResult]
TIE = "tie"


@dataclass
class PipelineReport:
    formula: str
    mode: str
    verdict: Any
    calls: int = 0
    transcript: List[Dict[str, Any]] = field(default_factory=list)
    reference: Any = None
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def agrees(self) -> bool:
        return self.reference is None or self.verdict == self.reference

    @property
    def ok(self) -> bool:
        return self.agrees and all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "formula": self.formula,
            "mode": self.mode,
            "verdict": self.verdict,
            "calls": self.calls,
            "reference": self.reference,
            "agrees": self.agrees,
            "checks": self.checks,
            "transcript": self.transcript,
        }

    def to_text(self) -> str:
        lines = [f"formula: {self.formula}", f"mode: {self.mode}"]
        for i, step in enumerate(self.transcript, 1):
            lines.append(f"  call {i}: " + " ".join(f"{k}={v}" for k, v in step.items()))
        for name, ok in self.checks.items():
            lines.append(f"check {name}: {'ok' if ok else 'FAILED'}")
        lines.append(f"oracle calls: {self.calls}")
        lines.append(f"verdict: {self.verdict}")
        if self.reference is not None:
            lines.append(f"brute force: {self.reference} ({'agrees' if self.agrees else 'MISMATCH'})")
        lines.append("--- machine-readable")
        lines.append(json.dumps(self.to_dict(), sort_keys=True))
        return "\n".join(lines) + "\n"


def _satisfying_class_won(inst: CompiledInstance, res: DecodeResult) -> bool:
    """Classify a DQMLD answer against the all-false witness, whose output
    is known; this also works for oracles returning non-witness errors."""
    a0 = (False,) * inst.num_vars
    ref = assignment_witness(inst, a0)
    ref_sat = evaluate(inst.formula(), a0)
    cls = logical_class(inst.layout, res.error, ref)
    if cls not in ("I", "X"):
        raise OracleFault(f"oracle answer lies in logical class {cls}, outside both witness cosets")
    return ref_sat if cls == "I" else not ref_sat


# -- SAT ------------------------------------------------------------------------------

def solve_sat(f: Formula, decoder: Oracle = structured_qmld, p: Fraction = Fraction(1, 4),
              reference: bool = True) -> PipelineReport:
    inst = compile_formula(f, CompileMode.qmld(p))
    res = decoder(inst)
    sat = output_value(inst, res.error)
    verdict = "SAT" if sat else "UNSAT"
    ref = None
    if reference:
        ref = "SAT" if brute_force_count(f) > 0 else "UNSAT"
    return PipelineReport(
        formula=str(f),
        mode=f"qmld p={format_rational(inst.mode.p)}",
        verdict=verdict,
        calls=1,
        transcript=[{"probability": format_rational(res.probability) if res.probability.denominator < 10 ** 40
                     else "p>0", "output": sat}],
        reference=ref,
    )


# -- #SAT ------------------------------------------------------------------------------

def pivot(m: int, n: int) -> Fraction:
    """Dyadic pivot strictly between m/2^n and (m+1)/2^n."""
    return Fraction(2 * m + 1, 2 ** (n + 1))


def dqmld_decision(f: Formula, r: Fraction, decoder: Oracle = structured_dqmld) -> Optional[bool]:
    """Does the satisfying class win at this r?  None on an exact tie."""
    inst = compile_formula(f, CompileMode.dqmld(r))
    res = decoder(inst)
    if res.tie:
        return None
    return _satisfying_class_won(inst, res)


def count_sat(f: Formula, decoder: Oracle = structured_dqmld, reference: bool = True) -> PipelineReport:
    """Binary search on the unsatisfying count b with pivots (2m+1)/2^(n+1).

    At that pivot the satisfying class wins iff b <= m, so each answer
    halves the integer interval holding b.
    """
    n = f.num_vars
    lo, hi = 0, 2 ** n
    transcript = []
    while lo < hi:
        m = (lo + hi) // 2
        r = pivot(m, n)
        won = dqmld_decision(f, r, decoder)
        if won is None:
            raise OracleFault(f"tie reported at r = {r}, impossible at a dyadic pivot")
        transcript.append({"r": format_rational(r), "satisfying_wins": won})
        if won:
            hi = m
        else:
            lo = m + 1
    count = 2 ** n - lo
    return PipelineReport(
        formula=str(f),
        mode="dqmld",
        verdict=count,
        calls=len(transcript),
        transcript=transcript,
        reference=brute_force_count(f) if reference else None,
    )


# -- Majority-SAT -----------------------------------------------------------------------

def majority_sat(f: Formula, decoder: Oracle = structured_dqmld, reference: bool = True) -> PipelineReport:
    """True when satisfying assignments outnumber the rest; TIE on equality."""
    inst = compile_formula(f, CompileMode.majority())
    res = decoder(inst)
    verdict: Any = TIE if res.tie else _satisfying_class_won(inst, res)
    ref = None
    if reference:
        a = brute_force_count(f)
        b = 2 ** f.num_vars - a
        ref = TIE if a == b else a > b
    return PipelineReport(
        formula=str(f),
        mode="dqmld-majority",
        verdict=verdict,
        calls=1,
        transcript=[{"tie": res.tie, "cosets": {k: format_rational(v) for k, v in (res.cosets or {}).items()}}],
        reference=ref,
    )


# -- approximation diagnostics ---------------------------------------------------------

def _witness_split(inst: CompiledInstance):
    f = inst.formula()
    sat, unsat = [], []
    for a in all_assignments(inst.num_vars):
        p = probability_of(inst.noise, assignment_witness(inst, a))
        (sat if evaluate(f, a) else unsat).append(p)
    return sat, unsat


def _separation_checks(inst: CompiledInstance, M: Fraction, prefix: str) -> Dict[str, bool]:
    sat, unsat = _witness_split(inst)
    lo, hi = separation_bounds(inst)
    checks = {
        f"{prefix}.bounds": lo > M * hi,
        f"{prefix}.sat_above_lower": all(p >= lo for p in sat),
        f"{prefix}.unsat_below_upper": all(p <= hi for p in unsat),
    }
    if sat and unsat:
        checks[f"{prefix}.witness_gap"] = min(sat) > M * max(unsat)
    return checks


def localize_count(f: Formula, M: Fraction, adversary: str = "sat") -> Dict[str, Any]:
    """Bracket the ratio a/b using an M-approximate DQMLD oracle.

    The simulated oracle returns the correct class whenever the two coset
    probabilities differ by more than a factor M, and otherwise the class
    named by ``adversary``.  Querying at r = 1/(1 + 2^k) compares a/b with
    t = 2^k: a 'satisfying' answer proves a/b >= t/M, an 'unsatisfying'
    one proves a/b <= M t.
    """
    n = f.num_vars
    a = brute_force_count(f)
    b = 2 ** n - a
    ks = list(range(-(n + 1), n + 2))
    lo_i, hi_i = 0, len(ks) - 1
    lower: Optional[Fraction] = Fraction(0)
    upper: Optional[Fraction] = None  # None = unbounded
    queries = []
    while lo_i <= hi_i:
        mid = (lo_i + hi_i) // 2
        t = Fraction(2) ** ks[mid]
        r = 1 / (1 + t)
        inst = compile_formula(f, CompileMode.dqmld(r))
        res = structured_dqmld(inst)
        other = "X" if res.cls == "I" else "I"
        if res.tie or _satisfying_class_won(inst, res):
            mass_sat, mass_unsat = res.cosets[res.cls], res.cosets[other]
        else:
            mass_sat, mass_unsat = res.cosets[other], res.cosets[res.cls]
        if mass_sat > M * mass_unsat:
            says_sat = True
        elif mass_unsat > M * mass_sat:
            says_sat = False
        else:
            says_sat = adversary == "sat"
        queries.append({"r": format_rational(r), "satisfying": says_sat})
        if says_sat:
            lower = max(lower, t / M)
            lo_i = mid + 1
        else:
            upper = t * M if upper is None else min(upper, t * M)
            hi_i = mid - 1
    ratio_ok = (b == 0 or Fraction(a, b) >= lower) and (upper is None or b > 0 and Fraction(a, b) <= upper)
    return {"a": a, "b": b, "lower": lower, "upper": upper, "queries": queries, "contains_truth": ratio_ok}


def approx_separation_report(f: Formula, M: MValue, p: Fraction = Fraction(1, 4),
                             localize: bool = True) -> PipelineReport:
    approx = compile_formula(f, CompileMode.approx(p, M))
    uniform = compile_formula(f, CompileMode.uniform(p, M))
    Ma = approx.mode.resolve_m(approx.ell)
    Mu = uniform.mode.resolve_m(uniform.ell)
    checks = {}
    checks.update(_separation_checks(approx, Ma, "approx"))
    checks.update(_separation_checks(uniform, Mu, "uniform"))
    tail = 2 * uniform.ell + 2 * log_ceil(1 / Fraction(p), Mu)
    checks["uniform.tail_length"] = uniform.height - approx.height >= tail
    transcript: List[Dict[str, Any]] = [
        {"mode": "qmld-approx", "ell": approx.ell, "log2_M": Ma.numerator.bit_length() - 1},
        {"mode": "qmld-uniform", "ell": uniform.ell, "tail": tail, "height": uniform.height},
    ]
    if localize:
        for adversary in ("sat", "unsat"):
            loc = localize_count(f, Ma, adversary)
            checks[f"dqmld.localize.{adversary}"] = loc["contains_truth"]
            transcript.append({
                "mode": "dqmld", "adversary": adversary, "queries": len(loc["queries"]),
                "ratio_lower": _short(loc["lower"]), "ratio_upper": _short(loc["upper"]),
            })
    return PipelineReport(formula=str(f), mode=f"approx M={M}", verdict=all(checks.values()),
                          calls=len(transcript), transcript=transcript, checks=checks)


def _short(x: Optional[Fraction]) -> str:
    if x is None:
        return "inf"
    if x == 0:
        return "0"
    if x.numerator.bit_length() + x.denominator.bit_length() > 128:
        e = x.numerator.bit_length() - x.denominator.bit_length()
        return f"~2^{e}"
    return format_rational(x)
