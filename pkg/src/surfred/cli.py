"""Command line interface.

Exit codes: 0 success, 1 usage, 2 validation, 3 resource cap refused,
4 verification mismatch.  SURFRED_CAPS=large selects the larger cap profile.
"""
from __future__ import annotations

import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import click

from surfred.compiler import (
    MODES,
    CompileMode,
    all_assignments,
    assignment_witness,
    compile_formula,
    parse_m,
    separation_bounds,
)
from surfred.decoders import (
    OracleFault,
    brute_force_dqmld,
    brute_force_qmld,
    structured_dqmld,
    structured_qmld,
    support_dqmld,
    support_qmld,
    total_consistent_mass,
)
from surfred.formula import Formula, evaluate, parse_formula
from surfred.gadgets import KINDS, all_reports, load_template_file, verify_exclusions, verify_gadget
from surfred.instance_io import read_instance, serialize
from surfred.lattice import SizeError
from surfred.noise import probability_of, support
from surfred.pauli import format_rational, parse_rational
from surfred.search import SearchBudgetExceeded

EXIT_USAGE, EXIT_VALIDATION, EXIT_CAP, EXIT_MISMATCH = 1, 2, 3, 4


class Mismatch(Exception):
    """A verification found a disagreement."""


def _formula(source: str) -> Formula:
    """A path to a DIMACS / expression file, or an expression literal."""
    path = Path(source)
    try:
        is_file = path.is_file()
    except OSError:
        is_file = False
    return parse_formula(path.read_text() if is_file else source)


def _mode(kind: str, p: str, r: Optional[str], m: Optional[str]) -> CompileMode:
    pv = parse_rational(p)
    mv = parse_m(m) if m is not None else None
    if kind == "qmld":
        return CompileMode.qmld(pv)
    if kind == "qmld-approx":
        return CompileMode.approx(pv, mv if mv is not None else parse_m("2^l"))
    if kind == "qmld-uniform":
        return CompileMode.uniform(pv, mv)
    if kind == "dqmld":
        if r is None:
            raise click.UsageError("--mode dqmld needs --r")
        return CompileMode.dqmld(parse_rational(r))
    return CompileMode.majority()


def _emit(text: str, output: str) -> None:
    if output == "-":
        click.echo(text, nl=False)
    else:
        Path(output).write_text(text)


@click.group()
def cli() -> None:
    """Compile formulas into surface-code decoding instances and decode them exactly."""


@cli.command("compile")
@click.argument("source")
@click.option("--mode", "kind", type=click.Choice(MODES), default="qmld", show_default=True)
@click.option("--p", "p", default="1/4", show_default=True, help="letter probability, in (0, 1/4]")
@click.option("--r", "r", default=None, help="special-qubit probability for dqmld, in (0, 1)")
@click.option("--M", "m", default=None, help="approximation factor: a rational >= 1 or 2^l, 2^l^c")
@click.option("-o", "--output", default="-", show_default=True, help="instance file ('-' for stdout)")
@click.option("--max-cells", type=int, default=50_000_000, show_default=True)
def compile_cmd(source, kind, p, r, m, output, max_cells):
    """Compile SOURCE (a DIMACS/expression file or an expression) to an instance file."""
    inst = compile_formula(_formula(source), _mode(kind, p, r, m), max_cells=max_cells)
    _emit(serialize(inst), output)
    info = f"w={inst.width} h={inst.height} ell={inst.ell} support={len(support(inst.noise))}"
    click.echo(info, err=output == "-")


def _fmt_probability(x: Fraction, exact: bool) -> str:
    if exact or x == 0 or x.denominator.bit_length() < 200:
        return format_rational(x)
    return f"~2^{math.log2(x.numerator) - math.log2(x.denominator):.3f}"


@cli.command("decode")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["brute", "support", "structured"]), default="support", show_default=True)
@click.option("--problem", type=click.Choice(["qmld", "dqmld"]), default="qmld", show_default=True)
@click.option("--approx-digits", is_flag=True, help="abbreviate huge probabilities as powers of two")
def decode_cmd(instance, method, problem, approx_digits):
    """Decode an instance file exactly."""
    inst = read_instance(instance)
    if method == "structured" and not hasattr(inst, "placements"):
        raise ValueError("structured decoding needs a compiled instance (file with a sidecar)")
    decoders = {
        ("brute", "qmld"): brute_force_qmld, ("brute", "dqmld"): brute_force_dqmld,
        ("support", "qmld"): support_qmld, ("support", "dqmld"): support_dqmld,
        ("structured", "qmld"): structured_qmld, ("structured", "dqmld"): structured_dqmld,
    }
    res = decoders[(method, problem)](inst)
    exact = not approx_digits
    click.echo(f"error: {res.error.to_literal() or '(identity)'}")
    click.echo(f"probability: {_fmt_probability(res.probability, exact)}")
    if res.assignment is not None:
        click.echo("assignment: " + "".join("1" if v else "0" for v in res.assignment))
    if problem == "dqmld":
        click.echo(f"class: {res.cls}{' (tie)' if res.tie else ''}")
        for c, v in res.cosets.items():
            click.echo(f"coset {c}: {_fmt_probability(v, exact)}")
        total = sum(res.cosets.values(), Fraction(0))
        if method == "brute":
            if total != total_consistent_mass(inst):
                raise Mismatch("coset probabilities do not sum to the consistent mass")
        click.echo(f"total: {_fmt_probability(total, exact)}")


def _pipeline(fn, source: str, as_json: bool, **kw) -> None:
    rep = fn(_formula(source), **kw)
    if as_json:
        click.echo(json.dumps(rep.to_dict(), sort_keys=True))
    else:
        click.echo(rep.to_text(), nl=False)
    if not rep.ok:
        raise Mismatch("pipeline verdict disagrees with brute force")


def _qmld_decoder(method: str):
    return {"structured": structured_qmld, "support": support_qmld}[method]


def _dqmld_decoder(method: str):
    return {"structured": structured_dqmld, "support": support_dqmld}[method]


_method = click.option("--method", type=click.Choice(["structured", "support"]), default="structured",
                       show_default=True, help="oracle used on compiled instances")
_json = click.option("--json", "as_json", is_flag=True, help="print only the machine-readable report")


@cli.command("solve")
@click.argument("source")
@_method
@_json
def solve_cmd(source, method, as_json):
    """Decide satisfiability with one QMLD call."""
    from surfred.pipelines import solve_sat

    _pipeline(solve_sat, source, as_json, decoder=_qmld_decoder(method))


@cli.command("count")
@click.argument("source")
@_method
@_json
def count_cmd(source, method, as_json):
    """Count satisfying assignments by binary search over DQMLD calls."""
    from surfred.pipelines import count_sat

    _pipeline(count_sat, source, as_json, decoder=_dqmld_decoder(method))


@cli.command("majority")
@click.argument("source")
@_method
@_json
def majority_cmd(source, method, as_json):
    """Decide Majority-SAT with one DQMLD call (ties are reported)."""
    from surfred.pipelines import majority_sat

    _pipeline(majority_sat, source, as_json, decoder=_dqmld_decoder(method))


@cli.command("separation")
@click.argument("source")
@click.option("--M", "m", default="2^l", show_default=True)
@click.option("--p", "p", default="1/4", show_default=True)
@_json
def separation_cmd(source, m, p, as_json):
    """Check the approximation separations for one formula."""
    from surfred.pipelines import approx_separation_report

    _pipeline(approx_separation_report, source, as_json, M=parse_m(m), p=parse_rational(p))


@cli.command("verify-gadgets")
@click.option("--gadget", default=None, help="one template id, e.g. and, cross_xz")
@click.option("--template-file", type=click.Path(exists=True, dir_okay=False), default=None)
def verify_cmd(gadget, template_file):
    """Enumerate every gadget's consistent errors and compare with its witnesses."""
    if template_file:
        reports = [verify_gadget(load_template_file(template_file))]
        exclusions = None
    elif gadget:
        kind = gadget.upper()
        if kind not in KINDS:
            raise click.UsageError(f"unknown gadget {gadget!r}; choose from {', '.join(k.lower() for k in KINDS)}")
        reports = all_reports([kind])
        exclusions = verify_exclusions() if kind == "AND" else None
    else:
        reports = all_reports()
        exclusions = verify_exclusions()
    bad = False
    for rep in reports:
        click.echo(rep.summary())
        for msg in rep.mismatches:
            click.echo(f"  {msg}")
        bad |= not rep.match
    if exclusions is not None:
        click.echo(
            f"AND exclusions: Z1Z2Z3 completions={exclusions.case1_completions} "
            f"XZ4 domain={exclusions.xz4_domain} Y-at-XZ4 completions={exclusions.y_at_xz4_completions} "
            f"errors={exclusions.unforced_count} {'ok' if exclusions.ok else 'MISMATCH'}"
        )
        bad |= not exclusions.ok
    if bad:
        raise Mismatch("gadget verification failed")


@cli.command("render")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["ascii", "svg"]), default="ascii", show_default=True)
@click.option("-o", "--output", default="-", show_default=True)
def render_cmd(instance, fmt, output):
    """Draw an instance file as ASCII text or SVG."""
    from surfred.render import render

    _emit(render(read_instance(instance), fmt), output)


DEFAULT_REPORT_CORPUS = ["x1", "!x1", "(x1&x2)", "(x1|x2)", "(x1&!x1)", "(!x1&(x2|!x3))"]


@cli.command("report")
@click.argument("sources", nargs=-1)
@click.option("--p", "p", default="1/4", show_default=True)
@click.option("-o", "--outdir", default="report", show_default=True)
def report_cmd(sources, p, outdir):
    """Witness probabilities of compiled QMLD instances: a TSV table plus a
    PNG plotting log2(P / p^ell) for satisfying and unsatisfying witnesses."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    mode = CompileMode.qmld(parse_rational(p))
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for src in sources or DEFAULT_REPORT_CORPUS:
        f = _formula(src)
        inst = compile_formula(f, mode)
        lo, hi = separation_bounds(inst)
        for a in all_assignments(inst.num_vars):
            prob = probability_of(inst.noise, assignment_witness(inst, a))
            rel = _log2(prob) - _log2(hi)
            rows.append((str(f), "".join("1" if v else "0" for v in a), evaluate(f, a), inst.ell, rel,
                         _log2(lo) - _log2(hi), prob >= lo if evaluate(f, a) else prob <= hi))
    tsv = ["formula\tassignment\tsatisfying\tell\tlog2_p_over_unsat_bound\tlog2_sat_bound_over_unsat_bound\twithin_bound"]
    for r in rows:
        tsv.append("\t".join([r[0], r[1], str(int(r[2])), str(r[3]), f"{r[4]:.6f}", f"{r[5]:.6f}", str(int(r[6]))]))
    (out / "separation.tsv").write_text("\n".join(tsv) + "\n")

    labels = list(dict.fromkeys(r[0] for r in rows))
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(labels)), 4))
    for sat, color, name in ((True, "tab:green", "satisfying"), (False, "tab:red", "unsatisfying")):
        xs = [labels.index(r[0]) for r in rows if r[2] == sat]
        ys = [r[4] for r in rows if r[2] == sat]
        ax.scatter(xs, ys, c=color, label=name, zorder=3)
    ax.axhline(0, color="tab:red", lw=0.8, ls="--", label="unsatisfying bound")
    ax.axhline(rows[0][5] if rows else 0, color="tab:green", lw=0.8, ls="--", label="satisfying bound")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("log2(P / p^ell)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "separation.png", dpi=120)
    plt.close(fig)
    bad = sum(1 for r in rows if not r[6])
    click.echo(f"wrote {out / 'separation.tsv'} and {out / 'separation.png'} ({len(rows)} witnesses)")
    if bad:
        raise Mismatch(f"{bad} witnesses violate their bound")


def _log2(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        cli.main(args=argv, prog_name="surfred", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except (SizeError, SearchBudgetExceeded) as exc:
        click.echo(f"refused: {exc}", err=True)
        return EXIT_CAP
    except Mismatch as exc:
        click.echo(f"mismatch: {exc}", err=True)
        return EXIT_MISMATCH
    except OracleFault as exc:
        click.echo(f"oracle fault: {exc}", err=True)
        return EXIT_MISMATCH
    except (ValueError, KeyError, IndexError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
