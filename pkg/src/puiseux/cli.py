"""Command-line surface: expansion, inventory, radius analysis, checks.

Four subcommands cover the workflow:

* ``expand``   — branch series at the origin (with optional polygon dump)
* ``singular`` — singular-point inventory grouped into rings
* ``radius``   — analytic continuation and per-branch rings of convergence
* ``verify``   — empirical checks of a computed (or supplied) series basis

Each report embeds the input hash, the full run configuration, and the
package version so identical invocations reproduce identical output.
Exit codes: 0 success, 2 a tolerance/precision escalation is needed
(retry hints are printed), 3 an internal invariant broke.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass
from typing import Optional

import mpmath
from mpmath import mpf

from . import __version__, algebra, continuation, landscape, numerics, polygon
from . import series as series_mod
from .errors import (
    AmbiguousMatchError,
    DegenerateFiberError,
    IntegrationError,
    InvariantViolation,
    NotSimpleRootError,
    ParseError,
    PrecisionExhausted,
    PuiseuxError,
    SheetJumpError,
    ToleranceError,
)

# pass rule for the random-point sweep: the paper-scale runs report
# errors around 1e-6..1e-13; an order of 1e-3 already separates a
# correct desk-scale series from a broken one
RANDOM_CHECK_BOUND = mpf("1e-3")


@dataclass(frozen=True)
class RunConfig:
    """Validated knobs shared by all subcommands."""
    precision: int = 150
    terms: int = 32
    divisor: int = 100              # tolerance divisor N in p_min/N
    max_ring: Optional[int] = None
    ode_precision: int = continuation.DEFAULT_ODE_PRECISION
    ode_accuracy: int = continuation.DEFAULT_ODE_ACCURACY
    checks: int = 100               # random-point count
    seed: int = 0

    def __post_init__(self):
        if self.precision < 50:
            raise ParseError("--precision must be at least 50 digits")
        if self.terms < 2:
            raise ParseError("--terms must be at least 2")
        if self.divisor < 2:
            raise ParseError("--tolerance-divisor must be at least 2")


def _config(args) -> RunConfig:
    return RunConfig(
        precision=args.precision, terms=args.terms,
        divisor=args.tolerance_divisor, max_ring=args.max_ring,
        ode_precision=args.ode_precision, ode_accuracy=args.ode_accuracy,
        checks=args.checks, seed=args.seed)


def _load_input(arg: str) -> str:
    import os
    if arg == "-":
        return sys.stdin.read().strip()
    if os.path.isfile(arg):
        with open(arg, "r", encoding="utf-8") as fh:
            return fh.read().strip()
    return arg


def _report_head(text: str, cfg: RunConfig) -> dict:
    return {
        "input": text,
        "input_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "config": dataclasses.asdict(cfg),
        "version": __version__,
    }


def _nstr(x, digits: int = 12) -> str:
    return mpmath.nstr(x, digits)


# ---------------------------------------------------------------------------
# expand


def _labeled_expansion(f, cfg: RunConfig):
    """Expanded branches with table labels, plus their regular forms.

    Returns (labeled branches, scape, z_m, {id(tail): RegularPoly}).
    """
    g, E = polygon.normalize(f)
    num = polygon.NumBiPoly.from_exact(g, cfg.precision)
    tree, leaves = polygon.polygon_tree(num)
    branches, regs = [], {}
    for members in series_mod.orbits(leaves):
        rep = members[0]
        reg = polygon.regular_form(rep)
        tail, acc = series_mod.iterate(reg, cfg.terms)
        s = series_mod.PuiseuxSeries(
            E=E, d=rep.d, prefix=tuple((e, c.value) for e, c in rep.prefix),
            tail_shift=rep.tail_shift, tail=tuple(tail),
            accuracy=acc, dps=cfg.precision)
        branches.append(s)
        regs[id(s.tail)] = reg
    if sum(s.d for s in branches) != g.degree_w:
        raise InvariantViolation(
            "branch cycle numbers do not sum to the degree")
    scape = landscape.landscape(g, cfg.precision)
    z_m = landscape.base_point(scape, cfg.precision)
    labeled = landscape.sort_branches(branches, f, z_m, cfg.precision,
                                      cfg.divisor)
    return labeled, scape, z_m, regs, tree, num


def _polygon_dump(node) -> dict:
    out = {
        "level": node.level,
        "segments": [
            {"lam": str(s.lam), "beta": str(s.beta),
             "points": [[p.i, str(p.e)] for p in s.points]}
            for s in node.segments
        ],
    }
    if node.lam is not None:
        out["lam"] = str(node.lam)
        out["beta"] = str(node.beta)
        out["multiplicity"] = node.multiplicity
        out["center"] = numerics.to_text(node.c)
    if node.children:
        out["children"] = [_polygon_dump(ch) for ch in node.children]
    return out


def _print_polygon(dump: dict, indent: int = 0):
    pad = "  " * indent
    if "lam" in dump:
        print(f"{pad}descend lam={dump['lam']} beta={dump['beta']} "
              f"multiplicity={dump['multiplicity']}")
    for seg in dump["segments"]:
        pts = " ".join(f"({i},{e})" for i, e in seg["points"])
        print(f"{pad}segment lam={seg['lam']} beta={seg['beta']} "
              f"points {pts}")
    for ch in dump.get("children", []):
        _print_polygon(ch, indent + 1)


def cmd_expand(args) -> int:
    cfg = _config(args)
    text = _load_input(args.input)
    f = algebra.parse(text)
    labeled, scape, z_m, regs, tree, num = _labeled_expansion(f, cfg)
    report = _report_head(text, cfg)
    report["series"] = [series_mod.to_doc(b) for b in labeled]
    if args.dump_polygon:
        report["polygon"] = _polygon_dump(tree)
    if args.residual_log:
        report["residual_log"] = list(num.residual_log)
    if args.format == "doc":
        print(json.dumps(report, indent=2))
        return 0
    print(f"# {text}")
    print(f"# sha256 {report['input_sha256'][:16]}…  version {__version__}")
    for b in labeled:
        print(f"branch {b.label}: cycle {b.d}, pole order {b.E}, "
              f"accuracy {b.accuracy}")
        for q, c in b.terms_for_sheet(0)[:args.show_terms]:
            print(f"  z^{q}  {_nstr(c)}")
        extra = b.term_count - args.show_terms
        if extra > 0:
            print(f"  … {extra} more terms")
    if args.dump_polygon:
        print("polygon:")
        _print_polygon(report["polygon"], 1)
    if args.residual_log:
        print(f"residuals pruned: {len(num.residual_log)}")
        for entry in num.residual_log:
            print(f"  {entry['where']}: w^{entry['w_power']} "
                  f"z^{entry['z_exp']} |{entry['magnitude']}|")
    return 0


# ---------------------------------------------------------------------------
# singular


def cmd_singular(args) -> int:
    cfg = _config(args)
    text = _load_input(args.input)
    f = algebra.parse(text)
    g, _ = polygon.normalize(f)
    scape = landscape.landscape(g, cfg.precision)
    report = _report_head(text, cfg)
    report["origin_singular"] = scape.origin_singular
    report["rings"] = [
        {"index": r.index, "modulus": _nstr(r.modulus),
         "points": [{"location": numerics.to_text(p.location),
                     "pole": p.is_pole} for p in r.points]}
        for r in scape.rings
    ]
    if args.format == "doc":
        print(json.dumps(report, indent=2))
        return 0
    print(f"# {text}")
    print(f"origin singular: {scape.origin_singular}")
    print(f"{len(scape.points)} nonzero singular points in "
          f"{len(scape.rings)} rings")
    for r in scape.rings:
        print(f"ring {r.index}  |r| = {_nstr(r.modulus)}  "
              f"({len(r.points)} point{'s' if len(r.points) > 1 else ''})")
        for p in r.points:
            kind = "pole" if p.is_pole else "branch point"
            print(f"  {_nstr(p.location.value)}  {kind}")
    return 0


# ---------------------------------------------------------------------------
# radius


def cmd_radius(args) -> int:
    cfg = _config(args)
    text = _load_input(args.input)
    rep = continuation.radii(
        text, precision=cfg.precision, terms=cfg.terms, divisor=cfg.divisor,
        max_ring=cfg.max_ring, ode_precision=cfg.ode_precision,
        ode_accuracy=cfg.ode_accuracy)
    report = _report_head(text, cfg)
    report["continuation"] = [
        {"ring": p.ring_index,
         "point": numerics.to_text(p.point.location),
         "z_s": _nstr(p.z_s), "z_e": _nstr(p.z_e),
         "continuable": list(p.continuable), "impinged": list(p.impinged),
         "integration": [
             {"branch": row["branch"],
              "w_integrated": _nstr(row["w_integrated"]),
              "w_exact": _nstr(row["w_exact"]),
              "difference": _nstr(row["difference"]),
              "impinges": row["impinges"]}
             for row in p.integration]}
        for p in rep.points
    ]
    report["branches"] = [
        {"label": b.label, "cycle": b.cycle, "ring": b.ring_index,
         "modulus": _nstr(b.modulus) if b.modulus is not None else None}
        for b in rep.branches
    ]
    report["rings_processed"] = rep.rings_processed
    if args.format == "doc":
        print(json.dumps(report, indent=2))
        return 0
    print(f"# {text}")
    print("continuation:")
    for p in rep.points:
        cont = "{" + ", ".join(p.continuable) + "}"
        print(f"  ring {p.ring_index}  point {_nstr(p.point.location.value)}"
              f"  continues {cont}")
        if args.integration_report:
            for row in p.integration:
                print(f"    {row['branch'] or '(sheet)'}: "
                      f"integrated {_nstr(row['w_integrated'])}  "
                      f"difference {_nstr(row['difference'], 5)}  "
                      f"impinges {row['impinges']}")
    print("radii of convergence:")
    for b in rep.branches:
        if b.ring_index is None:
            where = (f"beyond ring {rep.rings_processed}"
                     if rep.rings_processed else "entire (no singular rings)")
            print(f"  {b.label}  cycle {b.cycle}  {where}")
        else:
            print(f"  {b.label}  cycle {b.cycle}  ring {b.ring_index}  "
                  f"|r_c| = {_nstr(b.modulus)}")
    return 0


# ---------------------------------------------------------------------------
# verify


def _verify_checks(f, cfg: RunConfig, provided=None):
    """Run all empirical properties; returns (checks, radius report)."""
    checks = []
    labeled, scape, z_m, regs, _, _ = _labeled_expansion(f, cfg)

    total = sum(b.d for b in labeled)
    g, _ = polygon.normalize(f)
    checks.append(("basis-completeness",
                   total == g.degree_w,
                   f"cycle numbers sum to {total} of degree {g.degree_w}"))

    # substitute provided series (keyed by label) for the checked tails
    subject = {b.label: b for b in labeled}
    if provided:
        for doc in provided:
            s = series_mod.from_doc(doc)
            if s.label not in subject:
                checks.append(("series-alignment", False,
                               f"unknown label {s.label!r} in document"))
                continue
            subject[s.label] = s

    # residual order: plugging the tail back in must vanish through the
    # whole truncation window
    ok, details = True, []
    for b in labeled:
        s = subject[b.label]
        reg = regs[id(b.tail)]
        order = series_mod.residual_order(reg, s.tail)
        details.append(f"{b.label}:{order}/{len(s.tail)}")
        if order < len(s.tail):
            ok = False
    checks.append(("residual-order", ok, " ".join(details)))

    # conjugate closure: all sheets of all branches reproduce the fiber
    # at the base point within p_min/N
    fib = algebra.fiber(f, z_m, cfg.precision)
    vals = [s.eval(z_m, j) for s in subject.values() for j in s.sheets()]
    try:
        idx = landscape.match(vals, fib, cfg.divisor)
        ok = sorted(idx) == list(range(len(fib.values)))
        detail = "all sheets matched injectively" if ok else \
            "sheet values do not exhaust the fiber"
    except (ToleranceError, AmbiguousMatchError) as exc:
        ok, detail = False, str(exc)
    checks.append(("conjugate-closure", ok, detail))

    # ring assignment plus partial-sum straddle
    rep = None
    if scape.rings:
        rep = continuation.radii(
            f, precision=cfg.precision, terms=cfg.terms, divisor=cfg.divisor,
            max_ring=cfg.max_ring, ode_precision=cfg.ode_precision,
            ode_accuracy=cfg.ode_accuracy)
        ok, details = True, []
        for b in rep.branches:
            if b.ring_index is None:
                details.append(f"{b.label}:open")
                continue
            z_c, z_d = continuation.straddle_points(
                scape, b.ring_index, cfg.precision)
            s = subject[b.label]
            inner = series_mod.classify_profile(s.term_magnitudes(z_c))
            outer = series_mod.classify_profile(s.term_magnitudes(z_d))
            details.append(f"{b.label}:{inner[0]}/{outer[0]}")
            if inner != "converging" or outer != "diverging":
                ok = False
        checks.append(("straddle", ok, " ".join(details)))
    else:
        checks.append(("straddle", True, "no singular rings to straddle"))

    # random-point sweep inside the convergence disk
    ok, details = True, []
    with mpmath.workdps(cfg.precision):
        for b in (rep.branches if rep else []):
            r_mod = b.modulus if b.modulus is not None else \
                scape.rings[-1].modulus
            worst = continuation.random_point_check(
                subject[b.label], g, r_mod, cfg.precision,
                count=cfg.checks, seed=cfg.seed)
            details.append(f"{b.label}:{_nstr(worst, 3)}")
            if worst > RANDOM_CHECK_BOUND:
                ok = False
        if rep is None:
            for label, s in subject.items():
                worst = continuation.random_point_check(
                    s, g, mpf(1), cfg.precision, count=cfg.checks,
                    seed=cfg.seed)
                details.append(f"{label or 'branch'}:{_nstr(worst, 3)}")
                if worst > RANDOM_CHECK_BOUND:
                    ok = False
    checks.append(("random-points", ok, " ".join(details)))
    return checks, rep


def cmd_verify(args) -> int:
    cfg = _config(args)
    text = _load_input(args.input)
    f = algebra.parse(text)
    provided = None
    if args.series:
        with open(args.series, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        provided = doc["series"] if isinstance(doc, dict) else doc
    checks, _ = _verify_checks(f, cfg, provided)
    report = _report_head(text, cfg)
    report["checks"] = [
        {"name": n, "passed": p, "detail": d} for n, p, d in checks]
    failed = [n for n, p, _ in checks if not p]
    if args.format == "doc":
        print(json.dumps(report, indent=2))
    else:
        print(f"# {text}")
        for n, p, d in checks:
            print(f"{'PASS' if p else 'FAIL'} {n}: {d}")
    if failed:
        print(f"escalation: checks failed ({', '.join(failed)}); retry "
              f"with --terms {2 * cfg.terms} or --precision "
              f"{2 * cfg.precision}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _add_common(sub):
    sub.add_argument("input", help="polynomial file, inline expression, "
                     "or - for stdin")
    sub.add_argument("--precision", type=int, default=150,
                     help="working precision in decimal digits (>= 50)")
    sub.add_argument("--terms", type=int, default=32,
                     help="series tail length (>= 2)")
    sub.add_argument("--tolerance-divisor", type=int, default=100,
                     metavar="N", help="match tolerance p_min/N")
    sub.add_argument("--max-ring", type=int, default=None,
                     help="process at most this many singular rings")
    sub.add_argument("--ode-precision", type=int,
                     default=continuation.DEFAULT_ODE_PRECISION,
                     help="working digits for path integration")
    sub.add_argument("--ode-accuracy", type=int,
                     default=continuation.DEFAULT_ODE_ACCURACY,
                     help="integration accuracy goal in digits")
    sub.add_argument("--checks", type=int, default=100,
                     help="random-point count for verification")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for random sampling (recorded in reports)")
    sub.add_argument("--format", choices=("table", "doc"), default="table",
                     help="human table or structured JSON document")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="puiseux",
        description="Fractional power series of algebraic functions "
                    "w(z) defined by f(z, w) = 0, and their exact radii "
                    "of convergence.")
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__}")
    subs = ap.add_subparsers(dest="command", required=True)

    s = subs.add_parser("expand", help="branch series at the origin")
    _add_common(s)
    s.add_argument("--dump-polygon", action="store_true",
                   help="include the recursion tree in the output")
    s.add_argument("--residual-log", action="store_true",
                   help="include pruned residual terms in the output")
    s.add_argument("--show-terms", type=int, default=12,
                   help="terms per branch in table output")
    s.set_defaults(func=cmd_expand)

    s = subs.add_parser("singular", help="singular-point inventory")
    _add_common(s)
    s.set_defaults(func=cmd_singular)

    s = subs.add_parser("radius", help="rings of convergence per branch")
    _add_common(s)
    s.add_argument("--integration-report", action="store_true",
                   help="per-sheet integration diagnostics in table output")
    s.set_defaults(func=cmd_radius)

    s = subs.add_parser("verify", help="empirical checks of a series basis")
    _add_common(s)
    s.add_argument("--series", default=None,
                   help="JSON series document to check instead of a "
                        "fresh expansion")
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (ToleranceError, PrecisionExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        hints = []
        if getattr(exc, "suggest_precision", None):
            hints.append(f"--precision {exc.suggest_precision}")
        terms = getattr(exc, "suggest_terms", None)
        if isinstance(terms, int) and not isinstance(terms, bool):
            hints.append(f"--terms {2 * terms}")
        elif terms:
            hints.append("--terms <more>")
        print("escalation: retry with more digits or terms"
              + (f" ({' '.join(h for h in hints if h)})" if hints else ""),
              file=sys.stderr)
        return 2
    except (ParseError, AmbiguousMatchError, NotSimpleRootError,
            IntegrationError, SheetJumpError, DegenerateFiberError,
            PuiseuxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
