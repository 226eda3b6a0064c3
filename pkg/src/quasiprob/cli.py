"""Command line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import cloning, polytope
from .boxes import make_box
from .inequalities import chsh, inn22_value
from .mass import SignallingError, min_mass
from .scenario import NormalizationError, Scenario, ScenarioError
from .textio import (
    ParseError,
    fmt,
    format_behavior,
    format_behaviors,
    format_jqpd,
    parse_scenario,
    read_behavior,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SIGNALLING = 3


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _sign_matrix(text: str):
    try:
        return [[int(v) for v in row.split(",")] for row in text.split(";")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sign matrix {text!r}") from None


def _emit(text: str, path: str | None):
    if path and path != "-":
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    behavior = read_behavior(args.behavior)
    result = min_mass(behavior)
    print(f"M* = {fmt(result.m_star)}")
    if args.decimals is not None:
        print(f"M* ~ {float(result.m_star):.{args.decimals}f}")
    witness = args.witness or str(Path(args.behavior).with_suffix(".jqpd"))
    Path(witness).write_text(format_jqpd(result.witness))
    return EXIT_OK


def cmd_chsh(args) -> int:
    report = chsh(read_behavior(args.behavior))
    for m in (0, 1):
        for n in (0, 1):
            for sign in (1, -1):
                label = "+" if sign > 0 else "-"
                print(f"S(m={m},n={n},{label}) = {fmt(report.values[(m, n, sign)])}")
    return EXIT_OK


def cmd_inn22(args) -> int:
    print(f"I_NN22 = {fmt(inn22_value(read_behavior(args.behavior), args.n))}")
    return EXIT_OK


def cmd_make_box(args) -> int:
    params = {}
    if args.kind == "pr":
        params = {"alpha": args.alpha, "beta": args.beta, "gamma": args.gamma}
    elif args.kind in ("isotropic", "clone"):
        if args.x is None:
            raise ValueError(f"{args.kind} needs --x")
        params = {"x": args.x}
    elif args.kind == "uniform":
        params = {"scenario": parse_scenario(args.scenario) if args.scenario else Scenario.from_label("2222")}
    elif args.kind == "deterministic":
        if not args.scenario or not args.assignment:
            raise ValueError("deterministic needs --scenario and --assignment")
        params = {
            "scenario": parse_scenario(args.scenario),
            "assignment": [[int(v) for v in p.split(",")] for p in args.assignment.split(";")],
        }
    elif args.kind == "correlation":
        if args.signs is None:
            raise ValueError("correlation needs --signs")
        params = {"sign_matrix": args.signs}
    elif args.kind == "prn":
        if args.n is None:
            raise ValueError("prn needs --n")
        params = {"n": args.n, "variant": args.variant}
    _emit(format_behavior(make_box(args.kind, **params)), args.output)
    return EXIT_OK


def _scan_text(result: polytope.VertexClassification, decimals) -> str:
    head = [f"# total={result.total} exhaustive={str(result.exhaustive).lower()}"]
    for key, value in sorted(result.notes.items()):
        head.append(f"# {key}={value}")
    return "\n".join(head) + "\n" + polytope.classification_csv(result, decimals)


def cmd_scan(args) -> int:
    def progress(done, total):
        logging.getLogger(__name__).info("%d / %d boxes", done, total)

    if args.mode == "full":
        result = polytope.full_scan(
            args.n, jobs=args.jobs, checkpoint=args.checkpoint, progress=progress
        )
    else:
        result = polytope.nn22_scan(
            args.n, mode=args.mode, count=args.count, seed=args.seed, exact=args.exact
        )
    _emit(_scan_text(result, args.decimals), args.output)
    if not result.exhaustive and result.counts:
        m = result.max_mass
        sys.stderr.write(f"max observed M* = {fmt(m)} ({float(m):.4f})\n")
    return EXIT_OK


def cmd_vertices(args) -> int:
    scenario = Scenario.from_label(args.scenario)
    verts = polytope.ns_vertices(scenario)
    behaviors = [polytope.from_cg(v) for v in verts]
    result = polytope.classify_vertices(behaviors)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"vertices_{args.scenario}.beh").write_text(format_behaviors(behaviors))
    local = sum(polytope.is_local_vertex(v) for v in verts)
    text = (
        f"# total={result.total} local={local} nonlocal={result.total - local}\n"
        + polytope.classification_csv(result, args.decimals)
    )
    (out / f"classification_{args.scenario}.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_clone(args) -> int:
    if args.sweep:
        _emit(cloning.sweep_csv(decimals=args.decimals), args.output)
        return EXIT_OK
    if args.x is None:
        raise ValueError("clone needs --x or --sweep")
    if not 0 <= args.x <= 1:
        raise ValueError("x must lie in [0, 1]")
    _emit(cloning.clone_report(args.x).to_text(), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="quasiprob", description="Joint quasi-probability analysis of Bell scenarios."
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="minimal mass M* and a witness jqpd")
    s.add_argument("behavior")
    s.add_argument("--witness", help="witness output path (default: <behavior>.jqpd)")
    s.add_argument("--decimals", type=int)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("chsh", help="the eight CHSH values of a 2222 behavior")
    s.add_argument("behavior")
    s.set_defaults(func=cmd_chsh)

    s = sub.add_parser("inn22", help="I_NN22 value of an NN22 behavior")
    s.add_argument("behavior")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_inn22)

    s = sub.add_parser("make-box", help="write a canonical behavior")
    s.add_argument(
        "kind",
        choices=["pr", "isotropic", "uniform", "deterministic", "correlation", "prn", "clone"],
    )
    s.add_argument("--x", type=_fraction)
    s.add_argument("--alpha", type=int, default=0)
    s.add_argument("--beta", type=int, default=0)
    s.add_argument("--gamma", type=int, default=0)
    s.add_argument("--n", type=int)
    s.add_argument("--variant", type=int, default=0)
    s.add_argument("--signs", type=_sign_matrix, help="rows ';'-separated, e.g. 1,1;1,-1")
    s.add_argument("--scenario", help="e.g. 2,2;2,2")
    s.add_argument("--assignment", help="outcomes per party, e.g. 0,1;1,1")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_make_box)

    s = sub.add_parser("scan", help="classify NN22 correlation boxes by M*")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--mode", choices=["full", "symmetry", "sample"], default="full")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=1000,
                   help="sample size, or orbit representatives for N >= 5 symmetry mode")
    s.add_argument("--exact", type=int, default=8,
                   help="boxes solved exactly in N >= 5 symmetry mode")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--checkpoint", help="resumable checkpoint file (full mode)")
    s.add_argument("--decimals", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("vertices", help="enumerate and classify no-signalling vertices")
    s.add_argument("--scenario", choices=["2222", "3322"], required=True)
    s.add_argument("--outdir", default=".")
    s.add_argument("--decimals", type=int)
    s.set_defaults(func=cmd_vertices)

    s = sub.add_parser("clone", help="cloned isotropic box report")
    s.add_argument("--x", type=_fraction)
    s.add_argument("--sweep", action="store_true")
    s.add_argument("--decimals", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_clone)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SignallingError as exc:
        r = exc.report
        sys.stderr.write(
            f"error: behavior is signalling, no jqpd exists\n"
            f"max NS discrepancy = {fmt(r.max_discrepancy)} at {r.worst_context}\n"
        )
        return EXIT_SIGNALLING
    except (ParseError, ScenarioError, NormalizationError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
