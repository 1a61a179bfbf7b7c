"""Command-line entry point: ``twistcalc {verify,star,curvature,report,checks}``.

Exit codes: 0 when everything asked for passed, 1 when a check failed or
errored, 2 for unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .connection import curvature
from .scenario import ScenarioError, bundled_scenario, load_scenario
from .series import ConfigurationError
from .verify import CATALOG, Context, default_jobs, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _scenario_path(text: str) -> Path:
    p = Path(text)
    if not p.exists() and not p.parent.name and p.suffix == ".scn":
        bundled = bundled_scenario(p.name)
        if bundled.exists():
            return bundled
    return p


def _context(args) -> Context:
    scn = load_scenario(_scenario_path(args.scenario))
    ctx = Context(scn, args.seed, args.order, args.degree)
    ctx.validate()
    return ctx


def _selection(args):
    if not args.checks:
        return None
    return [c.strip() for c in args.checks.split(",") if c.strip()]


def _suite(args):
    scn = load_scenario(_scenario_path(args.scenario))
    return run_suite(scn, _selection(args), seed=args.seed, jobs=args.jobs,
                     order=args.order, degree=args.degree)


def _render(report, fmt: str) -> str:
    return report.to_json() if fmt == "machine" else report.to_table()


def cmd_verify(args) -> int:
    report = _suite(args)
    sys.stdout.write(_render(report, args.format))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_report(args) -> int:
    report = _suite(args)
    try:
        Path(args.output).write_text(_render(report, args.format), encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot write {args.output}: {e.strerror}") from None
    print(f"wrote {args.output} ({report.counts['pass']}/{report.counts['total']} passed)")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_star(args) -> int:
    ctx = _context(args)
    ring = ctx.ring
    try:
        f, g = ring.parse(args.f), ring.parse(args.g)
    except ValueError as e:
        raise ConfigurationError(f"cannot parse function literal: {e}") from None
    print(ctx.D.mul(f, g))
    return EXIT_OK


def render_curvature(world, R, module) -> str:
    """Curvature coefficients: the bare two-form for rank one, else one line per entry."""
    lines = []
    for a in module.labels:
        image = R(module.basis(a))
        parts = dict(world.split_last(image)) if image else {}
        for b in module.labels:
            form = parts.get((b,))
            text = form.space.render(form) if form else "0"
            if module.rank == 1:
                return text
            lines.append(f"R[{module.label_position(b) + 1},{module.label_position(a) + 1}] "
                         f"= {text}")
    return "\n".join(lines)


def cmd_curvature(args) -> int:
    ctx = _context(args)
    if ctx.calc is None:
        raise ConfigurationError("the scenario declares no differential calculus")
    if args.name not in ctx.connections:
        known = ", ".join(ctx.connections) or "none"
        raise ConfigurationError(f"unknown connection {args.name!r} (declared: {known})")
    if args.quantized:
        conn, world = ctx.quantized(args.name), ctx.D
    else:
        conn, world = ctx.connections[args.name], ctx.U
    print(render_curvature(world, curvature(conn), conn.module))
    return EXIT_OK


def cmd_checks(args) -> int:
    width = max(len(c.id) for c in CATALOG)
    for c in CATALOG:
        print(f"{c.id.ljust(width)}  {c.anchor}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, metavar="N", help="override the truncation order")
    common.add_argument("--degree", type=int, metavar="D", help="override the degree bound")
    common.add_argument("--seed", type=int, metavar="S", help="override the sampling seed")

    suite = argparse.ArgumentParser(add_help=False)
    suite.add_argument("--jobs", type=int, default=default_jobs(), metavar="J",
                       help="worker processes (default: available CPUs)")
    suite.add_argument("--format", choices=("human", "machine"), default="human")
    suite.add_argument("--checks", metavar="IDS", help="comma-separated check ids")

    p = argparse.ArgumentParser(prog="twistcalc",
                                description="Exact checks for Drinfeld-twisted calculi.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common, suite], help="run the check suite")
    v.add_argument("scenario")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("report", parents=[common, suite], help="write the suite report to a file")
    r.add_argument("scenario")
    r.add_argument("output")
    r.set_defaults(fn=cmd_report)

    s = sub.add_parser("star", parents=[common], help="print f ⋆ g")
    s.add_argument("scenario")
    s.add_argument("f")
    s.add_argument("g")
    s.set_defaults(fn=cmd_star)

    c = sub.add_parser("curvature", parents=[common], help="print a connection's curvature")
    c.add_argument("scenario")
    c.add_argument("name")
    c.add_argument("--quantized", action="store_true",
                   help="curvature of the quantized connection")
    c.set_defaults(fn=cmd_curvature)

    k = sub.add_parser("checks", help="list the check catalog")
    k.set_defaults(fn=cmd_checks)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
