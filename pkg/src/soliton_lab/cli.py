"""Command line: ``soliton-lab verify|suite|list``.

Exit codes: 0 every check passed, 1 a check failed, 2 bad input (unknown
target, descriptor or expression error, invalid option), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from . import __version__
from .backend import kernel
from .catalog import FAMILIES, SUITE_TARGETS, CatalogError, resolve
from .charts import ChartError
from .exprlang import ExprError
from .geometry import MetricError
from .submanifold import ImmersionError

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
INPUT_ERRORS = (CatalogError, ChartError, ExprError, MetricError, ImmersionError)


class InputError(Exception):
    pass


def _tol(text):
    """``NAME=V`` or a bare ``V`` applying to every check."""
    name, sep, value = text.rpartition("=")
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance {text!r}; use NAME=VALUE or VALUE") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {v}")
    return (name if sep else None, v)


def _common(p):
    p.add_argument("--samples", type=int, default=64, help="sample points per target (default 64)")
    p.add_argument("--seed", type=int, default=0, help="sampler seed (default 0)")
    p.add_argument("--tol", type=_tol, action="append", default=[], metavar="NAME=V",
                   help="override a check tolerance; a bare value overrides all")
    p.add_argument("--margin", type=float, default=None,
                   help="boundary margin as a fraction of the box width")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out", default=None, help="write the report to this path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="soliton-lab",
        description="Verify Ricci soliton identities on catalog manifolds and descriptor files.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} ({kernel.NAME} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="check one catalog target or .manifold file")
    v.add_argument("target", help="e.g. hypercylinder?k=2&n=3 or path/to/file.manifold")
    _common(v)
    s = sub.add_parser("suite", help="check every catalog target and the controls")
    s.add_argument("--only", action="append", default=None, metavar="SUBSTRING",
                   help="restrict to targets containing SUBSTRING (repeatable)")
    _common(s)
    sub.add_parser("list", help="list catalog families and suite targets")
    return parser


def _config(args):
    from .verify import RunConfig

    named = {name: v for name, v in args.tol if name is not None}
    bare = [v for name, v in args.tol if name is None]
    from .verify import REFS
    unknown = sorted(set(named) - set(REFS))
    if unknown:
        raise InputError(f"unknown check name(s) in --tol: {', '.join(unknown)}")
    if args.margin is not None and not 0 <= args.margin < 0.5:
        raise InputError(f"--margin must lie in [0, 0.5), got {args.margin}")
    try:
        return RunConfig(samples=args.samples, seed=args.seed, tolerances=named,
                         global_tol=bare[-1] if bare else None, margin=args.margin)
    except ValueError as err:
        raise InputError(str(err)) from None


def _fmt(x):
    return "inf" if x is None else f"{x:.3e}"


def render_table(report):
    lines = []

    def target_block(rep):
        lines.append(f"target: {rep['target']}")
        lines.append(f"  {'check':<32} {'residual':>10} {'cmp':>3} {'tolerance':>10}  result")
        for c in rep["checks"]:
            flag = "PASS" if c["pass"] else "FAIL"
            if c.get("note"):
                flag += " (tolerance-induced)"
            lines.append(f"  {c['name']:<32} {_fmt(c['max_residual']):>10} "
                         f"{c['comparison']:>3} {c['tolerance']:>10.1e}  {flag}")
        v = rep["verdicts"]
        lines.append(f"  verdicts: lambda={v['lambda']:.6g} {v['classification']} "
                     f"trivial={'yes' if v['trivial'] else 'no'} gradient={v['gradient']}")

    if report.get("suite"):
        for rep in report["targets"]:
            target_block(rep)
            lines.append("")
        lines.append("controls:")
        for row in report["sections"]["controls"]:
            lines.append(f"  {row['target']:<40} {_fmt(row['max_residual']):>10} >= "
                         f"{row['tolerance']:>8.1e}  {'PASS' if row['pass'] else 'FAIL'}")
        lines.append("")
        lines.append("sections:")
        for name, rows in report["sections"].items():
            ok = sum(r["pass"] for r in rows)
            lines.append(f"  {name:<32} {ok:>4}/{len(rows):<4} passed")
    else:
        target_block(report)
    lines.append(f"overall: {'PASS' if report['pass'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    return render_table(report)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _list():
    lines = ["families:"]
    for name, desc in FAMILIES.items():
        lines.append(f"  {name:<16} {desc}")
    lines.append("suite targets:")
    for t in SUITE_TARGETS:
        entry = resolve(t)
        lines.append(f"  {t:<44} {entry.description}")
    from .verify import REFS
    lines.append("checks:")
    for name, ref in REFS.items():
        lines.append(f"  {name:<32} {ref}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # argparse reports usage errors with status 2
        return int(exc.code or 0)
    from .descriptor import DescriptorError
    from . import verify
    try:
        if args.command == "list":
            return _list()
        config = _config(args)
        if args.command == "verify":
            report = verify.run_verify(args.target, config)
        else:
            targets = verify.select_targets(args.only)
            if not targets:
                raise InputError("no suite targets match the --only filter")
            report = verify.run_suite(config, targets)
        _emit(render(report, args.format), args.out)
        return EXIT_OK if report["pass"] else EXIT_FAIL
    except (InputError, DescriptorError, *INPUT_ERRORS) as err:
        print(f"soliton-lab: error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as err:
        print(f"soliton-lab: error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:  # noqa: BLE001 - last-resort report for the exit code contract
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
