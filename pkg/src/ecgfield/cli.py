"""Command line: ``ecgfield run|compare|presets``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from . import report
from .errors import DegenerateBasisError, DomainError, UnsupportedError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _format_validation(err: ValidationError) -> str:
    lines = [f"invalid config ({err.error_count()} problem(s)):"]
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    try:
        cfg = report.resolve_config(args.config)
        out = Path(args.out) if args.out else Path(cfg.output.directory)
        report.check_writable(out)
    except ValidationError as e:
        print(_format_validation(e), file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError, DomainError, UnsupportedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        rep = report.execute(cfg)
    except DegenerateBasisError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, UnsupportedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        written = report.write_outputs(cfg, rep, out)
    except OSError as e:
        print(f"error: cannot write outputs: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    for p in written:
        print(p)
    est = rep.dipole
    if est is not None:
        print(f"e1 = {est.e1:.6e}  mu_z = {est.dipole:.6e}  [{rep.verdict}]")
    print(f"e2 = {rep.fit.coeff(2):.8f}  (-2 e2 = {-2 * rep.fit.coeff(2):.6f})")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        a = json.loads(Path(args.a).read_text())
        b = json.loads(Path(args.b).read_text())
        rows = report.compare_documents(a, b)
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: cannot read reports: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except report.ReportMismatch as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    print(report.format_comparison(rows, Path(args.a).parent.name or "A", Path(args.b).parent.name or "B"))
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in report.preset_names():
        desc = report.preset_config(name).get("description", "")
        print(f"{name:<24} {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgfield", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config (path, report.json or preset name)")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="tabulate fit coefficients and diagnostics of two reports")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("presets", help="list shipped experiment configs")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
