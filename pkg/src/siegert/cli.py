"""Command-line interface: ``siegert run|compare|dump-matrices``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config

EXIT_OK = 0
EXIT_COMPARE_FAILED = 1
EXIT_CONFIG = 2
EXIT_PIPELINE = 3
EXIT_IO = 4


def _cmd_run(args) -> int:
    from .runner import run

    cfg = load_config(args.config)
    report = run(cfg)
    for row in report.rows:
        gv = "-" if row.gamma_var is None else f"{row.gamma_var:.6g}"
        ge = "-" if row.gamma_exact is None else f"{row.gamma_exact:.6g}"
        print(f"n={row.n0:<4d} lambda*={row.lambda_star:.6f} E={row.energy_var:.10g} "
              f"Gamma_var={gv} Gamma_exact={ge} [{row.status}]")
    print(f"{len(report.rows)} resonance(s); wrote {len(report.files)} file(s) to {cfg.output.directory}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    from .runner import compare, format_summary, read_resonances

    rows = read_resonances(args.report)
    summary = compare(rows, args.tol_gamma, args.tol_energy)
    print(format_summary(summary))
    target = Path(args.report)
    verdict = (target if target.is_dir() else target.parent) / "verdict.json"
    verdict.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if summary["passed"] else EXIT_COMPARE_FAILED


def _cmd_dump(args) -> int:
    from .basis import LaguerreBasis, assemble_factors, dump_matrices

    cfg = load_config(args.config)
    factors = assemble_factors(LaguerreBasis(cfg.N, cfg.beta), cfg.family, cfg.l)
    out = Path(args.out) if args.out else cfg.output.directory
    out.mkdir(parents=True, exist_ok=True)
    for path in dump_matrices(factors, out):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="siegert", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a stabilization experiment")
    r.add_argument("config", help="TOML experiment file")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="check variational against exact values")
    c.add_argument("report", help="resonances.csv or the directory holding it")
    c.add_argument("--tol-gamma", type=float, required=True, help="relative tolerance on Gamma")
    c.add_argument("--tol-energy", type=float, required=True, help="relative tolerance on E")
    c.set_defaults(func=_cmd_compare)

    d = sub.add_parser("dump-matrices", help="write H0 and W as CSV")
    d.add_argument("config", help="TOML experiment file")
    d.add_argument("--out", help="target directory (default: config output directory)")
    d.set_defaults(func=_cmd_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, OSError) or args.command == "compare":
            print(f"i/o error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"pipeline error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except (ArithmeticError, RuntimeError) as exc:
        print(f"pipeline error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
