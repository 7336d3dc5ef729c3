"""Command line entry point ``phplate``.

Subcommands::

    phplate run <config> [--strict] [--out DIR]
    phplate eigen <config> [--strict] [--out DIR]
    phplate verify [--seed N] [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 solver error,
4 invariant violation (``run``/``eigen`` with ``--strict``, always for ``verify``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, load_config
from .export import write_json_report
from .phsys import AssemblyError, SolverError
from .scenario import all_passed, run, verification_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4

log = logging.getLogger("phplate")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phplate", description="Port-Hamiltonian beam and plate scenarios.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run the analysis named in the config"),
                           ("eigen", "eigenanalysis of the configured model")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", type=Path)
        p.add_argument("--strict", action="store_true", help="exit 4 on any failed invariant check")
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides the config)")
    p = sub.add_parser("verify", help="run the structural verification suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("."))
    return ap


def _summary(report: dict) -> None:
    for name, c in sorted(report.get("checks", {}).items()):
        status = "ok  " if c["passed"] else "FAIL"
        print(f"{status} {name}: {c['value']:.3e} (threshold {c['threshold']:.1e})")
    if "omega [rad/s]" in report:
        ref = report.get("omega_ref [rad/s]")
        for k, w in enumerate(report["omega [rad/s]"]):
            line = f"mode {k + 1}: omega = {w:.10g} rad/s"
            if ref is not None:
                line += f", reference {ref[k]:.10g} rad/s, rel. error {report['relative_error'][k]:.3e}"
            print(line)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            report = verification_suite(args.seed)
            report["passed"] = all_passed(report)
            args.out.mkdir(parents=True, exist_ok=True)
            path = write_json_report(args.out / "verify_report.json", report)
            _summary(report)
            print(f"report written to {path}")
            return EXIT_OK if report["passed"] else EXIT_INVARIANT

        cfg = load_config(args.config)
        out = args.out if args.out is not None else Path(cfg.out_dir)
        report = run(cfg, out, "eigen" if args.command == "eigen" else None)
        _summary(report)
        print(f"artifacts written to {out}")
        if args.strict and not report["passed"]:
            return EXIT_INVARIANT
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, AssemblyError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # model-level validation (ports, boundary combinations) is a config problem
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
