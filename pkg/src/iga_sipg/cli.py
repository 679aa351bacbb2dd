"""Command line entry point ``iga-sipg``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .assembly import assemble_matrix
from .exceptions import IgaError
from .io import load_config
from .space import build_space
from .study import run_study, study_domain


def _study(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg = replace(cfg, output=args.out)
    result = run_study(cfg)
    print("level,p,N,e,rate,seconds")
    for r in result.rows:
        rate = "" if r.rate is None else f"{r.rate:.6e}"
        print(f"{r.level},{r.p},{r.N},{r.e:.6e},{rate},{r.seconds:.6e}")
    for p, reason in result.failures.items():
        print(f"degree {p} aborted: {reason}", file=sys.stderr)
    if cfg.output:
        print(f"wrote {cfg.output}", file=sys.stderr)
    return 1 if result.failures else 0


def _verify(args) -> int:
    from .verification import CHECKS
    selected = CHECKS if not args.only else [CHECKS[i - 1] for i in args.only]
    failed = 0
    for check in selected:
        res = check()
        print(res.line(), flush=True)
        failed += not res.passed
    print(f"{len(selected) - failed} of {len(selected)} checks passed")
    return 1 if failed else 0


def _export(args) -> int:
    cfg = load_config(args.config)
    level = cfg.levels[0] if args.level is None else args.level
    p = cfg.degrees[0] if args.degree is None else args.degree
    domain = study_domain(cfg, level, p)
    space = build_space(domain, cfg.mode)
    A = assemble_matrix(domain, space, cfg.params)
    A.export_triplets(args.out)
    print(f"wrote {args.out}: N = {A.n}, nnz = {A.nnz} (lower triangle)", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iga-sipg", description="Multipatch IGA with symmetric interior penalty coupling.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="run a refinement/degree sweep and write the error table")
    st.add_argument("--config", required=True, type=Path)
    st.add_argument("--out", help="CSV path (overrides the config)")
    st.set_defaults(func=_study)

    ve = sub.add_parser("verify", help="run the numerical acceptance checks")
    ve.add_argument("--only", type=int, nargs="+", choices=range(1, 11), metavar="N",
                    help="run only the given check numbers")
    ve.set_defaults(func=_verify)

    ex = sub.add_parser("export-matrix", help="write the assembled matrix as triplets")
    ex.add_argument("--config", required=True, type=Path)
    ex.add_argument("--out", required=True, type=Path)
    ex.add_argument("--level", type=int, help="refinement level (default: first of the config)")
    ex.add_argument("--degree", type=int, help="spline degree (default: first of the config)")
    ex.set_defaults(func=_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IgaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
