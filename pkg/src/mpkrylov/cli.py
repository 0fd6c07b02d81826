"""Benchmark command line.

Runs a method x precision x preconditioner grid on a Matrix Market file
and emits a CSV/JSON report, optionally with the per-iteration time
ratios between the full- and mixed-precision ILU(0) variants.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    DEFAULT_BASE_URL,
    build_problem,
    default_grid,
    emit_report,
    fetch_matrix,
    load_matrix,
    run_benchmark,
)
from .ilu import PrecondMode
from .multicomponent import Precision
from .solvers import METHODS, SolverConfig
from .sparse import norm2, spmv, vec_sub


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mpkrylov-bench",
        description="ILU(0)-preconditioned multiple-precision Krylov benchmark",
    )
    ap.add_argument("--matrix", required=True,
                    help="Matrix Market file path, or a collection name with --fetch")
    ap.add_argument("--method", default="all",
                    help="bicg|cgs|bicgstab|gpbicg|all (default all)")
    ap.add_argument("--precision", default="all",
                    help="f64|dd|td|qd|all (default all = dd,td,qd)")
    ap.add_argument("--precond", default=None,
                    help="none|ilu0|ilu0-mixed (default: run the full variant grid)")
    ap.add_argument("--spmv", default=None, choices=["full", "mixed"],
                    help="SpMV mode (default: per the variant grid)")
    ap.add_argument("--eps-rel", type=float, default=1e-13)
    ap.add_argument("--eps-abs", type=float, default=1e-100)
    ap.add_argument("--max-iter-factor", type=int, default=3,
                    help="iteration cap = factor * n (default 3)")
    ap.add_argument("--output", default="csv", choices=["csv", "json"])
    ap.add_argument("--out", default=None, help="write the report to a file")
    ap.add_argument("--ratios", action="store_true",
                    help="append per-iteration time ratio rows")
    ap.add_argument("--fetch", action="store_true",
                    help="treat --matrix as a collection name and download it")
    ap.add_argument("--base-url", default=DEFAULT_BASE_URL)
    ap.add_argument("--cache-dir", default="matrices")
    ap.add_argument("--threads", type=int, default=0,
                    help="enable row-parallel SpMV with N threads (timings exploratory)")
    ap.add_argument("--jobs", type=int, default=1,
                    help="run cells concurrently (timing fields unreliable)")
    ap.add_argument("--quiet", action="store_true")
    return ap


def _methods(spec: str):
    if spec == "all":
        return list(METHODS)
    names = [s.strip() for s in spec.split(",") if s.strip()]
    for nm in names:
        if nm not in METHODS:
            raise SystemExit(f"unknown method {nm!r}")
    return names


def _precisions(spec: str):
    if spec == "all":
        return [Precision.DD, Precision.TD, Precision.QD]
    return [Precision.from_label(s.strip()) for s in spec.split(",") if s.strip()]


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    log = (lambda msg: None) if args.quiet else (
        lambda msg: print(msg, file=sys.stderr, flush=True)
    )

    if args.fetch:
        path = fetch_matrix(args.matrix, base_url=args.base_url,
                            dest_dir=args.cache_dir)
    else:
        path = Path(args.matrix)
        if not path.exists():
            cached = Path(args.cache_dir) / f"{args.matrix}.mtx"
            if cached.exists():
                path = cached
            else:
                raise SystemExit(f"matrix file not found: {args.matrix}")
    log(f"matrix: {path}")

    methods = _methods(args.method)
    precisions = _precisions(args.precision)
    parallel = args.threads > 0
    if parallel:
        import numba

        numba.set_num_threads(max(1, args.threads))

    if args.precond is None and args.spmv is None:
        cells = default_grid(methods, precisions)
    else:
        precond = PrecondMode.from_label(args.precond or "none")
        mode = args.spmv or "full"
        cells = [(m, p, precond, mode)
                 for m in methods for p in precisions
                 if not (mode == "mixed" and p.k < 2)]

    suite = []
    problems = {}
    for method, prec, precond, mode in cells:
        if prec not in problems:
            A = load_matrix(path, prec)
            problems[prec] = (A, build_problem(A, prec, matrix_name=path.stem))
            log(f"loaded {path.stem} at {prec.label}: n={A.n}, nnz={A.nnz}, "
                f"field={A.field}")
            r0 = norm2(vec_sub(problems[prec][1].b,
                               spmv(A, problems[prec][1].x_star)))
            log(f"  residual of exact solution: {r0.to_string(8)}")
        A, problem = problems[prec]
        n = A.n
        cfg = SolverConfig(
            method=method, precision=prec, precond=precond, spmv_mode=mode,
            eps_rel=args.eps_rel, eps_abs=args.eps_abs,
            max_iter=args.max_iter_factor * n,
        )
        suite.append((A, problem, cfg))

    rows = run_benchmark(suite, jobs=args.jobs, log=log)
    text = emit_report(rows, fmt=args.output, ratios=args.ratios)
    if args.out:
        Path(args.out).write_text(text)
        log(f"report written to {args.out}")
    else:
        print(text, end="" if text.endswith("\n") else "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
