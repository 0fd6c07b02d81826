"""Benchmark harness: problem construction, grid runs, reporting, fetch.

Problems follow the collection protocol: the exact solution is
sqrt(2)*[1 2 ... n]^T for real matrices and sqrt(2+3i)*[1 2 ... n]^T for
complex ones, with b = A x* computed in the working precision, and the
iteration cap defaulting to 3n.
"""

from __future__ import annotations

import csv
import io
import json
import tarfile
import tempfile
import urllib.request
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .ilu import PrecondMode
from .multicomponent import MCComplex, MCFloat, Precision
from .solvers import SolveReport, SolverConfig, solve
from .sparse import CsrMatrix, DenseVector, coo_to_csr, read_matrix_market, scale, spmv

__all__ = [
    "ProblemSpec",
    "BenchRow",
    "RatioRow",
    "build_problem",
    "load_matrix",
    "default_grid",
    "run_benchmark",
    "warmup_kernels",
    "emit_report",
    "parse_report",
    "ratio_rows",
    "fetch_matrix",
    "COLLECTION_GROUPS",
    "DEFAULT_BASE_URL",
]

CSV_HEADER = [
    "matrix", "method", "precision", "precond", "spmv_mode",
    "iterations", "converged", "total_s", "ms_per_iter", "true_relres", "err2",
]


@dataclass
class ProblemSpec:
    """One benchmark linear system at a given working precision."""

    matrix_name: str
    field: str
    n: int
    x_star: DenseVector
    b: DenseVector


@dataclass
class BenchRow:
    matrix: str
    method: str
    precision: str
    precond: str
    spmv_mode: str
    iterations: int
    converged: bool
    total_s: float
    ms_per_iter: float
    true_relres: float
    err2: float


@dataclass
class RatioRow:
    """Per-iteration time ratios between preconditioned/mixed variants."""

    matrix: str
    method: str
    precision: str
    ilu0_over_plain: float
    ilu0d_over_plaind: float
    ilu0_over_ilu0d: float


def build_problem(A: CsrMatrix, precision: Precision,
                  matrix_name: str = "") -> ProblemSpec:
    """Exact solution and right-hand side at the working precision."""
    if A.precision != precision:
        raise ValueError("load the matrix at the requested precision first")
    n = A.n
    idx = np.arange(1, n + 1, dtype=np.float64)
    ramp = DenseVector.from_float64(
        idx if A.field == "real" else idx.astype(np.complex128), precision
    )
    if A.field == "real":
        root = MCFloat.from_float(2.0, precision).sqrt()
    else:
        root = MCComplex.from_complex(2 + 3j, precision).sqrt()
    x_star = scale(root, ramp)
    b = spmv(A, x_star)
    return ProblemSpec(matrix_name, A.field, n, x_star, b)


def load_matrix(path, precision: Precision) -> CsrMatrix:
    return coo_to_csr(read_matrix_market(path), precision)


def default_grid(methods=None, precisions=None):
    """(method, precision, precond, spmv_mode) cells mirroring the paper grid."""
    methods = list(methods) if methods else ["bicg", "cgs", "bicgstab", "gpbicg"]
    precisions = list(precisions) if precisions else [Precision.DD, Precision.TD, Precision.QD]
    variants = [
        (PrecondMode.NONE, "full"),        # plain
        (PrecondMode.ILU0_FULL, "full"),   # ILU(0)
        (PrecondMode.NONE, "mixed"),       # mixed SpMV
        (PrecondMode.ILU0_MIXED, "mixed"),  # mixed SpMV + mixed ILU(0)
    ]
    cells = []
    for m in methods:
        for p in precisions:
            for precond, mode in variants:
                if mode == "mixed" and p.k < 2:
                    continue
                cells.append((m, p, precond, mode))
    return cells


def warmup_kernels(field: str, precisions, modes=("full", "mixed")) -> None:
    """Trigger kernel compilation outside the timed cells.

    Runs a tiny identity solve for each (precision, spmv mode) pair so the
    first benchmark cell does not absorb jit compilation time.
    """
    rows = np.array([0, 1], dtype=np.int64)
    cols = rows.copy()
    vre = np.ones(2)
    vim = np.zeros(2) if field == "complex" else None
    from .sparse import CooMatrix

    coo = CooMatrix(2, 2, rows, cols, vre, vim, "general")
    for prec in precisions:
        A = coo_to_csr(coo, prec)
        problem = build_problem(A, prec, matrix_name="warmup")
        for mode in modes:
            if mode == "mixed" and prec.k < 2:
                continue
            for pm in (PrecondMode.NONE, PrecondMode.ILU0_FULL, PrecondMode.ILU0_MIXED):
                cfg = SolverConfig(method="bicg", precision=prec, precond=pm,
                                   spmv_mode=mode, max_iter=4)
                solve(A, problem.b, cfg)


def _row_from_report(matrix_name: str, rep: SolveReport) -> BenchRow:
    return BenchRow(
        matrix=matrix_name,
        method=rep.method,
        precision=rep.precision,
        precond=rep.precond,
        spmv_mode=rep.spmv_mode,
        iterations=rep.iterations,
        converged=rep.converged,
        total_s=rep.total_seconds,
        ms_per_iter=rep.ms_per_iteration,
        true_relres=rep.true_relres,
        err2=rep.error_norm,
    )


def run_cell(A: CsrMatrix, problem: ProblemSpec, cfg: SolverConfig,
             parallel_spmv: bool = False) -> BenchRow:
    rep = solve(A, problem.b, cfg, x_star=problem.x_star,
                parallel_spmv=parallel_spmv)
    return _row_from_report(problem.matrix_name, rep)


def run_benchmark(suite, jobs: int = 1, log=None) -> list[BenchRow]:
    """Run (A, problem, cfg) cells; failures become non-converged rows.

    Cells run sequentially by default so timings are uncontended; jobs > 1
    runs them in a thread pool and leaves timing fields unreliable.
    """
    fields = {}
    for A, problem, cfg in suite:
        fields.setdefault(A.field, set()).add(cfg.precision)
    for fld, precs in fields.items():
        warmup_kernels(fld, sorted(precs, key=lambda p: p.k))

    def one(cell):
        A, problem, cfg = cell
        try:
            row = run_cell(A, problem, cfg)
        except Exception as exc:  # surfaced in the row, run continues
            row = BenchRow(
                matrix=problem.matrix_name, method=cfg.method,
                precision=cfg.precision.label, precond=cfg.precond.value,
                spmv_mode=cfg.spmv_mode, iterations=0, converged=False,
                total_s=float("nan"), ms_per_iter=float("nan"),
                true_relres=float("nan"), err2=float("nan"),
            )
            if log:
                log(f"cell failed: {cfg.method}/{cfg.precision.label}: {exc}")
        if log:
            log(f"{row.matrix} {row.method} {row.precision} {row.precond} "
                f"{row.spmv_mode}: iters={row.iterations} converged={row.converged} "
                f"total={row.total_s:.3f}s")
        return row

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, suite))
    return [one(cell) for cell in suite]


def emit_report(rows, fmt: str = "csv", out=None, ratios: bool = False) -> str:
    """Serialize rows (and optionally ratio rows) to CSV or JSON."""
    if not rows:
        raise ValueError("no rows to report")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([
                r.matrix, r.method, r.precision, r.precond, r.spmv_mode,
                r.iterations, r.converged, repr(r.total_s), repr(r.ms_per_iter),
                repr(r.true_relres), repr(r.err2),
            ])
        if ratios:
            w.writerow([])
            w.writerow(["matrix", "method", "precision",
                        "ilu0_over_plain", "ilu0d_over_plaind", "ilu0_over_ilu0d"])
            for rr in ratio_rows(rows):
                w.writerow([rr.matrix, rr.method, rr.precision,
                            repr(rr.ilu0_over_plain), repr(rr.ilu0d_over_plaind),
                            repr(rr.ilu0_over_ilu0d)])
        text = buf.getvalue()
    else:
        payload = {"rows": [_row_json(r) for r in rows]}
        if ratios:
            payload["ratios"] = [asdict(rr) for rr in ratio_rows(rows)]
        text = json.dumps(payload, indent=2)
    if out is not None:
        out.write(text)
    return text


def _row_json(r: BenchRow) -> dict:
    d = asdict(r)
    d["total_s"] = d.pop("total_s")
    return d


def parse_report(text: str) -> list[BenchRow]:
    """Inverse of emit_report's CSV main table (used for round-trip checks)."""
    rows = []
    rd = csv.reader(io.StringIO(text))
    header = next(rd)
    if header != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    for rec in rd:
        if not rec:
            break  # ratio section separator
        rows.append(BenchRow(
            matrix=rec[0], method=rec[1], precision=rec[2], precond=rec[3],
            spmv_mode=rec[4], iterations=int(rec[5]), converged=rec[6] == "True",
            total_s=float(rec[7]), ms_per_iter=float(rec[8]),
            true_relres=float(rec[9]), err2=float(rec[10]),
        ))
    return rows


def ratio_rows(rows) -> list[RatioRow]:
    """Table-4-style per-iteration time ratios from a finished grid."""
    index = {}
    for r in rows:
        index[(r.matrix, r.method, r.precision, r.precond, r.spmv_mode)] = r
    out = []
    seen = set()
    for r in rows:
        key = (r.matrix, r.method, r.precision)
        if key in seen:
            continue
        seen.add(key)
        plain = index.get(key + ("none", "full"))
        ilu = index.get(key + ("ilu0", "full"))
        plain_d = index.get(key + ("none", "mixed"))
        ilu_d = index.get(key + ("ilu0-mixed", "mixed"))

        def q(a, b):
            if a is None or b is None or not b.ms_per_iter:
                return float("nan")
            return a.ms_per_iter / b.ms_per_iter

        if ilu is None and ilu_d is None:
            continue
        out.append(RatioRow(
            matrix=r.matrix, method=r.method, precision=r.precision,
            ilu0_over_plain=q(ilu, plain),
            ilu0d_over_plaind=q(ilu_d, plain_d),
            ilu0_over_ilu0d=q(ilu, ilu_d),
        ))
    return out


# ---------------------------------------------------------------------------
# collection fetch
# ---------------------------------------------------------------------------

DEFAULT_BASE_URL = "https://suitesparse-collection-website.herokuapp.com/MM"

# groups for the matrices this benchmark knows by bare name
COLLECTION_GROUPS = {
    "mcfe": "HB",
    "dwg961b": "DWG",
}


def fetch_matrix(name: str, base_url: str = DEFAULT_BASE_URL,
                 dest_dir="matrices") -> Path:
    """Download and cache <group>/<name>.tar.gz, returning the .mtx path.

    Accepts either a bare known name ("mcfe") or "Group/name".  A cached
    extraction short-circuits the network entirely.
    """
    if "/" in name:
        group, bare = name.split("/", 1)
    else:
        bare = name
        group = COLLECTION_GROUPS.get(bare)
        if group is None:
            raise ValueError(
                f"unknown collection matrix {name!r}; pass it as 'Group/name'"
            )
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    target = dest / f"{bare}.mtx"
    if target.exists():
        return target
    url = f"{base_url.rstrip('/')}/{group}/{bare}.tar.gz"
    try:
        with urllib.request.urlopen(url) as resp:
            payload = resp.read()
    except Exception as exc:
        raise RuntimeError(f"download failed for {url}: {exc}") from exc
    with tempfile.TemporaryDirectory() as tmp:
        archive = Path(tmp) / "m.tar.gz"
        archive.write_bytes(payload)
        try:
            with tarfile.open(archive, "r:gz") as tf:
                member = None
                for m in tf.getmembers():
                    if m.name.endswith(f"{bare}.mtx"):
                        member = m
                        break
                if member is None:
                    raise RuntimeError(f"no {bare}.mtx inside {url}")
                fh = tf.extractfile(member)
                data = fh.read()
        except tarfile.TarError as exc:
            raise RuntimeError(f"bad archive from {url}: {exc}") from exc
    text = data.decode("ascii", errors="replace")
    if not text.startswith("%%MatrixMarket"):
        raise RuntimeError(f"extracted file from {url} is not Matrix Market")
    target.write_text(text)
    return target
