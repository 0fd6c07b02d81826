"""Product-type Krylov solvers: BiCG, CGS, BiCGSTAB, GPBiCG.

BiCG follows the classic two-sided preconditioned form (M and M^H solves
each iteration).  CGS (Sonneveld 1989), BiCGSTAB (van der Vorst 1992) and
GPBiCG (Zhang 1997) use their standard preconditioned formulations with
two M-solves per iteration and the shadow vector fixed at r~0 = r0; the
preconditioner enters as M^-1 applied to direction vectors, so the
recursive residual always tracks the original system.

All methods start from x0 = 0 and stop when ||r|| < eps_rel*||r0|| +
eps_abs (tested on the recursive residual) or at max_iter.  Inner
products are conjugate-linear in the first argument.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .ilu import (
    IdentityPreconditioner,
    NumericBreakdownError,
    PrecondMode,
    SingularPivotError,
    build_preconditioner,
)
from .multicomponent import MCComplex, MCFloat, Precision
from .sparse import (
    CsrMatrix,
    DenseVector,
    axpy,
    hdot,
    norm2,
    scale,
    spmv,
    spmv_adjoint,
    spmv_adjoint_mixed,
    spmv_mixed,
    vec_add,
    vec_sub,
)

__all__ = [
    "SolverConfig",
    "SolveReport",
    "BreakdownError",
    "bicg",
    "cgs",
    "bicgstab",
    "gpbicg",
    "solve",
    "METHODS",
]

METHODS = ("bicg", "cgs", "bicgstab", "gpbicg")


class BreakdownError(ArithmeticError):
    pass


@dataclass
class SolverConfig:
    method: str = "bicg"
    precision: Precision = Precision.DD
    precond: PrecondMode = PrecondMode.NONE
    spmv_mode: str = "full"  # "full" | "mixed"
    eps_rel: float = 1e-13
    eps_abs: float = 1e-100
    max_iter: int | None = None  # None -> 3n

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.spmv_mode not in ("full", "mixed"):
            raise ValueError(f"unknown spmv mode {self.spmv_mode!r}")
        if self.eps_rel <= 0 or self.eps_abs <= 0:
            raise ValueError("eps_rel and eps_abs must be positive")
        if self.spmv_mode == "mixed" and self.precision.k < 2:
            raise ValueError("mixed SpMV needs a working precision above binary64")

    def resolved_max_iter(self, n: int) -> int:
        return 3 * n if self.max_iter is None else self.max_iter


@dataclass(eq=False)
class SolveReport:
    method: str
    precision: str
    precond: str
    spmv_mode: str
    iterations: int
    converged: bool
    total_seconds: float = 0.0
    ms_per_iteration: float = 0.0
    final_recursive_relres: float = float("nan")
    true_relres: float = float("nan")
    error_norm: float = float("nan")
    breakdown: str | None = None
    x: DenseVector | None = field(default=None, repr=False)


class _Ctx:
    """Shared solver state: operators, tolerances, stopping rule."""

    def __init__(self, A: CsrMatrix, b: DenseVector, cfg: SolverConfig, M,
                 parallel_spmv: bool = False):
        if A.n != b.n:
            raise ValueError("matrix/vector dimension mismatch")
        self.A = A
        self.b = b
        self.cfg = cfg
        self.M = M if M is not None else IdentityPreconditioner()
        self.n = A.n
        self.prec = cfg.precision
        self.field = A.field
        self.max_iter = cfg.resolved_max_iter(A.n)
        self.parallel = parallel_spmv
        if cfg.spmv_mode == "mixed":
            self.A64 = A.demoted()
            if not _binary64_exact(A):
                raise ValueError("mixed SpMV requires binary64-representable matrix values")
        else:
            self.A64 = None

    def matvec(self, v: DenseVector) -> DenseVector:
        if self.A64 is not None:
            return spmv_mixed(self.A64, v)
        return spmv(self.A, v, parallel=self.parallel)

    def matvec_adjoint(self, v: DenseVector) -> DenseVector:
        if self.A64 is not None:
            return spmv_adjoint_mixed(self.A64, v)
        return spmv_adjoint(self.A, v)

    def zeros(self) -> DenseVector:
        return DenseVector.zeros(self.n, self.prec, self.field)

    def scalar_zero(self):
        if self.field == "real":
            return MCFloat.zero(self.prec)
        return MCComplex.zero(self.prec)

    def threshold(self, nrm_r0: MCFloat) -> MCFloat:
        eps_r = MCFloat.from_float(self.cfg.eps_rel, self.prec)
        eps_a = MCFloat.from_float(self.cfg.eps_abs, self.prec)
        return eps_r * nrm_r0 + eps_a


def _binary64_exact(A: CsrMatrix) -> bool:
    if A.precision.k == 1:
        return True
    ok = not np.any(A.val_re[:, 1:])
    if A.val_im is not None:
        ok = ok and not np.any(A.val_im[:, 1:])
    return bool(ok)


def _conj(s):
    return s.conj() if isinstance(s, MCComplex) else s


def _report(ctx: _Ctx, x, iterations, converged, breakdown, nrm_r, nrm_r0) -> SolveReport:
    cfg = ctx.cfg
    rel = float("nan")
    if nrm_r is not None and not nrm_r0.is_zero():
        rel = (nrm_r / nrm_r0).to_float()
    return SolveReport(
        method=cfg.method,
        precision=ctx.prec.label,
        precond=cfg.precond.value,
        spmv_mode=cfg.spmv_mode,
        iterations=iterations,
        converged=converged,
        final_recursive_relres=rel,
        breakdown=breakdown,
        x=x,
    )


def bicg(A: CsrMatrix, b: DenseVector, cfg: SolverConfig, M=None,
         parallel_spmv: bool = False) -> SolveReport:
    """Two-sided preconditioned BiCG (M z = r and M^H z~ = r~ per step)."""
    ctx = _Ctx(A, b, cfg, M, parallel_spmv)
    M = ctx.M
    x = ctx.zeros()
    r = vec_sub(b, ctx.matvec(x))
    r0 = r.copy()
    rt = r.copy()
    nrm_r0 = norm2(r0)
    thr = ctx.threshold(nrm_r0)
    if nrm_r0 < thr:
        return _report(ctx, x, 0, True, None, nrm_r0, nrm_r0)
    z = M.apply(r)
    zt = M.apply_adjoint(rt)
    p = z.copy()
    pt = zt.copy()
    rho = hdot(zt, r)
    nrm = None
    for it in range(1, ctx.max_iter + 1):
        q = ctx.matvec(p)
        qt = ctx.matvec_adjoint(pt)
        sigma = hdot(pt, q)
        if sigma.is_zero():
            return _report(ctx, x, it, False, "sigma_zero", nrm, nrm_r0)
        if rho.is_zero():
            return _report(ctx, x, it, False, "rho_zero", nrm, nrm_r0)
        alpha = rho / sigma
        x = axpy(alpha, p, x)
        r = axpy(-alpha, q, r)
        rt = axpy(-_conj(alpha), qt, rt)
        nrm = norm2(r)
        if not nrm.is_finite():
            return _report(ctx, x, it, False, "nonfinite_residual", nrm, nrm_r0)
        if nrm < thr:
            return _report(ctx, x, it, True, None, nrm, nrm_r0)
        z = M.apply(r)
        zt = M.apply_adjoint(rt)
        rho_new = hdot(zt, r)
        beta = rho_new / rho
        p = axpy(beta, p, z)
        pt = axpy(_conj(beta), pt, zt)
        rho = rho_new
    return _report(ctx, x, ctx.max_iter, False, None, nrm, nrm_r0)


def cgs(A: CsrMatrix, b: DenseVector, cfg: SolverConfig, M=None,
        parallel_spmv: bool = False) -> SolveReport:
    """Preconditioned conjugate gradient squared (Sonneveld recurrences)."""
    ctx = _Ctx(A, b, cfg, M, parallel_spmv)
    M = ctx.M
    x = ctx.zeros()
    r = vec_sub(b, ctx.matvec(x))
    rt0 = r.copy()
    nrm_r0 = norm2(r)
    thr = ctx.threshold(nrm_r0)
    if nrm_r0 < thr:
        return _report(ctx, x, 0, True, None, nrm_r0, nrm_r0)
    rho_old = None
    p = u = q = None
    nrm = None
    for it in range(1, ctx.max_iter + 1):
        rho = hdot(rt0, r)
        if rho.is_zero():
            return _report(ctx, x, it, False, "rho_zero", nrm, nrm_r0)
        if it == 1:
            u = r.copy()
            p = u.copy()
        else:
            beta = rho / rho_old
            u = axpy(beta, q, r)
            p = axpy(beta, axpy(beta, p, q), u)
        phat = M.apply(p)
        v = ctx.matvec(phat)
        sigma = hdot(rt0, v)
        if sigma.is_zero():
            return _report(ctx, x, it, False, "sigma_zero", nrm, nrm_r0)
        alpha = rho / sigma
        q = axpy(-alpha, v, u)
        uhat = M.apply(vec_add(u, q))
        x = axpy(alpha, uhat, x)
        qhat = ctx.matvec(uhat)
        r = axpy(-alpha, qhat, r)
        rho_old = rho
        nrm = norm2(r)
        if not nrm.is_finite():
            return _report(ctx, x, it, False, "nonfinite_residual", nrm, nrm_r0)
        if nrm < thr:
            return _report(ctx, x, it, True, None, nrm, nrm_r0)
    return _report(ctx, x, ctx.max_iter, False, None, nrm, nrm_r0)


def bicgstab(A: CsrMatrix, b: DenseVector, cfg: SolverConfig, M=None,
             parallel_spmv: bool = False) -> SolveReport:
    """Preconditioned BiCGSTAB with the local minimal-residual omega step."""
    ctx = _Ctx(A, b, cfg, M, parallel_spmv)
    M = ctx.M
    x = ctx.zeros()
    r = vec_sub(b, ctx.matvec(x))
    rt0 = r.copy()
    nrm_r0 = norm2(r)
    thr = ctx.threshold(nrm_r0)
    if nrm_r0 < thr:
        return _report(ctx, x, 0, True, None, nrm_r0, nrm_r0)
    rho_old = alpha = omega = None
    p = v = None
    nrm = None
    for it in range(1, ctx.max_iter + 1):
        rho = hdot(rt0, r)
        if rho.is_zero():
            return _report(ctx, x, it, False, "rho_zero", nrm, nrm_r0)
        if it == 1:
            p = r.copy()
        else:
            if omega.is_zero():
                return _report(ctx, x, it, False, "omega_zero", nrm, nrm_r0)
            beta = (rho / rho_old) * (alpha / omega)
            p = axpy(beta, axpy(-omega, v, p), r)
        phat = M.apply(p)
        v = ctx.matvec(phat)
        sigma = hdot(rt0, v)
        if sigma.is_zero():
            return _report(ctx, x, it, False, "sigma_zero", nrm, nrm_r0)
        alpha = rho / sigma
        s = axpy(-alpha, v, r)
        nrm = norm2(s)
        if not nrm.is_finite():
            return _report(ctx, x, it, False, "nonfinite_residual", nrm, nrm_r0)
        if nrm < thr:
            x = axpy(alpha, phat, x)
            return _report(ctx, x, it, True, None, nrm, nrm_r0)
        shat = M.apply(s)
        t = ctx.matvec(shat)
        tt = hdot(t, t)
        if tt.is_zero():
            return _report(ctx, x, it, False, "omega_zero", nrm, nrm_r0)
        omega = hdot(t, s) / tt
        x = axpy(omega, shat, axpy(alpha, phat, x))
        r = axpy(-omega, t, s)
        rho_old = rho
        nrm = norm2(r)
        if not nrm.is_finite():
            return _report(ctx, x, it, False, "nonfinite_residual", nrm, nrm_r0)
        if nrm < thr:
            return _report(ctx, x, it, True, None, nrm, nrm_r0)
    return _report(ctx, x, ctx.max_iter, False, None, nrm, nrm_r0)


def gpbicg(A: CsrMatrix, b: DenseVector, cfg: SolverConfig, M=None,
           parallel_spmv: bool = False) -> SolveReport:
    """Zhang's GPBiCG with the per-iteration 2x2 least-squares (zeta, eta).

    Runs the recurrences on the right-preconditioned operator A M^-1, so
    the recursive residual is the original-system residual; the solution
    is materialized as x = M^-1(y) on exit.
    """
    ctx = _Ctx(A, b, cfg, M, parallel_spmv)
    M = ctx.M
    yhat = ctx.zeros()
    r = vec_sub(b, ctx.matvec(ctx.zeros()))
    rt0 = r.copy()
    nrm_r0 = norm2(r)
    thr = ctx.threshold(nrm_r0)
    if nrm_r0 < thr:
        return _report(ctx, yhat, 0, True, None, nrm_r0, nrm_r0)
    rho = hdot(rt0, r)
    t_prev = ctx.zeros()
    w = ctx.zeros()
    u = ctx.zeros()
    z = ctx.zeros()
    p = None
    beta = None
    nrm = None

    def finish(x_space, iters, conv, reason):
        x = M.apply(x_space)
        return _report(ctx, x, iters, conv, reason, nrm, nrm_r0)

    for it in range(1, ctx.max_iter + 1):
        if it == 1:
            p = r.copy()
        else:
            p = axpy(beta, vec_sub(p, u), r)
        Bp = ctx.matvec(M.apply(p))
        sigma = hdot(rt0, Bp)
        if sigma.is_zero():
            return finish(yhat, it, False, "sigma_zero")
        if rho.is_zero():
            return finish(yhat, it, False, "rho_zero")
        alpha = rho / sigma
        y = axpy(alpha, vec_sub(Bp, w), vec_sub(t_prev, r))
        t = axpy(-alpha, Bp, r)
        Bt = ctx.matvec(M.apply(t))
        btbt = hdot(Bt, Bt)
        btt = hdot(Bt, t)
        if it == 1:
            if btbt.is_zero():
                return finish(yhat, it, False, "breakdown_ls")
            zeta = btt / btbt
            eta = ctx.scalar_zero()
        else:
            yy = hdot(y, y)
            ybt = hdot(y, Bt)
            bty = hdot(Bt, y)
            yt = hdot(y, t)
            delta = yy * btbt - ybt * bty
            if delta.is_zero():
                return finish(yhat, it, False, "breakdown_ls")
            eta = (btbt * yt - ybt * btt) / delta
            zeta = (yy * btt - bty * yt) / delta
        u = axpy(zeta, Bp, scale(eta, axpy(beta, u, vec_sub(t_prev, r)))) \
            if it > 1 else scale(zeta, Bp)
        z = axpy(-alpha, u, axpy(zeta, r, scale(eta, z)))
        yhat = vec_add(yhat, axpy(alpha, p, z))
        r = axpy(-eta, y, axpy(-zeta, Bt, t))
        nrm = norm2(r)
        if not nrm.is_finite():
            return finish(yhat, it, False, "nonfinite_residual")
        if nrm < thr:
            return finish(yhat, it, True, None)
        rho_new = hdot(rt0, r)
        if zeta.is_zero():
            return finish(yhat, it, False, "zeta_zero")
        if rho.is_zero():
            return finish(yhat, it, False, "rho_zero")
        beta = (alpha / zeta) * (rho_new / rho)
        w = axpy(beta, Bp, Bt)
        rho = rho_new
        t_prev = t
    return finish(yhat, ctx.max_iter, False, None)


_DISPATCH = {"bicg": bicg, "cgs": cgs, "bicgstab": bicgstab, "gpbicg": gpbicg}


def solve(A: CsrMatrix, b: DenseVector, cfg: SolverConfig,
          x_star: DenseVector | None = None,
          parallel_spmv: bool = False) -> SolveReport:
    """Build the preconditioner, run the method, fill in the full report.

    total_seconds includes preconditioner construction; the true residual
    ||b - A x|| / ||b|| is recomputed once at exit in working precision.
    """
    t0 = time.perf_counter()
    try:
        M = build_preconditioner(A, cfg.precond)
        report = _DISPATCH[cfg.method](A, b, cfg, M, parallel_spmv)
    except (SingularPivotError, NumericBreakdownError) as exc:
        elapsed = time.perf_counter() - t0
        return SolveReport(
            method=cfg.method,
            precision=cfg.precision.label,
            precond=cfg.precond.value,
            spmv_mode=cfg.spmv_mode,
            iterations=0,
            converged=False,
            total_seconds=elapsed,
            breakdown=f"{type(exc).__name__}: {exc}",
        )
    elapsed = time.perf_counter() - t0
    report.total_seconds = elapsed
    if report.iterations > 0:
        report.ms_per_iteration = 1000.0 * elapsed / report.iterations
    if report.x is not None:
        resid = vec_sub(b, spmv(A, report.x))
        nrm_b = norm2(b)
        if not nrm_b.is_zero():
            report.true_relres = (norm2(resid) / nrm_b).to_float()
        if x_star is not None:
            report.error_norm = norm2(vec_sub(report.x, x_star)).to_float()
    return report
