"""ILU(0) factorization and forward/backward substitution.

The factorization keeps L and U on exactly the sparsity pattern of A (no
fill-in); L has an implicit unit diagonal, U holds the diagonal.  Both the
factorization and the triangular sweeps are sequential scalar loops over
Python tuples: this path is intentionally unoptimized relative to the
compiled SpMV kernels, and dominates per-iteration cost at DD/TD/QD.

The mixed path demotes the residual to binary64, runs the sweeps natively,
and promotes the result back (exactly): it is the composition
promote . binary64-apply . demote, bit for bit.

Backward-sweep diagonal divisions use per-row precomputed reciprocals
(Smith parameters for complex): the divisor is constant per row, and the
strength reduction perturbs the solve by at most a couple of ulps of the
working format.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import _mcfast
from ._mccore import cx_div, mc_div
from .multicomponent import Precision
from .sparse import CsrMatrix, DenseVector

__all__ = [
    "PrecondMode",
    "IluFactors",
    "SingularPivotError",
    "NumericBreakdownError",
    "ilu0_factorize",
    "ilu0_factorize_demoted",
    "ilu0_apply",
    "ilu0_apply_adjoint",
    "ilu0_apply_mixed",
    "ilu0_apply_adjoint_mixed",
    "IdentityPreconditioner",
    "Ilu0Preconditioner",
    "build_preconditioner",
]


class PrecondMode(Enum):
    NONE = "none"
    ILU0_FULL = "ilu0"
    ILU0_MIXED = "ilu0-mixed"

    @classmethod
    def from_label(cls, label: str) -> "PrecondMode":
        for m in cls:
            if m.value == label.lower():
                return m
        raise ValueError(f"unknown preconditioner mode {label!r}")


class SingularPivotError(ArithmeticError):
    """Zero or structurally missing pivot encountered at step k."""

    def __init__(self, k: int, structural: bool = False):
        self.k = k
        kind = "structurally missing" if structural else "zero"
        super().__init__(f"ILU(0): {kind} pivot U[{k},{k}]")


class NumericBreakdownError(ArithmeticError):
    """Non-finite value produced during a triangular sweep."""


class _SweepData:
    """Per-row lists driving the interpreted sweeps.

    lower[i]/upper[i] = (cols, vals) with vals as flat component tuples;
    diag[i] is a precomputed divider.  `scatter` layouts are the same rows
    with conjugated values, used by the adjoint sweeps.
    """

    __slots__ = ("lower", "upper", "diag")

    def __init__(self, lower, upper, diag):
        self.lower = lower
        self.upper = upper
        self.diag = diag


class IluFactors:
    """L/U values on A's pattern; lower = L (unit diagonal), rest = U."""

    def __init__(self, n, row_ptr, col_idx, diag_ptr, val_re, val_im,
                 precision: Precision):
        self.n = n
        self.row_ptr = row_ptr
        self.col_idx = col_idx
        self.diag_ptr = diag_ptr
        self.val_re = val_re
        self.val_im = val_im
        self.precision = precision
        self._plain = None
        self._adjoint = None

    @property
    def field(self) -> str:
        return "real" if self.val_im is None else "complex"

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    # -- sweep data ----------------------------------------------------

    def _tuple_value(self, p, conj=False):
        k = self.precision.k
        if self.field == "real":
            if k == 1:
                return float(self.val_re[p, 0])
            return tuple(self.val_re[p])
        if k == 1:
            v = complex(self.val_re[p, 0], self.val_im[p, 0])
            return v.conjugate() if conj else v
        im = tuple(-c for c in self.val_im[p]) if conj else tuple(self.val_im[p])
        return tuple(self.val_re[p]) + im

    def _make_diag(self, p, conj=False):
        k = self.precision.k
        if self.field == "real":
            if k == 1:
                return float(self.val_re[p, 0])
            return _mcfast.RealDiag(tuple(self.val_re[p]), k)
        if k == 1:
            v = complex(self.val_re[p, 0], self.val_im[p, 0])
            return v.conjugate() if conj else v
        dr = tuple(self.val_re[p])
        di = tuple(-c for c in self.val_im[p]) if conj else tuple(self.val_im[p])
        return _mcfast.ComplexDiag(dr, di, k)

    def _build_sweep(self, conj: bool) -> _SweepData:
        rp, ci, dp = self.row_ptr, self.col_idx, self.diag_ptr
        lower = []
        upper = []
        diag = []
        for i in range(self.n):
            lo, hi, d = rp[i], rp[i + 1], dp[i]
            lcols = []
            lvals = []
            for p in range(lo, d):
                lcols.append(int(ci[p]))
                lvals.append(self._tuple_value(p, conj))
            ucols = []
            uvals = []
            for p in range(d + 1, hi):
                ucols.append(int(ci[p]))
                uvals.append(self._tuple_value(p, conj))
            lower.append((lcols, lvals))
            upper.append((ucols, uvals))
            diag.append(self._make_diag(d, conj))
        return _SweepData(lower, upper, diag)

    def sweep_plain(self) -> _SweepData:
        if self._plain is None:
            self._plain = self._build_sweep(conj=False)
        return self._plain

    def sweep_adjoint(self) -> _SweepData:
        if self._adjoint is None:
            self._adjoint = self._build_sweep(conj=True)
        return self._adjoint


def _structural_check(A: CsrMatrix):
    missing = np.nonzero(A.diag_ptr < 0)[0]
    if len(missing):
        raise SingularPivotError(int(missing[0]), structural=True)


def _factorize_tuples(A: CsrMatrix) -> IluFactors:
    """Row-wise (IKJ) ILU(0) on the CSR pattern at A's precision."""
    _structural_check(A)
    n = A.n
    k = A.precision.k
    rp, ci, dp = A.row_ptr, A.col_idx, A.diag_ptr
    complex_field = A.field == "complex"

    # working values per row as flat tuples (or native scalars for k=1)
    rows = []
    colpos = []
    for i in range(n):
        lo, hi = rp[i], rp[i + 1]
        vals = []
        pos = {}
        for t, p in enumerate(range(lo, hi)):
            if k == 1:
                if complex_field:
                    vals.append(complex(A.val_re[p, 0], A.val_im[p, 0]))
                else:
                    vals.append(float(A.val_re[p, 0]))
            else:
                if complex_field:
                    vals.append(tuple(A.val_re[p]) + tuple(A.val_im[p]))
                else:
                    vals.append(tuple(A.val_re[p]))
            pos[int(ci[p])] = t
        rows.append(vals)
        colpos.append(pos)

    diag_local = [int(dp[i] - rp[i]) for i in range(n)]

    def is_zero(v):
        if k == 1:
            return v == 0
        return all(c == 0.0 for c in v)

    if k == 1:
        def divide(a, u):
            return a / u

        def mulsub(a, l, u):
            return a - l * u
    elif complex_field:
        cms = _mcfast._CMULSUB[k]

        def divide(a, u):
            pair = cx_div((a[:k], a[k:]), (u[:k], u[k:]))
            return pair[0] + pair[1]

        mulsub = cms
    else:
        rms = _mcfast._RMULSUB[k]
        divide = mc_div
        mulsub = rms

    for i in range(n):
        vals_i = rows[i]
        pos_i = colpos[i]
        dloc = diag_local[i]
        cols_i = ci[rp[i]:rp[i + 1]]
        for t in range(dloc):
            kcol = int(cols_i[t])
            ukk = rows[kcol][diag_local[kcol]]
            lik = divide(vals_i[t], ukk)
            vals_i[t] = lik
            # eliminate with row kcol's upper part
            cols_k = ci[rp[kcol]:rp[kcol + 1]]
            vals_k = rows[kcol]
            for s in range(diag_local[kcol] + 1, len(vals_k)):
                ptr = pos_i.get(int(cols_k[s]))
                if ptr is not None:
                    vals_i[ptr] = mulsub(vals_i[ptr], lik, vals_k[s])
        if is_zero(vals_i[dloc]):
            raise SingularPivotError(i)

    # assemble back into arrays
    nnz = A.nnz
    out_re = np.empty((nnz, k))
    out_im = np.empty((nnz, k)) if complex_field else None
    for i in range(n):
        lo = rp[i]
        vals_i = rows[i]
        for t, v in enumerate(vals_i):
            if k == 1:
                if complex_field:
                    out_re[lo + t, 0] = v.real
                    out_im[lo + t, 0] = v.imag
                else:
                    out_re[lo + t, 0] = v
            else:
                out_re[lo + t] = v[:k]
                if complex_field:
                    out_im[lo + t] = v[k:]
    if not np.isfinite(out_re).all() or (
        out_im is not None and not np.isfinite(out_im).all()
    ):
        raise NumericBreakdownError("non-finite value in ILU(0) factors")
    return IluFactors(n, rp, ci, dp, out_re, out_im, A.precision)


def ilu0_factorize(A: CsrMatrix) -> IluFactors:
    """Zero-fill incomplete LU at the matrix's working precision."""
    return _factorize_tuples(A)


def ilu0_factorize_demoted(A: CsrMatrix) -> IluFactors:
    """Demote values to binary64, then factorize entirely in binary64."""
    return _factorize_tuples(A.demoted())


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def _vec_to_list(r: DenseVector):
    k = r.precision.k
    if r.field == "real":
        if k == 1:
            return [row[0] for row in r.re.tolist()]
        return [tuple(row) for row in r.re.tolist()]
    if k == 1:
        return [complex(a[0], b[0]) for a, b in zip(r.re.tolist(), r.im.tolist())]
    return [tuple(a) + tuple(b) for a, b in zip(r.re.tolist(), r.im.tolist())]


def _list_to_vec(z, precision: Precision, field: str, n: int) -> DenseVector:
    k = precision.k
    if field == "real":
        if k == 1:
            re = np.asarray(z).reshape(n, 1)
            return DenseVector(re, None, precision)
        re = np.asarray(z)
        return DenseVector(re, None, precision)
    if k == 1:
        arr = np.asarray(z)
        return DenseVector(arr.real.reshape(n, 1), arr.imag.reshape(n, 1), precision)
    arr = np.asarray(z)
    return DenseVector(
        np.ascontiguousarray(arr[:, :k]), np.ascontiguousarray(arr[:, k:]), precision
    )


def _sweep_forward(sw: _SweepData, r, n, mulsub):
    """Solve L y = r (unit lower), ascending rows."""
    y = [None] * n
    for i in range(n):
        acc = r[i]
        cols, vals = sw.lower[i]
        for t in range(len(cols)):
            acc = mulsub(acc, vals[t], y[cols[t]])
        y[i] = acc
    return y


def _sweep_backward(sw: _SweepData, y, n, mulsub, divide):
    """Solve U z = y, descending rows, final divide by U_ii."""
    z = [None] * n
    for i in range(n - 1, -1, -1):
        acc = y[i]
        cols, vals = sw.upper[i]
        for t in range(len(cols)):
            acc = mulsub(acc, vals[t], z[cols[t]])
        z[i] = divide(acc, sw.diag[i])
    return z


def _sweep_forward_adjoint(sw: _SweepData, r, n, mulsub, divide):
    """Solve U^H y = r by row scatter (U^H is lower triangular)."""
    acc = list(r)
    y = [None] * n
    for j in range(n):
        yj = divide(acc[j], sw.diag[j])
        y[j] = yj
        cols, vals = sw.upper[j]
        for t in range(len(cols)):
            c = cols[t]
            acc[c] = mulsub(acc[c], vals[t], yj)
    return y


def _sweep_backward_adjoint(sw: _SweepData, y, n, mulsub):
    """Solve L^H z = y by row scatter (L^H is unit upper triangular)."""
    acc = list(y)
    z = [None] * n
    for j in range(n - 1, -1, -1):
        zj = acc[j]
        z[j] = zj
        cols, vals = sw.lower[j]
        for t in range(len(cols)):
            c = cols[t]
            acc[c] = mulsub(acc[c], vals[t], zj)
    return z


def _ops_for(F: IluFactors):
    k = F.precision.k
    if k == 1:
        def mulsub(a, l, u):
            return a - l * u

        def divide(a, d):
            return a / d

        return mulsub, divide
    if F.field == "complex":
        def divide(a, d):
            return d.solve(a)

        return _mcfast._CMULSUB[k], divide

    def divide(a, d):
        return d.solve(a)

    return _mcfast._RMULSUB[k], divide


def _check_apply(F: IluFactors, r: DenseVector):
    if F.n != r.n:
        raise ValueError(f"dimension mismatch: factors n={F.n}, vector n={r.n}")
    if F.field != r.field:
        raise ValueError(f"field mismatch: factors {F.field}, vector {r.field}")


def _finite_or_raise(z: DenseVector):
    ok = np.isfinite(z.re).all() and (z.im is None or np.isfinite(z.im).all())
    if not ok:
        raise NumericBreakdownError("non-finite value in triangular sweep")
    return z


def ilu0_apply(F: IluFactors, r: DenseVector) -> DenseVector:
    """z = U^-1 (L^-1 r): forward then backward substitution."""
    _check_apply(F, r)
    if F.precision != r.precision:
        raise ValueError("factor precision must match the vector precision")
    mulsub, divide = _ops_for(F)
    sw = F.sweep_plain()
    rl = _vec_to_list(r)
    y = _sweep_forward(sw, rl, F.n, mulsub)
    z = _sweep_backward(sw, y, F.n, mulsub, divide)
    return _finite_or_raise(_list_to_vec(z, F.precision, F.field, F.n))


def ilu0_apply_adjoint(F: IluFactors, r: DenseVector) -> DenseVector:
    """z = (L U)^-H r: U^H forward sweep, then L^H backward sweep."""
    _check_apply(F, r)
    if F.precision != r.precision:
        raise ValueError("factor precision must match the vector precision")
    mulsub, divide = _ops_for(F)
    sw = F.sweep_adjoint()
    rl = _vec_to_list(r)
    y = _sweep_forward_adjoint(sw, rl, F.n, mulsub, divide)
    z = _sweep_backward_adjoint(sw, y, F.n, mulsub)
    return _finite_or_raise(_list_to_vec(z, F.precision, F.field, F.n))


def _promote_exact(values, precision: Precision, field: str, n: int) -> DenseVector:
    arr = np.asarray(values)
    re = np.zeros((n, precision.k))
    if field == "complex":
        im = np.zeros((n, precision.k))
        re[:, 0] = arr.real
        im[:, 0] = arr.imag
        return DenseVector(re, im, precision)
    re[:, 0] = arr
    return DenseVector(re, None, precision)


def ilu0_apply_mixed(F64: IluFactors, r: DenseVector) -> DenseVector:
    """Demote r to binary64, solve fully in binary64, promote exactly back."""
    if F64.precision.k != 1:
        raise ValueError("mixed apply requires binary64 factors")
    if r.precision.k < 2:
        raise ValueError("mixed apply expects a working precision above binary64")
    if F64.n != r.n or F64.field != r.field:
        raise ValueError("factors/vector mismatch")
    r64 = DenseVector.from_float64(r.demote_to_float64(), Precision.F64)
    z64 = ilu0_apply(F64, r64)
    return _promote_exact(z64.demote_to_float64(), r.precision, r.field, r.n)


def ilu0_apply_adjoint_mixed(F64: IluFactors, r: DenseVector) -> DenseVector:
    if F64.precision.k != 1:
        raise ValueError("mixed apply requires binary64 factors")
    if r.precision.k < 2:
        raise ValueError("mixed apply expects a working precision above binary64")
    if F64.n != r.n or F64.field != r.field:
        raise ValueError("factors/vector mismatch")
    r64 = DenseVector.from_float64(r.demote_to_float64(), Precision.F64)
    z64 = ilu0_apply_adjoint(F64, r64)
    return _promote_exact(z64.demote_to_float64(), r.precision, r.field, r.n)


# ---------------------------------------------------------------------------
# preconditioner objects consumed by the solvers
# ---------------------------------------------------------------------------


class IdentityPreconditioner:
    """No-op preconditioner: apply returns its input unchanged."""

    mode = PrecondMode.NONE

    def apply(self, r: DenseVector) -> DenseVector:
        return r

    def apply_adjoint(self, r: DenseVector) -> DenseVector:
        return r

    @property
    def setup_seconds(self) -> float:
        return 0.0


class Ilu0Preconditioner:
    """ILU(0) in full working precision or the mixed binary64 variant."""

    def __init__(self, factors: IluFactors, mixed: bool, setup_seconds: float = 0.0):
        self.factors = factors
        self.mixed = mixed
        self.mode = PrecondMode.ILU0_MIXED if mixed else PrecondMode.ILU0_FULL
        self.setup_seconds = setup_seconds

    def apply(self, r: DenseVector) -> DenseVector:
        if self.mixed and r.precision.k > 1:
            return ilu0_apply_mixed(self.factors, r)
        return ilu0_apply(self.factors, r)

    def apply_adjoint(self, r: DenseVector) -> DenseVector:
        if self.mixed and r.precision.k > 1:
            return ilu0_apply_adjoint_mixed(self.factors, r)
        return ilu0_apply_adjoint(self.factors, r)


def build_preconditioner(A: CsrMatrix, mode: PrecondMode):
    """Construct the preconditioner for a solve; timing is the caller's job."""
    if mode == PrecondMode.NONE:
        return IdentityPreconditioner()
    if mode == PrecondMode.ILU0_FULL:
        return Ilu0Preconditioner(ilu0_factorize(A), mixed=False)
    if mode == PrecondMode.ILU0_MIXED:
        return Ilu0Preconditioner(ilu0_factorize_demoted(A), mixed=True)
    raise ValueError(f"unsupported preconditioner mode {mode}")
