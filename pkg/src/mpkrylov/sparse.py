"""CSR sparse matrices, Matrix Market ingestion, SpMV and vector kernels.

Matrices are square (the solvers operate on A x = b with square A), stored
in CSR with multi-component values; complex matrices hold separate re/im
component arrays.  All products/accumulations run in the value precision,
in ascending column order within each row, so repeated calls are bitwise
reproducible.  Matrices and vectors are immutable by convention once
built; kernels never modify their inputs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import _mccore
from .multicomponent import MCComplex, MCFloat, Precision

__all__ = [
    "CooMatrix",
    "CsrMatrix",
    "DenseVector",
    "MatrixMarketError",
    "parse_matrix_market",
    "read_matrix_market",
    "coo_to_csr",
    "spmv",
    "spmv_adjoint",
    "spmv_mixed",
    "spmv_adjoint_mixed",
    "dot",
    "hdot",
    "norm2",
    "axpy",
    "scale",
    "vec_sub",
    "vec_copy",
]

_SYMMETRIES = ("general", "symmetric", "hermitian", "skew-symmetric")
_FIELDS = ("real", "integer", "complex", "pattern")


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input, with the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass
class CooMatrix:
    """Coordinate-format staging matrix straight out of the parser."""

    n_rows: int
    n_cols: int
    row: np.ndarray
    col: np.ndarray
    val_re: np.ndarray
    val_im: np.ndarray | None  # None for the real field
    symmetry: str = "general"

    @property
    def field(self) -> str:
        return "real" if self.val_im is None else "complex"

    @property
    def nnz(self) -> int:
        return len(self.row)


def parse_matrix_market(source) -> CooMatrix:
    """Parse coordinate-format Matrix Market text into a CooMatrix.

    Accepts a file-like object or a string of the file contents.  Only the
    `coordinate` layout is supported; symmetric/hermitian/skew entries are
    stored once with the symmetry tag preserved (expansion happens in
    coo_to_csr).  Indices are converted to 0-based.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    lineno = 0
    header = source.readline()
    lineno += 1
    if not header.startswith("%%MatrixMarket"):
        raise MatrixMarketError("missing %%MatrixMarket header", lineno)
    parts = header.strip().split()
    if len(parts) != 5:
        raise MatrixMarketError(
            f"header must have 5 tokens, got {len(parts)}", lineno
        )
    _, obj, layout, fieldname, symmetry = (p.lower() for p in parts)
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", lineno)
    if layout != "coordinate":
        raise MatrixMarketError(
            f"unsupported layout {layout!r} (only 'coordinate' is supported)", lineno
        )
    if fieldname not in _FIELDS:
        raise MatrixMarketError(f"unknown field {fieldname!r}", lineno)
    if symmetry not in _SYMMETRIES:
        raise MatrixMarketError(f"unknown symmetry {symmetry!r}", lineno)

    # size line (after comments)
    while True:
        line = source.readline()
        lineno += 1
        if not line:
            raise MatrixMarketError("missing size line", lineno)
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        break
    toks = stripped.split()
    if len(toks) != 3:
        raise MatrixMarketError(f"size line must be 'rows cols nnz', got {stripped!r}", lineno)
    try:
        n_rows, n_cols, nnz = (int(t) for t in toks)
    except ValueError as exc:
        raise MatrixMarketError(f"bad size line {stripped!r}", lineno) from exc
    if n_rows <= 0 or n_cols <= 0 or nnz < 0:
        raise MatrixMarketError("rows, cols must be positive and nnz >= 0", lineno)

    complex_field = fieldname == "complex"
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vre = np.empty(nnz, dtype=np.float64)
    vim = np.empty(nnz, dtype=np.float64) if complex_field else None
    count = 0
    for line in source:
        lineno += 1
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if count >= nnz:
            raise MatrixMarketError(
                f"more than the declared {nnz} entries", lineno
            )
        toks = stripped.split()
        try:
            i = int(toks[0])
            j = int(toks[1])
        except (ValueError, IndexError) as exc:
            raise MatrixMarketError(f"bad entry {stripped!r}", lineno) from exc
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MatrixMarketError(
                f"index ({i}, {j}) out of bounds for {n_rows}x{n_cols}", lineno
            )
        try:
            if fieldname == "pattern":
                if len(toks) != 2:
                    raise ValueError
                re_v, im_v = 1.0, 0.0
            elif complex_field:
                if len(toks) != 4:
                    raise ValueError
                re_v, im_v = float(toks[2]), float(toks[3])
            else:
                if len(toks) != 3:
                    raise ValueError
                re_v, im_v = float(toks[2]), 0.0
        except ValueError as exc:
            raise MatrixMarketError(
                f"bad value fields for {fieldname} entry {stripped!r}", lineno
            ) from exc
        if not (np.isfinite(re_v) and np.isfinite(im_v)):
            raise MatrixMarketError(f"non-finite value in {stripped!r}", lineno)
        rows[count] = i - 1
        cols[count] = j - 1
        vre[count] = re_v
        if complex_field:
            vim[count] = im_v
        count += 1
    if count != nnz:
        raise MatrixMarketError(
            f"declared {nnz} entries but found {count}", lineno
        )
    return CooMatrix(n_rows, n_cols, rows, cols, vre, vim, symmetry)


def read_matrix_market(path) -> CooMatrix:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return parse_matrix_market(fh)


class CsrMatrix:
    """Square CSR matrix with multi-component values.

    Within each row col_idx is strictly increasing; diag_ptr[i] is the
    position of the (i, i) entry or -1 when structurally absent.
    """

    def __init__(self, n, row_ptr, col_idx, val_re, val_im, precision: Precision):
        self.n = int(n)
        self.row_ptr = row_ptr
        self.col_idx = col_idx
        self.val_re = val_re
        self.val_im = val_im
        self.precision = precision
        self._validate()
        self.diag_ptr = self._find_diagonals()

    @property
    def field(self) -> str:
        return "real" if self.val_im is None else "complex"

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    def _validate(self):
        n = self.n
        rp, ci = self.row_ptr, self.col_idx
        if len(rp) != n + 1 or rp[0] != 0 or rp[-1] != len(ci):
            raise ValueError("inconsistent CSR row_ptr")
        if np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        k = self.precision.k
        if self.val_re.shape != (len(ci), k):
            raise ValueError("val_re shape mismatch")
        if self.val_im is not None and self.val_im.shape != (len(ci), k):
            raise ValueError("val_im shape mismatch")
        for i in range(n):
            cols = ci[rp[i]:rp[i + 1]]
            if len(cols) and (np.any(np.diff(cols) <= 0)
                              or cols[0] < 0 or cols[-1] >= n):
                raise ValueError(f"row {i}: columns must be strictly increasing and in range")

    def _find_diagonals(self):
        dp = np.full(self.n, -1, dtype=np.int64)
        rp, ci = self.row_ptr, self.col_idx
        for i in range(self.n):
            lo, hi = rp[i], rp[i + 1]
            pos = np.searchsorted(ci[lo:hi], i)
            if pos < hi - lo and ci[lo + pos] == i:
                dp[i] = lo + pos
        return dp

    def demoted(self) -> "CsrMatrix":
        """binary64 copy (leading components); exact for promoted data."""
        vre = np.ascontiguousarray(self.val_re[:, :1])
        vim = None if self.val_im is None else np.ascontiguousarray(self.val_im[:, :1])
        return CsrMatrix(self.n, self.row_ptr, self.col_idx, vre, vim, Precision.F64)

    def promoted(self, target: Precision) -> "CsrMatrix":
        """Exact promotion of binary64 values to a wider precision."""
        if self.precision.k > target.k:
            raise ValueError("use demoted() to narrow")
        vre = np.zeros((self.nnz, target.k))
        vre[:, : self.precision.k] = self.val_re
        vim = None
        if self.val_im is not None:
            vim = np.zeros((self.nnz, target.k))
            vim[:, : self.precision.k] = self.val_im
        return CsrMatrix(self.n, self.row_ptr, self.col_idx, vre, vim, target)

    def entry(self, i: int, j: int):
        """Stored entry (i, j) as a scalar, or None if structurally absent."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        pos = np.searchsorted(self.col_idx[lo:hi], j)
        if pos >= hi - lo or self.col_idx[lo + pos] != j:
            return None
        p = lo + pos
        if self.val_im is None:
            return MCFloat(tuple(self.val_re[p]))
        return MCComplex(MCFloat(tuple(self.val_re[p])), MCFloat(tuple(self.val_im[p])))


def coo_to_csr(coo: CooMatrix, precision: Precision) -> CsrMatrix:
    """Expand symmetry, sum duplicates, sort rows and promote to precision."""
    if coo.n_rows != coo.n_cols:
        raise ValueError(
            f"matrix must be square, got {coo.n_rows}x{coo.n_cols}"
        )
    n = coo.n_rows
    rows, cols = coo.row, coo.col
    vre = coo.val_re
    vim = coo.val_im if coo.val_im is not None else np.zeros_like(vre)

    if coo.symmetry != "general":
        off = rows != cols
        mr, mc = cols[off], rows[off]
        mre, mim = vre[off].copy(), vim[off].copy()
        if coo.symmetry == "hermitian":
            mim = -mim
        elif coo.symmetry == "skew-symmetric":
            mre, mim = -mre, -mim
        rows = np.concatenate([rows, mr])
        cols = np.concatenate([cols, mc])
        vre = np.concatenate([vre, mre])
        vim = np.concatenate([vim, mim])

    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    vre, vim = vre[order], vim[order]

    # sum duplicates (exactly: binary64 inputs promoted, then two-sum adds)
    keys = rows * n + cols
    uniq, start = np.unique(keys, return_index=True)
    nnz = len(uniq)
    k = precision.k
    out_re = np.zeros((nnz, k))
    out_im = np.zeros((nnz, k))
    out_rows = rows[start]
    out_cols = cols[start]
    bounds = np.append(start, len(keys))
    for t in range(nnz):
        lo, hi = bounds[t], bounds[t + 1]
        if hi - lo == 1:
            out_re[t, 0] = vre[lo]
            out_im[t, 0] = vim[lo]
        else:
            sr = (0.0,) * k
            si = (0.0,) * k
            for p in range(lo, hi):
                sr = _mccore.mc_add(sr, (vre[p],) + (0.0,) * (k - 1))
                si = _mccore.mc_add(si, (vim[p],) + (0.0,) * (k - 1))
            out_re[t] = sr
            out_im[t] = si

    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(row_ptr, out_rows + 1, 1)
    row_ptr = np.cumsum(row_ptr)
    complex_field = coo.field == "complex"
    return CsrMatrix(
        n,
        row_ptr.astype(np.int64),
        out_cols.astype(np.int64),
        np.ascontiguousarray(out_re),
        np.ascontiguousarray(out_im) if complex_field else None,
        precision,
    )


class DenseVector:
    """Length-n vector of multi-component scalars (real or complex)."""

    __slots__ = ("re", "im", "precision")

    def __init__(self, re: np.ndarray, im: np.ndarray | None, precision: Precision):
        if re.ndim != 2 or re.shape[1] != precision.k:
            raise ValueError("component array must be (n, k)")
        if im is not None and im.shape != re.shape:
            raise ValueError("re/im shape mismatch")
        self.re = re
        self.im = im
        self.precision = precision

    @property
    def n(self) -> int:
        return self.re.shape[0]

    @property
    def field(self) -> str:
        return "real" if self.im is None else "complex"

    @classmethod
    def zeros(cls, n: int, precision: Precision, field: str = "real") -> "DenseVector":
        re = np.zeros((n, precision.k))
        im = np.zeros((n, precision.k)) if field == "complex" else None
        return cls(re, im, precision)

    @classmethod
    def from_float64(cls, values, precision: Precision) -> "DenseVector":
        """Exact promotion of a binary64 (or complex128) array."""
        values = np.asarray(values)
        n = len(values)
        re = np.zeros((n, precision.k))
        if np.iscomplexobj(values):
            im = np.zeros((n, precision.k))
            re[:, 0] = values.real
            im[:, 0] = values.imag
            return cls(re, im, precision)
        re[:, 0] = values.astype(np.float64)
        return cls(re, None, precision)

    def copy(self) -> "DenseVector":
        return DenseVector(
            self.re.copy(), None if self.im is None else self.im.copy(), self.precision
        )

    def demote_to_float64(self) -> np.ndarray:
        """Leading components as float64 / complex128."""
        if self.im is None:
            return self.re[:, 0].copy()
        return self.re[:, 0] + 1j * self.im[:, 0]

    def get(self, i: int):
        if self.im is None:
            return MCFloat(tuple(self.re[i]))
        return MCComplex(MCFloat(tuple(self.re[i])), MCFloat(tuple(self.im[i])))

    def set(self, i: int, value):
        if self.im is None:
            self.re[i] = value.components
        else:
            self.re[i] = value.re.components
            self.im[i] = value.im.components


def _check_pair(A: CsrMatrix, x: DenseVector):
    if A.n != x.n:
        raise ValueError(f"dimension mismatch: matrix n={A.n}, vector n={x.n}")
    if A.field != x.field:
        raise ValueError(f"field mismatch: matrix {A.field}, vector {x.field}")


def spmv(A: CsrMatrix, x: DenseVector, parallel: bool = False) -> DenseVector:
    """y = A x with products and accumulation at the value precision."""
    _check_pair(A, x)
    if A.precision.k != x.precision.k:
        raise ValueError("matrix and vector precision must match for spmv")
    k = x.precision.k
    out = DenseVector.zeros(A.n, x.precision, A.field)
    if A.field == "real":
        if parallel:
            K.get_parallel_spmv("real")(A.row_ptr, A.col_idx, A.val_re, x.re, out.re, k)
        else:
            K.spmv_real(A.row_ptr, A.col_idx, A.val_re, x.re, out.re, k)
    else:
        if parallel:
            K.get_parallel_spmv("complex")(
                A.row_ptr, A.col_idx, A.val_re, A.val_im, x.re, x.im, out.re, out.im, k
            )
        else:
            K.spmv_cx(
                A.row_ptr, A.col_idx, A.val_re, A.val_im, x.re, x.im, out.re, out.im, k
            )
    return out


def spmv_adjoint(A: CsrMatrix, x: DenseVector) -> DenseVector:
    """y = A^H x by row scatter (conjugation is a no-op for real A)."""
    _check_pair(A, x)
    if A.precision.k != x.precision.k:
        raise ValueError("matrix and vector precision must match for spmv_adjoint")
    k = x.precision.k
    out = DenseVector.zeros(A.n, x.precision, A.field)
    if A.field == "real":
        K.spmv_adjoint_real(A.row_ptr, A.col_idx, A.val_re, x.re, out.re, k)
    else:
        K.spmv_adjoint_cx(
            A.row_ptr, A.col_idx, A.val_re, A.val_im, x.re, x.im, out.re, out.im, k
        )
    return out


def _check_mixed(A: CsrMatrix, x: DenseVector):
    if A.n != x.n:
        raise ValueError(f"dimension mismatch: matrix n={A.n}, vector n={x.n}")
    if A.field != x.field:
        raise ValueError(f"field mismatch: matrix {A.field}, vector {x.field}")
    if A.precision.k != 1:
        raise ValueError("mixed SpMV requires a binary64 matrix (use demoted())")
    if x.precision.k < 2:
        raise ValueError("mixed SpMV requires a working precision above binary64")


def spmv_mixed(A64: CsrMatrix, x: DenseVector) -> DenseVector:
    """y = A x with binary64 matrix entries promoted exactly per product.

    Bitwise equal to spmv on the exactly promoted matrix.
    """
    _check_mixed(A64, x)
    k = x.precision.k
    out = DenseVector.zeros(A64.n, x.precision, A64.field)
    if A64.field == "real":
        K.spmv_real_mixed(A64.row_ptr, A64.col_idx, A64.val_re[:, 0], x.re, out.re, k)
    else:
        K.spmv_cx_mixed(
            A64.row_ptr, A64.col_idx, A64.val_re[:, 0], A64.val_im[:, 0],
            x.re, x.im, out.re, out.im, k,
        )
    return out


def spmv_adjoint_mixed(A64: CsrMatrix, x: DenseVector) -> DenseVector:
    _check_mixed(A64, x)
    k = x.precision.k
    out = DenseVector.zeros(A64.n, x.precision, A64.field)
    if A64.field == "real":
        K.spmv_adjoint_real_mixed(
            A64.row_ptr, A64.col_idx, A64.val_re[:, 0], x.re, out.re, k
        )
    else:
        K.spmv_adjoint_cx_mixed(
            A64.row_ptr, A64.col_idx, A64.val_re[:, 0], A64.val_im[:, 0],
            x.re, x.im, out.re, out.im, k,
        )
    return out


# ---------------------------------------------------------------------------
# dense vector kernels
# ---------------------------------------------------------------------------


def _check_vecs(x: DenseVector, y: DenseVector):
    if x.n != y.n or x.field != y.field or x.precision != y.precision:
        raise ValueError("vector length/field/precision mismatch")


def hdot(x: DenseVector, y: DenseVector):
    """<x, y> = sum conj(x_i) * y_i; conjugate-linear in the first argument."""
    _check_vecs(x, y)
    k = x.precision.k
    if x.field == "real":
        acc = K.dot_real(x.re, y.re, k)
        return MCFloat(tuple(acc[:k]))
    accr, acci = K.hdot_cx(x.re, x.im, y.re, y.im, k)
    return MCComplex(MCFloat(tuple(accr[:k])), MCFloat(tuple(acci[:k])))


def dot(x: DenseVector, y: DenseVector):
    """Unconjugated sum of x_i * y_i (equals hdot for the real field)."""
    _check_vecs(x, y)
    k = x.precision.k
    if x.field == "real":
        acc = K.dot_real(x.re, y.re, k)
        return MCFloat(tuple(acc[:k]))
    conj_im = DenseVector(x.re, -x.im, x.precision)
    accr, acci = K.hdot_cx(conj_im.re, conj_im.im, y.re, y.im, k)
    return MCComplex(MCFloat(tuple(accr[:k])), MCFloat(tuple(acci[:k])))


def norm2(x: DenseVector) -> MCFloat:
    """Euclidean norm as a real MCFloat."""
    k = x.precision.k
    if x.field == "real":
        ssq = K.sumsq_real(x.re, k)
    else:
        ssq = K.sumsq_cx(x.re, x.im, k)
    return MCFloat(_mccore.mc_sqrt(tuple(ssq[:k])))


def axpy(alpha, x: DenseVector, y: DenseVector) -> DenseVector:
    """y + alpha * x."""
    _check_vecs(x, y)
    k = x.precision.k
    out = DenseVector.zeros(x.n, x.precision, x.field)
    if x.field == "real":
        a = np.zeros(4)
        a[:k] = alpha.components if isinstance(alpha, MCFloat) else alpha
        K.axpy_real(a, x.re, y.re, out.re, k)
    else:
        ar = np.zeros(4)
        ai = np.zeros(4)
        if isinstance(alpha, MCComplex):
            ar[:k] = alpha.re.components
            ai[:k] = alpha.im.components
        else:
            ar[:k] = alpha.components
        K.axpy_cx(ar, ai, x.re, x.im, y.re, y.im, out.re, out.im, k)
    return out


def scale(alpha, x: DenseVector) -> DenseVector:
    k = x.precision.k
    out = DenseVector.zeros(x.n, x.precision, x.field)
    if x.field == "real":
        a = np.zeros(4)
        a[:k] = alpha.components if isinstance(alpha, MCFloat) else alpha
        K.scale_real(a, x.re, out.re, k)
    else:
        ar = np.zeros(4)
        ai = np.zeros(4)
        if isinstance(alpha, MCComplex):
            ar[:k] = alpha.re.components
            ai[:k] = alpha.im.components
        else:
            ar[:k] = alpha.components
        K.scale_cx(ar, ai, x.re, x.im, out.re, out.im, k)
    return out


def vec_sub(x: DenseVector, y: DenseVector) -> DenseVector:
    """x - y."""
    _check_vecs(x, y)
    k = x.precision.k
    out = DenseVector.zeros(x.n, x.precision, x.field)
    K.sub_real(x.re, y.re, out.re, k)
    if x.field == "complex":
        K.sub_real(x.im, y.im, out.im, k)
    return out


def vec_add(x: DenseVector, y: DenseVector) -> DenseVector:
    _check_vecs(x, y)
    k = x.precision.k
    out = DenseVector.zeros(x.n, x.precision, x.field)
    K.add_real(x.re, y.re, out.re, k)
    if x.field == "complex":
        K.add_real(x.im, y.im, out.im, k)
    return out


def vec_copy(x: DenseVector) -> DenseVector:
    return x.copy()
