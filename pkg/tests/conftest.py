"""Shared test utilities: random multi-component values, random sparse
systems, dense LU oracle, and collection-fixture discovery."""

import math
import os
from pathlib import Path

import numpy as np
import pytest

from mpkrylov import (
    CooMatrix,
    CsrMatrix,
    DenseVector,
    MCComplex,
    MCFloat,
    Precision,
    coo_to_csr,
)
from mpkrylov import _mccore
from mpkrylov.sparse import axpy, vec_sub

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> Path:
    """Locate a collection matrix fixture or skip the test."""
    env = os.environ.get("MPKRYLOV_FIXTURES")
    candidates = [Path(env)] if env else []
    candidates.append(FIXTURE_DIR)
    for d in candidates:
        p = d / f"{name}.mtx"
        if p.exists():
            return p
    pytest.skip(
        f"collection fixture {name}.mtx not found; place it in tests/fixtures "
        f"(e.g. `mpkrylov-bench --fetch --matrix {name} --cache-dir tests/fixtures` "
        f"on a machine with network access) or set MPKRYLOV_FIXTURES"
    )


def rand_mc(rng, k, scale=1.0):
    """Random renormalized k-component tuple with content in every limb."""
    terms = [rng.uniform(-1.0, 1.0) * scale * 2.0 ** (-52 * i) for i in range(k)]
    return _mccore.renormalize(terms, k)


def ulp_ok(t):
    """Strict non-overlap check for a component tuple."""
    for i in range(len(t) - 1):
        if t[i] == 0.0:
            return all(c == 0.0 for c in t[i + 1:])
        if abs(t[i + 1]) > math.ulp(abs(t[i])) / 2:
            return False
    return True


def random_dd_coo(rng, n, density=0.2, complex_field=False):
    """Random diagonally dominant sparse matrix as (CooMatrix, dense array)."""
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, True)
    if complex_field:
        vals = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    else:
        vals = rng.uniform(-1, 1, (n, n)).astype(complex)
    vals = vals * mask
    for i in range(n):
        vals[i, i] = np.abs(vals[i]).sum() + 1.0
    rows, cols = np.nonzero(mask)
    vre = vals[rows, cols].real.astype(float)
    vim = vals[rows, cols].imag.astype(float) if complex_field else None
    coo = CooMatrix(n, n, rows.astype(np.int64), cols.astype(np.int64),
                    vre, vim, "general")
    dense = vals if complex_field else vals.real
    return coo, dense


def random_dd_csr(rng, n, precision, density=0.2, complex_field=False):
    coo, dense = random_dd_coo(rng, n, density, complex_field)
    return coo_to_csr(coo, precision), dense


def dense_rows_from_csr(A: CsrMatrix):
    """Dense row vectors (DenseVector each) for the oracle computations."""
    rows = []
    for i in range(A.n):
        re = np.zeros((A.n, A.precision.k))
        im = np.zeros((A.n, A.precision.k)) if A.field == "complex" else None
        for p in range(A.row_ptr[i], A.row_ptr[i + 1]):
            j = A.col_idx[p]
            re[j] = A.val_re[p]
            if im is not None:
                im[j] = A.val_im[p]
        rows.append(DenseVector(re, im, A.precision))
    return rows


def dense_lu_solve(A: CsrMatrix, b: DenseVector) -> DenseVector:
    """Dense LU (no pivoting) solve at A's precision.

    Independent oracle for the Krylov solvers; requires a matrix that does
    not need pivoting (diagonally dominant in the tests).  Row operations
    use the batched vector kernels, pivots are exact MC scalars.
    """
    n = A.n
    rows = dense_rows_from_csr(A)
    rhs = [b.get(i) for i in range(n)]
    # elimination
    for kcol in range(n):
        piv = rows[kcol].get(kcol)
        for i in range(kcol + 1, n):
            a_ik = rows[i].get(kcol)
            if a_ik.is_zero():
                continue
            factor = a_ik / piv
            rows[i] = axpy(-factor, rows[kcol], rows[i])
            rhs[i] = rhs[i] - factor * rhs[kcol]
    # back substitution
    x = DenseVector.zeros(n, A.precision, A.field)
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        row = rows[i]
        for j in range(i + 1, n):
            a_ij = row.get(j)
            if not a_ij.is_zero():
                s = s - a_ij * x.get(j)
        x.set(i, s / row.get(i))
    return x


def mc_to_mpf(t, mpmath):
    return sum((mpmath.mpf(c) for c in t), mpmath.mpf(0))


def vec_rel_error(x: DenseVector, x_ref: DenseVector) -> float:
    from mpkrylov.sparse import norm2

    return (norm2(vec_sub(x, x_ref)) / norm2(x_ref)).to_float()
