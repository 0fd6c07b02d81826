"""Compiled array kernels for multi-component vectors and CSR matrices.

Each element-wise helper re-implements the exact operation sequence of
``_mccore`` (same two-sum/two-prod chains, same distillation), so batched
results are bit-identical to the scalar reference; tests/test_twins.py
locks the two renditions together.

Layouts: a real vector is a C-contiguous (n, k) float64 array, most
significant component first; complex vectors are (re, im) pairs of such
arrays.  CSR values are (nnz, k) arrays aligned with col_idx.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# scratch sizes: mul generates k*k terms (k <= 4), fused buffers pad a bit
_BUF = 24


@njit(cache=True)
def _renorm(terms, m, out, k, e, ext):
    """Mirror of _mccore.renorm_terms on terms[0:m], writing out[0:k]."""
    allfin = True
    for i in range(m):
        if not math.isfinite(terms[i]):
            allfin = False
            break
    if not allfin:
        s = 0.0
        for i in range(m):
            s += terms[i]
        out[0] = s
        for i in range(1, k):
            out[i] = 0.0
        return
    cnt = m
    for i in range(m):
        ext[i] = terms[i]
    passes = 0
    while True:
        s = ext[cnt - 1]
        for i in range(cnt - 2, -1, -1):
            x = ext[i]
            q = x + s
            bb = q - x
            e[i + 1] = (x - (q - bb)) + (s - bb)
            s = q
        e[0] = s
        n2 = 0
        eps = e[0]
        for i in range(1, cnt):
            x = e[i]
            q = eps + x
            bb = q - eps
            enew = (eps - (q - bb)) + (x - bb)
            if enew != 0.0:
                ext[n2] = q
                n2 += 1
                eps = enew
            else:
                eps = q
        ext[n2] = eps
        n2 += 1
        cnt = n2
        passes += 1
        ok = True
        for i in range(cnt - 1):
            if ext[i] + ext[i + 1] != ext[i]:
                ok = False
                break
        if ok or passes >= 8:
            break
    for i in range(k):
        if i < cnt:
            out[i] = ext[i] + 0.0
        else:
            out[i] = 0.0


@njit(cache=True)
def _add1(a, b, out, k, buf, e, ext):
    """out = a + b (k components each); mirrors _mccore.mc_add."""
    if k == 1:
        out[0] = a[0] + b[0]
        return
    ii = 0
    jj = 0
    tt = 0
    while ii < k and jj < k:
        x = a[ii]
        y = b[jj]
        if abs(x) >= abs(y):
            buf[tt] = x
            ii += 1
        else:
            buf[tt] = y
            jj += 1
        tt += 1
    while ii < k:
        buf[tt] = a[ii]
        ii += 1
        tt += 1
    while jj < k:
        buf[tt] = b[jj]
        jj += 1
        tt += 1
    _renorm(buf, 2 * k, out, k, e, ext)


@njit(cache=True)
def _sub1(a, b, out, k, buf, e, ext):
    """out = a - b; mirrors _mccore.mc_sub (add of the negation)."""
    if k == 1:
        out[0] = a[0] - b[0]
        return
    ii = 0
    jj = 0
    tt = 0
    while ii < k and jj < k:
        x = a[ii]
        y = -b[jj]
        if abs(x) >= abs(y):
            buf[tt] = x
            ii += 1
        else:
            buf[tt] = y
            jj += 1
        tt += 1
    while ii < k:
        buf[tt] = a[ii]
        ii += 1
        tt += 1
    while jj < k:
        buf[tt] = -b[jj]
        jj += 1
        tt += 1
    _renorm(buf, 2 * k, out, k, e, ext)


@njit(cache=True)
def _mul1(a, b, out, k, buf, e, ext):
    """out = a * b; mirrors _mccore.mc_mul (same level/error ordering)."""
    if k == 1:
        out[0] = a[0] * b[0]
        return
    nt = 0
    ncarry = 0
    carry0 = 0.0
    carry1 = 0.0
    carry2 = 0.0
    # carry holds the previous level's two-prod errors (at most 3 for k=4)
    for lvl in range(k):
        if lvl < k - 1:
            newc0 = 0.0
            newc1 = 0.0
            newc2 = 0.0
            nnew = 0
            for i in range(lvl + 1):
                x = a[i]
                y = b[lvl - i]
                p = x * y
                t = 134217729.0 * x
                xh = t - (t - x)
                xl = x - xh
                t = 134217729.0 * y
                yh = t - (t - y)
                yl = y - yh
                err = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
                buf[nt] = p
                nt += 1
                if nnew == 0:
                    newc0 = err
                elif nnew == 1:
                    newc1 = err
                else:
                    newc2 = err
                nnew += 1
        else:
            for i in range(lvl + 1):
                buf[nt] = a[i] * b[lvl - i]
                nt += 1
            nnew = 0
            newc0 = 0.0
            newc1 = 0.0
            newc2 = 0.0
        if ncarry >= 1:
            buf[nt] = carry0
            nt += 1
        if ncarry >= 2:
            buf[nt] = carry1
            nt += 1
        if ncarry >= 3:
            buf[nt] = carry2
            nt += 1
        carry0 = newc0
        carry1 = newc1
        carry2 = newc2
        ncarry = nnew
    _renorm(buf, nt, out, k, e, ext)


@njit(cache=True)
def _cmul1(ar, ai, br, bi, outr, outi, k, buf, e, ext, t1, t2):
    """Complex product; mirrors _mccore.cx_mul composition."""
    _mul1(ar, br, t1, k, buf, e, ext)
    _mul1(ai, bi, t2, k, buf, e, ext)
    _sub1(t1, t2, outr, k, buf, e, ext)
    _mul1(ar, bi, t1, k, buf, e, ext)
    _mul1(ai, br, t2, k, buf, e, ext)
    _add1(t1, t2, outi, k, buf, e, ext)


# ---------------------------------------------------------------------------
# SpMV family.  Accumulation always runs in ascending column order within
# each row (deterministic); the mixed variants promote binary64 entries on
# the fly and are therefore bitwise equal to the promoted-matrix kernels.
# ---------------------------------------------------------------------------


@njit(cache=True)
def spmv_real(rp, ci, av, x, out, k):
    n = out.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    acc = np.empty(4)
    tmp = np.empty(4)
    for i in range(n):
        for c in range(k):
            acc[c] = 0.0
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            _mul1(av[p], x[j], tmp, k, buf, e, ext)
            _add1(acc, tmp, acc, k, buf, e, ext)
        for c in range(k):
            out[i, c] = acc[c]


@njit(cache=True)
def spmv_real_mixed(rp, ci, av64, x, out, k):
    n = out.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    acc = np.empty(4)
    tmp = np.empty(4)
    aw = np.empty(4)
    for c in range(4):
        aw[c] = 0.0
    for i in range(n):
        for c in range(k):
            acc[c] = 0.0
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            aw[0] = av64[p]
            _mul1(aw, x[j], tmp, k, buf, e, ext)
            _add1(acc, tmp, acc, k, buf, e, ext)
        for c in range(k):
            out[i, c] = acc[c]


@njit(cache=True)
def spmv_adjoint_real(rp, ci, av, x, out, k):
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    tmp = np.empty(4)
    out[:, :] = 0.0
    for i in range(n):
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            _mul1(av[p], x[i], tmp, k, buf, e, ext)
            _add1(out[j], tmp, out[j], k, buf, e, ext)


@njit(cache=True)
def spmv_adjoint_real_mixed(rp, ci, av64, x, out, k):
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    tmp = np.empty(4)
    aw = np.empty(4)
    for c in range(4):
        aw[c] = 0.0
    out[:, :] = 0.0
    for i in range(n):
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            aw[0] = av64[p]
            _mul1(aw, x[i], tmp, k, buf, e, ext)
            _add1(out[j], tmp, out[j], k, buf, e, ext)


@njit(cache=True)
def spmv_cx(rp, ci, avr, avi, xr, xi, outr, outi, k):
    n = outr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    t1 = np.empty(4)
    t2 = np.empty(4)
    pr = np.empty(4)
    pi = np.empty(4)
    accr = np.empty(4)
    acci = np.empty(4)
    for i in range(n):
        for c in range(k):
            accr[c] = 0.0
            acci[c] = 0.0
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            _cmul1(avr[p], avi[p], xr[j], xi[j], pr, pi, k, buf, e, ext, t1, t2)
            _add1(accr, pr, accr, k, buf, e, ext)
            _add1(acci, pi, acci, k, buf, e, ext)
        for c in range(k):
            outr[i, c] = accr[c]
            outi[i, c] = acci[c]


@njit(cache=True)
def spmv_cx_mixed(rp, ci, avr64, avi64, xr, xi, outr, outi, k):
    n = outr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    t1 = np.empty(4)
    t2 = np.empty(4)
    pr = np.empty(4)
    pi = np.empty(4)
    accr = np.empty(4)
    acci = np.empty(4)
    awr = np.zeros(4)
    awi = np.zeros(4)
    for i in range(n):
        for c in range(k):
            accr[c] = 0.0
            acci[c] = 0.0
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            awr[0] = avr64[p]
            awi[0] = avi64[p]
            _cmul1(awr, awi, xr[j], xi[j], pr, pi, k, buf, e, ext, t1, t2)
            _add1(accr, pr, accr, k, buf, e, ext)
            _add1(acci, pi, acci, k, buf, e, ext)
        for c in range(k):
            outr[i, c] = accr[c]
            outi[i, c] = acci[c]


@njit(cache=True)
def spmv_adjoint_cx(rp, ci, avr, avi, xr, xi, outr, outi, k):
    n = xr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    t1 = np.empty(4)
    t2 = np.empty(4)
    pr = np.empty(4)
    pi = np.empty(4)
    conj = np.empty(4)
    outr[:, :] = 0.0
    outi[:, :] = 0.0
    for i in range(n):
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            for c in range(k):
                conj[c] = -avi[p, c]
            _cmul1(avr[p], conj, xr[i], xi[i], pr, pi, k, buf, e, ext, t1, t2)
            _add1(outr[j], pr, outr[j], k, buf, e, ext)
            _add1(outi[j], pi, outi[j], k, buf, e, ext)


@njit(cache=True)
def spmv_adjoint_cx_mixed(rp, ci, avr64, avi64, xr, xi, outr, outi, k):
    n = xr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    t1 = np.empty(4)
    t2 = np.empty(4)
    pr = np.empty(4)
    pi = np.empty(4)
    awr = np.zeros(4)
    awi = np.zeros(4)
    outr[:, :] = 0.0
    outi[:, :] = 0.0
    for i in range(n):
        for p in range(rp[i], rp[i + 1]):
            j = ci[p]
            awr[0] = avr64[p]
            awi[0] = -avi64[p]
            _cmul1(awr, awi, xr[i], xi[i], pr, pi, k, buf, e, ext, t1, t2)
            _add1(outr[j], pr, outr[j], k, buf, e, ext)
            _add1(outi[j], pi, outi[j], k, buf, e, ext)


# ---------------------------------------------------------------------------
# dense vector kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def axpy_real(alpha, x, y, out, k):
    """out = y + alpha*x, element order ascending."""
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    tmp = np.empty(4)
    for i in range(n):
        _mul1(alpha, x[i], tmp, k, buf, e, ext)
        _add1(y[i], tmp, out[i], k, buf, e, ext)


@njit(cache=True)
def axpy_cx(ar, ai, xr, xi, yr, yi, outr, outi, k):
    n = xr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    t1 = np.empty(4)
    t2 = np.empty(4)
    pr = np.empty(4)
    pi = np.empty(4)
    for i in range(n):
        _cmul1(ar, ai, xr[i], xi[i], pr, pi, k, buf, e, ext, t1, t2)
        _add1(yr[i], pr, outr[i], k, buf, e, ext)
        _add1(yi[i], pi, outi[i], k, buf, e, ext)


@njit(cache=True)
def scale_real(alpha, x, out, k):
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    tmp = np.empty(4)
    for i in range(n):
        _mul1(alpha, x[i], tmp, k, buf, e, ext)
        for c in range(k):
            out[i, c] = tmp[c]


@njit(cache=True)
def scale_cx(ar, ai, xr, xi, outr, outi, k):
    n = xr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    t1 = np.empty(4)
    t2 = np.empty(4)
    pr = np.empty(4)
    pi = np.empty(4)
    for i in range(n):
        _cmul1(ar, ai, xr[i], xi[i], pr, pi, k, buf, e, ext, t1, t2)
        for c in range(k):
            outr[i, c] = pr[c]
            outi[i, c] = pi[c]


@njit(cache=True)
def sub_real(x, y, out, k):
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    for i in range(n):
        _sub1(x[i], y[i], out[i], k, buf, e, ext)


@njit(cache=True)
def add_real(x, y, out, k):
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    for i in range(n):
        _add1(x[i], y[i], out[i], k, buf, e, ext)


@njit(cache=True)
def dot_real(x, y, k):
    """Sum of x_i*y_i accumulated in k-component arithmetic, ascending."""
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    acc = np.zeros(4)
    tmp = np.empty(4)
    for i in range(n):
        _mul1(x[i], y[i], tmp, k, buf, e, ext)
        _add1(acc, tmp, acc, k, buf, e, ext)
    return acc


@njit(cache=True)
def hdot_cx(xr, xi, yr, yi, k):
    """Sum of conj(x_i)*y_i; conjugate-linear in the first argument."""
    n = xr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    t1 = np.empty(4)
    t2 = np.empty(4)
    pr = np.empty(4)
    pi = np.empty(4)
    conj = np.empty(4)
    accr = np.zeros(4)
    acci = np.zeros(4)
    for i in range(n):
        for c in range(k):
            conj[c] = -xi[i, c]
        _cmul1(xr[i], conj, yr[i], yi[i], pr, pi, k, buf, e, ext, t1, t2)
        _add1(accr, pr, accr, k, buf, e, ext)
        _add1(acci, pi, acci, k, buf, e, ext)
    return accr, acci


@njit(cache=True)
def sumsq_real(x, k):
    n = x.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    acc = np.zeros(4)
    tmp = np.empty(4)
    for i in range(n):
        _mul1(x[i], x[i], tmp, k, buf, e, ext)
        _add1(acc, tmp, acc, k, buf, e, ext)
    return acc


@njit(cache=True)
def sumsq_cx(xr, xi, k):
    n = xr.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    acc = np.zeros(4)
    tmp = np.empty(4)
    for i in range(n):
        _mul1(xr[i], xr[i], tmp, k, buf, e, ext)
        _add1(acc, tmp, acc, k, buf, e, ext)
        _mul1(xi[i], xi[i], tmp, k, buf, e, ext)
        _add1(acc, tmp, acc, k, buf, e, ext)
    return acc


# batched element-wise ops used by tests and conversion helpers


@njit(cache=True)
def ew_add(a, b, out, k):
    n = a.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    for i in range(n):
        _add1(a[i], b[i], out[i], k, buf, e, ext)


@njit(cache=True)
def ew_mul(a, b, out, k):
    n = a.shape[0]
    buf = np.empty(_BUF)
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    for i in range(n):
        _mul1(a[i], b[i], out[i], k, buf, e, ext)


@njit(cache=True)
def ew_renorm(a, out, k):
    n = a.shape[0]
    e = np.empty(_BUF)
    ext = np.empty(_BUF)
    m = a.shape[1]
    buf = np.empty(_BUF)
    for i in range(n):
        for c in range(m):
            buf[c] = a[i, c]
        _renorm(buf, m, out[i], k, e, ext)


# ---------------------------------------------------------------------------
# optional row-parallel SpMV (gather form only; compiled on first use)
# ---------------------------------------------------------------------------

_parallel_cache = {}


def get_parallel_spmv(field: str):
    """Build (lazily) a prange row-partitioned SpMV; additions within a
    row keep the serial order, so results match the serial kernel."""
    if field in _parallel_cache:
        return _parallel_cache[field]
    from numba import prange

    if field == "real":

        @njit(cache=True, parallel=True)
        def spmv_real_par(rp, ci, av, x, out, k):
            n = out.shape[0]
            for i in prange(n):
                buf = np.empty(_BUF)
                e = np.empty(_BUF)
                ext = np.empty(_BUF)
                acc = np.empty(4)
                tmp = np.empty(4)
                for c in range(k):
                    acc[c] = 0.0
                for p in range(rp[i], rp[i + 1]):
                    j = ci[p]
                    _mul1(av[p], x[j], tmp, k, buf, e, ext)
                    _add1(acc, tmp, acc, k, buf, e, ext)
                for c in range(k):
                    out[i, c] = acc[c]

        _parallel_cache[field] = spmv_real_par
    else:

        @njit(cache=True, parallel=True)
        def spmv_cx_par(rp, ci, avr, avi, xr, xi, outr, outi, k):
            n = outr.shape[0]
            for i in prange(n):
                buf = np.empty(_BUF)
                e = np.empty(_BUF)
                ext = np.empty(_BUF)
                t1 = np.empty(4)
                t2 = np.empty(4)
                pr = np.empty(4)
                pi = np.empty(4)
                accr = np.empty(4)
                acci = np.empty(4)
                for c in range(k):
                    accr[c] = 0.0
                    acci[c] = 0.0
                for p in range(rp[i], rp[i + 1]):
                    j = ci[p]
                    _cmul1(avr[p], avi[p], xr[j], xi[j], pr, pi, k, buf, e, ext, t1, t2)
                    _add1(accr, pr, accr, k, buf, e, ext)
                    _add1(acci, pi, acci, k, buf, e, ext)
                for c in range(k):
                    outr[i, c] = accr[c]
                    outi[i, c] = acci[c]

        _parallel_cache[field] = spmv_cx_par
    return _parallel_cache[field]
