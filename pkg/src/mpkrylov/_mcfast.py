"""Fused interpreted multi-component primitives for the triangular sweeps.

The ILU(0) forward/backward substitutions are sequential scalar loops, so
their inner operations live here as hand-fused functions: one fused
``a - b*c`` builds the full partial-product term list and renormalizes
once, instead of composing mc_mul and mc_sub.  Accuracy matches the
composed ops (a single renormalization truncates once instead of twice);
the highest kept product level is folded with plain adds, whose rounding
sits ~2^-53 below the format ulp.

Values are flat tuples: real = (c0..c_{k-1}), complex = (re..., im...).
Term lists interleave accumulator components with product levels so the
distillation pass sees a near-sorted stream; rare disordered cases fall
back to the generic fixpoint renorm.
"""

from __future__ import annotations

from . import _mccore
from ._mccore import renorm_terms

_SPL = 134217729.0


def _sp(a):
    """Dekker split of a binary64 into high/low 26-bit halves."""
    t = _SPL * a
    hi = t - (t - a)
    return hi, a - hi


def _fr(terms, k):
    """Single distillation pass over `terms`, truncated to k components.

    Inlined VecSum + zero-eliminating extraction; falls back to the
    generic fixpoint when the pass does not reach strict non-overlap.
    """
    m = len(terms)
    e = [0.0] * m
    s = terms[m - 1]
    i = m - 2
    while i >= 0:
        x = terms[i]
        q = x + s
        bb = q - x
        e[i + 1] = (x - (q - bb)) + (s - bb)
        s = q
        i -= 1
    out = []
    eps = s
    i = 1
    while i < m:
        x = e[i]
        q = eps + x
        bb = q - eps
        enew = (eps - (q - bb)) + (x - bb)
        if enew != 0.0:
            out.append(q)
            eps = enew
        else:
            eps = q
        i += 1
    out.append(eps)
    n = len(out)
    j = 0
    while j < n - 1:
        if out[j] + out[j + 1] != out[j]:
            return renorm_terms(out, k)
        j += 1
    if n < k:
        out.extend([0.0] * (k - n))
    return tuple(c + 0.0 for c in out[:k])


# ---------------------------------------------------------------------------
# real fused ops, k = 2 / 3 / 4: r = a - b*c  (and plain products)
# ---------------------------------------------------------------------------


def rmulsub2(a, b, c):
    b0, b1 = b
    c0, c1 = c
    xh, xl = _sp(b0)
    yh, yl = _sp(c0)
    p = b0 * c0
    e = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
    return _fr((a[0], -p, a[1], -(b0 * c1 + b1 * c0), -e), 2)


def rmul2(a, b):
    a0, a1 = a
    b0, b1 = b
    xh, xl = _sp(a0)
    yh, yl = _sp(b0)
    p = a0 * b0
    e = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
    return _fr((p, a0 * b1 + a1 * b0, e), 2)


def rmulsub3(a, b, c):
    b0, b1, b2 = b
    c0, c1, c2 = c
    x0h, x0l = _sp(b0)
    x1h, x1l = _sp(b1)
    y0h, y0l = _sp(c0)
    y1h, y1l = _sp(c1)
    p00 = b0 * c0
    e00 = ((x0h * y0h - p00) + x0h * y0l + x0l * y0h) + x0l * y0l
    p01 = b0 * c1
    e01 = ((x0h * y1h - p01) + x0h * y1l + x0l * y1h) + x0l * y1l
    p10 = b1 * c0
    e10 = ((x1h * y0h - p10) + x1h * y0l + x1l * y0h) + x1l * y0l
    return _fr((a[0], -p00, a[1], -p01, -p10, -e00,
                a[2], -(b0 * c2 + b1 * c1 + b2 * c0), -e01, -e10), 3)


def rmul3(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    x0h, x0l = _sp(a0)
    x1h, x1l = _sp(a1)
    y0h, y0l = _sp(b0)
    y1h, y1l = _sp(b1)
    p00 = a0 * b0
    e00 = ((x0h * y0h - p00) + x0h * y0l + x0l * y0h) + x0l * y0l
    p01 = a0 * b1
    e01 = ((x0h * y1h - p01) + x0h * y1l + x0l * y1h) + x0l * y1l
    p10 = a1 * b0
    e10 = ((x1h * y0h - p10) + x1h * y0l + x1l * y0h) + x1l * y0l
    return _fr((p00, p01, p10, e00,
                a0 * b2 + a1 * b1 + a2 * b0, e01, e10), 3)


def rmulsub4(a, b, c):
    b0, b1, b2, b3 = b
    c0, c1, c2, c3 = c
    x0h, x0l = _sp(b0)
    x1h, x1l = _sp(b1)
    x2h, x2l = _sp(b2)
    y0h, y0l = _sp(c0)
    y1h, y1l = _sp(c1)
    y2h, y2l = _sp(c2)
    p00 = b0 * c0
    e00 = ((x0h * y0h - p00) + x0h * y0l + x0l * y0h) + x0l * y0l
    p01 = b0 * c1
    e01 = ((x0h * y1h - p01) + x0h * y1l + x0l * y1h) + x0l * y1l
    p10 = b1 * c0
    e10 = ((x1h * y0h - p10) + x1h * y0l + x1l * y0h) + x1l * y0l
    p02 = b0 * c2
    e02 = ((x0h * y2h - p02) + x0h * y2l + x0l * y2h) + x0l * y2l
    p11 = b1 * c1
    e11 = ((x1h * y1h - p11) + x1h * y1l + x1l * y1h) + x1l * y1l
    p20 = b2 * c0
    e20 = ((x2h * y0h - p20) + x2h * y0l + x2l * y0h) + x2l * y0l
    return _fr((a[0], -p00, a[1], -p01, -p10, -e00,
                a[2], -p02, -p11, -p20, -e01, -e10,
                a[3], -(b0 * c3 + b1 * c2 + b2 * c1 + b3 * c0),
                -e02, -e11, -e20), 4)


def rmul4(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    x0h, x0l = _sp(a0)
    x1h, x1l = _sp(a1)
    x2h, x2l = _sp(a2)
    y0h, y0l = _sp(b0)
    y1h, y1l = _sp(b1)
    y2h, y2l = _sp(b2)
    p00 = a0 * b0
    e00 = ((x0h * y0h - p00) + x0h * y0l + x0l * y0h) + x0l * y0l
    p01 = a0 * b1
    e01 = ((x0h * y1h - p01) + x0h * y1l + x0l * y1h) + x0l * y1l
    p10 = a1 * b0
    e10 = ((x1h * y0h - p10) + x1h * y0l + x1l * y0h) + x1l * y0l
    p02 = a0 * b2
    e02 = ((x0h * y2h - p02) + x0h * y2l + x0l * y2h) + x0l * y2l
    p11 = a1 * b1
    e11 = ((x1h * y1h - p11) + x1h * y1l + x1l * y1h) + x1l * y1l
    p20 = a2 * b0
    e20 = ((x2h * y0h - p20) + x2h * y0l + x2l * y0h) + x2l * y0l
    return _fr((p00, p01, p10, e00, p02, p11, p20, e01, e10,
                a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0, e02, e11, e20), 4)


_RMULSUB = {2: rmulsub2, 3: rmulsub3, 4: rmulsub4}
_RMUL = {2: rmul2, 3: rmul3, 4: rmul4}


# ---------------------------------------------------------------------------
# complex fused ops on flat (re..., im...) tuples: r = a - b*c
# ---------------------------------------------------------------------------


def cmulsub2(a, b, c):
    br0, br1, bi0, bi1 = b
    cr0, cr1, ci0, ci1 = c
    brh, brl = _sp(br0)
    bih, bil = _sp(bi0)
    crh, crl = _sp(cr0)
    cih, cil = _sp(ci0)
    # re: a.re - br*cr + bi*ci
    p1 = br0 * cr0
    e1 = ((brh * crh - p1) + brh * crl + brl * crh) + brl * crl
    p2 = bi0 * ci0
    e2 = ((bih * cih - p2) + bih * cil + bil * cih) + bil * cil
    re = _fr((a[0], -p1, p2, a[1],
              -(br0 * cr1 + br1 * cr0) + (bi0 * ci1 + bi1 * ci0), -e1, e2), 2)
    # im: a.im - br*ci - bi*cr
    p3 = br0 * ci0
    e3 = ((brh * cih - p3) + brh * cil + brl * cih) + brl * cil
    p4 = bi0 * cr0
    e4 = ((bih * crh - p4) + bih * crl + bil * crh) + bil * crl
    im = _fr((a[2], -p3, -p4, a[3],
              -(br0 * ci1 + br1 * ci0 + bi0 * cr1 + bi1 * cr0), -e3, -e4), 2)
    return re + im


def cmulsub3(a, b, c):
    br0, br1, br2, bi0, bi1, bi2 = b
    cr0, cr1, cr2, ci0, ci1, ci2 = c
    br0h, br0l = _sp(br0)
    br1h, br1l = _sp(br1)
    bi0h, bi0l = _sp(bi0)
    bi1h, bi1l = _sp(bi1)
    cr0h, cr0l = _sp(cr0)
    cr1h, cr1l = _sp(cr1)
    ci0h, ci0l = _sp(ci0)
    ci1h, ci1l = _sp(ci1)
    # products br*cr and bi*ci for the real part
    q00 = br0 * cr0
    f00 = ((br0h * cr0h - q00) + br0h * cr0l + br0l * cr0h) + br0l * cr0l
    q01 = br0 * cr1
    f01 = ((br0h * cr1h - q01) + br0h * cr1l + br0l * cr1h) + br0l * cr1l
    q10 = br1 * cr0
    f10 = ((br1h * cr0h - q10) + br1h * cr0l + br1l * cr0h) + br1l * cr0l
    s00 = bi0 * ci0
    g00 = ((bi0h * ci0h - s00) + bi0h * ci0l + bi0l * ci0h) + bi0l * ci0l
    s01 = bi0 * ci1
    g01 = ((bi0h * ci1h - s01) + bi0h * ci1l + bi0l * ci1h) + bi0l * ci1l
    s10 = bi1 * ci0
    g10 = ((bi1h * ci0h - s10) + bi1h * ci0l + bi1l * ci0h) + bi1l * ci0l
    re = _fr((a[0], -q00, s00, a[1], -q01, -q10, s01, s10, -f00, g00,
              a[2], -(br0 * cr2 + br1 * cr1 + br2 * cr0)
              + (bi0 * ci2 + bi1 * ci1 + bi2 * ci0),
              -f01, -f10, g01, g10), 3)
    # products br*ci and bi*cr for the imaginary part
    q00 = br0 * ci0
    f00 = ((br0h * ci0h - q00) + br0h * ci0l + br0l * ci0h) + br0l * ci0l
    q01 = br0 * ci1
    f01 = ((br0h * ci1h - q01) + br0h * ci1l + br0l * ci1h) + br0l * ci1l
    q10 = br1 * ci0
    f10 = ((br1h * ci0h - q10) + br1h * ci0l + br1l * ci0h) + br1l * ci0l
    s00 = bi0 * cr0
    g00 = ((bi0h * cr0h - s00) + bi0h * cr0l + bi0l * cr0h) + bi0l * cr0l
    s01 = bi0 * cr1
    g01 = ((bi0h * cr1h - s01) + bi0h * cr1l + bi0l * cr1h) + bi0l * cr1l
    s10 = bi1 * cr0
    g10 = ((bi1h * cr0h - s10) + bi1h * cr0l + bi1l * cr0h) + bi1l * cr0l
    im = _fr((a[3], -q00, -s00, a[4], -q01, -q10, -s01, -s10, -f00, -g00,
              a[5], -(br0 * ci2 + br1 * ci1 + br2 * ci0
                      + bi0 * cr2 + bi1 * cr1 + bi2 * cr0),
              -f01, -f10, -g01, -g10), 3)
    return re + im


def cmulsub4(a, b, c):
    br = b[:4]
    bi = b[4:]
    cr = c[:4]
    ci = c[4:]
    re = _rmulsub4_pair(a[:4], br, cr, bi, ci)
    im = _rmulsub4_pair2(a[4:], br, ci, bi, cr)
    return re + im


def _rmulsub4_pair(a, b, c, d, e):
    """a - b*c + d*e fused for k=4 (real-part accumulation)."""
    b0, b1, b2, b3 = b
    c0, c1, c2, c3 = c
    d0, d1, d2, d3 = d
    e0, e1, e2, e3 = e
    x0h, x0l = _sp(b0)
    x1h, x1l = _sp(b1)
    x2h, x2l = _sp(b2)
    y0h, y0l = _sp(c0)
    y1h, y1l = _sp(c1)
    y2h, y2l = _sp(c2)
    u0h, u0l = _sp(d0)
    u1h, u1l = _sp(d1)
    u2h, u2l = _sp(d2)
    v0h, v0l = _sp(e0)
    v1h, v1l = _sp(e1)
    v2h, v2l = _sp(e2)
    p00 = b0 * c0
    f00 = ((x0h * y0h - p00) + x0h * y0l + x0l * y0h) + x0l * y0l
    p01 = b0 * c1
    f01 = ((x0h * y1h - p01) + x0h * y1l + x0l * y1h) + x0l * y1l
    p10 = b1 * c0
    f10 = ((x1h * y0h - p10) + x1h * y0l + x1l * y0h) + x1l * y0l
    p02 = b0 * c2
    f02 = ((x0h * y2h - p02) + x0h * y2l + x0l * y2h) + x0l * y2l
    p11 = b1 * c1
    f11 = ((x1h * y1h - p11) + x1h * y1l + x1l * y1h) + x1l * y1l
    p20 = b2 * c0
    f20 = ((x2h * y0h - p20) + x2h * y0l + x2l * y0h) + x2l * y0l
    q00 = d0 * e0
    g00 = ((u0h * v0h - q00) + u0h * v0l + u0l * v0h) + u0l * v0l
    q01 = d0 * e1
    g01 = ((u0h * v1h - q01) + u0h * v1l + u0l * v1h) + u0l * v1l
    q10 = d1 * e0
    g10 = ((u1h * v0h - q10) + u1h * v0l + u1l * v0h) + u1l * v0l
    q02 = d0 * e2
    g02 = ((u0h * v2h - q02) + u0h * v2l + u0l * v2h) + u0l * v2l
    q11 = d1 * e1
    g11 = ((u1h * v1h - q11) + u1h * v1l + u1l * v1h) + u1l * v1l
    q20 = d2 * e0
    g20 = ((u2h * v0h - q20) + u2h * v0l + u2l * v0h) + u2l * v0l
    return _fr((a[0], -p00, q00, a[1], -p01, -p10, q01, q10, -f00, g00,
                a[2], -p02, -p11, -p20, q02, q11, q20, -f01, -f10, g01, g10,
                a[3],
                -(b0 * c3 + b1 * c2 + b2 * c1 + b3 * c0)
                + (d0 * e3 + d1 * e2 + d2 * e1 + d3 * e0),
                -f02, -f11, -f20, g02, g11, g20), 4)


def _rmulsub4_pair2(a, b, c, d, e):
    """a - b*c - d*e fused for k=4 (imaginary-part accumulation)."""
    b0, b1, b2, b3 = b
    c0, c1, c2, c3 = c
    d0, d1, d2, d3 = d
    e0, e1, e2, e3 = e
    x0h, x0l = _sp(b0)
    x1h, x1l = _sp(b1)
    x2h, x2l = _sp(b2)
    y0h, y0l = _sp(c0)
    y1h, y1l = _sp(c1)
    y2h, y2l = _sp(c2)
    u0h, u0l = _sp(d0)
    u1h, u1l = _sp(d1)
    u2h, u2l = _sp(d2)
    v0h, v0l = _sp(e0)
    v1h, v1l = _sp(e1)
    v2h, v2l = _sp(e2)
    p00 = b0 * c0
    f00 = ((x0h * y0h - p00) + x0h * y0l + x0l * y0h) + x0l * y0l
    p01 = b0 * c1
    f01 = ((x0h * y1h - p01) + x0h * y1l + x0l * y1h) + x0l * y1l
    p10 = b1 * c0
    f10 = ((x1h * y0h - p10) + x1h * y0l + x1l * y0h) + x1l * y0l
    p02 = b0 * c2
    f02 = ((x0h * y2h - p02) + x0h * y2l + x0l * y2h) + x0l * y2l
    p11 = b1 * c1
    f11 = ((x1h * y1h - p11) + x1h * y1l + x1l * y1h) + x1l * y1l
    p20 = b2 * c0
    f20 = ((x2h * y0h - p20) + x2h * y0l + x2l * y0h) + x2l * y0l
    q00 = d0 * e0
    g00 = ((u0h * v0h - q00) + u0h * v0l + u0l * v0h) + u0l * v0l
    q01 = d0 * e1
    g01 = ((u0h * v1h - q01) + u0h * v1l + u0l * v1h) + u0l * v1l
    q10 = d1 * e0
    g10 = ((u1h * v0h - q10) + u1h * v0l + u1l * v0h) + u1l * v0l
    q02 = d0 * e2
    g02 = ((u0h * v2h - q02) + u0h * v2l + u0l * v2h) + u0l * v2l
    q11 = d1 * e1
    g11 = ((u1h * v1h - q11) + u1h * v1l + u1l * v1h) + u1l * v1l
    q20 = d2 * e0
    g20 = ((u2h * v0h - q20) + u2h * v0l + u2l * v0h) + u2l * v0l
    return _fr((a[0], -p00, -q00, a[1], -p01, -p10, -q01, -q10, -f00, -g00,
                a[2], -p02, -p11, -p20, -q02, -q11, -q20, -f01, -f10, -g01, -g10,
                a[3],
                -(b0 * c3 + b1 * c2 + b2 * c1 + b3 * c0)
                - (d0 * e3 + d1 * e2 + d2 * e1 + d3 * e0),
                -f02, -f11, -f20, -g02, -g11, -g20), 4)


_CMULSUB = {2: cmulsub2, 3: cmulsub3, 4: cmulsub4}


def _neg(x, k):
    return tuple(-c for c in x)


# ---------------------------------------------------------------------------
# division helpers for the backward sweep diagonals
# ---------------------------------------------------------------------------


class RealDiag:
    """Precomputed reciprocal of a real diagonal entry."""

    __slots__ = ("recip", "k")

    def __init__(self, u, k):
        self.recip = _mccore.mc_div((1.0,) + (0.0,) * (k - 1), u)
        self.k = k

    def solve(self, acc):
        return _RMUL[self.k](acc, self.recip)


class ComplexDiag:
    """Precomputed Smith parameters for dividing by a complex diagonal.

    For divisor d = dr + i*di with |dr| >= |di|: t = di/dr, den = dr + di*t,
    x/d = ((xr + xi*t) + i*(xi - xr*t)) / den; the swapped branch mirrors
    it.  `den` is stored as a reciprocal so the sweep multiplies.
    """

    __slots__ = ("t", "recip", "swapped", "k")

    def __init__(self, dr, di, k):
        one = (1.0,) + (0.0,) * (k - 1)
        if abs(dr[0]) >= abs(di[0]):
            self.swapped = False
            self.t = _mccore.mc_div(di, dr)
            den = _mccore.mc_add(dr, _mccore.mc_mul(di, self.t))
        else:
            self.swapped = True
            self.t = _mccore.mc_div(dr, di)
            den = _mccore.mc_add(_mccore.mc_mul(dr, self.t), di)
        self.recip = _mccore.mc_div(one, den)
        self.k = k

    def solve(self, acc):
        """acc / diagonal for a flat complex tuple."""
        k = self.k
        xr = acc[:k]
        xi = acc[k:]
        t = self.t
        ms = _RMULSUB[k]
        mulk = _RMUL[k]
        if not self.swapped:
            num_r = ms(xr, _neg(xi, k), t)   # xr + xi*t
            num_i = ms(xi, xr, t)            # xi - xr*t
        else:
            num_r = ms(xi, _neg(xr, k), t)   # xi + xr*t
            num_i = ms(_neg(xr, k), _neg(xi, k), t)  # xi*t - xr
        return mulk(num_r, self.recip) + mulk(num_i, self.recip)
