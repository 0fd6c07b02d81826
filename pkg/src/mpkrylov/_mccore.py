"""Core multi-component floating-point arithmetic on plain Python tuples.

A value is an unevaluated sum of k binary64 components, most significant
first, kept non-overlapping: |c[i+1]| <= ulp(c[i])/2.  k=1 degenerates to
native binary64, k=2/3/4 give ~106/159/212-bit mantissas.

The compiled kernels in ``_kernels`` re-implement the exact same operation
sequences on arrays; any change here must be mirrored there bit-for-bit
(tests/test_twins.py enforces this).
"""

from __future__ import annotations

import math

_SPLITTER = 134217729.0  # 2^27 + 1


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Knuth two-sum: s = fl(a+b), e with a+b = s+e exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a: float, b: float) -> tuple[float, float]:
    """Dekker fast two-sum; requires |a| >= |b| or a == 0."""
    s = a + b
    e = b - (s - a)
    return s, e


def split(a: float) -> tuple[float, float]:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float]:
    """Dekker two-product: p = fl(a*b), e with a*b = p+e exactly.

    Splitting is used unconditionally (no fma on this Python/numba pair),
    so both renditions produce identical bits.  Inputs must be far from
    overflow/underflow thresholds (|a*b| < ~2^996).
    """
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _distill(terms: list[float]) -> list[float]:
    """One exact compression pass: VecSum then zero-eliminating extraction.

    The output is a (usually shorter) list with the same exact sum; no
    mass is ever dropped here, so passes can be iterated safely.
    """
    m = len(terms)
    # VecSum: bottom-up chain of two-sums
    e = [0.0] * m
    s = terms[m - 1]
    for i in range(m - 2, -1, -1):
        s, err = two_sum(terms[i], s)
        e[i + 1] = err
    e[0] = s
    # emit a component whenever the running error separates; drop zeros
    out = []
    eps = e[0]
    for i in range(1, m):
        r, enew = two_sum(eps, e[i])
        if enew != 0.0:
            out.append(r)
            eps = enew
        else:
            eps = r
    out.append(eps)
    return out


def _is_strict(comps: list[float]) -> bool:
    """Non-overlap check: each component must be absorbed by its predecessor."""
    for i in range(len(comps) - 1):
        if comps[i] + comps[i + 1] != comps[i]:
            return False
    return True


def renorm_terms(terms: list[float], k: int) -> tuple[float, ...]:
    """Compress a list of binary64 terms into k non-overlapping components.

    Exact full-length distillation passes are repeated until the strict
    non-overlap invariant holds, then the leading k components are kept
    (the tail is below half an ulp of the last kept component, so the
    truncation is faithful).  Disordered inputs just cost extra passes.
    """
    if len(terms) == 0:
        return (0.0,) * k
    for t in terms:
        if not math.isfinite(t):
            # propagate untrapped: collapse to the non-finite head
            s = 0.0
            for u in terms:
                s += u
            return (s,) + (0.0,) * (k - 1)
    out = _distill(terms)
    passes = 1
    while not _is_strict(out) and passes < 8:
        out = _distill(out)
        passes += 1
    # truncate/pad to k and normalize -0.0 to +0.0 so renditions agree bitwise
    res = [0.0] * k
    for i in range(min(k, len(out))):
        res[i] = out[i] + 0.0
    return tuple(res)


def renormalize(raw, k: int) -> tuple[float, ...]:
    """Renormalize an arbitrary list of finite binary64 values to k components."""
    terms = sorted((float(t) for t in raw), key=abs, reverse=True)
    return renorm_terms(terms, k)


def mc_neg(x):
    return tuple(-c for c in x)


def mc_add(x, y):
    """Sum of two k-component values, renormalized."""
    k = len(x)
    if k == 1:
        return (x[0] + y[0],)
    # merge the two magnitude-sorted component lists, largest first
    buf = [0.0] * (2 * k)
    i = 0
    j = 0
    t = 0
    while i < k and j < k:
        if abs(x[i]) >= abs(y[j]):
            buf[t] = x[i]
            i += 1
        else:
            buf[t] = y[j]
            j += 1
        t += 1
    while i < k:
        buf[t] = x[i]
        i += 1
        t += 1
    while j < k:
        buf[t] = y[j]
        j += 1
        t += 1
    return renorm_terms(buf, k)


def mc_sub(x, y):
    return mc_add(x, mc_neg(y))


def mc_mul(x, y):
    """Product of two k-component values, renormalized.

    Partial products are gathered by level l = i + j; levels below k-1
    carry their two-prod error terms into the next level, level k-1 is
    taken as plain products (its error is below the target ulp).
    """
    k = len(x)
    if k == 1:
        return (x[0] * y[0],)
    terms: list[float] = []
    carry: list[float] = []  # error terms belonging to the next level
    for lvl in range(k):
        nxt: list[float] = []
        if lvl < k - 1:
            for i in range(lvl + 1):
                p, e = two_prod(x[i], y[lvl - i])
                terms.append(p)
                nxt.append(e)
        else:
            for i in range(lvl + 1):
                terms.append(x[i] * y[lvl - i])
        terms.extend(carry)
        carry = nxt
    return renorm_terms(terms, k)


def mc_mul_f64(x, a: float):
    """Product of a k-component value and a plain binary64 scalar."""
    k = len(x)
    if k == 1:
        return (x[0] * a,)
    terms = []
    carry = []
    for lvl in range(k):
        if lvl < k - 1:
            p, e = two_prod(x[lvl], a)
            terms.append(p)
            terms.extend(carry)
            carry = [e]
        else:
            terms.append(x[lvl] * a)
            terms.extend(carry)
            carry = []
    return renorm_terms(terms, k)


def mc_is_zero(x) -> bool:
    for c in x:
        if c != 0.0:
            return False
    return True


def _div_by_zero(x0: float, y0: float) -> float:
    if x0 == 0.0:
        return math.nan
    return math.copysign(math.inf, x0) * math.copysign(1.0, y0)


def mc_div(x, y):
    """Quotient via Newton-refined reciprocal seeded by binary64 division."""
    k = len(x)
    if k == 1:
        if y[0] == 0.0:
            return (_div_by_zero(x[0], y[0]),)
        return (x[0] / y[0],)
    if y[0] == 0.0 and mc_is_zero(y):
        return (_div_by_zero(x[0], y[0]),) + (0.0,) * (k - 1)
    one = (1.0,) + (0.0,) * (k - 1)
    w = (1.0 / y[0],) + (0.0,) * (k - 1)
    for _ in range(1 if k == 2 else 2):
        w = mc_add(w, mc_mul(w, mc_sub(one, mc_mul(y, w))))
    q = mc_mul(x, w)
    r = mc_sub(x, mc_mul(q, y))
    return mc_add(q, mc_mul(r, w))


def mc_scale_pow2(x, f: float):
    """Exact scaling by a power of two (keeps non-overlap invariant)."""
    return tuple(c * f for c in x)


def mc_sqrt(x):
    """Square root via Newton on the reciprocal square root.

    Raises ValueError for negative input; mc_sqrt(0) = 0.
    """
    k = len(x)
    if x[0] < 0.0:
        raise ValueError("mc_sqrt: negative operand")
    if x[0] == 0.0 and mc_is_zero(x):
        return (0.0,) * k
    if k == 1:
        return (math.sqrt(x[0]),)
    z = (1.0 / math.sqrt(x[0]),) + (0.0,) * (k - 1)
    one = (1.0,) + (0.0,) * (k - 1)
    for _ in range(1 if k == 2 else 2):
        # z += z * (1 - x*z*z) / 2
        t = mc_sub(one, mc_mul(x, mc_mul(z, z)))
        z = mc_add(z, mc_scale_pow2(mc_mul(z, t), 0.5))
    r = mc_mul(x, z)
    # r += (x - r*r) * (z/2)
    t = mc_sub(x, mc_mul(r, r))
    return mc_add(r, mc_mul(t, mc_scale_pow2(z, 0.5)))


def mc_convert(x, k2: int):
    """Exact promotion / faithful demotion between component counts."""
    k = len(x)
    if k2 == k:
        return tuple(x)
    if k2 > k:
        return tuple(x) + (0.0,) * (k2 - k)
    return renorm_terms(list(x), k2)


def mc_to_float(x) -> float:
    return x[0]


def mc_cmp(x, y) -> int:
    """Sign of x - y: -1, 0 or +1."""
    d = mc_sub(x, y)
    if d[0] > 0.0:
        return 1
    if d[0] < 0.0:
        return -1
    return 0


def mc_abs(x):
    return mc_neg(x) if x[0] < 0.0 else tuple(x)


def mc_is_finite(x) -> bool:
    return all(math.isfinite(c) for c in x)


# ---------------------------------------------------------------------------
# Complex pairs: (re_tuple, im_tuple), both with the same k.
# ---------------------------------------------------------------------------


def cx_add(a, b):
    return mc_add(a[0], b[0]), mc_add(a[1], b[1])


def cx_sub(a, b):
    return mc_sub(a[0], b[0]), mc_sub(a[1], b[1])


def cx_neg(a):
    return mc_neg(a[0]), mc_neg(a[1])


def cx_conj(a):
    return tuple(a[0]), mc_neg(a[1])


def cx_mul(a, b):
    re = mc_sub(mc_mul(a[0], b[0]), mc_mul(a[1], b[1]))
    im = mc_add(mc_mul(a[0], b[1]), mc_mul(a[1], b[0]))
    return re, im


def cx_div(a, b):
    """Smith's scaled division, safe against intermediate overflow."""
    br, bi = b
    if abs(br[0]) >= abs(bi[0]):
        if mc_is_zero(br) and mc_is_zero(bi):
            k = len(br)
            return (
                (_div_by_zero(a[0][0], 0.0),) + (0.0,) * (k - 1),
                (_div_by_zero(a[1][0], 0.0),) + (0.0,) * (k - 1),
            )
        t = mc_div(bi, br)
        d = mc_add(br, mc_mul(bi, t))
        re = mc_div(mc_add(a[0], mc_mul(a[1], t)), d)
        im = mc_div(mc_sub(a[1], mc_mul(a[0], t)), d)
    else:
        t = mc_div(br, bi)
        d = mc_add(mc_mul(br, t), bi)
        re = mc_div(mc_add(mc_mul(a[0], t), a[1]), d)
        im = mc_div(mc_sub(mc_mul(a[1], t), a[0]), d)
    return re, im


def cx_abs2(a):
    return mc_add(mc_mul(a[0], a[0]), mc_mul(a[1], a[1]))


def cx_sqrt(a):
    """Principal complex square root: re >= 0, and im >= 0 when re == 0."""
    re, im = a
    k = len(re)
    zero = (0.0,) * k
    if mc_is_zero(re) and mc_is_zero(im):
        return zero, zero
    m = mc_sqrt(cx_abs2(a))
    if re[0] >= 0.0:
        # u = sqrt((|z| + re)/2), v = im / (2u)
        u = mc_sqrt(mc_scale_pow2(mc_add(m, re), 0.5))
        v = mc_div(im, mc_scale_pow2(u, 2.0))
        return u, v
    v = mc_sqrt(mc_scale_pow2(mc_sub(m, re), 0.5))
    if im[0] < 0.0:
        v = mc_neg(v)
    if mc_is_zero(im):
        # negative real axis: principal value is +i*sqrt(-re)
        return zero, v
    u = mc_div(im, mc_scale_pow2(v, 2.0))
    return u, v


def cx_is_zero(a) -> bool:
    return mc_is_zero(a[0]) and mc_is_zero(a[1])


def cx_is_finite(a) -> bool:
    return mc_is_finite(a[0]) and mc_is_finite(a[1])
