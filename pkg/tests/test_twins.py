"""Bit-level agreement between the scalar reference and the compiled kernels,
and accuracy/invariant checks for the fused sweep primitives."""

import math

import mpmath
import numpy as np
import pytest

from mpkrylov import Precision
from mpkrylov import _kernels as K
from mpkrylov import _mccore, _mcfast

from conftest import mc_to_mpf, rand_mc, ulp_ok

mpmath.mp.prec = 500


def _batch(rng, k, n, spread=True):
    scale = lambda: 10.0 ** rng.integers(-6, 7) if spread else 1.0
    return np.array([rand_mc(rng, k, scale()) for _ in range(n)])


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_kernel_add_mul_bitwise(k):
    rng = np.random.default_rng(100 + k)
    a = _batch(rng, k, 800)
    b = _batch(rng, k, 800)
    out = np.empty_like(a)
    K.ew_add(a, b, out, k)
    ref = np.array([_mccore.mc_add(tuple(a[i]), tuple(b[i])) for i in range(len(a))])
    assert np.array_equal(out, ref)
    K.ew_mul(a, b, out, k)
    ref = np.array([_mccore.mc_mul(tuple(a[i]), tuple(b[i])) for i in range(len(a))])
    assert np.array_equal(out, ref)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_kernel_renorm_bitwise(k):
    rng = np.random.default_rng(200 + k)
    raw = rng.uniform(-1, 1, size=(500, 7)) * 10.0 ** rng.integers(-8, 9, size=(500, 7))
    out = np.empty((500, k))
    K.ew_renorm(raw, out, k)
    ref = np.array([_mccore.renorm_terms(list(r), k) for r in raw])
    assert np.array_equal(out, ref)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_kernel_dot_matches_scalar_loop(k):
    rng = np.random.default_rng(300 + k)
    n = 120
    x = _batch(rng, k, n, spread=False)
    y = _batch(rng, k, n, spread=False)
    acc = K.dot_real(x, y, k)
    ref = (0.0,) * k
    for i in range(n):
        ref = _mccore.mc_add(ref, _mccore.mc_mul(tuple(x[i]), tuple(y[i])))
    assert tuple(acc[:k]) == ref


@pytest.mark.parametrize("k", [2, 3, 4])
def test_kernel_hdot_matches_scalar_loop(k):
    rng = np.random.default_rng(400 + k)
    n = 80
    xr, xi, yr, yi = (_batch(rng, k, n, spread=False) for _ in range(4))
    accr, acci = K.hdot_cx(xr, xi, yr, yi, k)
    rr, ri = (0.0,) * k, (0.0,) * k
    for i in range(n):
        x = (tuple(xr[i]), tuple(xi[i]))
        y = (tuple(yr[i]), tuple(yi[i]))
        pr, pi = _mccore.cx_mul(_mccore.cx_conj(x), y)
        rr = _mccore.mc_add(rr, pr)
        ri = _mccore.mc_add(ri, pi)
    assert tuple(accr[:k]) == rr and tuple(acci[:k]) == ri


# -- fused sweep primitives --------------------------------------------------


@pytest.mark.parametrize("k", [2, 3, 4])
def test_fused_real_mulsub_accuracy(k):
    rng = np.random.default_rng(500 + k)
    ms = _mcfast._RMULSUB[k]
    bound = mpmath.mpf(2) ** (-53 * k + 6)
    for _ in range(1500):
        a = rand_mc(rng, k, 10.0 ** rng.integers(-4, 5))
        b = rand_mc(rng, k, 10.0 ** rng.integers(-4, 5))
        c = rand_mc(rng, k, 10.0 ** rng.integers(-4, 5))
        got = ms(a, b, c)
        assert ulp_ok(got)
        exact = mc_to_mpf(a, mpmath) - mc_to_mpf(b, mpmath) * mc_to_mpf(c, mpmath)
        scale = max(abs(mc_to_mpf(a, mpmath)),
                    abs(mc_to_mpf(b, mpmath) * mc_to_mpf(c, mpmath)),
                    mpmath.mpf(1e-280))
        assert abs(mc_to_mpf(got, mpmath) - exact) <= bound * scale


@pytest.mark.parametrize("k", [2, 3, 4])
def test_fused_complex_mulsub_accuracy(k):
    rng = np.random.default_rng(600 + k)
    cms = _mcfast._CMULSUB[k]
    bound = mpmath.mpf(2) ** (-53 * k + 6)
    for _ in range(800):
        fa = tuple(rand_mc(rng, k)) + tuple(rand_mc(rng, k))
        fb = tuple(rand_mc(rng, k)) + tuple(rand_mc(rng, k))
        fc = tuple(rand_mc(rng, k)) + tuple(rand_mc(rng, k))
        got = cms(fa, fb, fc)
        assert ulp_ok(got[:k]) and ulp_ok(got[k:])
        za = mpmath.mpc(mc_to_mpf(fa[:k], mpmath), mc_to_mpf(fa[k:], mpmath))
        zb = mpmath.mpc(mc_to_mpf(fb[:k], mpmath), mc_to_mpf(fb[k:], mpmath))
        zc = mpmath.mpc(mc_to_mpf(fc[:k], mpmath), mc_to_mpf(fc[k:], mpmath))
        zg = mpmath.mpc(mc_to_mpf(got[:k], mpmath), mc_to_mpf(got[k:], mpmath))
        exact = za - zb * zc
        scale = max(abs(za), abs(zb * zc), mpmath.mpf(1e-280))
        assert abs(zg - exact) <= bound * scale


@pytest.mark.parametrize("k", [2, 3, 4])
def test_diag_solvers(k):
    rng = np.random.default_rng(700 + k)
    bound = mpmath.mpf(2) ** (-53 * k + 8)
    for _ in range(300):
        u = rand_mc(rng, k, 10.0 ** rng.integers(-3, 4))
        rd = _mcfast.RealDiag(u, k)
        x = rand_mc(rng, k)
        got = rd.solve(x)
        exact = mc_to_mpf(x, mpmath) / mc_to_mpf(u, mpmath)
        assert abs(mc_to_mpf(got, mpmath) - exact) <= bound * abs(exact)

        dr, di = rand_mc(rng, k), rand_mc(rng, k)
        cd = _mcfast.ComplexDiag(dr, di, k)
        fx = tuple(rand_mc(rng, k)) + tuple(rand_mc(rng, k))
        got = cd.solve(fx)
        zx = mpmath.mpc(mc_to_mpf(fx[:k], mpmath), mc_to_mpf(fx[k:], mpmath))
        zd = mpmath.mpc(mc_to_mpf(dr, mpmath), mc_to_mpf(di, mpmath))
        zg = mpmath.mpc(mc_to_mpf(got[:k], mpmath), mc_to_mpf(got[k:], mpmath))
        exact = zx / zd
        assert abs(zg - exact) <= bound * max(abs(exact), mpmath.mpf(1e-280))


def test_fused_identity_cases():
    """Multiplying by exact one / subtracting exact zero stays bitwise."""
    rng = np.random.default_rng(4)
    for k in (2, 3, 4):
        one = (1.0,) + (0.0,) * (k - 1)
        zero = (0.0,) * k
        for _ in range(200):
            a = rand_mc(rng, k)
            assert _mcfast._RMUL[k](a, one) == tuple(a)
            assert _mcfast._RMULSUB[k](a, zero, a) == tuple(a)
