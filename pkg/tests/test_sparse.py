"""SpMV, adjoint, mixed-precision SpMV and the dense vector kernels."""

import numpy as np
import pytest

from mpkrylov import (
    DenseVector,
    MCComplex,
    MCFloat,
    Precision,
    coo_to_csr,
    dot,
    hdot,
    norm2,
    axpy,
    scale,
    spmv,
    spmv_adjoint,
    spmv_adjoint_mixed,
    spmv_mixed,
    vec_sub,
)
from mpkrylov import CooMatrix
from mpkrylov import _mccore

from conftest import rand_mc, random_dd_csr


def identity_csr(n, prec, field="real"):
    idx = np.arange(n, dtype=np.int64)
    coo = CooMatrix(n, n, idx, idx, np.ones(n),
                    np.zeros(n) if field == "complex" else None, "general")
    return coo_to_csr(coo, prec)


def random_vec(rng, n, prec, field="real"):
    re = np.array([rand_mc(rng, prec.k) for _ in range(n)])
    im = np.array([rand_mc(rng, prec.k) for _ in range(n)]) if field == "complex" else None
    return DenseVector(re, im, prec)


@pytest.mark.parametrize("prec", [Precision.F64, Precision.DD, Precision.QD])
@pytest.mark.parametrize("field", ["real", "complex"])
def test_identity_spmv_bitwise(prec, field):
    rng = np.random.default_rng(1)
    A = identity_csr(9, prec, field)
    x = random_vec(rng, 9, prec, field)
    y = spmv(A, x)
    assert np.array_equal(y.re, x.re)
    if field == "complex":
        assert np.array_equal(y.im, x.im)
    ya = spmv_adjoint(A, x)
    assert np.array_equal(ya.re, x.re)


def test_small_exact_spmv():
    coo = CooMatrix(2, 2, np.array([0, 0, 1, 1], dtype=np.int64),
                    np.array([0, 1, 0, 1], dtype=np.int64),
                    np.array([1.0, 2.0, 3.0, 4.0]), None, "general")
    A = coo_to_csr(coo, Precision.DD)
    x = DenseVector.from_float64(np.array([1.0, 1.0]), Precision.DD)
    y = spmv(A, x)
    assert y.re[0, 0] == 3.0 and y.re[1, 0] == 7.0


@pytest.mark.parametrize("prec", [Precision.DD, Precision.QD])
def test_spmv_matches_scalar_row_dot_bitwise(prec):
    """Same accumulation order as a scalar-op row-dot oracle, bit for bit."""
    rng = np.random.default_rng(42)
    A, dense = random_dd_csr(rng, 50, prec, density=0.1)
    x = random_vec(rng, 50, prec)
    y = spmv(A, x)
    for i in range(A.n):
        acc = (0.0,) * prec.k
        for p in range(A.row_ptr[i], A.row_ptr[i + 1]):
            j = A.col_idx[p]
            acc = _mccore.mc_add(
                acc, _mccore.mc_mul(tuple(A.val_re[p]), tuple(x.re[j]))
            )
        assert tuple(y.re[i]) == acc


def test_spmv_binary64_matches_numpy_bitwise():
    """k=1 CSR row dots equal the same-order scalar accumulation."""
    rng = np.random.default_rng(11)
    A, dense = random_dd_csr(rng, 40, Precision.F64, density=0.15)
    xs = rng.uniform(-1, 1, 40)
    x = DenseVector.from_float64(xs, Precision.F64)
    y = spmv(A, x)
    for i in range(A.n):
        acc = 0.0
        for p in range(A.row_ptr[i], A.row_ptr[i + 1]):
            acc += A.val_re[p, 0] * xs[A.col_idx[p]]
        assert y.re[i, 0] == acc


def test_adjoint_equals_transpose_spmv_real():
    rng = np.random.default_rng(12)
    A, dense = random_dd_csr(rng, 30, Precision.F64, density=0.2)
    xs = rng.uniform(-1, 1, 30)
    x = DenseVector.from_float64(xs, Precision.F64)
    ya = spmv_adjoint(A, x)
    # scatter order equals the transpose's gather order entry-for-entry
    ref = np.zeros(30)
    for i in range(30):
        for p in range(A.row_ptr[i], A.row_ptr[i + 1]):
            ref[A.col_idx[p]] += A.val_re[p, 0] * xs[i]
    assert np.array_equal(ya.re[:, 0], ref)


@pytest.mark.parametrize("prec", [Precision.DD, Precision.QD])
def test_adjoint_identity_complex(prec):
    """<A^H x, y> = <x, A y> within a few ulps over random systems."""
    rng = np.random.default_rng(13)
    for _ in range(20):
        n = int(rng.integers(5, 30))
        A, dense = random_dd_csr(rng, n, prec, density=0.3, complex_field=True)
        x = random_vec(rng, n, prec, "complex")
        y = random_vec(rng, n, prec, "complex")
        lhs = hdot(spmv_adjoint(A, x), y)
        rhs = hdot(x, spmv(A, y))
        diff = abs(lhs - rhs).to_float()
        scale_f = (
            np.sqrt((np.abs(dense) ** 2).sum())
            * norm2(x).to_float() * norm2(y).to_float()
        )
        assert diff <= 16 * 2.0 ** (-prec.mantissa_bits) * scale_f


@pytest.mark.parametrize("field", ["real", "complex"])
@pytest.mark.parametrize("prec", [Precision.DD, Precision.TD, Precision.QD])
def test_mixed_equals_promoted_bitwise(field, prec):
    rng = np.random.default_rng(14)
    A64, _ = random_dd_csr(rng, 35, Precision.F64, density=0.2,
                           complex_field=(field == "complex"))
    Ak = A64.promoted(prec)
    x = random_vec(rng, 35, prec, field)
    y_mixed = spmv_mixed(A64, x)
    y_full = spmv(Ak, x)
    assert np.array_equal(y_mixed.re, y_full.re)
    if field == "complex":
        assert np.array_equal(y_mixed.im, y_full.im)
    za = spmv_adjoint_mixed(A64, x)
    zf = spmv_adjoint(Ak, x)
    assert np.array_equal(za.re, zf.re)
    if field == "complex":
        assert np.array_equal(za.im, zf.im)


def test_spmv_deterministic_repeat():
    rng = np.random.default_rng(15)
    A, _ = random_dd_csr(rng, 60, Precision.DD, density=0.1)
    x = random_vec(rng, 60, Precision.DD)
    y1 = spmv(A, x)
    y2 = spmv(A, x)
    assert np.array_equal(y1.re, y2.re)


def test_parallel_spmv_matches_serial():
    rng = np.random.default_rng(16)
    A, _ = random_dd_csr(rng, 50, Precision.DD, density=0.2)
    x = random_vec(rng, 50, Precision.DD)
    y_ser = spmv(A, x)
    y_par = spmv(A, x, parallel=True)
    # row-partitioned gather keeps per-row order; results agree to the ulp
    assert np.allclose(y_par.re[:, 0], y_ser.re[:, 0], rtol=1e-15)


def test_dimension_and_field_mismatch():
    rng = np.random.default_rng(17)
    A, _ = random_dd_csr(rng, 10, Precision.DD)
    x = random_vec(rng, 11, Precision.DD)
    with pytest.raises(ValueError, match="dimension"):
        spmv(A, x)
    xc = random_vec(rng, 10, Precision.DD, "complex")
    with pytest.raises(ValueError, match="field"):
        spmv(A, xc)
    with pytest.raises(ValueError, match="binary64"):
        spmv_mixed(A, random_vec(rng, 10, Precision.DD))


# -- vector kernels ---------------------------------------------------------


def test_hdot_examples():
    e1 = DenseVector.from_float64(np.array([1.0, 0.0, 0.0]), Precision.DD)
    assert hdot(e1, e1) == MCFloat.from_float(1.0, Precision.DD)


def test_norm2_345():
    v = DenseVector.from_float64(np.array([3.0, 4.0]), Precision.QD)
    assert norm2(v) == MCFloat.from_float(5.0, Precision.QD)


def test_hdot_conjugate_linearity():
    rng = np.random.default_rng(18)
    prec = Precision.DD
    n = 12
    x = random_vec(rng, n, prec, "complex")
    y = random_vec(rng, n, prec, "complex")
    i_unit = MCComplex.from_complex(1j, prec)
    ix = scale(i_unit, x)
    lhs = hdot(ix, y)
    rhs = MCComplex.from_complex(-1j, prec) * hdot(x, y)
    err = abs(lhs - rhs).to_float()
    assert err <= 4 * 2.0 ** (-prec.mantissa_bits) * abs(hdot(x, y)).to_float()


def test_dot_vs_hdot_real():
    rng = np.random.default_rng(19)
    x = random_vec(rng, 9, Precision.TD)
    y = random_vec(rng, 9, Precision.TD)
    assert dot(x, y) == hdot(x, y)


def test_axpy_and_sub():
    rng = np.random.default_rng(20)
    prec = Precision.DD
    x = random_vec(rng, 15, prec)
    y = random_vec(rng, 15, prec)
    alpha = MCFloat.from_float(2.0, prec)
    z = axpy(alpha, x, y)
    for i in range(15):
        ref = _mccore.mc_add(
            tuple(y.re[i]), _mccore.mc_mul(alpha.components, tuple(x.re[i]))
        )
        assert tuple(z.re[i]) == ref
    w = vec_sub(z, y)
    assert w.re.shape == z.re.shape
