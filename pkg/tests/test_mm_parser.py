"""Matrix Market parsing: formats, symmetry expansion, errors, scipy oracle."""

import io

import numpy as np
import pytest
import scipy.io
import scipy.sparse

from mpkrylov import MatrixMarketError, Precision, coo_to_csr, parse_matrix_market

from conftest import random_dd_coo


def test_minimal_real_general():
    coo = parse_matrix_market(
        "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 3.5\n"
    )
    assert coo.n_rows == coo.n_cols == 1
    assert coo.nnz == 1
    assert coo.row[0] == 0 and coo.col[0] == 0 and coo.val_re[0] == 3.5
    assert coo.field == "real"


def test_symmetric_stored_once():
    coo = parse_matrix_market(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "% comment line\n"
        "2 2 2\n1 1 2.0\n2 1 -1.0\n"
    )
    assert coo.nnz == 2
    assert coo.symmetry == "symmetric"


def test_pattern_entries_get_one():
    coo = parse_matrix_market(
        "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n2 2\n"
    )
    assert list(coo.val_re) == [1.0, 1.0]


def test_integer_field():
    coo = parse_matrix_market(
        "%%MatrixMarket matrix coordinate integer general\n2 2 1\n2 1 -7\n"
    )
    assert coo.val_re[0] == -7.0 and coo.field == "real"


def test_complex_entries():
    coo = parse_matrix_market(
        "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n"
        "1 1 2.0 0.0\n2 1 1.5 -0.5\n"
    )
    assert coo.field == "complex"
    assert coo.val_im[1] == -0.5


@pytest.mark.parametrize("text,lineno", [
    ("%MatrixMarket matrix coordinate real general\n1 1 0\n", 1),
    ("%%MatrixMarket matrix array real general\n1 1\n1.0\n", 1),
    ("%%MatrixMarket matrix coordinate real diagonal\n1 1 0\n", 1),
    ("%%MatrixMarket matrix coordinate real general\nnot a size line\n", 2),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 bad\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", 3),
    ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0\n", 3),
])
def test_parse_errors_carry_line_numbers(text, lineno):
    with pytest.raises(MatrixMarketError) as exc:
        parse_matrix_market(text)
    assert exc.value.line == lineno


def test_too_many_entries_rejected():
    with pytest.raises(MatrixMarketError):
        parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n1 1 2.0\n"
        )


def _mm_text(dense, symmetry, complex_field):
    """Write a Matrix Market coordinate file for the given dense array."""
    n = dense.shape[0]
    lines = []
    ent = []
    for i in range(n):
        rng_j = range(i + 1) if symmetry != "general" else range(n)
        for j in rng_j:
            v = dense[i, j]
            if v == 0:
                continue
            if complex_field:
                ent.append(f"{i+1} {j+1} {v.real!r} {v.imag!r}")
            else:
                ent.append(f"{i+1} {j+1} {float(v.real)!r}")
    fieldname = "complex" if complex_field else "real"
    lines.append(f"%%MatrixMarket matrix coordinate {fieldname} {symmetry}")
    lines.append(f"{n} {n} {len(ent)}")
    lines.extend(ent)
    return "\n".join(lines) + "\n"


@pytest.mark.parametrize("symmetry,complex_field", [
    ("general", False),
    ("general", True),
    ("symmetric", False),
    ("symmetric", True),
    ("hermitian", True),
    ("skew-symmetric", False),
])
def test_against_scipy_oracle(symmetry, complex_field):
    rng = np.random.default_rng(hash((symmetry, complex_field)) % 2**32)
    n = 12
    dense = rng.uniform(-1, 1, (n, n)) + (
        1j * rng.uniform(-1, 1, (n, n)) if complex_field else 0
    )
    dense[rng.random((n, n)) < 0.6] = 0
    if symmetry == "symmetric":
        dense = np.tril(dense) + np.tril(dense, -1).T
    elif symmetry == "hermitian":
        dense = np.tril(dense)
        np.fill_diagonal(dense, dense.diagonal().real)
        dense = dense + np.tril(dense, -1).conj().T
    elif symmetry == "skew-symmetric":
        dense = np.tril(dense, -1)
        dense = dense - dense.T
    text = _mm_text(dense, symmetry, complex_field)

    csr = coo_to_csr(parse_matrix_market(text), Precision.F64)
    ours = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for p in range(csr.row_ptr[i], csr.row_ptr[i + 1]):
            ours[i, csr.col_idx[p]] = csr.val_re[p, 0] + 1j * (
                csr.val_im[p, 0] if csr.val_im is not None else 0.0
            )
    theirs = scipy.io.mmread(io.StringIO(text)).toarray().astype(complex)
    assert np.array_equal(ours, theirs)
    assert np.array_equal(ours, dense.astype(complex))


def test_duplicate_entries_summed():
    text = ("%%MatrixMarket matrix coordinate real general\n"
            "2 2 3\n1 1 1.0\n1 1 2.0\n2 2 5.0\n")
    csr = coo_to_csr(parse_matrix_market(text), Precision.DD)
    assert csr.nnz == 2
    assert csr.val_re[0, 0] == 3.0


def test_symmetric_expansion_rule():
    text = ("%%MatrixMarket matrix coordinate real symmetric\n"
            "2 2 2\n1 1 2.0\n2 1 -1.0\n")
    csr = coo_to_csr(parse_matrix_market(text), Precision.F64)
    assert csr.nnz == 3
    dense = np.zeros((2, 2))
    for i in range(2):
        for p in range(csr.row_ptr[i], csr.row_ptr[i + 1]):
            dense[i, csr.col_idx[p]] = csr.val_re[p, 0]
    assert np.array_equal(dense, np.array([[2.0, -1.0], [-1.0, 0.0]]))


def test_expansion_transpose_property():
    """Expanded symmetric/hermitian storage equals its (conjugate) transpose."""
    rng = np.random.default_rng(8)
    for symmetry, cx in (("symmetric", False), ("hermitian", True),
                         ("skew-symmetric", False)):
        n = 10
        dense = rng.uniform(-1, 1, (n, n)) + (1j * rng.uniform(-1, 1, (n, n)) if cx else 0)
        dense[rng.random((n, n)) < 0.5] = 0
        dense = np.tril(dense, -1)
        if symmetry == "symmetric":
            full = dense + dense.T + np.diag(rng.uniform(1, 2, n))
        elif symmetry == "hermitian":
            full = dense + dense.conj().T + np.diag(rng.uniform(1, 2, n))
        else:
            full = dense - dense.T
        csr = coo_to_csr(parse_matrix_market(_mm_text(full, symmetry, cx)), Precision.F64)
        got = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for p in range(csr.row_ptr[i], csr.row_ptr[i + 1]):
                got[i, csr.col_idx[p]] = csr.val_re[p, 0] + 1j * (
                    csr.val_im[p, 0] if csr.val_im is not None else 0.0
                )
        if symmetry == "hermitian":
            assert np.array_equal(got, got.conj().T)
        elif symmetry == "symmetric":
            assert np.array_equal(got, got.T)
        else:
            assert np.array_equal(got, -got.T)


def test_non_square_rejected():
    text = "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1.0\n"
    with pytest.raises(ValueError, match="square"):
        coo_to_csr(parse_matrix_market(text), Precision.DD)


def test_csr_structural_invariants():
    rng = np.random.default_rng(123)
    coo, _ = random_dd_coo(rng, 25, density=0.3)
    for prec in (Precision.F64, Precision.DD, Precision.QD):
        csr = coo_to_csr(coo, prec)
        assert csr.row_ptr[0] == 0 and csr.row_ptr[-1] == csr.nnz
        assert np.all(np.diff(csr.row_ptr) >= 0)
        for i in range(csr.n):
            cols = csr.col_idx[csr.row_ptr[i]:csr.row_ptr[i + 1]]
            assert np.all(np.diff(cols) > 0)
        assert np.all(csr.diag_ptr >= 0)  # diagonally dominant has full diagonal
        # binary64 promotes exactly: tails all zero
        if prec.k > 1:
            assert not np.any(csr.val_re[:, 1:])
