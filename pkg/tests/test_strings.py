"""Decimal string conversion round-trips at the guaranteed digit counts."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpkrylov import MCFloat, Precision

from conftest import mc_to_mpf, rand_mc

mpmath.mp.prec = 400

WIDE = [Precision.DD, Precision.TD, Precision.QD]


def test_digit_counts():
    # ceil(mantissa_bits * 0.302 + 2)
    assert Precision.F64.decimal_digits == 19
    assert Precision.DD.decimal_digits == 35
    assert Precision.TD.decimal_digits == 51
    assert Precision.QD.decimal_digits == 67


@pytest.mark.parametrize("prec", [Precision.F64] + WIDE)
def test_roundtrip_random(prec):
    rng = np.random.default_rng(60 + prec.k)
    for _ in range(200):
        x = MCFloat(rand_mc(rng, prec.k, scale=10.0 ** rng.integers(-20, 21)))
        s = x.to_string()
        y = MCFloat.from_string(s, prec)
        assert y == x, (s, x.components, y.components)


def test_parse_correctly_rounded():
    x = MCFloat.from_string("0.1", Precision.QD)
    exact = mpmath.mpf(1) / 10
    err = abs(mc_to_mpf(x.components, mpmath) - exact)
    assert err <= mpmath.mpf(2) ** -212 * exact


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        MCFloat.from_string("not-a-number", Precision.DD)


@given(st.floats(allow_nan=False, allow_infinity=False,
                 min_value=-1e200, max_value=1e200))
@settings(max_examples=200)
def test_roundtrip_float64_embedding(v):
    for prec in (Precision.DD, Precision.QD):
        x = MCFloat.from_float(v, prec)
        assert MCFloat.from_string(x.to_string(), prec) == x


def test_zero_and_integers():
    for prec in WIDE:
        assert MCFloat.from_string("0", prec).is_zero()
        assert MCFloat.from_string("42", prec) == MCFloat.from_float(42.0, prec)
