"""Multi-component real and complex scalars: binary64, DD, TD, QD.

An ``MCFloat`` is an unevaluated sum of k binary64 components (most
significant first) kept in renormalized form, giving nominal mantissas of
53/106/159/212 bits for k = 1/2/3/4.  ``MCComplex`` pairs two MCFloats.
Scalars are immutable; all operations are pure functions, safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from enum import Enum
from fractions import Fraction

from . import _mccore
from ._mccore import renormalize, two_prod, two_sum

__all__ = [
    "Precision",
    "MCFloat",
    "MCComplex",
    "two_sum",
    "two_prod",
    "renormalize",
]


class Precision(Enum):
    """Supported precision ladder: component count and nominal mantissa bits."""

    F64 = ("f64", 1, 53)
    DD = ("dd", 2, 106)
    TD = ("td", 3, 159)
    QD = ("qd", 4, 212)

    def __init__(self, label: str, k: int, mantissa_bits: int):
        self.label = label
        self.k = k
        self.mantissa_bits = mantissa_bits

    @property
    def eps(self) -> float:
        """Nominal unit roundoff, 2^(-mantissa_bits)."""
        return 2.0 ** (-self.mantissa_bits)

    @property
    def decimal_digits(self) -> int:
        """Significant decimal digits that guarantee a string round-trip."""
        return math.ceil(self.mantissa_bits * 0.302 + 2)

    @classmethod
    def from_label(cls, label: str) -> "Precision":
        for p in cls:
            if p.label == label.lower():
                return p
        raise ValueError(f"unknown precision {label!r}; expected f64/dd/td/qd")

    @classmethod
    def from_k(cls, k: int) -> "Precision":
        for p in cls:
            if p.k == k:
                return p
        raise ValueError(f"no precision with {k} components")


def _coerce(other, k: int):
    if isinstance(other, MCFloat):
        if other.k != k:
            raise ValueError(f"component count mismatch: {other.k} vs {k}")
        return other.components
    if isinstance(other, (int, float)):
        return (float(other),) + (0.0,) * (k - 1)
    return None


@dataclass(frozen=True)
class MCFloat:
    """Immutable multi-component real scalar."""

    components: tuple

    def __post_init__(self):
        comps = self.components
        if not (isinstance(comps, tuple) and all(type(c) is float for c in comps)):
            object.__setattr__(
                self, "components", tuple(float(c) for c in comps)
            )

    # -- constructors -------------------------------------------------

    @classmethod
    def from_float(cls, value: float, precision: Precision) -> "MCFloat":
        """Exact embedding of a binary64 value."""
        return cls((float(value),) + (0.0,) * (precision.k - 1))

    @classmethod
    def from_components(cls, comps, renorm: bool = True) -> "MCFloat":
        comps = [float(c) for c in comps]
        if renorm:
            return cls(renormalize(comps, len(comps)))
        return cls(tuple(comps))

    @classmethod
    def from_fraction(cls, frac: Fraction, precision: Precision) -> "MCFloat":
        comps = []
        rem = frac
        for _ in range(precision.k):
            c = float(rem)
            comps.append(c)
            if not math.isfinite(c):
                break
            rem = rem - Fraction(c)
        comps += [0.0] * (precision.k - len(comps))
        return cls(tuple(comps))

    @classmethod
    def from_string(cls, text: str, precision: Precision) -> "MCFloat":
        """Parse a decimal string, correctly rounded per component."""
        try:
            frac = Fraction(Decimal(text.strip()))
        except Exception as exc:
            raise ValueError(f"cannot parse {text!r} as a decimal number") from exc
        return cls.from_fraction(frac, precision)

    @classmethod
    def zero(cls, precision: Precision) -> "MCFloat":
        return cls((0.0,) * precision.k)

    # -- introspection ------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def precision(self) -> Precision:
        return Precision.from_k(self.k)

    def to_float(self) -> float:
        """Demote to binary64 (leading component of the renormalized form)."""
        return self.components[0]

    def to_fraction(self) -> Fraction:
        f = Fraction(0)
        for c in self.components:
            f += Fraction(c)
        return f

    def to_string(self, digits: int | None = None) -> str:
        """Decimal string that parses back to the exact same value.

        Every binary64 sum has a finite decimal expansion; the default
        emits it in full (component gaps widen it past the format's
        nominal digit count), so from_string is bitwise inverse.  Pass
        `digits` to round to a fixed significant-digit count instead.
        """
        if not self.is_finite():
            return repr(self.components[0])
        f = self.to_fraction()
        if digits is None:
            s = f.denominator.bit_length() - 1  # denominator is 2^s
            exact_len = len(str(abs(f.numerator) * 5 ** s)) if f.numerator else 1
            digits = max(self.precision.decimal_digits, exact_len)
        with localcontext() as ctx:
            ctx.prec = digits
            d = Decimal(f.numerator) / Decimal(f.denominator)
        return str(d)

    def convert(self, target: Precision) -> "MCFloat":
        """Promote exactly, or demote faithfully, to another precision."""
        return MCFloat(_mccore.mc_convert(self.components, target.k))

    def is_finite(self) -> bool:
        return _mccore.mc_is_finite(self.components)

    def is_zero(self) -> bool:
        return _mccore.mc_is_zero(self.components)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        o = _coerce(other, self.k)
        if o is None:
            return NotImplemented
        return MCFloat(_mccore.mc_add(self.components, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other, self.k)
        if o is None:
            return NotImplemented
        return MCFloat(_mccore.mc_sub(self.components, o))

    def __rsub__(self, other):
        o = _coerce(other, self.k)
        if o is None:
            return NotImplemented
        return MCFloat(_mccore.mc_sub(o, self.components))

    def __mul__(self, other):
        o = _coerce(other, self.k)
        if o is None:
            return NotImplemented
        return MCFloat(_mccore.mc_mul(self.components, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other, self.k)
        if o is None:
            return NotImplemented
        return MCFloat(_mccore.mc_div(self.components, o))

    def __rtruediv__(self, other):
        o = _coerce(other, self.k)
        if o is None:
            return NotImplemented
        return MCFloat(_mccore.mc_div(o, self.components))

    def __neg__(self):
        return MCFloat(_mccore.mc_neg(self.components))

    def __abs__(self):
        return MCFloat(_mccore.mc_abs(self.components))

    def sqrt(self) -> "MCFloat":
        return MCFloat(_mccore.mc_sqrt(self.components))

    # -- comparisons (exact, via the sign of the difference) ------------

    def _cmp(self, other) -> int:
        o = _coerce(other, self.k)
        if o is None:
            raise TypeError(f"cannot compare MCFloat with {type(other)}")
        return _mccore.mc_cmp(self.components, o)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        o = _coerce(other, self.k) if not isinstance(other, MCFloat) else (
            other.components if other.k == self.k else None
        )
        if o is None:
            return NotImplemented
        return self.components == tuple(o)

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"MCFloat({self.to_string()}, k={self.k})"


@dataclass(frozen=True)
class MCComplex:
    """Immutable multi-component complex scalar (re, im at the same k)."""

    re: MCFloat
    im: MCFloat

    def __post_init__(self):
        if self.re.k != self.im.k:
            raise ValueError("re and im must have the same component count")

    @classmethod
    def from_complex(cls, z: complex, precision: Precision) -> "MCComplex":
        return cls(
            MCFloat.from_float(z.real, precision),
            MCFloat.from_float(z.imag, precision),
        )

    @classmethod
    def zero(cls, precision: Precision) -> "MCComplex":
        return cls(MCFloat.zero(precision), MCFloat.zero(precision))

    @property
    def k(self) -> int:
        return self.re.k

    @property
    def precision(self) -> Precision:
        return self.re.precision

    def _pair(self):
        return (self.re.components, self.im.components)

    @staticmethod
    def _from_pair(pair) -> "MCComplex":
        return MCComplex(MCFloat(pair[0]), MCFloat(pair[1]))

    def to_complex(self) -> complex:
        return complex(self.re.to_float(), self.im.to_float())

    def convert(self, target: Precision) -> "MCComplex":
        return MCComplex(self.re.convert(target), self.im.convert(target))

    def conj(self) -> "MCComplex":
        return MCComplex._from_pair(_mccore.cx_conj(self._pair()))

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_finite(self) -> bool:
        return self.re.is_finite() and self.im.is_finite()

    def abs2(self) -> MCFloat:
        """|z|^2 as a real MCFloat."""
        return MCFloat(_mccore.cx_abs2(self._pair()))

    def __abs__(self) -> MCFloat:
        return MCFloat(_mccore.mc_sqrt(_mccore.cx_abs2(self._pair())))

    def sqrt(self) -> "MCComplex":
        """Principal square root (re >= 0; im >= 0 on the branch cut)."""
        return MCComplex._from_pair(_mccore.cx_sqrt(self._pair()))

    def _coerce_cx(self, other):
        if isinstance(other, MCComplex):
            if other.k != self.k:
                raise ValueError("component count mismatch")
            return other._pair()
        if isinstance(other, MCFloat):
            return _coerce(other, self.k), (0.0,) * self.k
        if isinstance(other, complex):
            kk = self.k
            return ((other.real,) + (0.0,) * (kk - 1), (other.imag,) + (0.0,) * (kk - 1))
        if isinstance(other, (int, float)):
            kk = self.k
            return ((float(other),) + (0.0,) * (kk - 1), (0.0,) * kk)
        return None

    def __add__(self, other):
        o = self._coerce_cx(other)
        if o is None:
            return NotImplemented
        return MCComplex._from_pair(_mccore.cx_add(self._pair(), o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce_cx(other)
        if o is None:
            return NotImplemented
        return MCComplex._from_pair(_mccore.cx_sub(self._pair(), o))

    def __rsub__(self, other):
        o = self._coerce_cx(other)
        if o is None:
            return NotImplemented
        return MCComplex._from_pair(_mccore.cx_sub(o, self._pair()))

    def __mul__(self, other):
        o = self._coerce_cx(other)
        if o is None:
            return NotImplemented
        return MCComplex._from_pair(_mccore.cx_mul(self._pair(), o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce_cx(other)
        if o is None:
            return NotImplemented
        return MCComplex._from_pair(_mccore.cx_div(self._pair(), o))

    def __rtruediv__(self, other):
        o = self._coerce_cx(other)
        if o is None:
            return NotImplemented
        return MCComplex._from_pair(_mccore.cx_div(o, self._pair()))

    def __neg__(self):
        return MCComplex._from_pair(_mccore.cx_neg(self._pair()))

    def __eq__(self, other):
        if isinstance(other, MCComplex):
            return self.re == other.re and self.im == other.im
        o = self._coerce_cx(other)
        if o is None:
            return NotImplemented
        return self._pair() == o

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"MCComplex({self.re.to_string()} + {self.im.to_string()}j, k={self.k})"
