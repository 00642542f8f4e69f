"""Exact arithmetic foundation: the field Q(sqrt2), dense truncated power
series over an exact coefficient field, and the conversion contract into
arbitrary-precision floats (mpmath, precision counted in bits).

Everything here is immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

import mpmath
from mpmath import mp

Rational = Fraction

_RationalLike = Union[int, Fraction]
_Coercible = Union[int, Fraction, "QSqrt2"]

#: Guard bits added to every exact-to-float conversion so the documented
#: relative error bound 2**(1-prec) holds with room to spare.
_GUARD_BITS = 16


def _as_fraction(value: _RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected int or Fraction, got {type(value).__name__}")


class QSqrt2:
    """An element a + b*sqrt(2) of the real quadratic field Q(sqrt2).

    Components are kept as reduced Fractions, so every operation is exact.
    Division goes through the conjugate: 1/(a+b*sqrt2) = (a-b*sqrt2)/(a^2-2b^2),
    and a^2 - 2b^2 = 0 only for the zero element because sqrt(2) is irrational.
    """

    __slots__ = ("a", "b")

    def __init__(self, a: _RationalLike = 0, b: _RationalLike = 0) -> None:
        object.__setattr__(self, "a", _as_fraction(a))
        object.__setattr__(self, "b", _as_fraction(b))

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("QSqrt2 values are immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def coerce(cls, value: _Coercible) -> "QSqrt2":
        if isinstance(value, QSqrt2):
            return value
        return cls(_as_fraction(value))

    # -- basic protocol --------------------------------------------------------

    def __repr__(self) -> str:
        return f"QSqrt2({self.a!r}, {self.b!r})"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt2"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*sqrt2"

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QSqrt2.coerce(other)
        if isinstance(other, QSqrt2):
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    # -- field operations ------------------------------------------------------

    def __add__(self, other: _Coercible) -> "QSqrt2":
        if isinstance(other, (int, Fraction)):
            return QSqrt2(self.a + other, self.b)
        if isinstance(other, QSqrt2):
            return QSqrt2(self.a + other.a, self.b + other.b)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "QSqrt2":
        return QSqrt2(-self.a, -self.b)

    def __sub__(self, other: _Coercible) -> "QSqrt2":
        if isinstance(other, (int, Fraction, QSqrt2)):
            return self + (-QSqrt2.coerce(other))
        return NotImplemented

    def __rsub__(self, other: _Coercible) -> "QSqrt2":
        return (-self) + other

    def __mul__(self, other: _Coercible) -> "QSqrt2":
        if isinstance(other, (int, Fraction)):
            return QSqrt2(self.a * other, self.b * other)
        if isinstance(other, QSqrt2):
            return QSqrt2(
                self.a * other.a + 2 * self.b * other.b,
                self.a * other.b + self.b * other.a,
            )
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "QSqrt2":
        norm = self.a * self.a - 2 * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        return QSqrt2(self.a / norm, -self.b / norm)

    def __truediv__(self, other: _Coercible) -> "QSqrt2":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt2)")
            return QSqrt2(self.a / other, self.b / other)
        if isinstance(other, QSqrt2):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other: _Coercible) -> "QSqrt2":
        return QSqrt2.coerce(other) * self.inverse()

    def __pow__(self, exponent: int) -> "QSqrt2":
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = QSqrt2(1)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "QSqrt2":
        """Galois conjugate a - b*sqrt(2)."""
        return QSqrt2(self.a, -self.b)

    # -- order ------------------------------------------------------------------

    def sign(self) -> int:
        return qsqrt2_sign(self)

    def __lt__(self, other: _Coercible) -> bool:
        return (self - QSqrt2.coerce(other)).sign() < 0

    def __le__(self, other: _Coercible) -> bool:
        return (self - QSqrt2.coerce(other)).sign() <= 0

    def __gt__(self, other: _Coercible) -> bool:
        return (self - QSqrt2.coerce(other)).sign() > 0

    def __ge__(self, other: _Coercible) -> bool:
        return (self - QSqrt2.coerce(other)).sign() >= 0

    def __abs__(self) -> "QSqrt2":
        return -self if self.sign() < 0 else self

    # -- conversions --------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} has a nonzero sqrt(2) part")
        return self.a

    def to_mpf(self, prec: int) -> mpmath.mpf:
        return to_mpf(self, prec)


def qsqrt2_sign(x: QSqrt2) -> int:
    """Exact sign of a + b*sqrt(2) using only integer comparisons.

    Mixed-sign components are resolved by comparing a^2 with 2*b^2, which
    decides |a| vs |b*sqrt2| without ever leaving exact arithmetic.
    """
    a, b = x.a, x.b
    if b == 0:
        return 0 if a == 0 else (1 if a > 0 else -1)
    if a == 0:
        return 1 if b > 0 else -1
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # One component positive, one negative: |a| vs sqrt(2)|b|.
    bigger_rational_part = a * a > 2 * b * b
    if a > 0:
        return 1 if bigger_rational_part else -1
    return -1 if bigger_rational_part else 1


def to_mpf(value: Union[_Coercible, mpmath.mpf, float], prec: int) -> mpmath.mpf:
    """Convert an exact value to an mpf with relative error <= 2**(1-prec)."""
    with mp.workprec(prec + _GUARD_BITS):
        if isinstance(value, QSqrt2):
            result = (
                mpmath.mpf(value.a.numerator) / value.a.denominator
                + mpmath.sqrt(mpmath.mpf(2)) * value.b.numerator / value.b.denominator
            )
        elif isinstance(value, Fraction):
            result = mpmath.mpf(value.numerator) / value.denominator
        else:
            result = mpmath.mpf(value)
    with mp.workprec(prec):
        return +result


SQRT2 = QSqrt2(0, 1)

#: Right endpoint of the moment support, (sqrt2+1)^4 = 17 + 12*sqrt2.
SUPPORT_END = QSqrt2(17, 12)

#: Interior singular point where the density switches branch, 1/SUPPORT_END.
BRANCH_POINT = QSqrt2(17, -12)

#: Argument where the two algebraic maps collide, 1/2 - sqrt2/4.
MAP_COLLISION = QSqrt2(Fraction(1, 2), Fraction(-1, 4))


class PowerSeries:
    """Dense truncated power series over an exact coefficient field.

    Coefficients may be Fraction or QSqrt2 (anything supporting exact ring
    operations with int).  The truncation order is len(coeffs) - 1 and
    arithmetic on equal-order series returns a result of the same order.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable) -> None:
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("a power series needs at least the constant term")
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("PowerSeries values are immutable")

    @classmethod
    def constant(cls, value, order: int) -> "PowerSeries":
        return cls([value] + [value * 0] * order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self) -> str:
        head = ", ".join(repr(c) for c in self.coeffs[:4])
        tail = ", ..." if len(self.coeffs) > 4 else ""
        return f"PowerSeries([{head}{tail}], order={self.order})"

    def __eq__(self, other) -> bool:
        if isinstance(other, PowerSeries):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __getitem__(self, index: int):
        return self.coeffs[index]

    def truncate(self, order: int) -> "PowerSeries":
        if order >= self.order:
            return self
        return PowerSeries(self.coeffs[: order + 1])

    def _common_order(self, other: "PowerSeries") -> int:
        return min(self.order, other.order)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = self._common_order(other)
        return PowerSeries([self.coeffs[k] + other.coeffs[k] for k in range(n + 1)])

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = self._common_order(other)
        return PowerSeries([self.coeffs[k] - other.coeffs[k] for k in range(n + 1)])

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-c for c in self.coeffs])

    def scale(self, factor) -> "PowerSeries":
        return PowerSeries([c * factor for c in self.coeffs])

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        n = self._common_order(other)
        zero = self.coeffs[0] * 0
        out = [zero] * (n + 1)
        for i, ci in enumerate(self.coeffs[: n + 1]):
            if not ci:
                continue
            for j in range(n + 1 - i):
                cj = other.coeffs[j]
                if cj:
                    out[i + j] = out[i + j] + ci * cj
        return PowerSeries(out)

    def __truediv__(self, other: "PowerSeries") -> "PowerSeries":
        n = self._common_order(other)
        lead = other.coeffs[0]
        if not lead:
            raise ZeroDivisionError("series division needs an invertible constant term")
        out = []
        for k in range(n + 1):
            acc = self.coeffs[k]
            for j in range(1, k + 1):
                acc = acc - other.coeffs[j] * out[k - j]
            out.append(acc / lead)
        return PowerSeries(out)

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """self(inner(x)); the inner series must have zero constant term."""
        if inner.coeffs[0]:
            raise ValueError("composition needs inner constant term zero")
        n = min(self.order, inner.order)
        zero = inner.coeffs[0] * 0
        inner = inner.truncate(n)
        # Horner from the highest retained coefficient down.
        result = PowerSeries.constant(zero + self.coeffs[n], n)
        for k in range(n - 1, -1, -1):
            result = result * inner
            result = PowerSeries(
                [result.coeffs[0] + self.coeffs[k]] + list(result.coeffs[1:])
            )
        return result

    def derivative(self) -> "PowerSeries":
        if self.order == 0:
            return PowerSeries([self.coeffs[0] * 0])
        return PowerSeries([self.coeffs[k] * k for k in range(1, self.order + 1)])

    def nth_root(self, n: int) -> "PowerSeries":
        """Exact n-th root of a series whose constant term has one in the field.

        Uses the logarithmic-derivative recurrence n*f*h' = f'*h for h = f^(1/n);
        every step divides only by n*k, which is exact over Q and Q(sqrt2).
        """
        if n <= 0:
            raise ValueError("root index must be a positive integer")
        c0 = self.coeffs[0]
        root0 = _exact_field_root(c0, n)
        if root0 is None:
            raise ValueError(f"constant term {c0!r} has no exact {n}-th root in the field")
        monic = self.scale(1 / c0) if c0 != 1 else self
        out = [monic.coeffs[0] * 0 + 1]
        for k in range(1, monic.order + 1):
            # Coefficient of x^(k-1) in f'*h minus the j>=1 part of n*f*h'.
            acc = monic.coeffs[0] * 0
            for j in range(0, k):
                acc = acc + (j + 1) * monic.coeffs[j + 1] * out[k - 1 - j]
            for j in range(1, k):
                acc = acc - n * (k - j) * monic.coeffs[j] * out[k - j]
            out.append(acc / (n * k))
        return PowerSeries(out).scale(root0)

    def sqrt(self) -> "PowerSeries":
        return self.nth_root(2)

    def eval_mpf(self, x, prec: int) -> mpmath.mpf:
        """Numeric value of the truncation at x (exact Horner, then rounded)."""
        with mp.workprec(prec + _GUARD_BITS):
            xf = mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x
            acc = mpmath.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * xf + to_mpf(c, prec + _GUARD_BITS)
        with mp.workprec(prec):
            return +acc


def _exact_field_root(value, n: int):
    """Exact n-th root of a field element, or None if not expressible."""
    if isinstance(value, QSqrt2):
        if not value.is_rational:
            return None
        value = value.to_fraction()
        wrap = QSqrt2
    else:
        wrap = None
    frac = _as_fraction(value)
    if frac == 1:
        root = Fraction(1)
    elif frac <= 0:
        return None
    else:
        num = _integer_nth_root(frac.numerator, n)
        den = _integer_nth_root(frac.denominator, n)
        if num is None or den is None:
            return None
        root = Fraction(num, den)
    return wrap(root) if wrap else root


def _integer_nth_root(value: int, n: int):
    root = round(value ** (1.0 / n))
    for candidate in (root - 1, root, root + 1):
        if candidate >= 0 and candidate**n == value:
            return candidate
    return None


def geometric_series(order: int) -> PowerSeries:
    """1/(1-x) truncated, handy in tests."""
    return PowerSeries([Fraction(1)] * (order + 1))


def binomial_series(exponent: Fraction, order: int) -> PowerSeries:
    """(1+x)**exponent with exact rational coefficients."""
    coeffs = [Fraction(1)]
    for k in range(1, order + 1):
        coeffs.append(coeffs[-1] * (exponent - (k - 1)) / k)
    return PowerSeries(coeffs)
