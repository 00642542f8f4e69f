"""Truncated Taylor arithmetic ("jets") over mpmath floats.

A Jet holds coeffs[k] = f^(k)(x0)/k! for k < length.  Propagating jets
through the closed-form expressions gives derivatives by term-wise
differentiation of the underlying series, with no finite differencing.
Callers are expected to run inside an mp.workprec block.
"""

from __future__ import annotations

import math
from typing import List, Sequence

import mpmath


class Jet:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence) -> None:
        self.coeffs = [mpmath.mpf(c) if not isinstance(c, (mpmath.mpf, mpmath.mpc)) else c for c in coeffs]

    @classmethod
    def variable(cls, x0, length: int) -> "Jet":
        coeffs = [mpmath.mpf(x0)] + [mpmath.mpf(0)] * (length - 1)
        if length > 1:
            coeffs[1] = mpmath.mpf(1)
        return cls(coeffs)

    @classmethod
    def constant(cls, value, length: int) -> "Jet":
        return cls([mpmath.mpf(value)] + [mpmath.mpf(0)] * (length - 1))

    @property
    def length(self) -> int:
        return len(self.coeffs)

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, k: int):
        """The true k-th derivative f^(k)(x0)."""
        return self.coeffs[k] * math.factorial(k)

    def derivatives(self) -> List:
        return [self.derivative(k) for k in range(self.length)]

    def __repr__(self) -> str:
        return f"Jet({[mpmath.nstr(c, 8) for c in self.coeffs]})"

    # -- ring operations -------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.length)

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        return Jet([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet([-a for a in self.coeffs])

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet([a * other for a in self.coeffs])
        n = min(self.length, other.length)
        out = [mpmath.mpf(0)] * n
        for i in range(n):
            a = self.coeffs[i]
            if a:
                for j in range(n - i):
                    out[i + j] += a * other.coeffs[j]
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        f0 = self.coeffs[0]
        if f0 == 0:
            raise ZeroDivisionError("jet has zero value part")
        out = [1 / f0]
        for k in range(1, self.length):
            acc = mpmath.mpf(0)
            for j in range(1, k + 1):
                acc += self.coeffs[j] * out[k - j]
            out.append(-acc / f0)
        return Jet(out)

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet([a / other for a in self.coeffs])
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, exponent: int) -> "Jet":
        if not isinstance(exponent, int):
            raise TypeError("jet powers must be integers")
        if exponent < 0:
            return self.reciprocal() ** (-exponent)
        result = Jet.constant(1, self.length)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- analytic functions ------------------------------------------------------

    def sqrt(self) -> "Jet":
        f0 = self.coeffs[0]
        if f0 <= 0:
            raise ValueError("jet sqrt needs a positive value part")
        q0 = mpmath.sqrt(f0)
        out = [q0]
        for k in range(1, self.length):
            acc = self.coeffs[k]
            for j in range(1, k):
                acc -= out[j] * out[k - j]
            out.append(acc / (2 * q0))
        return Jet(out)

    def log(self) -> "Jet":
        f0 = self.coeffs[0]
        if f0 <= 0:
            raise ValueError("jet log needs a positive value part")
        # (log f)' = f'/f, integrated coefficientwise.
        out = [mpmath.log(f0)]
        if self.length == 1:
            return Jet(out)
        ratio = Jet(self.coeffs).reciprocal()
        deriv = Jet([self.coeffs[j] * j for j in range(1, self.length)] + [mpmath.mpf(0)])
        prod = deriv * ratio
        for k in range(1, self.length):
            out.append(prod.coeffs[k - 1] / k)
        return Jet(out)

    def shift_div_power(self, other: "Jet", power: int, noise_tol) -> "Jet":
        """self/other when both vanish to the given order at the point.

        The leading `power` coefficients of both jets must be numerical noise
        (below noise_tol in magnitude); they are dropped before dividing.
        Useful at removable singularities.  The result is `power` coefficients
        shorter than the inputs.
        """
        for jet in (self, other):
            for c in jet.coeffs[:power]:
                if abs(c) > noise_tol:
                    raise ValueError(
                        f"leading coefficient {mpmath.nstr(c, 5)} is not negligible; "
                        "not a removable singularity of this order"
                    )
        num = Jet(self.coeffs[power:])
        den = Jet(other.coeffs[power:])
        return num / den


def compose_taylor(outer_coeffs: Sequence, inner: Jet) -> Jet:
    """outer(inner(x)) where outer_coeffs are Taylor coefficients of the
    outer function at the point inner.value."""
    n = inner.length
    centered = Jet([mpmath.mpf(0)] + list(inner.coeffs[1:]))
    acc = Jet.constant(outer_coeffs[-1], n)
    for c in reversed(list(outer_coeffs)[:-1]):
        acc = acc * centered
        acc = Jet([acc.coeffs[0] + c] + acc.coeffs[1:])
    return acc
