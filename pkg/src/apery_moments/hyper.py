"""The Gauss hypergeometric function 2F1(1/3, 2/3; 1; z) on [0, 1).

Two regimes: the Maclaurin series up to z = 3/4 (term ratio bounded by z, so
a clean geometric tail), and past that the classical logarithmic connection
expansion at z = 1, whose n = 0 term is the -(sqrt3/2pi) log(delta) +
3 sqrt3 log3 / (2pi) behaviour and whose higher coefficients come from
digamma values at shifted rationals.  Also hosts the digamma evaluation at
rationals and the constant K = 2F1(1/6, 1/3; 1; 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import mpmath
from mpmath import mp

from apery_moments.exactnum import MAP_COLLISION, PowerSeries, to_mpf
from apery_moments.jets import Jet

#: Branch switch point; the series ratio stays <= 3/4 on the left of it and
#: the connection variable delta = 1-z stays <= 1/4 on the right.
Z_SWITCH = Fraction(3, 4)
_Z_SWITCH_MPF = mpmath.mpf(3) / 4  # exactly representable

_PREFACTOR_CACHE: Dict[int, mpmath.mpf] = {}


def _connection_prefactor(prec: int) -> mpmath.mpf:
    # 1/(Gamma(1/3)Gamma(2/3)) = sin(pi/3)/pi = sqrt(3)/(2 pi)
    value = _PREFACTOR_CACHE.get(prec)
    if value is None:
        with mp.workprec(prec):
            value = mpmath.sqrt(3) / (2 * mpmath.pi)
        _PREFACTOR_CACHE[prec] = value
    return value


# -- exact Maclaurin coefficients -------------------------------------------------

_F21_FRACTIONS: List[Fraction] = [Fraction(1)]


def f21_coefficient(n: int) -> Fraction:
    """Exact coefficient (3n)!/(n!)^3/27^n of the Maclaurin series."""
    while len(_F21_FRACTIONS) <= n:
        k = len(_F21_FRACTIONS) - 1
        _F21_FRACTIONS.append(
            _F21_FRACTIONS[-1] * (3 * k + 1) * (3 * k + 2) / (9 * (k + 1) ** 2)
        )
    return _F21_FRACTIONS[n]


def f21_series(order: int) -> PowerSeries:
    return PowerSeries([f21_coefficient(n) for n in range(order + 1)])


class _MpfTable:
    """Coefficients t_n (and the connection weights d_n) as mpf, per precision."""

    def __init__(self, prec: int):
        self.prec = prec + 16
        with mp.workprec(self.prec):
            self.t = [mpmath.mpf(1)]
            d0 = -2 * mpmath.euler - digamma_rational(1, 3, self.prec) - digamma_rational(2, 3, self.prec)
            self.d = [d0]

    def extend(self, n: int):
        with mp.workprec(self.prec):
            while len(self.t) <= n:
                k = len(self.t) - 1
                self.t.append(self.t[-1] * ((3 * k + 1) * (3 * k + 2)) / (9 * (k + 1) ** 2))
                third = mpmath.mpf(1) / 3
                self.d.append(
                    self.d[-1]
                    + mpmath.mpf(2) / (k + 1)
                    - 1 / (k + third)
                    - 1 / (k + 2 * third)
                )


_TABLES: Dict[int, _MpfTable] = {}


def _table(prec: int) -> _MpfTable:
    table = _TABLES.get(prec)
    if table is None:
        table = _MpfTable(prec)
        _TABLES[prec] = table
    return table


@dataclass(frozen=True)
class HyperEval:
    z: mpmath.mpf
    value: mpmath.mpf
    error_bound: mpmath.mpf
    branch: str  # "series" or "connection"


def f21_eval(z, prec: int = 256, tol=None) -> HyperEval:
    """2F1(1/3,2/3;1;z) for 0 <= z < 1 with a rigorous tail bound."""
    work = prec + 16
    with mp.workprec(work):
        zf = mpmath.mpf(z) if not isinstance(z, mpmath.mpf) else z
        if zf < 0 or zf >= 1:
            raise ValueError(f"argument {mpmath.nstr(zf)} outside [0, 1)")
        tolerance = mpmath.mpf(tol) if tol is not None else mpmath.mpf(2) ** (8 - prec)
        if zf <= _Z_SWITCH_MPF:
            value, bound = _series_value(zf, prec, tolerance)
            branch = "series"
        else:
            value, bound = _connection_value(1 - zf, prec, tolerance)
            branch = "connection"
    with mp.workprec(prec):
        return HyperEval(+zf, +value, +bound, branch)


def _series_value(zf, prec: int, tolerance) -> Tuple[mpmath.mpf, mpmath.mpf]:
    table = _table(prec)
    if zf == 0:
        return mpmath.mpf(1), mpmath.mpf(0)
    total = mpmath.mpf(0)
    zpow = mpmath.mpf(1)
    geom = zf / (1 - zf)
    n = 0
    while True:
        table.extend(n + 64)
        for _ in range(64):
            term = table.t[n] * zpow
            total += term
            zpow *= zf
            n += 1
            tail = term * geom  # t_{n+1} < t_n, so the tail is geometric in z
            if tail <= tolerance:
                return total, tail


def _connection_value(delta, prec: int, tolerance) -> Tuple[mpmath.mpf, mpmath.mpf]:
    table = _table(prec)
    pref = _connection_prefactor(prec + 16)
    log_delta = mpmath.log(delta)
    geom = delta / (1 - delta)
    d_total = mpmath.mpf(0)
    l_total = mpmath.mpf(0)
    dpow = mpmath.mpf(1)
    n = 0
    while True:
        table.extend(n + 32)
        for _ in range(32):
            base = table.t[n] * dpow
            d_total += base * table.d[n]
            l_total += base
            dpow *= delta
            n += 1
            # Both coefficient streams are positive and decreasing.
            tail = base * geom * (table.d[0] + abs(log_delta))
            if tail * pref <= tolerance:
                value = pref * (d_total - log_delta * l_total)
                return value, pref * tail


def f21_taylor(z, prec: int, length: int = 4, tol=None) -> Tuple[List[mpmath.mpf], mpmath.mpf]:
    """Taylor coefficients [F(z), F'(z), F''(z)/2!, ...] with an error bound.

    Series and connection branches are both differentiated term by term (the
    connection branch through its delta = 1-z jet, including the log factor).
    """
    work = prec + 16
    with mp.workprec(work):
        zf = mpmath.mpf(z) if not isinstance(z, mpmath.mpf) else z
        if zf < 0 or zf >= 1:
            raise ValueError(f"argument {mpmath.nstr(zf)} outside [0, 1)")
        tolerance = mpmath.mpf(tol) if tol is not None else mpmath.mpf(2) ** (8 - prec)
        table = _table(prec)
        if zf <= _Z_SWITCH_MPF:
            zjet = Jet.variable(zf, length)
            acc = Jet.constant(0, length)
            power = Jet.constant(1, length)
            ratio = max(zf, mpmath.mpf(1) / 4)
            n = 0
            while True:
                table.extend(n + 32)
                for _ in range(32):
                    term = power * table.t[n]
                    acc = acc + term
                    power = power * zjet
                    n += 1
                    margin = ratio * (1 + mpmath.mpf(2 * length) / n)
                    if margin < 1:
                        tail = max(abs(c) for c in term.coeffs) * margin / (1 - margin)
                        if tail <= tolerance:
                            return acc.coeffs, tail
        else:
            delta0 = 1 - zf
            djet = Jet([delta0, mpmath.mpf(-1)] + [mpmath.mpf(0)] * (length - 2))
            log_jet = djet.log()
            d_acc = Jet.constant(0, length)
            l_acc = Jet.constant(0, length)
            power = Jet.constant(1, length)
            n = 0
            while True:
                table.extend(n + 32)
                for _ in range(32):
                    base = power * table.t[n]
                    d_acc = d_acc + base * table.d[n]
                    l_acc = l_acc + base
                    power = power * djet
                    n += 1
                    margin = delta0 * (1 + mpmath.mpf(2 * length) / n)
                    if margin < 1:
                        scale = (table.d[0] + abs(log_jet.coeffs[0])) * (
                            1 + 1 / (delta0 * max(1, length - 1))
                        )
                        tail = max(abs(c) for c in base.coeffs) * margin / (1 - margin) * scale
                        if tail <= tolerance:
                            pref = _connection_prefactor(work)
                            result = (d_acc - log_jet * l_acc) * pref
                            return result.coeffs, tail


def f21_jet(zjet: Jet, prec: int, tol=None) -> Jet:
    """F composed with an inner jet (chain rule through the Taylor data)."""
    from apery_moments.jets import compose_taylor

    coeffs, _ = f21_taylor(zjet.value, prec, zjet.length, tol)
    return compose_taylor(coeffs, zjet)


def f21_deriv(z, prec: int = 256) -> mpmath.mpf:
    """F'(z) by the term-wise differentiated Maclaurin series (z <= 3/4)."""
    with mp.workprec(prec + 16):
        zf = mpmath.mpf(z) if not isinstance(z, mpmath.mpf) else z
        if zf < 0:
            raise ValueError("argument must be nonnegative")
        if zf > _Z_SWITCH_MPF:
            raise ValueError("argument too close to 1 for the series branch")
        coeffs, _ = f21_taylor(zf, prec, 2)
    with mp.workprec(prec):
        return +coeffs[1]


def digamma_rational(p: int, q: int, prec: int = 256) -> mpmath.mpf:
    """psi(p/q) for integers 0 < p <= q via the finite Gauss digamma sum."""
    if not (0 < p <= q):
        raise ValueError("need 0 < p <= q")
    from math import gcd

    g = gcd(p, q)
    p, q = p // g, q // g
    with mp.workprec(prec + 16):
        if q == 1:
            result = -mpmath.euler
        else:
            pi = mpmath.pi
            result = -mpmath.euler - mpmath.log(2 * q) - pi / 2 / mpmath.tan(pi * p / q)
            for n in range(1, (q - 1) // 2 + 1):
                result += 2 * mpmath.cos(2 * pi * n * p / q) * mpmath.log(mpmath.sin(pi * n / q))
    with mp.workprec(prec):
        return +result


def constant_k(prec: int = 256) -> mpmath.mpf:
    """2F1(1/6, 1/3; 1; 1/2), all terms positive, geometric tail."""
    with mp.workprec(prec + 16):
        half = mpmath.mpf(1) / 2
        term = mpmath.mpf(1)
        total = mpmath.mpf(0)
        threshold = mpmath.mpf(2) ** (-prec - 8)
        n = 0
        while True:
            total += term
            if term <= threshold:
                break
            term *= half * ((6 * n + 1) * (3 * n + 1)) / (18 * (n + 1) ** 2)
            n += 1
    with mp.workprec(prec):
        return +total


@dataclass(frozen=True)
class SpecialConstants:
    euler_gamma: mpmath.mpf
    psi_third: mpmath.mpf
    psi_twothirds: mpmath.mpf
    k_value: mpmath.mpf
    s0: mpmath.mpf
    s1: mpmath.mpf
    z0: mpmath.mpf


_CONSTANTS: Dict[int, SpecialConstants] = {}


def special_constants(prec: int = 256) -> SpecialConstants:
    cached = _CONSTANTS.get(prec)
    if cached is not None:
        return cached
    z0 = to_mpf(MAP_COLLISION, prec)
    with mp.workprec(prec):
        gamma = +mpmath.euler
    constants = SpecialConstants(
        euler_gamma=gamma,
        psi_third=digamma_rational(1, 3, prec),
        psi_twothirds=digamma_rational(2, 3, prec),
        k_value=constant_k(prec),
        s0=f21_eval(z0, prec).value,
        s1=f21_deriv(z0, prec),
        z0=z0,
    )
    _CONSTANTS[prec] = constants
    return constants


def gauss_limit_constant(prec: int = 256) -> mpmath.mpf:
    """3 sqrt(3) log(3) / (2 pi), the constant term of F(1-delta)+ (sqrt3/2pi)log(delta)."""
    with mp.workprec(prec):
        return 3 * mpmath.sqrt(3) * mpmath.log(3) / (2 * mpmath.pi)
