"""The algebraic maps, the four basic solutions of the third-order operator
in hypergeometric/Heun closed form, and the piecewise moment density.

Left of the interior singular point x = 1/c everything reduces to fast
hypergeometric series.  Right of it the density is a product of two Heun
functions whose argument approaches their radius of convergence as x drops
toward 1/c, so direct summation degenerates there; evaluation instead walks
a cached chain of Taylor expansions of the operator toward the point and
finishes with the local Frobenius basis {1, t^(1/2), t} once inside its
disk.  Only values far from 1/c are produced by raw series summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import mpmath
from mpmath import mp

from apery_moments import odecheck
from apery_moments.exactnum import (
    BRANCH_POINT,
    PowerSeries,
    QSqrt2,
    SUPPORT_END,
    to_mpf,
)
from apery_moments.heun import (
    APERY_FACTOR,
    HeunNotConverged,
    LEMMA_CASES,
    heun_eval,
    heun_taylor,
)
from apery_moments.hyper import f21_eval, f21_jet, f21_series, f21_taylor
from apery_moments.jets import Jet, compose_taylor


class DomainError(ValueError):
    """Argument outside the closed form's real domain."""


def _mpf(x):
    return x if isinstance(x, mpmath.mpf) else mpmath.mpf(x)


def _support_end(prec: int) -> mpmath.mpf:
    return to_mpf(SUPPORT_END, prec)


def _branch_point(prec: int) -> mpmath.mpf:
    return to_mpf(BRANCH_POINT, prec)


# ---------------------------------------------------------------------------
# Algebraic maps.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraicMaps:
    x: mpmath.mpf
    mu: mpmath.mpf
    mu2: mpmath.mpf
    lam: mpmath.mpf
    lam2: mpmath.mpf
    discriminant: mpmath.mpf


def _maps_pieces(xj, prec: int):
    """mu^2, mu2^2, lam, lam2 as jets (or plain numbers) from the defining
    formulas; x^2-34x+1 is evaluated in the factored form (x-c0)(x-c) so the
    sign is decided by exactly-representable endpoints."""
    c = _support_end(prec + 16)
    c0 = _branch_point(prec + 16)
    disc = (xj - c0) * (xj - c)
    sigma = disc.sqrt() if isinstance(disc, Jet) else mpmath.sqrt(disc)
    one_plus = xj + 1
    musq = (3 - 3 * xj - sigma) / (2 * one_plus**2)
    mu2sq = (3 - 3 * xj + sigma) / (2 * one_plus**2)
    cubic = ((xj + 30) * xj - 24) * xj + 1
    quad = (xj - 7) * xj + 1
    lam = (cubic - quad * sigma) / (2 * one_plus**3)
    lam2 = (cubic + quad * sigma) / (2 * one_plus**3)
    return musq, mu2sq, lam, lam2, disc


def algebraic_maps(x, prec: int = 256) -> AlgebraicMaps:
    """The two multiplier maps and the two argument maps at a real point."""
    with mp.workprec(prec + 16):
        xf = _mpf(x)
        if xf <= -1:
            raise DomainError("maps are real only for x > -1")
        musq, mu2sq, lam, lam2, disc = _maps_pieces(xf, prec)
        if disc < 0:
            raise DomainError(
                "discriminant x^2-34x+1 is negative strictly between 1/c and c"
            )
    with mp.workprec(prec):
        return AlgebraicMaps(
            x=+xf,
            mu=+mpmath.sqrt(musq),
            mu2=+mpmath.sqrt(mu2sq),
            lam=+lam,
            lam2=+lam2,
            discriminant=+disc,
        )


# ---------------------------------------------------------------------------
# u0 and v0 on (0, 1/c).
# ---------------------------------------------------------------------------


def u0_eval(x, prec: int = 256) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """u0 = mu^2 F(lam)^2; value and error bound, for 0 < x < 1/c."""
    with mp.workprec(prec + 16):
        xf = _mpf(x)
        _require_left(xf, prec)
        musq, _, lam, _, _ = _maps_pieces(xf, prec)
        f = f21_eval(lam, prec + 16)
        value = musq * f.value**2
        bound = musq * 2 * f.value * f.error_bound * (1 + mpmath.mpf(2) ** -8)
    with mp.workprec(prec):
        return +value, +bound + mpmath.mpf(2) ** (6 - prec) * abs(value)


def v0_eval(x, prec: int = 256) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """v0 = -(2 pi / (sqrt3 (x+1))) F(lam) F(lam2), for 0 < x < 1/c."""
    with mp.workprec(prec + 16):
        xf = _mpf(x)
        _require_left(xf, prec)
        _, _, lam, lam2, _ = _maps_pieces(xf, prec)
        factor = -2 * mpmath.pi / (mpmath.sqrt(3) * (xf + 1))
        f_a = f21_eval(lam, prec + 16)
        f_b = f21_eval(lam2, prec + 16)
        value = factor * f_a.value * f_b.value
        bound = abs(factor) * (
            abs(f_a.value) * f_b.error_bound + abs(f_b.value) * f_a.error_bound
        )
    with mp.workprec(prec):
        return +value, +bound + mpmath.mpf(2) ** (6 - prec) * abs(value)


def _require_left(xf, prec: int):
    if not (0 < xf < _branch_point(prec + 16)):
        raise DomainError("argument must lie in (0, 1/c)")


def u0_coeffs(order: int) -> List[Fraction]:
    """Exact Maclaurin coefficients of mu^2 F(lam)^2 via series composition.

    The square root of x^2-34x+1 has rational coefficients, so the whole
    computation stays in Q; the result must reproduce the integer sequence.
    """
    n = order

    def poly(*coeffs):
        padded = list(map(Fraction, coeffs)) + [Fraction(0)] * n
        return PowerSeries(padded[: n + 1])

    sigma = poly(1, -34, 1).sqrt()
    one_plus = poly(1, 1)
    three_minus = poly(3, -3)
    musq = (three_minus - sigma) / (one_plus * one_plus).scale(2)
    cubic = poly(1, -24, 30, 1)
    quad = poly(1, -7, 1)
    lam = (cubic - quad * sigma) / (one_plus * one_plus * one_plus).scale(2)
    f_of_lam = f21_series(n).compose(lam)
    series = musq * f_of_lam * f_of_lam
    return [Fraction(c) for c in series.coeffs]


def u0_derivs(x, prec: int = 256):
    """(u0, u0', u0'', u0''') from the term-wise differentiated closed form."""
    with mp.workprec(prec + 24):
        xf = _mpf(x)
        _require_left(xf, prec)
        xj = Jet.variable(xf, 4)
        musq, _, lam, _, _ = _maps_pieces(xj, prec)
        f = f21_jet(lam, prec + 24)
        jet = musq * f * f
        derivs = jet.derivatives()
    with mp.workprec(prec):
        return [+d for d in derivs]


def v0_derivs(x, prec: int = 256):
    with mp.workprec(prec + 24):
        xf = _mpf(x)
        _require_left(xf, prec)
        xj = Jet.variable(xf, 4)
        _, _, lam, lam2, _ = _maps_pieces(xj, prec)
        factor = Jet.constant(-2 * mpmath.pi / mpmath.sqrt(3), 4) / (xj + 1)
        jet = factor * f21_jet(lam, prec + 24) * f21_jet(lam2, prec + 24)
        derivs = jet.derivatives()
    with mp.workprec(prec):
        return [+d for d in derivs]


# ---------------------------------------------------------------------------
# u_infinity outside [0, c].
# ---------------------------------------------------------------------------


def uinf_eval(x, prec: int = 256) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """u_inf = mu(1/x)^2 F(lam(1/x))^2 / x for x < 0 or x > c."""
    with mp.workprec(prec + 16):
        xf = _mpf(x)
    if xf == -1:
        derivs = uinf_derivs(xf, prec)
        with mp.workprec(prec):
            return derivs[0], abs(derivs[0]) * mpmath.mpf(2) ** (16 - prec)
    extra = 0
    if -2 < xf < -mpmath.mpf(1) / 2:
        # The maps have a removable singularity at 1/x = -1; escalate the
        # working precision to absorb the cancellation.
        with mp.workprec(prec + 16):
            extra = int(3 * abs(mpmath.log(abs(xf + 1), 2))) + 16
    work = prec + 16 + extra
    with mp.workprec(work):
        xf = _mpf(x)
        if not (xf < 0 or xf > _support_end(work)):
            raise DomainError("argument must satisfy x < 0 or x > c")
        y = 1 / xf
        musq, _, lam, _, _ = _maps_pieces(y, prec + extra)
        f = f21_eval(lam, work)
        value = musq * f.value**2 / xf
        bound = abs(musq * 2 * f.value * f.error_bound / xf)
    with mp.workprec(prec):
        return +value, +bound + mpmath.mpf(2) ** (8 - prec) * abs(value)


def uinf_derivs(x, prec: int = 256):
    """Derivatives 0..3 of u_inf; at x = -1 the removable singularity of the
    maps is resolved by cancelling the vanishing leading jet coefficients."""
    with mp.workprec(prec + 24):
        xf = _mpf(x)
    if xf == -1:
        return _uinf_derivs_at_minus_one(prec)
    extra = 0
    if -2 < xf < -mpmath.mpf(1) / 2:
        with mp.workprec(prec + 24):
            extra = int(5 * abs(mpmath.log(abs(xf + 1), 2))) + 32
    work = prec + 24 + extra
    with mp.workprec(work):
        xf = _mpf(x)
        if not (xf < 0 or xf > _support_end(work)):
            raise DomainError("argument must satisfy x < 0 or x > c")
        xj = Jet.variable(xf, 4)
        y = 1 / xj
        musq, _, lam, _, _ = _maps_pieces(y, prec + extra)
        jet = musq * f21_jet(lam, work) ** 2 / xj
        derivs = jet.derivatives()
    with mp.workprec(prec):
        return [+d for d in derivs]


def _uinf_derivs_at_minus_one(prec: int):
    length = 7
    work = prec + 48
    with mp.workprec(work):
        noise = mpmath.mpf(2) ** (-(work - 40))
        xj = Jet.variable(mpmath.mpf(-1), length)
        s = (xj + 1) / xj  # s = y + 1 where y = 1/x; s(0) = 0
        # sigma(y)^2 = 36 - 36 s + s^2, regular in s.
        sigma = (36 - 36 * s + s * s).sqrt()
        musq_num = 6 - 3 * s - sigma  # vanishes to second order
        musq = musq_num.shift_div_power(2 * s * s, 2, noise)
        y = s - 1
        cubic = ((y + 30) * y - 24) * y + 1
        quad = (y - 7) * y + 1
        lam_num = cubic - quad * sigma  # vanishes to third order
        lam = lam_num.shift_div_power(2 * s * s * s, 3, noise)
        f = f21_jet(lam, work)
        jet = musq * f * f / Jet(xj.coeffs[: lam.length])
        derivs = jet.derivatives()
    with mp.workprec(prec):
        return [+d for d in derivs]


# ---------------------------------------------------------------------------
# v2 on (1/c, c): direct Heun product, continuation chain, local basis.
# ---------------------------------------------------------------------------

#: Distances from the interior singular point delimiting the three regimes.
_DIRECT_MIN = mpmath.mpf(16)
_LOCAL_MAX_EXP = -10  # local basis below 2^-10


def _sum_ascending(coeffs, h, work: int):
    """Sum c_k h^k with an early exit once the running term has decayed to
    negligibility relative to the accumulated value.  The coefficient streams
    here decay geometrically past a short transient, so a stalled term means
    a converged sum."""
    acc = mpmath.mpf(0)
    power = mpmath.mpf(1)
    threshold = mpmath.mpf(2) ** (-(work + 8))
    check = 24
    for k, ck in enumerate(coeffs):
        acc += ck * power
        power *= h
        if k == check:
            if abs(ck * power) <= threshold * (1 + abs(acc)):
                break
            check += 16
    return acc

_H1 = LEMMA_CASES["L2"]
_H2 = LEMMA_CASES["L6"]


def _prefactor_value(xf, prec):
    c = _support_end(prec + 16)
    c0 = _branch_point(prec + 16)
    return (xf - c0) * mpmath.sqrt(c - xf) / (c - c0)


def _v2_direct(xf, prec: int, tol) -> Tuple[mpmath.mpf, mpmath.mpf]:
    c0 = _branch_point(prec + 16)
    z = 1 - c0 * xf
    pref = _prefactor_value(xf, prec)
    if z == 0:
        return mpmath.mpf(0), mpmath.mpf(0)
    factor_tol = None
    if tol is not None and pref != 0:
        factor_tol = tol / (4 * abs(pref))
    e1 = heun_eval(_H1, z, prec + 16, tol=factor_tol)
    if factor_tol is not None:
        factor_tol = factor_tol / max(1, abs(e1.value))
    e2 = heun_eval(_H2, z, prec + 16, tol=factor_tol)
    value = pref * e1.value * e2.value
    bound = abs(pref) * (
        abs(e1.value) * e2.error_bound + abs(e2.value) * e1.error_bound
    )
    return value, bound


def _v2_direct_jets(xf, prec: int, length: int = 4):
    c0 = _branch_point(prec + 24)
    c = _support_end(prec + 24)
    xj = Jet.variable(xf, length)
    zj = 1 - c0 * xj
    pref = (xj - c0) * (c - xj).sqrt() / (c - c0)
    t1, _ = heun_taylor(_H1, zj.value, prec + 24, length)
    t2, _ = heun_taylor(_H2, zj.value, prec + 24, length)
    return pref * compose_taylor(t1, zj) * compose_taylor(t2, zj)


class _RightBranchEvaluator:
    """Cached per-precision machinery for v2 between 1/c and 1/c + 8.

    A single direct product evaluation at distance 8 seeds a chain of Taylor
    expansions of the operator that halves its way toward the singular point;
    below 2^-10 the local Frobenius basis (matched against the chain) takes
    over.  All expansions live at working precision prec+pad.
    """

    _PAD = 48

    def __init__(self, prec: int):
        self.prec = prec
        self.work = prec + self._PAD
        with mp.workprec(self.work):
            self.c0 = _branch_point(self.work)
            self.n_taylor = prec + 64
            self._build_chain()
            self._match_local_basis()

    def _build_chain(self):
        distance = _DIRECT_MIN
        point = self.c0 + distance
        jet = _v2_direct_jets(point, self.prec + 16, 3)
        derivs = [jet.coeffs[0], jet.coeffs[1], jet.coeffs[2] * 2]
        self.nodes: List[Tuple[mpmath.mpf, List[mpmath.mpf]]] = []
        self.node_distances: List[mpmath.mpf] = []
        floor = mpmath.mpf(2) ** _LOCAL_MAX_EXP
        while True:
            coeffs = odecheck.taylor_from_derivs(point, derivs, self.n_taylor)
            self.nodes.append((point, coeffs))
            self.node_distances.append(distance)
            next_distance = distance / 2
            next_point = self.c0 + next_distance
            derivs = self._taylor_eval_derivs(coeffs, next_point - point)
            distance, point = next_distance, next_point
            if distance < floor:
                break
        self.local_match_derivs = derivs
        self.local_match_point = point

    @staticmethod
    def _taylor_eval_derivs(coeffs, h):
        value = mpmath.mpf(0)
        d1 = mpmath.mpf(0)
        d2 = mpmath.mpf(0)
        for k in range(len(coeffs) - 1, -1, -1):
            value = value * h + coeffs[k]
            if k >= 1:
                d1 = d1 * h + k * coeffs[k]
            if k >= 2:
                d2 = d2 * h + k * (k - 1) * coeffs[k]
        return [value, d1, d2]

    def _match_local_basis(self):
        self.basis = odecheck.frobenius_basis("c0", self.n_taylor)
        t = self.local_match_point - self.c0
        half = mpmath.mpf(1) / 2
        rows = []
        for order in range(3):
            row = []
            for key, rho in (("0", mpmath.mpf(0)), ("half", half), ("1", mpmath.mpf(1))):
                series = self.basis[key]
                acc = mpmath.mpf(0)
                tpow = t ** (rho - order)
                for k, coeff in enumerate(series):
                    expo = rho + k
                    ff = mpmath.mpf(1)
                    for step in range(order):
                        ff *= expo - step
                    if ff:
                        acc += coeff * ff * tpow
                    tpow *= t
                row.append(acc)
            rows.append(row)
        solution = mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(self.local_match_derivs))
        self.local_weights = [solution[0], solution[1], solution[2]]

    # -- evaluation -----------------------------------------------------------

    def value(self, xf) -> Tuple[mpmath.mpf, mpmath.mpf]:
        with mp.workprec(self.work):
            d = xf - self.c0
            if d <= 0:
                raise DomainError("right-branch evaluator needs x > 1/c")
            if d >= _DIRECT_MIN:
                raise DomainError("beyond the chain anchor")
            if d <= mpmath.mpf(2) ** _LOCAL_MAX_EXP:
                return self._local_value(d)
            # Node just above d: chain distances halve from the anchor, so the
            # evaluation sits within half the node's own distance from the
            # singular point, i.e. well inside the Taylor disk.
            m = int(mpmath.floor(mpmath.log(_DIRECT_MIN / d, 2)))
            m = min(len(self.nodes) - 1, max(0, m))
            point, coeffs = self.nodes[m]
            h = xf - point
            acc = _sum_ascending(coeffs, h, self.work)
            ratio = abs(h) / (point - self.c0)
            tail = abs(coeffs[-1] * h ** (len(coeffs) - 1)) * ratio / (1 - ratio)
            return acc, tail + abs(acc) * mpmath.mpf(2) ** (40 - self.work)

    def _local_value(self, d) -> Tuple[mpmath.mpf, mpmath.mpf]:
        alpha, beta, gamma = self.local_weights
        f0 = self._local_series_value("0", d)
        fh = self._local_series_value("half", d)
        f1 = self._local_series_value("1", d)
        value = alpha * f0 + beta * mpmath.sqrt(d) * fh + gamma * d * f1
        return value, abs(value) * mpmath.mpf(2) ** (44 - self.work) + mpmath.mpf(2) ** (
            44 - self.work
        )

    def _local_series_value(self, key, d):
        return _sum_ascending(self.basis[key], d, self.work)

    def branch_point_value(self) -> Tuple[mpmath.mpf, mpmath.mpf]:
        alpha = self.local_weights[0]
        return alpha, abs(alpha) * mpmath.mpf(2) ** (44 - self.work)


_RIGHT_EVALUATORS: Dict[int, _RightBranchEvaluator] = {}


def _right_evaluator(prec: int) -> _RightBranchEvaluator:
    ev = _RIGHT_EVALUATORS.get(prec)
    if ev is None:
        ev = _RightBranchEvaluator(prec)
        _RIGHT_EVALUATORS[prec] = ev
    return ev


def v2_eval(x, prec: int = 256, tol=None) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """v2 on [1/c, c]: value and error bound.

    Far from 1/c the Heun product is summed directly (honouring tol when
    given); closer in, the cached continuation chain and the local basis
    supply the value at full precision regardless of the series stall.
    """
    work = prec + 16
    with mp.workprec(work):
        xf = _mpf(x)
        c = _support_end(work)
        c0 = _branch_point(work)
        # Snap arguments within a caller-precision ulp of either endpoint so
        # that endpoint constants rounded at prec are accepted.
        snap = mpmath.mpf(2) ** (4 - prec)
        if abs(xf - c0) <= c0 * snap:
            xf = c0
        if abs(xf - c) <= c * snap:
            xf = c
        if not (c0 <= xf <= c):
            raise DomainError("argument must lie in [1/c, c]")
        if xf == c:
            return mpmath.mpf(0), mpmath.mpf(0)
        d = xf - c0
        if d == 0:
            value, bound = _right_evaluator(prec).branch_point_value()
        elif d >= _DIRECT_MIN:
            try:
                value, bound = _v2_direct(xf, prec, tol)
            except HeunNotConverged as stalled:
                value, bound = stalled.value, stalled.error_bound
        else:
            value, bound = _right_evaluator(prec).value(xf)
    with mp.workprec(prec):
        return +value, +bound + abs(value) * mpmath.mpf(2) ** (8 - prec)


def v2_derivs(x, prec: int = 256):
    """(v2, v2', v2'', v2''') via term-wise differentiated closed forms;
    needs x - 1/c >= 1 where the direct product converges comfortably."""
    with mp.workprec(prec + 24):
        xf = _mpf(x)
        c = _support_end(prec + 24)
        c0 = _branch_point(prec + 24)
        if not (c0 + mpmath.mpf(1) / 2 <= xf < c):
            raise DomainError("derivative handle serves the direct zone only")
        jet = _v2_direct_jets(xf, prec, 4)
        derivs = jet.derivatives()
    with mp.workprec(prec):
        return [+d for d in derivs]


# ---------------------------------------------------------------------------
# The density.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityPoint:
    x: mpmath.mpf
    phi: mpmath.mpf
    branch: str  # "left" or "right"
    error_bound: mpmath.mpf


@dataclass(frozen=True)
class EndpointConstants:
    sqrt_slope_right: mpmath.mpf  # B in u_inf(c+delta) = A + B sqrt(delta) + ...
    log2_coeff_left: mpmath.mpf  # C in u_inf(-delta) = C log(delta)^2 + ...
    scale_right: mpmath.mpf  # phi = scale_right * v2 on [1/c, c)
    scale_left: mpmath.mpf  # phi = scale_left * v0 on (0, 1/c)


def endpoint_constants(prec: int = 256) -> EndpointConstants:
    with mp.workprec(prec):
        root2 = mpmath.sqrt(2)
        denom = 2 ** mpmath.mpf("1.25") * (root2 + 1) ** 4
        return EndpointConstants(
            sqrt_slope_right=-1 / (denom * mpmath.pi),
            log2_coeff_left=-3 / mpmath.pi**2,
            scale_right=1 / (denom * mpmath.pi**2),
            scale_left=-6 / mpmath.pi**2,
        )


def phi(x, prec: int = 256, tol=None) -> DensityPoint:
    """The moment density on (0, c); right branch on [1/c, c] inclusive."""
    work = prec + 16
    with mp.workprec(work):
        xf = _mpf(x)
        c = _support_end(work)
        c0 = _branch_point(work)
        if not (0 < xf < c):
            raise DomainError("density is defined on (0, c)")
        constants = endpoint_constants(work)
        if abs(xf - c0) <= c0 * mpmath.mpf(2) ** (4 - prec):
            xf = c0  # the right branch owns the closed endpoint
        if xf < c0:
            value, bound = v0_eval(xf, work)
            phi_value = constants.scale_left * value
            phi_bound = abs(constants.scale_left) * bound
            branch = "left"
        else:
            scaled_tol = None
            if tol is not None:
                with mp.workprec(work):
                    scaled_tol = mpmath.mpf(tol) / abs(constants.scale_right)
            value, bound = v2_eval(xf, work, tol=scaled_tol)
            phi_value = constants.scale_right * value
            phi_bound = abs(constants.scale_right) * bound
            branch = "right"
    with mp.workprec(prec):
        return DensityPoint(x=+xf, phi=+phi_value, branch=branch, error_bound=+phi_bound)
