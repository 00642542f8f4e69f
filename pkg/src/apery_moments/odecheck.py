"""Residual verification against the third-order Fuchsian operator and exact
Frobenius data at its four singular points 0, 1/c, c, infinity.

The operator (with integer polynomial coefficients, derivative order i -> a_i):

    x^2(x^2-34x+1) u''' + 3x(2x^2-51x+1) u'' + (7x^2-112x+1) u' + (x-5) u = 0

It is hard-coded: the generic Fuchsian engine is out of scope.  The local
exponent-0 solutions at the two interior singular points are pinned down
through the squared second-order (Heun) structure of the closed forms, which
is what makes their first Taylor coefficient well-defined; the third-order
recurrence alone leaves that coefficient free because 0 and 1 are both
indicial roots there.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import mpmath
from mpmath import mp

from apery_moments import qpoly
from apery_moments.exactnum import BRANCH_POINT, QSqrt2, SUPPORT_END, to_mpf
from apery_moments.heun import APERY_FACTOR, HeunParams

#: Coefficient polynomials indexed by derivative order, ascending in x.
DE3_POLYS: Tuple[Tuple[int, ...], ...] = (
    (-5, 1),
    (1, -112, 7),
    (0, 3, -153, 6),
    (0, 0, 1, -34, 1),
)

FINITE_SINGULAR_POINTS: Dict[str, QSqrt2] = {
    "0": QSqrt2(0),
    "c0": BRANCH_POINT,
    "c": SUPPORT_END,
}

SINGULARITY_NAMES = ("0", "c0", "c", "inf")


def de3_coefficients(x, prec: int) -> List[mpmath.mpf]:
    with mp.workprec(prec):
        xf = mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x
        return [qpoly.poly_eval(tuple(map(mpmath.mpf, p)), xf) for p in DE3_POLYS]


def de3_residual(derivs_fn, x, prec: int = 256) -> mpmath.mpf:
    """a3 u''' + a2 u'' + a1 u' + a0 u at x, derivatives from the handle.

    The handle is called as derivs_fn(x, prec) and must return the four true
    derivatives u, u', u'', u''' obtained from term-wise differentiated
    closed forms.
    """
    coeffs = de3_coefficients(x, prec + 8)
    if coeffs[3] == 0:
        raise ValueError(f"x = {x} is a singular point of the operator")
    derivs = derivs_fn(x, prec)
    with mp.workprec(prec):
        return +sum(c * d for c, d in zip(coeffs, derivs))


# ---------------------------------------------------------------------------
# Exact indicial data.
# ---------------------------------------------------------------------------


def shifted_de3_polys(x0: QSqrt2) -> List[Tuple[QSqrt2, ...]]:
    """The four coefficient polynomials rewritten in t = x - x0, exactly."""
    out = []
    for coeffs in DE3_POLYS:
        shifted = qpoly.poly_shift(tuple(QSqrt2.coerce(c) for c in coeffs), x0)
        out.append(shifted)
    return out


def _indicial_poly_finite(x0: QSqrt2) -> Tuple[QSqrt2, ...]:
    shifted = shifted_de3_polys(x0)
    offset = min(
        j - i
        for i, poly in enumerate(shifted)
        for j, c in enumerate(poly)
        if c
    )
    acc: Tuple = (QSqrt2(0),)
    for i, poly in enumerate(shifted):
        for j, c in enumerate(poly):
            if c and j - i == offset:
                acc = qpoly.poly_add(
                    acc, qpoly.poly_scale(qpoly.falling_factorial_poly(i), c)
                )
    return tuple(QSqrt2.coerce(c) for c in acc)


def _indicial_poly_infinity() -> Tuple[QSqrt2, ...]:
    # Substituting u = x^(-rho) and collecting the top power of x.
    offset = max(
        j - i for i, poly in enumerate(DE3_POLYS) for j, c in enumerate(poly) if c
    )
    acc: Tuple = (QSqrt2(0),)
    minus_rho = (QSqrt2(0), QSqrt2(-1))
    for i, poly in enumerate(DE3_POLYS):
        for j, c in enumerate(poly):
            if c and j - i == offset:
                # ff(-rho, i) as a polynomial in rho.
                term: Tuple = (QSqrt2(1),)
                for step in range(i):
                    term = qpoly.poly_mul(
                        term, qpoly.poly_add(minus_rho, (QSqrt2(-step),))
                    )
                acc = qpoly.poly_add(acc, qpoly.poly_scale(term, QSqrt2.coerce(c)))
    return tuple(QSqrt2.coerce(c) for c in acc)


_ROOT_CANDIDATES = [
    Fraction(k, d) for d in (1, 2, 3, 4, 6) for k in range(-24, 25)
]


def _exact_roots(poly: Tuple[QSqrt2, ...]) -> List[Fraction]:
    """All roots of a low-degree polynomial over Q(sqrt2), expected rational."""
    roots: List[Fraction] = []
    current = poly
    while len(current) > 2:
        for candidate in _ROOT_CANDIDATES:
            if not qpoly.poly_eval(current, QSqrt2.coerce(candidate)):
                roots.append(candidate)
                current = _deflate(current, candidate)
                break
        else:
            raise ArithmeticError("indicial root outside the candidate grid")
    if len(current) == 2:
        last = -current[0] / current[1]
        if not last.is_rational:
            raise ArithmeticError(f"irrational indicial root {last}")
        roots.append(last.to_fraction())
    return sorted(roots)


def _deflate(poly: Tuple[QSqrt2, ...], root: Fraction) -> Tuple[QSqrt2, ...]:
    out: List[QSqrt2] = []
    carry = QSqrt2(0)
    for c in reversed(poly):
        carry = c + carry * root
        out.append(carry)
    remainder = out.pop()
    if remainder:
        raise ArithmeticError("deflation by a non-root")
    return tuple(reversed(out))


@dataclass(frozen=True)
class IndicialData:
    singularity: str
    exponents: Tuple[Fraction, ...]
    log_rank: int
    indicial_poly: Tuple[QSqrt2, ...]


def indicial_exponents(singularity: str) -> IndicialData:
    """Exact indicial exponents and the log depth of the local basis."""
    if singularity == "inf":
        poly = _indicial_poly_infinity()
    elif singularity in FINITE_SINGULAR_POINTS:
        poly = _indicial_poly_finite(FINITE_SINGULAR_POINTS[singularity])
    else:
        raise ValueError(f"unknown singularity {singularity!r}")
    roots = _exact_roots(poly)
    max_mult = max(roots.count(r) for r in roots)
    return IndicialData(
        singularity=singularity,
        exponents=tuple(roots),
        log_rank=max_mult - 1,
        indicial_poly=poly,
    )


# ---------------------------------------------------------------------------
# The exponent-0 slope constants via the squared second-order structure.
# ---------------------------------------------------------------------------


def _heun_ode_polys(params: HeunParams) -> List[Tuple[QSqrt2, ...]]:
    """Polynomial form z(z-1)(z-a) w'' + [...] w' + (alpha*beta*z - q) w."""
    a = params.a
    gamma, delta, eps = params.gamma, params.delta, params.epsilon
    b2 = (QSqrt2(0), a, -(a + 1), QSqrt2(1))
    b1 = (
        gamma * a,
        -(gamma * (1 + a) + delta * a + eps),
        gamma + delta + eps,
    )
    b0 = (-params.q, params.alpha * params.beta)
    return [b0, b1, b2]


def heun_local_analytic_series(params: HeunParams, z0: QSqrt2, n_terms: int) -> List[QSqrt2]:
    """Exponent-0 local solution of the Heun equation at z0 in {1, a},
    normalised to 1, exact through order n_terms.

    The local exponents there are {0, 1/2}, so every coefficient is pinned:
    the order-m equation has leading factor m*(C2'(0)*(m-1) + C1(0)) which
    never vanishes for m >= 1.
    """
    b0, b1, b2 = [
        qpoly.poly_shift(p, z0) for p in _heun_ode_polys(params)
    ]
    if b2[0]:
        raise ValueError("z0 is not a singular point of the Heun equation")
    coeffs: List[QSqrt2] = [QSqrt2(1)]
    for m in range(1, n_terms + 1):
        lead = (b2[1] * (m - 1) + b1[0]) * m
        if not lead:
            raise ArithmeticError("unexpected resonance in the local series")
        acc = QSqrt2(0)
        for j in range(2, len(b2)):
            k = m + 1 - j
            if 0 <= k < m:
                acc = acc + b2[j] * (k * (k - 1)) * coeffs[k]
        for j in range(1, len(b1)):
            k = m - j
            if 0 <= k < m:
                acc = acc + b1[j] * k * coeffs[k]
        for j in range(0, len(b0)):
            k = m - 1 - j
            if 0 <= k < m:
                acc = acc + b0[j] * coeffs[k]
        coeffs.append(-acc / lead)
    return coeffs


def local_square_series(point: str, n_terms: int, w1_override: QSqrt2 | None = None) -> List[QSqrt2]:
    """Exponent-0 local solution of the third-order operator at c0 or c,
    built as the square of the second-order local solution, in t = x - x0."""
    if point == "c0":
        z0 = QSqrt2(1)
    elif point == "c":
        z0 = APERY_FACTOR.a  # c*x = c^2 at x = c
    else:
        raise ValueError("point must be 'c0' or 'c'")
    w = heun_local_analytic_series(APERY_FACTOR, z0, n_terms)
    if w1_override is not None:
        w = [w[0], w1_override] + list(w[2:])
    square = qpoly.poly_mul(tuple(w), tuple(w))[: n_terms + 1]
    # zeta = c * t, so coefficient k picks up c^k.
    scale = QSqrt2(1)
    out: List[QSqrt2] = []
    for k in range(n_terms + 1):
        out.append(QSqrt2.coerce(square[k]) * scale if k < len(square) else QSqrt2(0))
        scale = scale * SUPPORT_END
    return out


def substitution_residual(point: str, series: Sequence[QSqrt2], order: int) -> List[QSqrt2]:
    """Exact residual coefficients (orders 0..order) of the operator applied
    to an analytic series at the given singular point."""
    x0 = FINITE_SINGULAR_POINTS[point]
    shifted = shifted_de3_polys(x0)
    series_t = tuple(series)
    residual: Tuple = (QSqrt2(0),)
    deriv = series_t
    for i, b in enumerate(shifted):
        if i > 0:
            deriv = qpoly.poly_derivative(deriv)
        residual = qpoly.poly_add(residual, qpoly.poly_mul(b, deriv))
    padded = list(residual) + [QSqrt2(0)] * (order + 1)
    return [QSqrt2.coerce(c) for c in padded[: order + 1]]


#: Stated first-order coefficients of the exponent-0 solutions.
SLOPE_AT_C0 = QSqrt2(Fraction(-240, 48), Fraction(-169, 48))
SLOPE_AT_C = QSqrt2(Fraction(-240, 48), Fraction(169, 48))


@dataclass(frozen=True)
class SlopeReport:
    slope_c0: QSqrt2
    slope_c: QSqrt2
    matches_c0: bool
    matches_c: bool
    substitution_order: int
    substitution_clean: bool
    involution_consistent: bool

    @property
    def passed(self) -> bool:
        return (
            self.matches_c0
            and self.matches_c
            and self.substitution_clean
            and self.involution_consistent
        )


def frobenius_slope_check(n_terms: int = 10) -> SlopeReport:
    """Verify the first coefficients of the exponent-0 local solutions.

    Each local solution is constructed exactly (square of the second-order
    exponent-0 series, whose coefficients are forced), substituted into the
    operator, and required to have identically zero residual through the
    computed order; the first coefficients are then compared with the stated
    constants -(240 +- 169 sqrt2)/48.  The two constants are also checked to
    be exchanged by the x -> 1/x symmetry of the operator.
    """
    series_c0 = local_square_series("c0", n_terms)
    series_c = local_square_series("c", n_terms)
    check_order = n_terms - 4
    clean = True
    for point, series in (("c0", series_c0), ("c", series_c)):
        residual = substitution_residual(point, series, check_order)
        if any(residual):
            clean = False
    slope_c0, slope_c = series_c0[1], series_c[1]
    # w(x) = u(1/x)/x maps solutions to solutions and swaps the two points:
    # the slopes must satisfy slope_c0 = -c - slope_c * c^2.
    involution = slope_c0 == -SUPPORT_END - slope_c * SUPPORT_END**2
    return SlopeReport(
        slope_c0=slope_c0,
        slope_c=slope_c,
        matches_c0=slope_c0 == SLOPE_AT_C0,
        matches_c=slope_c == SLOPE_AT_C,
        substitution_order=check_order,
        substitution_clean=clean,
        involution_consistent=involution,
    )


# ---------------------------------------------------------------------------
# The coefficient recurrence the operator induces on Maclaurin series.
# ---------------------------------------------------------------------------


def maclaurin_recurrence_polys() -> Dict[int, Tuple[Fraction, ...]]:
    """Polynomials P_s(n) with sum_s P_s(n) e_{n+s} = 0 for any Maclaurin
    series solution sum e_k x^k, derived symbolically from the operator."""
    out: Dict[int, Tuple[Fraction, ...]] = {}
    for i, poly in enumerate(DE3_POLYS):
        for j, c in enumerate(poly):
            if not c:
                continue
            s = i - j
            # ff(n+s, i) as a polynomial in n.
            term = qpoly.poly_shift(qpoly.falling_factorial_poly(i), Fraction(s))
            term = qpoly.poly_scale(term, Fraction(c))
            out[s] = qpoly.poly_add(out.get(s, (Fraction(0),)), term)
    return {s: tuple(Fraction(c) for c in p) for s, p in out.items() if any(p)}


# ---------------------------------------------------------------------------
# Numeric local machinery: Taylor steps at ordinary points and the local
# Frobenius basis at the interior singular point (used by the density module
# to continue solutions toward it).
# ---------------------------------------------------------------------------


def _shifted_polys_mpf(x0) -> List[List[mpmath.mpf]]:
    out = []
    for coeffs in DE3_POLYS:
        poly = [mpmath.mpf(c) for c in coeffs]
        shifted = qpoly.poly_shift(tuple(poly), mpmath.mpf(x0))
        out.append(list(shifted))
    return out


def taylor_from_derivs(x0, derivs: Sequence, n_terms: int) -> List[mpmath.mpf]:
    """Taylor coefficients at an ordinary point from (u, u', u'') there.

    Runs in the caller's working precision; the recurrence solves for each
    next coefficient from the residual orders of the operator.
    """
    b = _shifted_polys_mpf(x0)
    if not b[3][0]:
        raise ValueError("x0 is a singular point")
    e = [mpmath.mpf(derivs[0]), mpmath.mpf(derivs[1]), mpmath.mpf(derivs[2]) / 2]
    for m in range(0, n_terms - 2):
        # Residual order t^m involves e_k with k = m+i-j <= m+3; only the
        # (i=3, j=0) term reaches the unknown e_{m+3}.
        acc = mpmath.mpf(0)
        for i in range(4):
            for j, bij in enumerate(b[i]):
                if not bij:
                    continue
                k = m + i - j
                if k < i or k > m + 2:
                    continue
                ff = mpmath.mpf(1)
                for step in range(i):
                    ff *= k - step
                acc += bij * ff * e[k]
        lead = b[3][0] * (m + 3) * (m + 2) * (m + 1)
        e.append(-acc / lead)
    return e[: n_terms + 1]


def frobenius_basis(point: str, n_terms: int) -> Dict[str, List[mpmath.mpf]]:
    """Local solution basis coefficients at c0 or c, exponents {0, 1/2, 1}.

    Returns coefficient lists keyed "0", "half", "1"; the "half" list holds
    coefficients of t^(1/2+k).  The exponent-0 member uses the e_1 = 0
    normalisation (the basis only needs to span the local space; the pinned
    slope lives in local_square_series).  Runs in the caller's precision.
    """
    x0 = FINITE_SINGULAR_POINTS[point]
    if point not in ("c0", "c"):
        raise ValueError("point must be 'c0' or 'c'")
    b = [
        [to_mpf(c, mp.prec) for c in poly]
        for poly in shifted_de3_polys(x0)
    ]

    def indicial_value(s):
        # Offset -2 terms: (i=3, j=1) and (i=2, j=0).
        return b[3][1] * s * (s - 1) * (s - 2) + b[2][0] * s * (s - 1)

    basis: Dict[str, List[mpmath.mpf]] = {}
    for key, rho in (("0", mpmath.mpf(0)), ("half", mpmath.mpf(1) / 2), ("1", mpmath.mpf(1))):
        e = [mpmath.mpf(1)]
        for m in range(1, n_terms + 1):
            acc = mpmath.mpf(0)
            for i in range(4):
                for j, bij in enumerate(b[i]):
                    if not bij:
                        continue
                    k = m - 2 + i - j
                    if 0 <= k < m:
                        s = rho + k
                        ff = mpmath.mpf(1)
                        for step in range(i):
                            ff *= s - step
                        if ff:
                            acc += bij * ff * e[k]
            lead = indicial_value(rho + m)
            if key == "0" and m == 1:
                # 0 and 1 are both indicial roots; the obstruction vanishes
                # identically and we fix the free coefficient to zero.
                e.append(mpmath.mpf(0))
                continue
            e.append(-acc / lead)
        basis[key] = e
    return basis
