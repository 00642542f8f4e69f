"""Heun general functions: exact Maclaurin coefficient streams, series
evaluation with geometric tail bounds, and fully exact certification that
all coefficients of the two density factors are positive.

The certification follows the ratio-induction shape: with r_n = p_n/p_{n-1},
the update r_{n+1} = (q+Q_n)/R_n - (P_n/R_n)/r_n is increasing in r_n, so a
bracket 1 - 1/(kappa*n) < r_n < 1/a propagates to n+1 provided the two
endpoint substitutions land back inside the bracket.  Clearing the (positive)
denominators turns each endpoint condition into a polynomial inequality in n
over Q(sqrt2); substituting n = n0 + m and checking every coefficient of the
polynomial in m is nonnegative (with a positive value at m = 0) certifies it
for every integer n >= n0 at once.  No floating point is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mp

from apery_moments import qpoly
from apery_moments.exactnum import QSqrt2, qsqrt2_sign, to_mpf


class HeunDomainError(ValueError):
    """Argument outside the series' disk of convergence."""


class HeunNotConverged(RuntimeError):
    """Series evaluation ran out of terms before meeting the tolerance."""

    def __init__(self, message: str, value: mpmath.mpf, error_bound: mpmath.mpf, terms: int):
        super().__init__(message)
        self.value = value
        self.error_bound = error_bound
        self.terms = terms


class CertificationError(RuntimeError):
    """An exact positivity check failed or was inconclusive."""


def _q(value) -> QSqrt2:
    return QSqrt2.coerce(value)


@dataclass(frozen=True)
class HeunParams:
    """The seven-parameter family; epsilon is pinned by the consistency
    identity alpha+beta+1 = gamma+delta+epsilon."""

    a: QSqrt2
    q: QSqrt2
    alpha: QSqrt2
    beta: QSqrt2
    gamma: QSqrt2
    delta: QSqrt2

    def __post_init__(self):
        for name in ("a", "q", "alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        if not self.a:
            raise ValueError("parameter a must be nonzero")
        if not self.delta:
            raise ValueError("parameter delta must be nonzero")
        g = self.gamma
        if g.is_rational and g.a.denominator == 1 and g.a <= 0:
            raise ValueError("gamma must not be zero or a negative integer")

    @property
    def epsilon(self) -> QSqrt2:
        return self.alpha + self.beta + 1 - self.gamma - self.delta

    def recurrence_r(self, n: int) -> QSqrt2:
        return self.a * (n + 1) * (self.gamma + n)

    def recurrence_q(self, n: int) -> QSqrt2:
        return ((self.gamma + (n - 1)) * (1 + self.a) + self.a * self.delta + self.epsilon) * n

    def recurrence_p(self, n: int) -> QSqrt2:
        return (self.alpha + (n - 1)) * (self.beta + (n - 1))

    def radius(self) -> QSqrt2:
        """min(1, |a|), the radius of convergence of the Maclaurin series."""
        mag = abs(self.a)
        return mag if mag < 1 else QSqrt2(1)


#: Parameters of the two certified-positive factors in the right-branch
#: density product, keyed by the CLI case names.
LEMMA_CASES: Dict[str, HeunParams] = {
    "L2": HeunParams(
        a=QSqrt2(-576, 408),
        q=QSqrt2(Fraction(-1317, 4), 234),
        alpha=_q(Fraction(3, 2)),
        beta=_q(Fraction(3, 2)),
        gamma=_q(Fraction(3, 2)),
        delta=_q(1),
    ),
    "L6": HeunParams(
        a=QSqrt2(-576, 408),
        q=QSqrt2(-42, 30),
        alpha=_q(1),
        beta=_q(1),
        gamma=_q(Fraction(1, 2)),
        delta=_q(1),
    ),
}

#: Certification thresholds (n0, kappa) for the two cases.
LEMMA_THRESHOLDS: Dict[str, Tuple[int, int]] = {"L2": (45, 10), "L6": (18, 4)}

#: The Heun function whose square generates the Apery numbers (argument c*x).
APERY_FACTOR = HeunParams(
    a=QSqrt2(577, 408),
    q=QSqrt2(Fraction(85, 2), 30),
    alpha=_q(Fraction(1, 2)),
    beta=_q(Fraction(1, 2)),
    gamma=_q(1),
    delta=_q(Fraction(1, 2)),
)


@dataclass(frozen=True)
class HeunSeries:
    params: HeunParams
    coeffs: Tuple[QSqrt2, ...]

    def recurrence_residual(self, n: int) -> QSqrt2:
        """R_n p_{n+1} - (q+Q_n) p_n + P_n p_{n-1}, identically zero."""
        p = self.coeffs
        return (
            self.params.recurrence_r(n) * p[n + 1]
            - (self.params.q + self.params.recurrence_q(n)) * p[n]
            + self.params.recurrence_p(n) * p[n - 1]
        )


def heun_coeffs(params: HeunParams, n_terms: int) -> HeunSeries:
    """Exact p_0..p_{n_terms} from the three-term recurrence."""
    if n_terms < 0:
        raise ValueError("need n_terms >= 0")
    coeffs: List[QSqrt2] = [QSqrt2(1)]
    if n_terms >= 1:
        coeffs.append(params.q / (params.a * params.gamma))
    for n in range(1, n_terms):
        nxt = (
            (params.q + params.recurrence_q(n)) * coeffs[n]
            - params.recurrence_p(n) * coeffs[n - 1]
        ) / params.recurrence_r(n)
        coeffs.append(nxt)
    return HeunSeries(params, tuple(coeffs))


# ---------------------------------------------------------------------------
# Polynomials over Q(sqrt2), coefficient lists in ascending degree.
# ---------------------------------------------------------------------------

QPoly = Tuple[QSqrt2, ...]

_ZERO = QSqrt2(0)
_ONE = QSqrt2(1)


def _poly(coeffs: Sequence) -> QPoly:
    return qpoly.poly([_q(c) for c in coeffs])


_poly_add = qpoly.poly_add
_poly_sub = qpoly.poly_sub
_poly_mul = qpoly.poly_mul
_poly_scale = qpoly.poly_scale
_poly_eval = qpoly.poly_eval
_poly_shift = qpoly.poly_shift


def _recurrence_polys(params: HeunParams) -> Tuple[QPoly, QPoly, QPoly]:
    """(R, q+Q, P) as exact polynomials in the index n."""
    a, g = params.a, params.gamma
    r = _poly_mul(_poly([a, a]), _poly([g, 1]))  # a(n+1)(n+gamma)
    q_poly = _poly_mul(
        _poly([_ZERO, _ONE]),
        _poly([(g - 1) * (1 + a) + a * params.delta + params.epsilon, 1 + a]),
    )
    qq = _poly_add((params.q,), q_poly)
    p = _poly_mul(_poly([params.alpha - 1, 1]), _poly([params.beta - 1, 1]))
    return r, qq, p


@dataclass(frozen=True)
class PositivityCertificate:
    """Witness that every Maclaurin coefficient of the series is positive.

    The witness polynomials are expressed in m = n - n0; every coefficient is
    >= 0 and each constant term is > 0, which proves the corresponding cleared
    inequality for all integers n >= n0.
    """

    params: HeunParams
    n0: int
    kappa: int
    base_checked: bool
    induction_checked: bool
    witnesses: Dict[str, QPoly] = field(repr=False)

    def lower_bound(self, n: int) -> QSqrt2:
        return _ONE - QSqrt2(Fraction(1, self.kappa * n))

    def upper_bound(self) -> QSqrt2:
        return 1 / self.params.a


def _require_nonneg_shift(name: str, poly: QPoly, n0: int, witnesses: Dict[str, QPoly]):
    """Shift-and-expand certification of poly(n) > 0 for all n >= n0."""
    shifted = _poly_shift(poly, n0)
    if qsqrt2_sign(shifted[0]) <= 0:
        raise CertificationError(
            f"{name}: value at n = {n0} is not positive"
            f" (counterexample n = {_scan_counterexample(poly, n0)})"
        )
    for degree, coeff in enumerate(shifted):
        if qsqrt2_sign(coeff) < 0:
            hint = _scan_counterexample(poly, n0)
            raise CertificationError(
                f"{name}: shift-and-expand inconclusive, coefficient of m^{degree} "
                f"is negative (direct scan counterexample: {hint})"
            )
    witnesses[name] = shifted


def _scan_counterexample(poly: QPoly, n0: int, span: int = 1000) -> Optional[int]:
    for n in range(n0, n0 + span + 1):
        if qsqrt2_sign(_poly_eval(poly, n)) <= 0:
            return n
    return None


def certify_positive(params: HeunParams, n0: int, kappa: int) -> PositivityCertificate:
    """Exact proof that all Maclaurin coefficients of the series are positive.

    Checks, entirely in Q(sqrt2):
      (i)   p_0 .. p_{n0} > 0;
      (ii)  1 - 1/(kappa*n0) < r_{n0} < 1/a;
      (iii) both endpoint substitutions of the ratio bracket map back inside
            the bracket for every integer n >= n0, certified coefficientwise
            after the n = n0 + m shift.

    Raises CertificationError with the failed inequality (and the smallest
    counterexample within n0+1000, when one exists) otherwise.
    """
    if n0 < 1 or kappa < 1 or kappa * n0 <= 1:
        raise ValueError("need n0 >= 1 and kappa*n0 > 1")
    a = params.a
    if qsqrt2_sign(a) <= 0 or not a < 1:
        raise CertificationError("certification requires 0 < a < 1")
    if qsqrt2_sign(params.gamma) <= 0:
        raise CertificationError("certification requires gamma > 0")

    series = heun_coeffs(params, n0)
    for n, p_n in enumerate(series.coeffs):
        if qsqrt2_sign(p_n) <= 0:
            raise CertificationError(f"base check failed: p_{n} <= 0")

    r_n0 = series.coeffs[n0] / series.coeffs[n0 - 1]
    lower = _ONE - QSqrt2(Fraction(1, kappa * n0))
    upper = 1 / a
    if not (lower < r_n0 and r_n0 < upper):
        raise CertificationError(
            f"base bracket failed: r_{n0} not in (1 - 1/{kappa * n0}, 1/a)"
        )

    r_poly, qq_poly, p_poly = _recurrence_polys(params)
    kn = _poly([0, kappa])  # kappa*n
    kn1 = _poly([kappa, kappa])  # kappa*(n+1)
    kn_m1 = _poly([-1, kappa])  # kappa*n - 1
    kn1_m1 = _poly([kappa - 1, kappa])  # kappa*(n+1) - 1

    witnesses: Dict[str, QPoly] = {}

    # Multiplier positivity: R(n) > 0 and P(n) > 0 on n >= n0 keep every
    # denominator clearing below sign-safe, and P/R > 0 makes the update map
    # increasing in r.
    _require_nonneg_shift("R_positive", r_poly, n0, witnesses)
    _require_nonneg_shift("P_positive", p_poly, n0, witnesses)

    g_upper = _poly_sub(qq_poly, _poly_scale(p_poly, a))  # R*g(1/a)
    # g(1/a) > 1 - 1/(kappa(n+1)):   (qq - aP)*k(n+1) - (k(n+1)-1)*R > 0
    _require_nonneg_shift(
        "upper_substitution_above_lower_bound",
        _poly_sub(_poly_mul(g_upper, kn1), _poly_mul(kn1_m1, r_poly)),
        n0,
        witnesses,
    )
    # g(1/a) < 1/a:   R - a*(qq - aP) > 0
    _require_nonneg_shift(
        "upper_substitution_below_upper_bound",
        _poly_sub(r_poly, _poly_scale(g_upper, a)),
        n0,
        witnesses,
    )

    g_lower = _poly_sub(_poly_mul(qq_poly, kn_m1), _poly_mul(p_poly, kn))  # R(kn-1)*g(l_n)
    # g(l_n) > 1 - 1/(kappa(n+1)):
    #   (qq(kn-1) - P kn)*k(n+1) - (k(n+1)-1)(kn-1)*R > 0
    _require_nonneg_shift(
        "lower_substitution_above_lower_bound",
        _poly_sub(
            _poly_mul(g_lower, kn1), _poly_mul(_poly_mul(kn1_m1, kn_m1), r_poly)
        ),
        n0,
        witnesses,
    )
    # g(l_n) < 1/a:   R(kn-1) - a*(qq(kn-1) - P kn) > 0
    _require_nonneg_shift(
        "lower_substitution_below_upper_bound",
        _poly_sub(_poly_mul(r_poly, kn_m1), _poly_scale(g_lower, a)),
        n0,
        witnesses,
    )

    return PositivityCertificate(
        params=params,
        n0=n0,
        kappa=kappa,
        base_checked=True,
        induction_checked=True,
        witnesses=witnesses,
    )


_CERTIFICATES: Dict[HeunParams, PositivityCertificate] = {}


def certificate_for(params: HeunParams) -> Optional[PositivityCertificate]:
    """Cached certificate when params match one of the known cases."""
    if params in _CERTIFICATES:
        return _CERTIFICATES[params]
    for case, case_params in LEMMA_CASES.items():
        if params == case_params:
            n0, kappa = LEMMA_THRESHOLDS[case]
            cert = certify_positive(params, n0, kappa)
            _CERTIFICATES[params] = cert
            return cert
    return None


# ---------------------------------------------------------------------------
# Numeric evaluation.
# ---------------------------------------------------------------------------

class _CoeffTable:
    """Floating images of the exact coefficients, grown on demand.

    The recurrence is iterated directly in mpf arithmetic; the three
    recurrence ingredients are linear/quadratic in n, so each extension step
    costs a handful of multiplications.
    """

    def __init__(self, params: HeunParams, prec: int):
        self.params = params
        self.prec = prec + 24
        with mp.workprec(self.prec):
            self.a = to_mpf(params.a, self.prec)
            self.q = to_mpf(params.q, self.prec)
            self.gamma = to_mpf(params.gamma, self.prec)
            self.delta = to_mpf(params.delta, self.prec)
            self.epsilon = to_mpf(params.epsilon, self.prec)
            self.one_plus_a = to_mpf(params.a + 1, self.prec)
            self.alpha = to_mpf(params.alpha, self.prec)
            self.beta = to_mpf(params.beta, self.prec)
            p1 = to_mpf(params.q / (params.a * params.gamma), self.prec)
        self.coeffs = [mpmath.mpf(1), p1]

    def extend(self, n_terms: int):
        if n_terms < len(self.coeffs):
            return
        with mp.workprec(self.prec):
            p = self.coeffs
            for n in range(len(p) - 1, n_terms):
                r_n = self.a * (n + 1) * (self.gamma + n)
                q_n = ((self.gamma + (n - 1)) * self.one_plus_a + self.a * self.delta + self.epsilon) * n
                p_n = (self.alpha + (n - 1)) * (self.beta + (n - 1))
                p.append(((self.q + q_n) * p[n] - p_n * p[n - 1]) / r_n)


_COEFF_TABLES: Dict[Tuple[HeunParams, int], _CoeffTable] = {}


def _coeff_table(params: HeunParams, prec: int) -> _CoeffTable:
    key = (params, prec)
    table = _COEFF_TABLES.get(key)
    if table is None:
        table = _CoeffTable(params, prec)
        _COEFF_TABLES[key] = table
    return table


@dataclass(frozen=True)
class HeunEval:
    value: mpmath.mpf
    error_bound: mpmath.mpf
    terms: int
    certified: bool


def heun_eval(
    params: HeunParams,
    z,
    prec: int = 256,
    max_terms: int = 1_000_000,
    tol=None,
) -> HeunEval:
    """Partial sum of the Maclaurin series with a geometric tail bound.

    Once past a certificate's threshold the bound uses the certified limit
    ratio |z|/a; otherwise it requires the observed term ratio to stabilise
    below the |z|/radius estimate before trusting it.  Raises HeunDomainError
    outside the disk and HeunNotConverged (carrying the partial value and the
    achieved bound) when max_terms is exhausted first.
    """
    cert = certificate_for(params)
    work = prec + 16
    with mp.workprec(work):
        zf = mpmath.mpf(z) if not isinstance(z, mpmath.mpf) else z
        radius = to_mpf(params.radius(), work)
        if abs(zf) >= radius:
            raise HeunDomainError(f"|z| = {abs(zf)} is outside the radius {radius}")
        if tol is None:
            tolerance = mpmath.mpf(2) ** (8 - prec)
        else:
            tolerance = mpmath.mpf(tol)

        table = _coeff_table(params, prec)
        ratio_limit = abs(zf) / radius
        one_minus = 1 - ratio_limit
        start_bound = cert.n0 if cert is not None else 16
        stable_needed = 0 if cert is not None else 8

        total = mpmath.mpf(0)
        zpow = mpmath.mpf(1)
        term = mpmath.mpf(1)
        stable = 0
        n = 0
        chunk = 64
        while True:
            table.extend(min(max_terms - 1, n + chunk))
            limit = min(len(table.coeffs), max_terms) - 1
            while n <= limit:
                prev_term = term
                term = table.coeffs[n] * zpow
                total += term
                if n > 0 and prev_term != 0:
                    stable = stable + 1 if abs(term) <= abs(prev_term) * ratio_limit * (1 + mpmath.mpf(2) ** -20) else 0
                zpow *= zf
                bound_ready = n >= start_bound and (cert is not None or stable >= stable_needed)
                if bound_ready:
                    tail = abs(term) * ratio_limit / one_minus
                    if tail <= tolerance:
                        with mp.workprec(prec):
                            return HeunEval(+total, +tail, n + 1, cert is not None)
                n += 1
            if n >= max_terms:
                tail = abs(term) * ratio_limit / one_minus if one_minus > 0 else mpmath.inf
                with mp.workprec(prec):
                    raise HeunNotConverged(
                        f"no convergence to {mpmath.nstr(tolerance)} within {max_terms} terms",
                        +total,
                        +tail,
                        n,
                    )
            chunk = min(chunk * 2, 1 << 16)


def heun_taylor(
    params: HeunParams,
    z,
    prec: int = 256,
    length: int = 4,
    max_terms: int = 1_000_000,
    tol=None,
) -> Tuple[List[mpmath.mpf], mpmath.mpf]:
    """Taylor coefficients [H(z), H'(z), H''(z)/2!, ...] with an error bound,
    from the term-wise differentiated Maclaurin series."""
    from apery_moments.jets import Jet

    cert = certificate_for(params)
    work = prec + 16
    with mp.workprec(work):
        zf = mpmath.mpf(z) if not isinstance(z, mpmath.mpf) else z
        radius = to_mpf(params.radius(), work)
        if abs(zf) >= radius:
            raise HeunDomainError(f"|z| = {abs(zf)} is outside the radius {radius}")
        tolerance = mpmath.mpf(tol) if tol is not None else mpmath.mpf(2) ** (8 - prec)
        table = _coeff_table(params, prec)
        ratio_limit = abs(zf) / radius
        start_bound = max(cert.n0 if cert is not None else 24, 4 * length)
        zjet = Jet.variable(zf, length)
        acc = Jet.constant(0, length)
        power = Jet.constant(1, length)
        n = 0
        while True:
            table.extend(min(max_terms - 1, n + 256))
            limit = min(len(table.coeffs), max_terms) - 1
            while n <= limit:
                term = power * table.coeffs[n]
                acc = acc + term
                power = power * zjet
                n += 1
                if n >= start_bound:
                    margin = ratio_limit * (1 + mpmath.mpf(2 * length) / n)
                    if margin < 1:
                        tail = max(abs(c) for c in term.coeffs) * margin / (1 - margin)
                        if tail <= tolerance:
                            return acc.coeffs, tail
            if n >= max_terms:
                margin = ratio_limit * (1 + mpmath.mpf(2 * length) / max(n, 1))
                tail = (
                    max(abs(c) for c in term.coeffs) * margin / (1 - margin)
                    if margin < 1
                    else mpmath.inf
                )
                raise HeunNotConverged(
                    f"no jet convergence within {max_terms} terms", acc.value, tail, n
                )
