"""Singular-endpoint quadrature for the moment integrals.

Composite Gauss-Legendre panels on meshes graded geometrically (ratio 1/2)
into every flagged endpoint; the integrand has a logarithm at 0, a half-power
at c, and steep square-root behaviour plus slow series convergence around the
interior point 1/c, all of which the grading absorbs without substitution
tricks.  Error estimates come from agreement under one dyadic refinement of
the whole mesh, plus the propagated evaluation bounds.

Density values at the quadrature nodes do not depend on the moment index, so
the node data is computed once per mesh configuration and shared by every k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mp

from apery_moments.apery import apery_recurrence
from apery_moments.density import phi
from apery_moments.exactnum import BRANCH_POINT, SUPPORT_END, to_mpf


@dataclass(frozen=True)
class QuadratureSpec:
    order: int = 30
    levels: int = 40
    prec: int = 256
    rel_tol: float = 1e-6
    split_at_branch_point: bool = True


_GL_CACHE: Dict[Tuple[int, int], Tuple[List[mpmath.mpf], List[mpmath.mpf]]] = {}


def gauss_legendre(order: int, prec: int) -> Tuple[List[mpmath.mpf], List[mpmath.mpf]]:
    """Nodes and weights on [-1, 1]; Newton refinement of cosine seeds."""
    key = (order, prec)
    cached = _GL_CACHE.get(key)
    if cached is not None:
        return cached
    work = prec + 24
    nodes: List[mpmath.mpf] = []
    weights: List[mpmath.mpf] = []
    with mp.workprec(work):
        for i in range(order):
            # Seed good to ~1e-3; Newton squares the accuracy each pass.
            t = mpmath.mpf(math.cos(math.pi * (i + 0.75) / (order + 0.5)))
            for _ in range(int(math.log2(work / 10)) + 4):
                p_prev, p_curr = mpmath.mpf(1), t
                for k in range(1, order):
                    p_prev, p_curr = p_curr, ((2 * k + 1) * t * p_curr - k * p_prev) / (k + 1)
                dp = order * (p_prev - t * p_curr) / (1 - t * t)
                t -= p_curr / dp
            p_prev, p_curr = mpmath.mpf(1), t
            for k in range(1, order):
                p_prev, p_curr = p_curr, ((2 * k + 1) * t * p_curr - k * p_prev) / (k + 1)
            dp = order * (p_prev - t * p_curr) / (1 - t * t)
            nodes.append(t)
            weights.append(2 / ((1 - t * t) * dp * dp))
    _GL_CACHE[key] = (nodes, weights)
    return nodes, weights


def _graded_breakpoints(a, b, spec: QuadratureSpec, graded_left: bool, graded_right: bool):
    """Panel breakpoints of (a, b), geometrically refined into flagged ends."""
    points = [a]
    mid = (a + b) / 2
    if graded_left:
        width = mid - a
        for j in range(spec.levels, 0, -1):
            points.append(a + width * mpmath.mpf(2) ** (-j))
    points.append(mid)
    if graded_right:
        width = b - mid
        for j in range(1, spec.levels + 1):
            points.append(b - width * mpmath.mpf(2) ** (-j))
    points.append(b)
    return points


@dataclass
class PanelValue:
    left: mpmath.mpf
    right: mpmath.mpf
    value: mpmath.mpf
    eval_bound: mpmath.mpf


def _panel_sum(f, points: Sequence, spec: QuadratureSpec) -> List[PanelValue]:
    nodes, weights = gauss_legendre(spec.order, spec.prec)
    out: List[PanelValue] = []
    for left, right in zip(points, points[1:]):
        half = (right - left) / 2
        center = (left + right) / 2
        total = mpmath.mpf(0)
        bound = mpmath.mpf(0)
        for t, w in zip(nodes, weights):
            value, err = f(center + half * t)
            total += w * value
            bound += w * err
        out.append(PanelValue(left, right, total * half, bound * half))
    return out


def _refine(points: Sequence) -> List:
    fine: List = []
    for left, right in zip(points, points[1:]):
        fine.append(left)
        fine.append((left + right) / 2)
    fine.append(points[-1])
    return fine


def integrate(
    f: Callable,
    a,
    b,
    spec: QuadratureSpec,
    graded_left: bool = False,
    graded_right: bool = False,
) -> Tuple[mpmath.mpf, mpmath.mpf, List[PanelValue]]:
    """Composite panel rule with one dyadic-refinement error estimate.

    The integrand is called as f(x) and must return (value, error_bound).
    Returns (value, error_estimate, refined_panels).
    """
    with mp.workprec(spec.prec + 16):
        a = mpmath.mpf(a) if not isinstance(a, mpmath.mpf) else a
        b = mpmath.mpf(b) if not isinstance(b, mpmath.mpf) else b
        coarse_points = _graded_breakpoints(a, b, spec, graded_left, graded_right)
        coarse = _panel_sum(f, coarse_points, spec)
        fine = _panel_sum(f, _refine(coarse_points), spec)
        coarse_total = mpmath.mpf(0)
        for p in coarse:
            coarse_total += p.value
        fine_total = mpmath.mpf(0)
        eval_bound = mpmath.mpf(0)
        for p in fine:
            fine_total += p.value
            eval_bound += abs(p.eval_bound)
        estimate = abs(fine_total - coarse_total) + eval_bound
    with mp.workprec(spec.prec):
        return +fine_total, +estimate, fine


# ---------------------------------------------------------------------------
# Shared density node data.
# ---------------------------------------------------------------------------


@dataclass
class _MeshData:
    # Per node: position, combined weight, density value, density bound.
    nodes: List[Tuple[mpmath.mpf, mpmath.mpf, mpmath.mpf, mpmath.mpf]]
    panel_spans: List[Tuple[mpmath.mpf, mpmath.mpf, int]]  # (left, right, node_count)


class _DensityQuadrature:
    """Density evaluations on the coarse and refined meshes, once per config."""

    def __init__(self, spec: QuadratureSpec):
        self.spec = spec
        prec = spec.prec
        with mp.workprec(prec + 16):
            c = to_mpf(SUPPORT_END, prec + 16)
            c0 = to_mpf(BRANCH_POINT, prec + 16)
            if spec.split_at_branch_point:
                pieces = [(mpmath.mpf(0), c0), (c0, c)]
            else:
                pieces = [(mpmath.mpf(0), c)]
            coarse_points: List = []
            for a, b in pieces:
                coarse_points.append(_graded_breakpoints(a, b, spec, True, True))
            self.coarse = self._mesh_data([p for pts in coarse_points for p in [pts]])
            self.fine = self._mesh_data([_refine(pts) for pts in coarse_points])

    def _mesh_data(self, point_lists: List[List]) -> _MeshData:
        spec = self.spec
        gl_nodes, gl_weights = gauss_legendre(spec.order, spec.prec)
        nodes = []
        spans = []
        for points in point_lists:
            for left, right in zip(points, points[1:]):
                half = (right - left) / 2
                center = (left + right) / 2
                for t, w in zip(gl_nodes, gl_weights):
                    x = center + half * t
                    point = phi(x, spec.prec)
                    nodes.append((x, w * half, point.phi, point.error_bound))
                spans.append((left, right, spec.order))
        return _MeshData(nodes=nodes, panel_spans=spans)


_QUADRATURE_CACHE: Dict[Tuple[int, int, int, bool], _DensityQuadrature] = {}


def _density_quadrature(spec: QuadratureSpec) -> _DensityQuadrature:
    key = (spec.order, spec.levels, spec.prec, spec.split_at_branch_point)
    data = _QUADRATURE_CACHE.get(key)
    if data is None:
        data = _DensityQuadrature(spec)
        _QUADRATURE_CACHE[key] = data
    return data


def _weighted_moment(mesh: _MeshData, k: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    total = mpmath.mpf(0)
    bound = mpmath.mpf(0)
    for x, w, value, err in mesh.nodes:
        xk = x**k if k else mpmath.mpf(1)
        total += w * xk * value
        bound += abs(w * xk * err)
    return total, bound


# ---------------------------------------------------------------------------
# Moment reports.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    k: int
    quadrature: mpmath.mpf
    exact: int
    rel_error: mpmath.mpf
    error_estimate: mpmath.mpf
    panels: int
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "ok " if self.passed else "FAIL"
        return (
            f"k={self.k:>2}  {status} quadrature={mpmath.nstr(self.quadrature, 20):<28}"
            f" exact={self.exact}  rel_err={mpmath.nstr(self.rel_error, 3)}"
        )


def moment(k: int, spec: QuadratureSpec = QuadratureSpec(), exact: Optional[int] = None) -> MomentReport:
    """Quadrature of x^k against the density, compared with the integer value."""
    if k < 0:
        raise ValueError("moment index must be nonnegative")
    if exact is None:
        exact = apery_recurrence(max(k, 1)).values[k]
    data = _density_quadrature(spec)
    with mp.workprec(spec.prec + 16):
        coarse_value, _ = _weighted_moment(data.coarse, k)
        fine_value, fine_bound = _weighted_moment(data.fine, k)
        estimate = abs(fine_value - coarse_value) + fine_bound
        rel = abs(fine_value - exact) / exact
    with mp.workprec(spec.prec):
        return MomentReport(
            k=k,
            quadrature=+fine_value,
            exact=exact,
            rel_error=+rel,
            error_estimate=+estimate,
            panels=len(data.fine.panel_spans),
            tolerance=spec.rel_tol,
            passed=rel <= mpmath.mpf(spec.rel_tol),
        )


def moment_suite(k_max: int, spec: QuadratureSpec = QuadratureSpec()) -> List[MomentReport]:
    exact_values = apery_recurrence(max(k_max, 1)).values
    return [moment(k, spec, exact=exact_values[k]) for k in range(k_max + 1)]


def right_tail_mass_fraction(k: int, spec: QuadratureSpec = QuadratureSpec()) -> mpmath.mpf:
    """Fraction of the k-th moment carried by nodes right of c/2."""
    data = _density_quadrature(spec)
    prec = spec.prec
    with mp.workprec(prec + 16):
        c = to_mpf(SUPPORT_END, prec + 16)
        total = mpmath.mpf(0)
        tail = mpmath.mpf(0)
        for x, w, value, _ in data.fine.nodes:
            contribution = w * x**k * value
            total += contribution
            if x >= c / 2:
                tail += contribution
        result = tail / total
    with mp.workprec(prec):
        return +result


def node_positivity_check(spec: QuadratureSpec = QuadratureSpec()) -> bool:
    """Every density evaluation used by the rule is positive."""
    data = _density_quadrature(spec)
    return all(value > 0 for _, _, value, _ in data.fine.nodes)
