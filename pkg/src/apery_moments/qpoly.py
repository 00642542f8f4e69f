"""Tiny dense polynomial helpers, field-generic.

Coefficient lists are ascending tuples whose entries may be int, Fraction,
QSqrt2 or mpf; the only requirements are ring operations and truthiness of
zero.  Used for the exact inequality certificates and the operator
substitution checks.
"""

from __future__ import annotations

from typing import Sequence, Tuple

Poly = Tuple


def poly(coeffs: Sequence) -> Poly:
    out = tuple(coeffs)
    while len(out) > 1 and not out[-1]:
        out = out[:-1]
    return out


def poly_add(p: Poly, q: Poly) -> Poly:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for k, c in enumerate(q):
        out[k] = out[k] + c
    return poly(out)


def poly_neg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def poly_sub(p: Poly, q: Poly) -> Poly:
    return poly_add(p, poly_neg(q))


def poly_mul(p: Poly, q: Poly) -> Poly:
    out = [p[0] * q[0] * 0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] = out[i + j] + a * b
    return poly(out)


def poly_scale(p: Poly, c) -> Poly:
    return poly([a * c for a in p])


def poly_eval(p: Poly, x):
    acc = p[-1]
    for c in reversed(p[:-1]):
        acc = acc * x + c
    return acc


def poly_shift(p: Poly, h) -> Poly:
    """p(m + h) as a polynomial in m."""
    acc: Poly = (p[-1],)
    x_plus_h: Poly = poly((h, p[-1] * 0 + 1))
    for c in reversed(p[:-1]):
        acc = poly_add(poly_mul(acc, x_plus_h), (c,))
    return acc


def poly_derivative(p: Poly) -> Poly:
    if len(p) == 1:
        return (p[0] * 0,)
    return poly([k * c for k, c in enumerate(p) if k > 0] or [p[0] * 0])


def falling_factorial_poly(i: int) -> Poly:
    """x(x-1)...(x-i+1) with integer coefficients (the empty product is 1)."""
    acc: Poly = (1,)
    for j in range(i):
        acc = poly_mul(acc, (-j, 1))
    return acc
