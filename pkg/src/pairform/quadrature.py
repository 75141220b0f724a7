"""Grundmann-Moeller quadrature on simplices.

The rule with parameter ``s`` integrates polynomials of total degree
``2s + 1`` exactly on an n-simplex of any dimension.  Points are returned
in barycentric coordinates and weights are normalized so they sum to one,
i.e. the rule approximates the *average* of a function over the simplex.
Some weights are negative for ``s >= 1``.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ParameterError


def _compositions(total, parts):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _gm(n, s):
    d = 2 * s + 1
    pts, wts = [], []
    for i in range(s + 1):
        denom = d + n - 2 * i
        w = (-1) ** i * 2.0 ** (-2 * s) * denom ** d / (math.factorial(i) * math.factorial(d + n - i))
        for beta in _compositions(s - i, n + 1):
            pts.append([(2 * b + 1) / denom for b in beta])
            wts.append(w)
    pts = np.array(pts)
    # the raw weights integrate over the unit simplex of volume 1/n!
    wts = np.array(wts) * math.factorial(n)
    pts.flags.writeable = False
    wts.flags.writeable = False
    return pts, wts


def grundmann_moller(n, s):
    """Barycentric points ``(q, n+1)`` and weights ``(q,)`` of the GM rule."""
    n, s = int(n), int(s)
    if n < 0 or s < 0:
        raise ParameterError("grundmann_moller needs n >= 0 and s >= 0")
    return _gm(n, s)


def rule_for_degree(n, degree):
    """Smallest GM rule exact for total degree ``degree``."""
    degree = int(degree)
    if degree < 0:
        raise ParameterError("quadrature degree must be >= 0")
    return grundmann_moller(n, max(0, (degree) // 2))


def quadrature_points(P, bary):
    """Map barycentric points onto simplices: ``(m, n+1, d) -> (m, q, d)``."""
    return np.einsum("qi,mid->mqd", bary, P)


def simplex_average(func, P, degree=5):
    """Average of ``func`` over each simplex in ``P`` (shape ``(m, n+1, d)``).

    ``func`` receives points of shape ``(k, d)`` and returns ``(k,)``.
    """
    P = np.asarray(P, dtype=float)
    m, n1, d = P.shape
    bary, w = rule_for_degree(n1 - 1, degree)
    X = quadrature_points(P, bary).reshape(-1, d)
    vals = np.asarray(func(X), dtype=float).reshape(m, len(w))
    return vals @ w


def monomial_integral(alpha):
    """Exact integral of prod x_i**alpha_i over the unit simplex {x >= 0, sum x <= 1}."""
    n = len(alpha)
    num = math.prod(math.factorial(a) for a in alpha)
    return num / math.factorial(sum(alpha) + n)
