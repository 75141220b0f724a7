"""Differential-form data extracted from cochains by finite differences.

``van_est`` is the mixed first derivative of ``Omega(x, x + t1 v1, ..., x + tn vn)``
in ``t1..tn`` at zero: a 2^n-point central difference divided by (2h)^n
followed by one Richardson step ``(4 D(h/2) - D(h)) / 3``.  The default
step is ``h = 1e-3 * (1 + |x|)``.

Exterior derivatives use the convention matching the cochain wedge
normalization::

    (d a)(v0..vk) = 1/(k+1) * sum_i (-1)^i  d/dv_i  a(v0..^vi..vk)
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cochain import Cochain, differential, permutation_sign
from .errors import ParameterError, PreconditionError
from .forms import Form


@dataclass(frozen=True)
class FormSample:
    basepoint: np.ndarray
    vectors: np.ndarray
    value: float


@dataclass(frozen=True)
class Jet2:
    """Coefficients of ``f dx + g dx^2`` at a point."""

    f_val: float
    g_val: float


def default_step(X):
    X = np.asarray(X, dtype=float)
    return 1e-3 * (1.0 + np.linalg.norm(X, axis=-1))


def _prep(omega, x, vectors):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    V = np.asarray(vectors, dtype=float).reshape(-1, omega.ambient_dim) if omega.degree else \
        np.zeros((0, omega.ambient_dim))
    if x.shape != (omega.ambient_dim,):
        raise ParameterError(f"basepoint must have {omega.ambient_dim} coordinates")
    if V.shape[0] != omega.degree:
        raise ParameterError(f"need {omega.degree} tangent vectors, got {V.shape[0]}")
    return x, V


def _mixed_central(omega, X, V, h, path):
    """Central 2^n-point mixed difference, batched over base points.

    ``path(X, steps)`` builds the evaluation tuples from base points ``(m, d)``
    and scaled vectors ``(m, n, d)``.
    """
    m, n, _ = V.shape
    acc = np.zeros(m)
    for eps in itertools.product((1.0, -1.0), repeat=n):
        e = np.array(eps)
        steps = V * (e[None, :, None] * h[:, None, None])
        acc = acc + np.prod(e) * omega.evaluate(path(X, steps))
    return acc / (2.0 * h) ** n


def _simple_path(X, steps):
    return np.concatenate([X[:, None, :], X[:, None, :] + steps], axis=1)


def _nerve_path(X, steps):
    return np.concatenate([X[:, None, :], X[:, None, :] + np.cumsum(steps, axis=1)], axis=1)


def _richardson(omega, X, V, h, path):
    d1 = _mixed_central(omega, X, V, h, path)
    d2 = _mixed_central(omega, X, V, h / 2, path)
    return (4.0 * d2 - d1) / 3.0


def van_est_batch(omega, X, V, h=None):
    """Vectorized van Est: base points ``(m, d)``, vectors ``(m, n, d)`` -> ``(m,)``."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    if omega.degree == 0:
        return omega.evaluate(X[:, None, :])
    hh = default_step(X) if h is None else np.broadcast_to(np.asarray(h, dtype=float), X.shape[:1])
    if np.any(hh <= 0):
        raise ParameterError("finite-difference step h must be positive")
    return _richardson(omega, X, V, hh, _simple_path)


def van_est(omega, x, vectors=(), h=None):
    """Estimate ``VE(omega)_x(v1..vn)``; for a 0-cochain this is ``omega(x)``."""
    x, V = _prep(omega, x, vectors)
    return float(van_est_batch(omega, x[None], V[None], h)[0])


def form_sample(omega, x, vectors=(), h=None):
    x, V = _prep(omega, x, vectors)
    return FormSample(x, V, van_est(omega, x, V, h))


def van_est_standard(omega, x, vectors=(), h=None):
    """Antisymmetrized mixed derivative along the nerve path.

    ``sum_s sgn(s) d/dt1..d/dtn omega(x, x + t1 a1, x + t1 a1 + t2 a2, ...)``
    with ``a = v[s]``.
    """
    x, V = _prep(omega, x, vectors)
    n = omega.degree
    if n == 0:
        return float(omega(x))
    hh = default_step(x[None]) if h is None else np.array([float(h)])
    total = 0.0
    for perm in itertools.permutations(range(n)):
        total += permutation_sign(perm) * float(
            _richardson(omega, x[None], V[list(perm)][None], hh, _nerve_path)[0])
    return total


def ve_form(omega, h=None):
    """The van Est image of ``omega`` as a :class:`Form` callback."""
    return Form(omega.degree, omega.ambient_dim, lambda X, V: van_est_batch(omega, X, V, h))


def jet2(omega, x, h=None):
    """First and half-second y-derivatives of ``omega(x, y)`` at ``y = x`` (1-D)."""
    if omega.degree != 1 or omega.ambient_dim != 1:
        raise ParameterError("jet2 needs a degree-1 cochain on R")
    x = float(x)
    base = omega(x, x)
    if abs(base) > 1e-12:
        raise PreconditionError(f"cochain is not normalized at x={x}: Omega(x,x)={base:.3g}")
    h = 1e-3 * (1 + abs(x)) if h is None else float(h)
    if h <= 0:
        raise ParameterError("finite-difference step h must be positive")

    def diffs(hs):
        up, dn = omega(x, x + hs), omega(x, x - hs)
        return (up - dn) / (2 * hs), 0.5 * (up - 2 * base + dn) / hs ** 2

    f1, g1 = diffs(h)
    f2, g2 = diffs(h / 2)
    return Jet2((4 * f2 - f1) / 3, (4 * g2 - g1) / 3)


def leading_term_residual(omega, x, t, vectors=None, h=None):
    """``|omega(x, x+t v1, .., x+t vn) - VE(omega)_x(e1..en) det[t v1 .. t vn]|``.

    Requires a full-dimensional cochain (degree = ambient dimension).
    """
    n, d = omega.degree, omega.ambient_dim
    if n != d or n < 1:
        raise ParameterError("leading_term_residual needs degree == ambient_dim >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    V = np.eye(n) if vectors is None else np.asarray(vectors, dtype=float).reshape(n, d)
    ve = van_est(omega, x, np.eye(n), h)
    P = np.concatenate([x[None], x[None] + t * V])
    return abs(float(omega.evaluate(P)) - ve * float(np.linalg.det(t * V)))


def exterior_derivative(form, x, vectors, h=None):
    """Finite-difference ``(d form)_x(v0..vk)`` for a k-form callback."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    V = np.asarray(vectors, dtype=float).reshape(-1, x.shape[0])
    k1 = V.shape[0]
    hh = float(default_step(x)) if h is None else float(h)

    def deriv(i, rest, step):
        Xs = np.stack([x + step * V[i], x - step * V[i]])
        R = np.repeat(rest[None], 2, axis=0)
        vals = form(Xs, R)
        return (vals[0] - vals[1]) / (2 * step)

    total = 0.0
    for i in range(k1):
        rest = np.delete(V, i, axis=0)
        d1, d2 = deriv(i, rest, hh), deriv(i, rest, hh / 2)
        total += (-1) ** i * (4 * d2 - d1) / 3
    return total / k1


def ve_delta_commutation(omega, x, vectors, h=None):
    """``|VE(delta* omega) - d VE(omega)|`` at ``x`` on ``n+1`` vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    V = np.asarray(vectors, dtype=float).reshape(omega.degree + 1, omega.ambient_dim)
    lhs = van_est(differential(omega), x, V, h)
    rhs = exterior_derivative(ve_form(omega, h), x, V, h)
    return abs(lhs - rhs)
