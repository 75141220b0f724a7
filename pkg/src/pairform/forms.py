"""Differential forms on R^d represented as evaluation callbacks.

A k-form is a callable ``form(X, V)`` taking base points ``X`` of shape
``(m, d)`` and tangent vectors ``V`` of shape ``(m, k, d)`` and returning
``(m,)`` values.  Wedge products follow the convention in which
``dx1 ^ ... ^ dxk (e1, ..., ek) = 1/k!``, so the value on the edge vectors
of a simplex is its signed volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError


def scalar_values(f, X):
    """Evaluate a scalar function ``f(*coords)`` on points ``X`` (m, d) -> (m,)."""
    X = np.asarray(X, dtype=float)
    m = X.shape[0]
    if callable(f):
        out = f(*X.T)
    else:
        out = f
    return np.broadcast_to(np.asarray(out, dtype=float), (m,)).copy()


@dataclass(frozen=True)
class Form:
    degree: int
    ambient_dim: int
    fn: Callable
    constant: bool = False

    def __call__(self, X, V):
        X = np.asarray(X, dtype=float)
        V = np.asarray(V, dtype=float)
        if self.degree == 0:
            V = np.zeros((X.shape[0], 0, X.shape[1]))
        return np.broadcast_to(np.asarray(self.fn(X, V), dtype=float), (X.shape[0],)).copy()

    def __add__(self, other):
        if (self.degree, self.ambient_dim) != (other.degree, other.ambient_dim):
            raise ParameterError("can only add forms of equal degree and dimension")
        return Form(self.degree, self.ambient_dim, lambda X, V: self(X, V) + other(X, V),
                    self.constant and other.constant)

    def scaled(self, c):
        return Form(self.degree, self.ambient_dim, lambda X, V: c * self(X, V), self.constant)


def elementary_form(indices, d, coeff=1.0):
    """``coeff * dx_{i1} ^ ... ^ dx_{ik}`` with 0-based coordinate indices."""
    idx = list(indices)
    k = len(idx)
    if len(set(idx)) != k or any(not 0 <= i < d for i in idx):
        raise ParameterError(f"bad coordinate indices {indices} for d={d}")
    fact = math.factorial(k)

    def fn(X, V):
        c = scalar_values(coeff, X)
        if k == 0:
            return c
        return c * np.linalg.det(V[:, :, idx]) / fact

    return Form(k, d, fn, constant=not callable(coeff))


def volume_form(d, coeff=1.0):
    return elementary_form(range(d), d, coeff)


def function_form(f, d):
    """A 0-form from a scalar function."""
    return Form(0, d, lambda X, V: scalar_values(f, X), constant=not callable(f))
