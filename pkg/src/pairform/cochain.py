"""Cochains on the (local) pair groupoid of an embedded manifold.

A degree-n cochain is a real function of ``n + 1`` points.  Evaluators are
batched: they receive an array of shape ``(m, n+1, d)`` and return ``(m,)``.
Locality is modelled by a radius bounding all pairwise distances inside a
tuple.  Symmetry tags are declarations; :func:`check_symmetry` and
:func:`check_normalized` verify them by sampling.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import quadrature
from .errors import DomainError, EvaluationError, ParameterError, SymmetryError
from .forms import Form, scalar_values

SYMMETRY_TAGS = ("none", "even_invariant", "completely_antisymmetric", "completely_symmetric")
_LOCALITY_SLACK = 1e-12


def _pairwise_max(P):
    if P.shape[1] < 2:
        return np.zeros(P.shape[0])
    diff = P[:, :, None, :] - P[:, None, :, :]
    return np.sqrt((diff ** 2).sum(-1)).reshape(P.shape[0], -1).max(axis=1)


@dataclass(frozen=True)
class Cochain:
    degree: int
    ambient_dim: int
    evaluator: Callable
    locality_radius: float = math.inf
    symmetry_tag: str = "none"
    normalized: bool = False
    name: str = "cochain"

    def __post_init__(self):
        if self.degree < 0 or self.ambient_dim < 1:
            raise ParameterError("cochain needs degree >= 0 and ambient_dim >= 1")
        if not self.locality_radius > 0:
            raise ParameterError("locality_radius must be positive")
        if self.symmetry_tag not in SYMMETRY_TAGS:
            raise ParameterError(f"unknown symmetry tag {self.symmetry_tag!r}")

    def _as_batch(self, P):
        P = np.asarray(P, dtype=float)
        single = P.ndim == 2
        if single:
            P = P[None]
        if P.ndim != 3 or P.shape[1:] != (self.degree + 1, self.ambient_dim):
            raise ParameterError(
                f"{self.name} expects tuples of shape ({self.degree + 1}, {self.ambient_dim}), "
                f"got {P.shape[-2:]}")
        return P, single

    def in_domain(self, P):
        P, _ = self._as_batch(P)
        if math.isinf(self.locality_radius):
            return np.ones(P.shape[0], dtype=bool)
        return _pairwise_max(P) <= self.locality_radius * (1 + _LOCALITY_SLACK)

    def evaluate(self, P, check=True):
        """Evaluate on one tuple ``(n+1, d)`` or a batch ``(m, n+1, d)``."""
        P, single = self._as_batch(P)
        if check and not math.isinf(self.locality_radius):
            ok = self.in_domain(P)
            if not np.all(ok):
                i = int(np.nonzero(~ok)[0][0])
                raise DomainError(
                    f"tuple {i} of {self.name} has points farther apart than the locality "
                    f"radius {self.locality_radius:g}")
        vals = np.asarray(self.evaluator(P), dtype=float)
        vals = np.broadcast_to(vals, (P.shape[0],)).copy()
        return float(vals[0]) if single else vals

    def __call__(self, *points):
        pts = np.stack([np.atleast_1d(np.asarray(p, dtype=float)) for p in points])
        return self.evaluate(pts)

    # arithmetic keeps the weakest common metadata
    def __add__(self, other):
        _compatible(self, other)
        tag = self.symmetry_tag if self.symmetry_tag == other.symmetry_tag else "none"
        return Cochain(self.degree, self.ambient_dim,
                       lambda P: self.evaluator(P) + other.evaluator(P),
                       min(self.locality_radius, other.locality_radius), tag,
                       self.normalized and other.normalized, f"({self.name}+{other.name})")

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, c):
        c = float(c)
        return replace(self, evaluator=lambda P: c * self.evaluator(P), name=f"{c:g}*{self.name}")

    __rmul__ = scaled

    def with_radius(self, r):
        return replace(self, locality_radius=float(r))


def _compatible(a, b):
    if (a.degree, a.ambient_dim) != (b.degree, b.ambient_dim):
        raise ParameterError("cochains must share degree and ambient dimension")


@dataclass(frozen=True)
class RelativeCochain:
    """Pair (interior cochain of degree k, boundary cochain of degree k-1)."""

    omega_m: Cochain
    omega_bdry: Cochain

    def __post_init__(self):
        if self.omega_m.degree != self.omega_bdry.degree + 1:
            raise ParameterError("relative cochain degrees must differ by exactly one")
        if self.omega_m.ambient_dim != self.omega_bdry.ambient_dim:
            raise ParameterError("relative cochain components need equal ambient dimension")


# ---------------------------------------------------------------------------
# permutations and symmetry

def permutation_sign(sigma):
    sigma = list(sigma)
    sign = 1
    for a in range(len(sigma)):
        for b in range(a + 1, len(sigma)):
            if sigma[a] > sigma[b]:
                sign = -sign
    return sign


def permute(t, sigma):
    """Move entry ``i`` of ``t`` to position ``sigma[i]``.

    With this convention ``permute(permute(t, s), u) == permute(t, u o s)``.
    """
    sigma = list(sigma)
    if sorted(sigma) != list(range(len(t))):
        raise ParameterError(f"{sigma} is not a permutation of 0..{len(t) - 1}")
    out = [None] * len(t)
    for i, s in enumerate(sigma):
        out[s] = t[i]
    return tuple(out)


def compose(tau, sigma):
    """``tau o sigma`` as a tuple."""
    return tuple(tau[s] for s in sigma)


def _perms(n1):
    perms = list(itertools.permutations(range(n1)))
    return perms, [permutation_sign(p) for p in perms]


def antisymmetrize(omega):
    """Average of ``sgn(s) * (s . omega)`` over all permutations of the arguments."""
    perms, signs = _perms(omega.degree + 1)
    norm = math.factorial(omega.degree + 1)

    def ev(P):
        acc = np.zeros(P.shape[0])
        for p, s in zip(perms, signs):
            acc = acc + s * omega.evaluator(P[:, list(p), :])
        return acc / norm

    return Cochain(omega.degree, omega.ambient_dim, ev, omega.locality_radius,
                   "completely_antisymmetric", True, f"alt({omega.name})")


def symmetrize(omega):
    perms, _ = _perms(omega.degree + 1)
    norm = math.factorial(omega.degree + 1)

    def ev(P):
        acc = np.zeros(P.shape[0])
        for p in perms:
            acc = acc + omega.evaluator(P[:, list(p), :])
        return acc / norm

    return Cochain(omega.degree, omega.ambient_dim, ev, omega.locality_radius,
                   "completely_symmetric", False, f"sym({omega.name})")


def check_symmetry(omega, samples, tol=1e-10):
    """Verify the declared symmetry tag on sample tuples; raise SymmetryError on violation."""
    P, _ = omega._as_batch(samples)
    tag = omega.symmetry_tag
    if tag == "none":
        return 0.0
    base = omega.evaluate(P)
    worst = 0.0
    for p, s in zip(*_perms(omega.degree + 1)):
        if tag == "even_invariant" and s < 0:
            continue
        factor = s if tag == "completely_antisymmetric" else 1
        other = omega.evaluate(P[:, list(p), :])
        err = np.abs(other - factor * base) / (1 + np.abs(base))
        worst = max(worst, float(err.max(initial=0.0)))
        if worst > tol:
            raise SymmetryError(f"{omega.name} is not {tag}: permutation {p} gives "
                                f"relative deviation {worst:.3g}")
    return worst


def check_normalized(omega, samples, tol=1e-12):
    """Check that omega vanishes when two consecutive arguments coincide."""
    P, _ = omega._as_batch(samples)
    worst = 0.0
    for i in range(omega.degree):
        Q = P.copy()
        Q[:, i + 1, :] = Q[:, i, :]
        worst = max(worst, float(np.abs(omega.evaluate(Q)).max(initial=0.0)))
    if worst > tol:
        raise SymmetryError(f"{omega.name} is flagged normalized but takes value {worst:.3g} "
                            "on a degenerate tuple")
    return worst


# ---------------------------------------------------------------------------
# groupoid differential and friends

def differential(omega):
    """Alternating sum of the face maps: delta*(omega)(x0..x_{n+1})."""
    n1 = omega.degree + 2

    def ev(P):
        acc = np.zeros(P.shape[0])
        for i in range(n1):
            face = np.delete(P, i, axis=1)
            acc = acc + (-1) ** i * omega.evaluator(face)
        return acc

    tag = "completely_antisymmetric" if omega.symmetry_tag == "completely_antisymmetric" else "none"
    return Cochain(omega.degree + 1, omega.ambient_dim, ev, omega.locality_radius, tag,
                   omega.normalized, f"d({omega.name})")


@dataclass(frozen=True)
class CocycleReport:
    max_residual: float
    passed: bool
    n_samples: int


def is_cocycle(omega, domain_sampler, tol=1e-10):
    """Sample ``|delta* omega|`` on tuples from ``domain_sampler``.

    ``domain_sampler`` is an array of ``(n+2)``-tuples or a callable
    returning one.  Out-of-domain tuples raise :class:`DomainError`.
    """
    P = domain_sampler() if callable(domain_sampler) else domain_sampler
    P = np.asarray(P, dtype=float)
    res = np.abs(differential(omega).evaluate(P))
    worst = float(res.max(initial=0.0))
    return CocycleReport(worst, bool(worst <= tol), int(np.atleast_1d(res).size))


def random_tuples(n_points, d, count, seed=0, center=None, spread=1.0, radius=None):
    """Tuples of ``n_points`` random points; with ``radius`` they fit in a ball of that diameter."""
    rng = np.random.default_rng(seed)
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    base = c + rng.uniform(-spread, spread, (count, 1, d))
    if radius is None:
        return base + rng.uniform(-spread, spread, (count, n_points, d))
    dirs = rng.normal(size=(count, n_points, d))
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    r = 0.5 * radius * rng.uniform(0, 1, (count, n_points, 1))
    return base + dirs * r


def trivialize(omega, basepoint):
    """Degree n-1 cochain ``(x1..xn) -> omega(m, x1..xn)``."""
    if omega.degree < 1:
        raise ParameterError("trivialize needs a cochain of degree >= 1")
    m = np.atleast_1d(np.asarray(basepoint, dtype=float))
    if m.shape != (omega.ambient_dim,):
        raise ParameterError(f"basepoint must have {omega.ambient_dim} coordinates")

    def ev(P):
        full = np.concatenate([np.broadcast_to(m, (P.shape[0], 1, P.shape[2])), P], axis=1)
        return omega.evaluate(full)

    return Cochain(omega.degree - 1, omega.ambient_dim, ev, omega.locality_radius, "none",
                   False, f"triv({omega.name})")


def pullback(omega, phi, source_dim):
    """``(phi* omega)(x0..xn) = omega(phi(x0)..phi(xn))``; phi need not be smooth.

    ``phi`` maps an array of points ``(k, source_dim)`` to ``(k, target_dim)``.
    """
    d_out = omega.ambient_dim

    def ev(P):
        m, n1, d = P.shape
        flat = P.reshape(-1, d)
        try:
            img = np.asarray(phi(flat), dtype=float)
        except Exception as exc:
            raise EvaluationError(f"map could not be evaluated: {exc}") from exc
        img = img.reshape(m * n1, -1)
        if img.shape[1] != d_out:
            raise EvaluationError(f"map returned {img.shape[1]} coordinates, expected {d_out}")
        bad = ~np.all(np.isfinite(img), axis=1)
        if np.any(bad):
            k = int(np.nonzero(bad)[0][0])
            raise EvaluationError(f"map undefined at point {flat[k].tolist()}")
        return omega.evaluate(img.reshape(m, n1, d_out))

    return Cochain(omega.degree, source_dim, ev, math.inf, omega.symmetry_tag,
                   omega.normalized, f"pullback({omega.name})")


@dataclass(frozen=True)
class SampledPath:
    """Piecewise-linear map [t0, tN] -> R^k through sampled values."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, X):
        t = np.asarray(X, dtype=float).reshape(-1)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        lo, hi = self.times[0], self.times[-1]
        out = np.stack([np.interp(t, self.times, vals[:, j]) for j in range(vals.shape[1])], 1)
        out[(t < lo - 1e-12) | (t > hi + 1e-12)] = np.nan
        return out


# ---------------------------------------------------------------------------
# built-in cochains

def _det_volume(P):
    n = P.shape[1] - 1
    E = P[:, 1:, :] - P[:, :1, :]
    return np.linalg.det(E) / math.factorial(n)


def det_volume(n):
    """Signed volume ``det[x1-x0, ..., xn-x0] / n!`` on R^n."""
    if n < 1:
        raise ParameterError("det_volume needs n >= 1")
    return Cochain(n, n, _det_volume, math.inf, "completely_antisymmetric", True,
                   f"det_volume({n})")


def left_riemann(f, n=1):
    """``f(x0) * det[x1-x0, ...] / n!``: the left-endpoint Riemann cochain of ``f dx1..dxn``."""
    if n < 1:
        raise ParameterError("left_riemann needs n >= 1")
    return Cochain(n, n, lambda P: scalar_values(f, P[:, 0, :]) * _det_volume(P), math.inf,
                   "none", True, "left_riemann")


def right_riemann(f, n=1):
    if n < 1:
        raise ParameterError("right_riemann needs n >= 1")
    return Cochain(n, n, lambda P: scalar_values(f, P[:, -1, :]) * _det_volume(P), math.inf,
                   "none", True, "right_riemann")


def antiderivative(F, d=1):
    """``F(y) - F(x)``; a coboundary, hence a cocycle."""
    return Cochain(1, d, lambda P: scalar_values(F, P[:, 1, :]) - scalar_values(F, P[:, 0, :]),
                   math.inf, "completely_antisymmetric", True, "antiderivative")


def coboundary_of(f, d=1):
    return antiderivative(f, d)


def function_cochain(f, d=1):
    """A 0-cochain from a scalar function."""
    return Cochain(0, d, lambda P: scalar_values(f, P[:, 0, :]), math.inf,
                   "completely_antisymmetric", True, "function")


def zero(n, d=1):
    return Cochain(n, d, lambda P: np.zeros(P.shape[0]), math.inf, "completely_antisymmetric",
                   True, "zero")


def _gram_volume(E):
    """Unsigned k-volume of the parallelotope spanned by the rows of E (m, k, d)."""
    if E.shape[1] == 0:
        return np.ones(E.shape[0])
    if E.shape[1] == E.shape[2]:
        return np.abs(np.linalg.det(E))
    # QR keeps full precision where a Gram determinant would square the rounding error
    R = np.linalg.qr(np.swapaxes(E, 1, 2), mode="r")
    return np.abs(np.prod(np.diagonal(R, axis1=1, axis2=2), axis=1))


def _degenerate(E):
    if E.shape[1] == 0:
        return np.zeros(E.shape[0], dtype=bool)
    scale = np.prod(np.linalg.norm(E, axis=2), axis=1)
    return _gram_volume(E) <= 1e-13 * scale


def convex_hull_cocycle(form, quad_degree=5):
    """Integral of a closed k-form over the oriented convex hull of k+1 points.

    Degenerate hulls evaluate to 0.  Exact for polynomial coefficients of
    degree <= ``quad_degree``.
    """
    if not isinstance(form, Form):
        raise ParameterError("convex_hull_cocycle needs a Form")
    k, d = form.degree, form.ambient_dim
    bary, w = quadrature.rule_for_degree(k, 0 if form.constant else quad_degree)

    def ev(P):
        m = P.shape[0]
        E = P[:, 1:, :] - P[:, :1, :]
        X = quadrature.quadrature_points(P, bary)
        q = len(w)
        vals = form(X.reshape(-1, d), np.repeat(E, q, axis=0)).reshape(m, q)
        out = vals @ w
        if k >= 1:
            out[_degenerate(E)] = 0.0
        return out

    return Cochain(k, d, ev, math.inf, "completely_antisymmetric", True, "convex_hull_cocycle")


def density_measure(h, n, d=None, quad_degree=5):
    """Integral of ``h`` against n-dimensional volume over the convex hull (unsigned)."""
    d = n if d is None else d
    if n < 0 or d < n:
        raise ParameterError("density_measure needs 0 <= n <= d")
    bary, w = quadrature.rule_for_degree(n, quad_degree)
    fact = math.factorial(n)

    def ev(P):
        E = P[:, 1:, :] - P[:, :1, :]
        vol = _gram_volume(E) / fact
        X = quadrature.quadrature_points(P, bary)
        vals = scalar_values(h, X.reshape(-1, d)).reshape(P.shape[0], len(w))
        out = vol * (vals @ w)
        if n >= 1:
            out[_degenerate(E)] = 0.0
        return out

    return Cochain(n, d, ev, math.inf, "completely_symmetric", True, "density_measure")


def dirac(m, degree=0, weight=None, atol=1e-12):
    """``weight(x0)`` if every argument equals ``m``, else 0.  Not normalized."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    d = m.shape[0]

    def ev(P):
        hit = np.all(np.abs(P - m).max(axis=2) <= atol, axis=1)
        w = np.ones(P.shape[0]) if weight is None else scalar_values(weight, P[:, 0, :])
        return np.where(hit, w, 0.0)

    return Cochain(degree, d, ev, math.inf, "completely_symmetric", False, "dirac")


def euler(n, d=1, atol=1e-12):
    """``(-1)**(#distinct points + 1)``; sums to chi over all faces."""
    def ev(P):
        m, n1, _ = P.shape
        distinct = np.ones(m, dtype=np.int64)
        for j in range(1, n1):
            same = np.zeros(m, dtype=bool)
            for i in range(j):
                same |= np.abs(P[:, j, :] - P[:, i, :]).max(axis=1) <= atol
            distinct += ~same
        return np.where(distinct % 2 == 1, 1.0, -1.0)

    return Cochain(n, d, ev, math.inf, "completely_symmetric", False, "euler")


def winding(center=(0.0, 0.0), radius=math.sqrt(2.0)):
    """Signed angle subtended at ``center`` by the pair (x0, x1)."""
    c = np.asarray(center, dtype=float)
    if c.shape != (2,):
        raise ParameterError("winding center must be a point in R^2")

    def ev(P):
        a = P[:, 0, :] - c
        b = P[:, 1, :] - c
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = (a * b).sum(axis=1)
        return np.arctan2(cross, dot)

    return Cochain(1, 2, ev, float(radius), "completely_antisymmetric", True, "winding")


def random_antisymmetric(degree=1, d=2, seed=0, terms=3):
    """Seeded smooth cochain antisymmetrized over its arguments (for Stokes tests)."""
    rng = np.random.default_rng(seed)
    n1 = degree + 1
    W = rng.normal(size=(terms, n1 * d))
    b = rng.uniform(0, 2 * np.pi, terms)
    c = rng.normal(size=terms)

    def phi(P):
        flat = P.reshape(P.shape[0], -1)
        return np.sin(flat @ W.T + b) @ c

    raw = Cochain(degree, d, phi, math.inf, "none", False, "random")
    return replace(antisymmetrize(raw), name=f"random_antisymmetric(seed={seed})")


BUILTINS = {
    "left_riemann": left_riemann,
    "right_riemann": right_riemann,
    "det_volume": det_volume,
    "antiderivative": antiderivative,
    "convex_hull_cocycle": convex_hull_cocycle,
    "dirac": dirac,
    "euler": euler,
    "density_measure": density_measure,
    "winding": winding,
    "zero": zero,
    "random_antisymmetric": random_antisymmetric,
}


def builtin(name, *args, **kwargs):
    try:
        ctor = BUILTINS[name]
    except KeyError:
        raise ParameterError(f"unknown builtin cochain {name!r}; choose from {sorted(BUILTINS)}")
    return ctor(*args, **kwargs)
