"""Brownian paths, two-jet stochastic integrals and the Wiener lattice.

Every Gaussian draw comes from a Philox counter-based generator keyed by
``(seed, index)``, so path ``i`` of a study is the same whatever else is
sampled alongside it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cochain import Cochain
from .errors import JetMismatchError, ParameterError, ResolutionError
from .vanest import jet2

_U64 = (1 << 64) - 1


def _generator(seed, index):
    seed, index = int(seed), int(index)
    if not 0 <= seed <= _U64 or not 0 <= index <= _U64:
        raise ParameterError("seed and index must be unsigned 64-bit integers")
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


@dataclass(frozen=True)
class BrownianPath:
    times: np.ndarray
    values: np.ndarray
    seed: int
    index: int = 0

    @property
    def n_steps(self):
        return len(self.times) - 1

    @property
    def increments(self):
        return np.diff(self.values)


def standard_increments(N, seed, index=0):
    """The N(0, 1) draws behind path ``(seed, index)``."""
    N = int(N)
    if N < 1:
        raise ParameterError(f"need at least one time step, got N={N}")
    return _generator(seed, index).standard_normal(N)


def sample_brownian(N, seed, index=0):
    """Wiener path on the uniform grid ``k/N``, ``k = 0..N``."""
    z = standard_increments(N, seed, index)
    values = np.concatenate([[0.0], np.cumsum(z / math.sqrt(N))])
    times = np.arange(N + 1) / N
    for a in (times, values):
        a.flags.writeable = False
    return BrownianPath(times, values, int(seed), int(index))


def sample_paths(N, seed, n_paths, start=0):
    """Values of paths ``(seed, start) .. (seed, start + n_paths - 1)`` as rows."""
    out = np.empty((n_paths, int(N) + 1))
    out[:, 0] = 0.0
    for r in range(n_paths):
        out[r, 1:] = np.cumsum(standard_increments(N, seed, start + r) / math.sqrt(N))
    return out


# ---------------------------------------------------------------------------
# two-jet integrands

def central_derivative(f, h=1e-6):
    return lambda x: (f(x + h) - f(x - h)) / (2 * h)


def _vec(f):
    """Evaluate ``f`` (callable or constant) with array broadcasting."""
    if callable(f):
        return lambda x: np.broadcast_to(np.asarray(f(x), dtype=float), np.shape(x))
    c = float(f)
    return lambda x: np.full(np.shape(x), c)


@dataclass(frozen=True)
class Jet2Integrand:
    """``f dx + g dx^2`` with optional analytic ``f'``."""

    f: Callable
    g: Callable
    fprime: Optional[Callable] = None

    def fp(self):
        if self.fprime is not None:
            return _vec(self.fprime)
        if not callable(self.f):
            return _vec(0.0)
        return central_derivative(_vec(self.f))

    def canonical(self):
        """The representative ``f(x)(y-x) + g(x)(y-x)^2``."""
        f, g = _vec(self.f), _vec(self.g)

        def ev(P):
            x, y = P[:, 0, 0], P[:, 1, 0]
            dx = y - x
            return f(x) * dx + g(x) * dx * dx

        return Cochain(1, 1, ev, math.inf, "none", True, "canonical_jet")


def s2_action(j):
    """The swap action on two-jets: ``(f, g) -> (-f, g - f')``."""
    f, g, fp = _vec(j.f), _vec(j.g), j.fp()
    return Jet2Integrand(lambda x: -f(x), lambda x: g(x) - fp(x), lambda x: -fp(x))


def ito_jet(f, fprime=None):
    return Jet2Integrand(f, 0.0, fprime)


def stratonovich_jet(f, fprime=None):
    j = Jet2Integrand(f, 0.0, fprime)
    fp = j.fp()
    return Jet2Integrand(f, lambda x: 0.5 * fp(x), fprime)


def check_jet(omega, j, points, tol=1e-8):
    """Raise JetMismatchError at the first point where ``jet2(omega) != (f, g)``."""
    f, g = _vec(j.f), _vec(j.g)
    for x in np.asarray(points, dtype=float).ravel():
        jt = jet2(omega, x)
        want_f, want_g = float(f(np.array(x))), float(g(np.array(x)))
        err = max(abs(jt.f_val - want_f), abs(jt.g_val - want_g))
        if not err <= tol * (1 + abs(want_f) + abs(want_g)):
            raise JetMismatchError(
                f"representative has 2-jet ({jt.f_val:.10g}, {jt.g_val:.10g}) at x={x:.10g} "
                f"but the integrand requires ({want_f:.10g}, {want_g:.10g})", point=float(x))


def _jet_check_points(values, k=7):
    return np.quantile(np.asarray(values), np.linspace(0, 1, k))


def jet_integral(j, path, representative="canonical"):
    """``sum_i Omega(gamma(t_i), gamma(t_{i+1}))`` for a representative of ``j``."""
    vals = np.asarray(path.values if isinstance(path, BrownianPath) else path, dtype=float)
    x, dx = vals[:-1], np.diff(vals)
    if isinstance(representative, str):
        if representative != "canonical":
            raise ParameterError(f"unknown representative {representative!r}")
        f, g = _vec(j.f), _vec(j.g)
        return math.fsum(f(x) * dx + g(x) * dx * dx)
    omega = representative
    if omega.degree != 1 or omega.ambient_dim != 1:
        raise ParameterError("a custom representative must be a degree-1 cochain on R")
    check_jet(omega, j, _jet_check_points(vals))
    P = np.stack([vals[:-1], vals[1:]], axis=1)[:, :, None]
    return math.fsum(omega.evaluate(P))


def ito(f, path, fprime=None):
    return jet_integral(ito_jet(f, fprime), path)


def stratonovich(f, path, fprime=None):
    return jet_integral(stratonovich_jet(f, fprime), path)


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass
class MonteCarloReport:
    n_samples: int
    grid_sizes: list
    means: list
    l2_diffs: list
    slope: float
    seed: int
    stderrs: list = field(default_factory=list)

    def to_dict(self):
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v
        return {
            "n_samples": self.n_samples,
            "grid_sizes": list(self.grid_sizes),
            "means": [clean(float(m)) for m in self.means],
            "stderrs": [clean(float(s)) for s in self.stderrs],
            "l2_diffs": [clean(float(v)) for v in self.l2_diffs],
            "slope": clean(float(self.slope)),
            "seed": self.seed,
        }


def _sum_rows(omega, rows):
    c, n1 = rows.shape
    P = np.stack([rows[:, :-1], rows[:, 1:]], axis=2).reshape(-1, 2, 1)
    return omega.evaluate(P, check=False).reshape(c, n1 - 1).sum(axis=1)


def expectation(j, N, n_samples, seed, chunk=512):
    """Mean and standard error of the canonical jet integral over seeded paths."""
    f, g = _vec(j.f), _vec(j.g)
    totals = []
    for start in range(0, n_samples, chunk):
        rows = sample_paths(N, seed, min(chunk, n_samples - start), start)
        x, dx = rows[:, :-1], np.diff(rows, axis=1)
        totals.append((f(x) * dx + g(x) * dx * dx).sum(axis=1))
    s = np.concatenate(totals)
    return float(s.mean()), float(s.std(ddof=1) / math.sqrt(len(s)))


def l2_equivalence_study(omega1, omega2, grid_sizes, n_samples, seed, require_equal_jets=True,
                         check_points=np.linspace(-2.0, 2.0, 9), chunk=256):
    """Monte Carlo ``E[(S_1 - S_2)^2]^(1/2)`` per grid size and its log-log slope in 1/N.

    Coarse paths are subsampled from the finest grid so every N sees the
    same Brownian motion.  Grid sizes must divide the largest one.
    """
    sizes = sorted(int(n) for n in grid_sizes)
    if not sizes or sizes[0] < 1:
        raise ParameterError("grid sizes must be positive")
    n_max = sizes[-1]
    if any(n_max % n for n in sizes):
        raise ParameterError("every grid size must divide the largest one")
    if n_samples < 2:
        raise ParameterError("need at least two samples")
    if require_equal_jets:
        for x in np.asarray(check_points, dtype=float):
            a, b = jet2(omega1, x), jet2(omega2, x)
            err = max(abs(a.f_val - b.f_val), abs(a.g_val - b.g_val))
            if err > 1e-8 * (1 + abs(a.f_val) + abs(a.g_val)):
                raise JetMismatchError(f"representatives have different 2-jets at x={x:.6g}: "
                                       f"{a} vs {b}", point=float(x))
    sq = {n: [] for n in sizes}
    s1 = {n: [] for n in sizes}
    for start in range(0, n_samples, chunk):
        fine = sample_paths(n_max, seed, min(chunk, n_samples - start), start)
        for n in sizes:
            rows = fine[:, :: n_max // n]
            a, b = _sum_rows(omega1, rows), _sum_rows(omega2, rows)
            sq[n].append((a - b) ** 2)
            s1[n].append(a)
    l2 = [float(math.sqrt(np.concatenate(sq[n]).mean())) for n in sizes]
    means = [float(np.concatenate(s1[n]).mean()) for n in sizes]
    errs = [float(np.concatenate(s1[n]).std(ddof=1) / math.sqrt(n_samples)) for n in sizes]
    ok = np.array(l2) > 0
    slope = (float(np.polyfit(np.log(1.0 / np.array(sizes)[ok]), np.log(np.array(l2)[ok]), 1)[0])
             if ok.sum() >= 2 else math.nan)
    return MonteCarloReport(n_samples, sizes, means, l2, slope, int(seed), errs)


# ---------------------------------------------------------------------------
# Feynman-Kac lattice

def _trapezoid_weights(x):
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def feynman_kac_lattice(V, psi0, N, x_grid, hbar=-1j):
    """Iterate the normalized Gaussian step kernel ``N`` times with potential weights.

    Computes ``psi(x) = E[exp(-sum_k V(x + W_{k/N}) / N) psi0(x + W_1)]`` on the
    grid by trapezoid quadrature.  Only the Wiener case ``hbar = -i`` is
    supported.
    """
    if complex(hbar) != -1j:
        raise ParameterError("only the imaginary-time case hbar = -i is supported")
    N = int(N)
    if N < 1:
        raise ParameterError("need N >= 1 lattice steps")
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or len(x) < 3 or np.any(np.diff(x) <= 0):
        raise ParameterError("x_grid must be an increasing 1-D array of at least 3 points")
    spacing = float(np.max(np.diff(x)))
    std = 1.0 / math.sqrt(N)
    if std < 2 * spacing:
        raise ResolutionError(f"kernel std {std:.4g} is below two grid spacings "
                              f"({2 * spacing:.4g}); refine the grid or lower N")
    w = _trapezoid_weights(x)
    pot = np.exp(-_vec(V)(x) / N)
    K = math.sqrt(N / (2 * math.pi)) * np.exp(-0.5 * N * (x[:, None] - x[None, :]) ** 2)
    K = K * (w * pot)[None, :]
    psi = _vec(psi0)(x).astype(float)
    for _ in range(N):
        psi = K @ psi
    return psi
