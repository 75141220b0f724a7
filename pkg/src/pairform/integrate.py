"""Riemann-like sums of cochains over triangulations and refinement studies."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import mesh as meshmod
from .cochain import Cochain, RelativeCochain, differential, pullback
from .errors import LocalityError, ParameterError, SymmetryError
from .forms import scalar_values

_EXACT_FLOOR = 4e-15


def _check_pair(omega, T):
    if omega.degree != T.dimension:
        raise ParameterError(f"cochain degree {omega.degree} does not match mesh dimension "
                             f"{T.dimension}")
    if omega.ambient_dim != T.ambient_dim:
        raise ParameterError(f"cochain lives in R^{omega.ambient_dim} but the mesh in "
                             f"R^{T.ambient_dim}")


def _check_locality(omega, T):
    if math.isinf(omega.locality_radius) or T.n_simplices == 0:
        return
    dia = meshmod.simplex_diameters(T)
    bad = np.nonzero(dia > omega.locality_radius * (1 + 1e-12))[0]
    if bad.size:
        i = int(bad[0])
        raise LocalityError(
            f"simplex {i} has diameter {dia[i]:.6g} exceeding the locality radius "
            f"{omega.locality_radius:.6g} of {omega.name}", simplex_index=i)


def simplex_terms(omega, T):
    """Per-simplex values ``omega(oriented simplex)`` (signed for 0-simplices)."""
    _check_pair(omega, T)
    if T.n_simplices == 0:
        return np.zeros(0)
    _check_locality(omega, T)
    P = meshmod.oriented_points(T)
    vals = omega.evaluate(P, check=False)
    if T.dimension == 0:
        vals = vals * T.orientation_signs
    if omega.symmetry_tag == "completely_symmetric" and T.dimension >= 1:
        k = min(8, len(P))
        rev = omega.evaluate(P[:k, ::-1, :], check=False)
        if not np.allclose(rev, vals[:k], rtol=1e-10, atol=1e-12):
            raise SymmetryError(f"{omega.name} is tagged completely symmetric but its value "
                                "depends on vertex order")
    return vals


def riemann_sum(omega, T):
    """Sum of ``omega`` over the oriented top simplices of ``T`` (compensated summation)."""
    return math.fsum(simplex_terms(omega, T))


# ---------------------------------------------------------------------------
# convergence reports

@dataclass
class LevelRecord:
    level: int
    mesh_size: float
    n_simplices: int
    sum: float
    delta: Optional[float]


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


@dataclass
class ConvergenceReport:
    levels: list
    extrapolated: float
    rate_estimate: float
    converged: bool
    scheme: str
    tol: float
    name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def sums(self):
        return [lv.sum for lv in self.levels]

    def to_dict(self):
        return {
            "name": self.name,
            "scheme": self.scheme,
            "tol": self.tol,
            "converged": self.converged,
            "extrapolated": _clean(self.extrapolated),
            "rate_estimate": _clean(self.rate_estimate),
            "levels": [{k: _clean(v) for k, v in asdict(lv).items()} for lv in self.levels],
            **({"extra": self.extra} if self.extra else {}),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "mesh_size", "n_simplices", "sum", "delta"])
        for lv in self.levels:
            w.writerow([lv.level, repr(lv.mesh_size), lv.n_simplices, repr(lv.sum),
                        "" if lv.delta is None else repr(lv.delta)])
        return buf.getvalue()


def fit_rate(mesh_sizes, deltas):
    """Log-log slope of |delta| against mesh size (NaN when not estimable)."""
    h = np.asarray(mesh_sizes, dtype=float)
    dl = np.abs(np.asarray(deltas, dtype=float))
    ok = (dl > 0) & (h > 0)
    if ok.sum() < 2:
        return math.nan
    slope = np.polyfit(np.log(h[ok]), np.log(dl[ok]), 1)[0]
    return float(slope)


def _summarize(records, scheme, tol, name):
    sums = [r.sum for r in records]
    deltas = [r.delta for r in records[1:]]
    scale = max(1.0, max(abs(s) for s in sums))
    converged = bool(deltas) and abs(deltas[-1]) <= tol
    if not deltas or all(abs(dl) <= _EXACT_FLOOR * scale for dl in deltas[-3:]):
        return ConvergenceReport(records, sums[-1], math.nan, converged, scheme, tol, name)
    tail = records[-3:] if len(records) >= 4 else records[1:]
    rate = fit_rate([r.mesh_size for r in tail], [r.delta for r in tail])
    extrap = sums[-1]
    if len(records) >= 2 and math.isfinite(rate) and rate > 0:
        ratio = records[-2].mesh_size / records[-1].mesh_size
        if ratio > 1:
            extrap = sums[-1] + deltas[-1] / (ratio ** rate - 1.0)
    return ConvergenceReport(records, float(extrap), rate, converged, scheme, tol, name)


def refinement_study(term_fn, T0, scheme="edge_midpoint", tol=1e-10, max_levels=6, name="",
                     stop_early=True):
    """Evaluate ``term_fn(T)`` on successive refinements until ``|delta| <= tol``.

    With ``stop_early=False`` all ``max_levels`` levels are computed.
    """
    scheme = getattr(scheme, "value", scheme)
    if max_levels < 1:
        raise ParameterError("max_levels must be >= 1")
    if scheme not in meshmod.SCHEMES:
        raise ParameterError(f"unknown scheme {scheme!r}")
    records = []
    T = T0
    for level in range(max_levels):
        if level:
            T = meshmod.refine(T, scheme)
        s = float(term_fn(T))
        delta = s - records[-1].sum if records else None
        records.append(LevelRecord(level, meshmod.mesh_size(T), T.n_simplices, s, delta))
        if stop_early and delta is not None and abs(delta) <= tol:
            break
    return _summarize(records, scheme, tol, name)


def integrate(omega, T0, scheme="edge_midpoint", tol=1e-10, max_levels=6):
    """Net-limit estimate of the integral of ``omega`` by refinement."""
    _check_pair(omega, T0)
    return refinement_study(lambda T: riemann_sum(omega, T), T0, scheme, tol, max_levels,
                            omega.name)


def relative_pairing(R, T):
    """Interior sum minus boundary sum for a relative cochain."""
    if not isinstance(R, RelativeCochain):
        raise ParameterError("relative_pairing needs a RelativeCochain")
    interior = riemann_sum(R.omega_m, T)
    B = meshmod.boundary(T)
    bdry = riemann_sum(R.omega_bdry, B) if B.n_simplices else 0.0
    return interior - bdry


@dataclass(frozen=True)
class StokesReport:
    residual: float
    n_terms: int
    bound: float
    passed: bool
    boundary_sum: float
    interior_sum: float


def stokes_check(omega, T):
    """Compare the boundary sum of ``omega`` with the interior sum of its differential.

    The interior sum is expanded into individual face evaluations so that the
    interior faces cancel term by term in the compensated sum.
    """
    if T.dimension != omega.degree + 1:
        raise ParameterError("stokes_check needs a mesh of dimension degree + 1")
    if omega.ambient_dim != T.ambient_dim:
        raise ParameterError("cochain and mesh ambient dimensions differ")
    _check_locality(omega, T)
    P = meshmod.oriented_points(T)
    terms = []
    for i in range(T.dimension + 1):
        terms.append((-1) ** i * omega.evaluate(np.delete(P, i, axis=1), check=False))
    interior = np.concatenate(terms) if terms else np.zeros(0)
    B = meshmod.boundary(T)
    bterms = simplex_terms(omega, B) if B.n_simplices else np.zeros(0)
    residual = abs(math.fsum(np.concatenate([bterms, -interior])))
    n_terms = int(interior.size + bterms.size)
    bound = 1e-12 * max(n_terms, 1)
    return StokesReport(residual, n_terms, bound, residual <= bound,
                        math.fsum(bterms), math.fsum(interior))


def euler_characteristic(T):
    """Alternating count of faces of every dimension."""
    return int(sum((-1) ** k * len(meshmod.faces(T, k)) for k in range(T.dimension + 1)))


def euler_cochain_sum(T):
    """The same number obtained by evaluating the Euler cochain on every face."""
    from .cochain import euler

    total = 0.0
    for k in range(T.dimension + 1):
        F = meshmod.faces(T, k)
        if len(F):
            total += math.fsum(euler(k, T.ambient_dim).evaluate(T.vertices[F]))
    return int(round(total))


def rs_cochain(f, omega):
    """Summand ``f(x0) * (delta* omega)(x0..xn)`` of the Riemann-Stieltjes sum."""
    dom = differential(omega)
    return Cochain(dom.degree, dom.ambient_dim,
                   lambda P: scalar_values(f, P[:, 0, :]) * dom.evaluator(P),
                   dom.locality_radius, "none", dom.normalized, f"rs({omega.name})")


def rs_integral(f, omega, T0, scheme="edge_midpoint", tol=1e-10, max_levels=8):
    """Refinement limit of ``sum f(first oriented vertex) * delta* omega``."""
    return integrate(rs_cochain(f, omega), T0, scheme, tol, max_levels)


@dataclass
class VariationReport:
    values: list
    value: float
    scheme: str


def total_variation(omega, T0, scheme="edge_midpoint", levels=6):
    """Max over refinement levels of ``sum |omega|``; per-level values are kept."""
    scheme = getattr(scheme, "value", scheme)
    values = []
    T = T0
    for level in range(levels):
        if level:
            T = meshmod.refine(T, scheme)
        values.append(math.fsum(np.abs(simplex_terms(omega, T))))
    return VariationReport(values, max(values), scheme)


def pullback_integrate(omega, phi, T0, scheme="edge_midpoint", tol=1e-10, max_levels=6):
    """Integrate ``phi* omega`` over the source mesh ``T0``."""
    return integrate(pullback(omega, phi, T0.ambient_dim), T0, scheme, tol, max_levels)
