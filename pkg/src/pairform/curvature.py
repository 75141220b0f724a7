"""Angle cochains for Gauss-Bonnet on the unit sphere and on flat disks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import mesh as meshmod
from .cochain import Cochain, RelativeCochain
from .errors import DomainError, MeshValidationError, ParameterError
from .integrate import euler_characteristic, relative_pairing, riemann_sum

SPHERE_LOCALITY = math.sqrt(2.0)


def _angle(u, v):
    """Unsigned angle between rows of u and v, via atan2 for accuracy at small angles."""
    cross = np.linalg.norm(np.cross(u, v), axis=-1) if u.shape[-1] == 3 else \
        np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])
    return np.arctan2(cross, (u * v).sum(axis=-1))


def _tangent(a, b):
    """Tangent at ``a`` of the great circle towards ``b``."""
    return b - (a * b).sum(axis=-1, keepdims=True) * a


def _excess(P):
    A, B, C = (P[:, i, :] / np.linalg.norm(P[:, i, :], axis=1, keepdims=True) for i in range(3))
    for u, v in ((A, B), (B, C), (A, C)):
        if np.any((u * v).sum(axis=1) <= -1 + 1e-12):
            raise DomainError("antipodal vertices do not determine a geodesic triangle")
    alpha = _angle(_tangent(A, B), _tangent(A, C))
    beta = _angle(_tangent(B, C), _tangent(B, A))
    gamma = _angle(_tangent(C, A), _tangent(C, B))
    sign = np.sign(np.linalg.det(np.stack([A, B, C], axis=1)))
    return sign * (alpha + beta + gamma - math.pi)


def spherical_excess_cochain():
    """Signed angle excess of the geodesic triangle spanned by three unit vectors."""
    return Cochain(2, 3, _excess, SPHERE_LOCALITY, "completely_antisymmetric", True,
                   "spherical_excess")


@dataclass(frozen=True)
class GeodesicTriangle:
    vertices: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float).reshape(3, 3)
        if not np.allclose(np.linalg.norm(V, axis=1), 1.0, atol=1e-12):
            raise ParameterError("geodesic triangle vertices must be unit vectors")
        if self.orientation not in (1, -1):
            raise ParameterError("orientation must be +1 or -1")
        d = np.linalg.norm(V[:, None] - V[None], axis=2).max()
        if d > SPHERE_LOCALITY * (1 + 1e-12):
            raise DomainError(f"triangle of chordal diameter {d:.6g} exceeds the locality radius")
        object.__setattr__(self, "vertices", V)

    def excess(self):
        return self.orientation * float(_excess(self.vertices[None])[0])


def gauss_bonnet_sphere(T):
    """Sum of spherical excesses over a unit-sphere mesh."""
    if T.manifold_tag != "sphere" or T.dimension != 2 or T.ambient_dim != 3:
        raise ParameterError("gauss_bonnet_sphere needs a 2-dimensional sphere mesh in R^3")
    return riemann_sum(spherical_excess_cochain(), T)


# ---------------------------------------------------------------------------
# flat disk

def _flat_excess(P):
    a, b, c = P[:, 0, :], P[:, 1, :], P[:, 2, :]
    total = _angle(b - a, c - a) + _angle(c - b, a - b) + _angle(a - c, b - c)
    cross = (b - a)[:, 0] * (c - a)[:, 1] - (b - a)[:, 1] * (c - a)[:, 0]
    return np.sign(cross) * (total - math.pi)


def flat_excess_cochain():
    """Angle sum minus pi of a planar triangle (zero up to rounding)."""
    return Cochain(2, 2, _flat_excess, math.inf, "completely_antisymmetric", True, "flat_excess")


def boundary_loop(T):
    """Vertices of the single boundary loop of a disk mesh, in induced order."""
    B = meshmod.boundary(T)
    if B.n_simplices == 0:
        raise MeshValidationError("mesh has no boundary; a disk needs one boundary loop")
    edges = B.simplices
    nxt = {}
    for a, b in edges:
        if a in nxt:
            raise MeshValidationError(f"boundary vertex {int(a)} starts two boundary edges")
        nxt[int(a)] = int(b)
    start = int(edges[0, 0])
    loop = [start]
    while True:
        v = nxt.get(loop[-1])
        if v is None:
            raise MeshValidationError("boundary edges do not close up into a loop")
        if v == start:
            break
        loop.append(v)
        if len(loop) > len(edges):
            raise MeshValidationError("boundary edges do not form a simple loop")
    if len(loop) != len(edges):
        raise MeshValidationError(f"boundary has more than one component "
                                  f"({len(loop)} of {len(edges)} edges in the first loop)")
    return B.vertices[loop]


def boundary_turning_cochain(polygon):
    """Minus the turning of the boundary direction between two boundary points.

    Each boundary point ``p`` is assigned the direction of the polygon segment
    ``[a, b)`` containing it; the cochain is ``-wrap(theta(x1) - theta(x0))``.
    Summed over the boundary edges it gives minus the total turning.
    """
    poly = np.asarray(polygon, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0)
    seg = b - a
    theta = np.arctan2(seg[:, 1], seg[:, 0])
    seg_len2 = (seg ** 2).sum(axis=1)
    scale = float(np.sqrt(seg_len2.max()))

    def direction(X):
        rel = X[:, None, :] - a[None, :, :]
        s = (rel * seg[None]).sum(axis=2) / seg_len2[None]
        foot = a[None] + np.clip(s, 0, 1)[..., None] * seg[None]
        dist = np.linalg.norm(X[:, None, :] - foot, axis=2)
        on = (dist <= 1e-9 * scale) & (s >= -1e-12) & (s < 1 - 1e-12)
        if not np.all(on.any(axis=1)):
            k = int(np.nonzero(~on.any(axis=1))[0][0])
            raise DomainError(f"point {X[k].tolist()} does not lie on the boundary polygon")
        return theta[np.argmax(on, axis=1)]

    def ev(P):
        d = direction(P[:, 1, :]) - direction(P[:, 0, :])
        return -(d - 2 * math.pi * np.round(d / (2 * math.pi)))

    return Cochain(1, 2, ev, math.inf, "completely_antisymmetric", True, "boundary_turning")


def flat_disk_pair(T):
    """Relative cochain (flat excess, boundary turning) for a planar disk mesh."""
    if T.dimension != 2 or T.ambient_dim != 2 or T.manifold_tag != "flat":
        raise ParameterError("flat_disk_pair needs a planar 2-dimensional flat mesh")
    meshmod.validate(T)
    chi = euler_characteristic(T)
    if chi != 1:
        raise MeshValidationError(f"mesh is not a disk: Euler characteristic {chi} != 1")
    return RelativeCochain(flat_excess_cochain(), boundary_turning_cochain(boundary_loop(T)))


def gauss_bonnet_disk(T):
    return relative_pairing(flat_disk_pair(T), T)
