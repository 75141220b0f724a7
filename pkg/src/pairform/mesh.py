"""Embedded, oriented simplicial meshes and their refinement.

A :class:`Triangulation` stores vertex coordinates in ambient space, top
simplices as rows of vertex indices, and one orientation sign per simplex.
The sign is the *geometric* orientation the simplex should have: for
full-dimensional meshes that is the sign of the edge-vector determinant,
for sphere and circle meshes the sign of ``det[N, v1-v0, ..., vn-v0]`` with
``N`` the outward normal.  Meshes of lower codimension without a normal
(for example the boundary of a planar disk) are oriented combinatorially:
the stored vertex order counts as positive.

All arrays are read-only; every operation returns a new triangulation.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateSimplexError,
    MeshFormatError,
    MeshValidationError,
    ParameterError,
    UnsupportedSchemeError,
)

MANIFOLD_TAGS = ("flat", "sphere", "circle", "torus_flat", "interval")
SCHEMES = ("barycentric", "edge_midpoint")
_CLOSED_TAGS = ("sphere", "circle", "torus_flat")
_DEGENERACY_RTOL = 1e-12


def _readonly(a):
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Triangulation:
    dimension: int
    ambient_dim: int
    vertices: np.ndarray
    simplices: np.ndarray
    orientation_signs: np.ndarray
    manifold_tag: str = "flat"

    def __post_init__(self):
        n, d = int(self.dimension), int(self.ambient_dim)
        if n < 0 or d < n or d < 1:
            raise ParameterError(f"need 0 <= dimension <= ambient_dim, got n={n}, d={d}")
        if self.manifold_tag not in MANIFOLD_TAGS:
            raise ParameterError(f"unknown manifold_tag {self.manifold_tag!r}")
        verts = np.array(self.vertices, dtype=float).reshape(-1, d)
        simp = np.array(self.simplices, dtype=np.int64).reshape(-1, n + 1)
        signs = np.array(self.orientation_signs, dtype=np.int64).reshape(-1)
        if not np.all(np.isfinite(verts)):
            raise ParameterError("vertex coordinates must be finite")
        if signs.shape[0] != simp.shape[0]:
            raise ParameterError("one orientation sign per simplex is required")
        if not np.all(np.abs(signs) == 1):
            raise ParameterError("orientation signs must be +1 or -1")
        if simp.size:
            if simp.min() < 0 or simp.max() >= len(verts):
                bad = int(np.nonzero((simp < 0) | (simp >= len(verts)))[0][0])
                raise ParameterError(f"simplex {bad} has a vertex index out of range")
            srt = np.sort(simp, axis=1)
            if n >= 1 and np.any(srt[:, 1:] == srt[:, :-1]):
                bad = int(np.nonzero(np.any(srt[:, 1:] == srt[:, :-1], axis=1))[0][0])
                raise ParameterError(f"simplex {bad} repeats a vertex")
        object.__setattr__(self, "dimension", n)
        object.__setattr__(self, "ambient_dim", d)
        object.__setattr__(self, "vertices", _readonly(verts))
        object.__setattr__(self, "simplices", _readonly(simp))
        object.__setattr__(self, "orientation_signs", _readonly(signs))

    @property
    def n_simplices(self):
        return self.simplices.shape[0]

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Triangulation):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.ambient_dim == other.ambient_dim
            and self.manifold_tag == other.manifold_tag
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.simplices, other.simplices)
            and np.array_equal(self.orientation_signs, other.orientation_signs)
        )

    __hash__ = None

    def with_signs(self, signs):
        return Triangulation(self.dimension, self.ambient_dim, self.vertices,
                             self.simplices, signs, self.manifold_tag)

    def reversed(self):
        """Same mesh with every orientation sign flipped."""
        return self.with_signs(-self.orientation_signs)

    def __repr__(self):
        return (f"Triangulation(n={self.dimension}, d={self.ambient_dim}, "
                f"tag={self.manifold_tag!r}, V={self.n_vertices}, S={self.n_simplices})")


# ---------------------------------------------------------------------------
# geometry

def _wrap(delta):
    return delta - np.round(delta)


def _coords(T, idx):
    """Coordinates of index tuples; torus tuples are unwrapped around entry 0."""
    P = T.vertices[idx]
    if T.manifold_tag == "torus_flat" and idx.shape[-1] > 1:
        P = P.copy()
        P[..., 1:, :] = P[..., :1, :] + _wrap(P[..., 1:, :] - P[..., :1, :])
    return P


def _orientation_kind(T):
    n, d = T.dimension, T.ambient_dim
    if n == 0:
        return "none"
    if n == d:
        return "volume"
    if T.manifold_tag in ("sphere", "circle") and n == d - 1:
        return "normal"
    return "none"


def _geometric_signs(T, idx):
    n = T.dimension
    S = idx.shape[0]
    if n == 0 or S == 0:
        return np.ones(S, dtype=np.int64)
    P = _coords(T, idx)
    E = P[:, 1:, :] - P[:, :1, :]
    scale = np.prod(np.linalg.norm(E, axis=2), axis=1)
    kind = _orientation_kind(T)
    if kind == "volume":
        det = np.linalg.det(E)
    elif kind == "normal":
        N = P.mean(axis=1)
        N = N / np.linalg.norm(N, axis=1, keepdims=True)
        det = np.linalg.det(np.concatenate([N[:, None, :], E], axis=1))
    else:
        gram = np.einsum("sid,sjd->sij", E, E)
        det = np.sqrt(np.clip(np.linalg.det(gram), 0.0, None))
    bad = ~(np.abs(det) > _DEGENERACY_RTOL * scale)
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        raise DegenerateSimplexError(
            f"simplex {i} {tuple(int(v) for v in idx[i])} is degenerate", simplex_index=i)
    if kind == "none":
        return np.ones(S, dtype=np.int64)
    return np.where(det > 0, 1, -1).astype(np.int64)


def geometric_signs(T):
    """Geometric orientation sign of each simplex in its stored vertex order."""
    return _geometric_signs(T, T.simplices)


def _swap_last_two(idx, mask):
    out = np.array(idx, copy=True)
    if out.shape[1] >= 2 and np.any(mask):
        a = out[mask, -2].copy()
        out[mask, -2] = out[mask, -1]
        out[mask, -1] = a
    return out


def oriented_simplices(T):
    """Vertex index rows reordered so each has geometric sign = its orientation sign."""
    flip = _geometric_signs(T, T.simplices) != T.orientation_signs
    if T.dimension == 0:
        return np.array(T.simplices)
    return _swap_last_two(T.simplices, flip)


def oriented_points(T):
    """Coordinates of all oriented simplices, shape (S, n+1, d)."""
    return _coords(T, oriented_simplices(T))


def oriented_vertices(T, simplex_index):
    """Ordered vertex coordinates of one simplex, up to even permutation."""
    if not 0 <= simplex_index < T.n_simplices:
        raise ParameterError(f"no simplex {simplex_index}")
    row = T.simplices[simplex_index:simplex_index + 1]
    flip = _geometric_signs(T, row) != T.orientation_signs[simplex_index:simplex_index + 1]
    if T.dimension >= 1:
        row = _swap_last_two(row, flip)
    return tuple(_coords(T, row)[0])


def simplex_diameters(T):
    if T.n_simplices == 0:
        return np.zeros(0)
    P = _coords(T, T.simplices)
    diff = P[:, :, None, :] - P[:, None, :, :]
    return np.sqrt((diff ** 2).sum(-1)).reshape(T.n_simplices, -1).max(axis=1)


def mesh_size(T):
    """Largest pairwise vertex distance over all simplices (chordal on spheres)."""
    dia = simplex_diameters(T)
    return float(dia.max()) if dia.size else 0.0


def faces(T, k):
    """Unique k-faces as sorted vertex-index rows."""
    n = T.dimension
    if not 0 <= k <= n:
        raise ParameterError(f"face dimension must lie in [0, {n}]")
    if T.n_simplices == 0:
        return np.zeros((0, k + 1), dtype=np.int64)
    combos = list(itertools.combinations(range(n + 1), k + 1))
    F = T.simplices[:, combos].reshape(-1, k + 1)
    return np.unique(np.sort(F, axis=1), axis=0)


def _parity(perm):
    """(-1)^inversions for each row of a permutation array."""
    inv = np.zeros(perm.shape[0], dtype=np.int64)
    m = perm.shape[1]
    for a in range(m):
        for b in range(a + 1, m):
            inv += perm[:, a] > perm[:, b]
    return np.where(inv % 2 == 0, 1, -1)


def _face_incidence(T, oriented):
    """Codimension-one faces of every simplex with their induced signs.

    Returns sorted face keys, the induced sign relative to the sorted key,
    the owning simplex and the ordered face with its drop sign (-1)^i.
    """
    n = T.dimension
    S = oriented.shape[0]
    keys, rel, owner, ordered, drop = [], [], [], [], []
    for i in range(n + 1):
        face = np.delete(oriented, i, axis=1)
        order = np.argsort(face, axis=1, kind="stable")
        keys.append(np.take_along_axis(face, order, axis=1))
        s = (-1) ** i
        rel.append(s * _parity(order))
        owner.append(np.arange(S))
        ordered.append(face)
        drop.append(np.full(S, s))
    return (np.concatenate(keys), np.concatenate(rel), np.concatenate(owner),
            np.concatenate(ordered), np.concatenate(drop))


def validate(T):
    """Check non-degeneracy, the manifold condition and global orientability.

    Raises :class:`MeshValidationError` naming the first offending face.
    """
    n = T.dimension
    _geometric_signs(T, T.simplices)
    if n == 0 or T.n_simplices == 0:
        return T
    oriented = oriented_simplices(T)
    keys, rel, _, _, _ = _face_incidence(T, oriented)
    uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    over = np.nonzero(counts > 2)[0]
    if over.size:
        f = tuple(int(v) for v in uniq[over[0]])
        raise MeshValidationError(
            f"face {f} is shared by {counts[over[0]]} simplices (manifold condition)", face=f)
    if T.manifold_tag in _CLOSED_TAGS:
        single = np.nonzero(counts == 1)[0]
        if single.size:
            f = tuple(int(v) for v in uniq[single[0]])
            raise MeshValidationError(
                f"face {f} has one coface but the {T.manifold_tag} mesh must be closed", face=f)
    total = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(total, inverse, rel)
    bad = np.nonzero((counts == 2) & (total != 0))[0]
    if bad.size:
        f = tuple(int(v) for v in uniq[bad[0]])
        raise MeshValidationError(
            f"face {f} receives the same induced orientation from both cofaces", face=f)
    return T


def is_valid(T):
    try:
        validate(T)
    except (MeshValidationError, DegenerateSimplexError):
        return False
    return True


def boundary(T):
    """Boundary complex with the induced orientation.

    Face ``i`` of an oriented simplex ``(u0, ..., un)`` enters with sign
    ``(-1)**i``; this is the convention under which summing a completely
    antisymmetric cochain over the boundary equals summing its groupoid
    differential over the mesh.  Boundary edges and higher faces are stored
    in positively oriented order; boundary points carry the sign directly.
    """
    n = T.dimension
    if n == 0:
        raise ParameterError("a 0-dimensional mesh has no boundary complex")
    if T.n_simplices == 0:
        return Triangulation(n - 1, T.ambient_dim, np.zeros((0, T.ambient_dim)),
                             np.zeros((0, n), dtype=np.int64), [], "flat")
    oriented = oriented_simplices(T)
    keys, _, _, ordered, drop = _face_incidence(T, oriented)
    _, first, inverse, counts = np.unique(keys, axis=0, return_index=True,
                                          return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    sel = np.sort(first[counts[inverse[first]] == 1])
    faces_ = ordered[sel]
    signs = drop[sel]
    if n - 1 >= 1:
        faces_ = _swap_last_two(faces_, signs < 0)
        signs = np.ones_like(signs)
    if T.manifold_tag == "torus_flat":
        coords = _coords(T, faces_)
        used = np.arange(faces_.size).reshape(faces_.shape)
        verts = coords.reshape(-1, T.ambient_dim)
        return Triangulation(n - 1, T.ambient_dim, verts, used, signs, "flat")
    used, remap = np.unique(faces_, return_inverse=True)
    return Triangulation(n - 1, T.ambient_dim, T.vertices[used],
                         remap.reshape(faces_.shape), signs, "flat")


# ---------------------------------------------------------------------------
# refinement

def _mean_points(T, groups):
    """Barycenters of vertex groups, torus-aware and reprojected on spheres."""
    P = _coords(T, groups)
    c = P.mean(axis=1)
    if T.manifold_tag == "torus_flat":
        c = c - np.floor(c)
    elif T.manifold_tag in ("sphere", "circle"):
        c = c / np.linalg.norm(c, axis=1, keepdims=True)
    return c


def _unique_rows(rows):
    uniq, inverse = np.unique(np.sort(rows, axis=1), axis=0, return_inverse=True)
    return uniq, inverse.reshape(-1)


def _refine_midpoint(T):
    n = T.dimension
    if n > 2:
        raise UnsupportedSchemeError("edge_midpoint refinement only supports n <= 2")
    if n == 0 or T.n_simplices == 0:
        return T
    S = T.simplices
    V = T.n_vertices
    if n == 1:
        edges, inv = _unique_rows(S)
        mid = V + inv
        children = np.stack([np.stack([S[:, 0], mid], 1), np.stack([mid, S[:, 1]], 1)], 1)
        n_child = 2
    else:
        pairs = np.concatenate([S[:, [0, 1]], S[:, [1, 2]], S[:, [0, 2]]])
        edges, inv = _unique_rows(pairs)
        ns = S.shape[0]
        m01, m12, m02 = V + inv[:ns], V + inv[ns:2 * ns], V + inv[2 * ns:]
        v0, v1, v2 = S[:, 0], S[:, 1], S[:, 2]
        children = np.stack([
            np.stack([v0, m01, m02], 1),
            np.stack([m01, v1, m12], 1),
            np.stack([m02, m12, v2], 1),
            np.stack([m01, m12, m02], 1),
        ], 1)
        n_child = 4
    verts = np.concatenate([T.vertices, _mean_points(T, edges)])
    simp = children.reshape(-1, n + 1)
    signs = np.repeat(T.orientation_signs, n_child)
    return Triangulation(n, T.ambient_dim, verts, simp, signs, T.manifold_tag)


def _perm_sign(p):
    return int(_parity(np.array([p]))[0])


def _refine_barycentric(T):
    n = T.dimension
    if n == 0 or T.n_simplices == 0:
        return T
    S = T.simplices
    ns = S.shape[0]
    perms = list(itertools.permutations(range(n + 1)))
    ids = np.empty((len(perms), ns, n + 1), dtype=np.int64)
    new_pts = [T.vertices]
    offset = T.n_vertices
    for p_i, p in enumerate(perms):
        ids[p_i, :, 0] = S[:, p[0]]
    for j in range(1, n + 1):
        prefixes = np.concatenate([S[:, list(p[:j + 1])] for p in perms])
        uniq, inv = _unique_rows(prefixes)
        ids[:, :, j] = (offset + inv).reshape(len(perms), ns)
        new_pts.append(_mean_points(T, uniq))
        offset += len(uniq)
    psign = np.array([_perm_sign(p) for p in perms])
    children = np.transpose(ids, (1, 0, 2)).reshape(-1, n + 1)
    flip = np.tile(psign < 0, ns)
    children = _swap_last_two(children, flip)
    signs = np.repeat(T.orientation_signs, len(perms))
    return Triangulation(n, T.ambient_dim, np.concatenate(new_pts), children, signs,
                         T.manifold_tag)


def refine(T, scheme="edge_midpoint"):
    """Linear subdivision of every simplex (reprojected for sphere/circle meshes)."""
    scheme = getattr(scheme, "value", scheme)
    if scheme == "edge_midpoint":
        return _refine_midpoint(T)
    if scheme == "barycentric":
        return _refine_barycentric(T)
    raise UnsupportedSchemeError(f"unknown refinement scheme {scheme!r}")


# ---------------------------------------------------------------------------
# standard meshes

def interval(a=0.0, b=1.0, k=1):
    k = int(k)
    if k < 1 or not a < b:
        raise ParameterError(f"interval needs a < b and k >= 1, got a={a}, b={b}, k={k}")
    x = np.linspace(a, b, k + 1)
    x[0], x[-1] = a, b
    simp = np.stack([np.arange(k), np.arange(1, k + 1)], 1)
    return Triangulation(1, 1, x[:, None], simp, np.ones(k), "interval")


def kuhn_cube(n=2, k=1):
    """Unit n-cube, k cells per side, each cell split into n! Kuhn simplices."""
    n, k = int(n), int(k)
    if n < 1 or k < 1:
        raise ParameterError(f"kuhn_cube needs n >= 1 and k >= 1, got n={n}, k={k}")
    shape = (k + 1,) * n
    grid = np.indices(shape).reshape(n, -1).T
    verts = grid / k
    corners = np.indices((k,) * n).reshape(n, -1).T
    rows = []
    for perm in itertools.permutations(range(n)):
        path = [corners.copy()]
        cur = corners.copy()
        for axis in perm:
            cur = cur.copy()
            cur[:, axis] += 1
            path.append(cur)
        rows.append(np.stack([np.ravel_multi_index(tuple(p.T), shape) for p in path], 1))
    simp = np.stack(rows, 1).reshape(-1, n + 1)
    return Triangulation(n, n, verts, simp, np.ones(len(simp)), "flat")


def octa_sphere(level=0):
    level = int(level)
    if level < 0:
        raise ParameterError("octa_sphere level must be >= 0")
    verts = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
                     dtype=float)
    simp = [(ix, 2 + iy, 4 + iz) for ix in (0, 1) for iy in (0, 1) for iz in (0, 1)]
    T = Triangulation(2, 3, verts, simp, np.ones(8), "sphere")
    for _ in range(level):
        T = refine(T, "edge_midpoint")
    return T


def icosa_sphere(level=0):
    level = int(level)
    if level < 0:
        raise ParameterError("icosa_sphere level must be >= 0")
    phi = (1 + math.sqrt(5)) / 2
    raw = []
    for a in (-1, 1):
        for b in (-phi, phi):
            raw += [(0, a, b), (a, b, 0), (b, 0, a)]
    raw = np.array(raw, dtype=float)
    dist = np.linalg.norm(raw[:, None] - raw[None], axis=2)
    adj = np.isclose(dist, 2.0)
    tris = [t for t in itertools.combinations(range(12), 3)
            if adj[t[0], t[1]] and adj[t[1], t[2]] and adj[t[0], t[2]]]
    verts = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    T = Triangulation(2, 3, verts, tris, np.ones(len(tris)), "sphere")
    for _ in range(level):
        T = refine(T, "edge_midpoint")
    return T


def circle(k=8):
    k = int(k)
    if k < 3:
        raise ParameterError(f"circle needs k >= 3, got {k}")
    t = 2 * np.pi * np.arange(k) / k
    verts = np.stack([np.cos(t), np.sin(t)], 1)
    simp = np.stack([np.arange(k), (np.arange(k) + 1) % k], 1)
    return Triangulation(1, 2, verts, simp, np.ones(k), "circle")


def flat_torus(k=3):
    """Unit square with periodic identification, k x k cells, 2 triangles each."""
    k = int(k)
    if k < 3:
        raise ParameterError(f"flat_torus needs k >= 3, got {k}")
    i, j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    verts = np.stack([i.ravel(), j.ravel()], 1) / k

    def vid(a, b):
        return (a % k) * k + (b % k)

    i, j = i.ravel(), j.ravel()
    v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    simp = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    return Triangulation(2, 2, verts, simp, np.ones(len(simp)), "torus_flat")


def polygon_fan(k=6, radius=1.0):
    """Regular k-gon triangulated as a fan around its center."""
    k = int(k)
    if k < 3 or radius <= 0:
        raise ParameterError("polygon_fan needs k >= 3 and radius > 0")
    t = 2 * np.pi * np.arange(k) / k
    verts = np.concatenate([[[0.0, 0.0]], radius * np.stack([np.cos(t), np.sin(t)], 1)])
    simp = np.stack([np.zeros(k, dtype=int), 1 + np.arange(k), 1 + (np.arange(k) + 1) % k], 1)
    return Triangulation(2, 2, verts, simp, np.ones(k), "flat")


def random_disk(n_interior=20, seed=0, n_boundary=12):
    """Delaunay triangulation of random points inside a random convex polygon."""
    from scipy.spatial import Delaunay

    n_interior, n_boundary = int(n_interior), int(n_boundary)
    if n_interior < 0 or n_boundary < 3:
        raise ParameterError("random_disk needs n_interior >= 0 and n_boundary >= 3")
    rng = np.random.default_rng(int(seed))
    base = 2 * np.pi * np.arange(n_boundary) / n_boundary
    t = base + rng.uniform(-0.3, 0.3, n_boundary) * (2 * np.pi / n_boundary)
    bpts = np.stack([np.cos(t), np.sin(t)], 1)
    inner_r = 0.8 * math.cos(math.pi / n_boundary) * (1 - 0.6 / n_boundary)
    r = inner_r * np.sqrt(rng.uniform(0, 1, n_interior))
    a = rng.uniform(0, 2 * np.pi, n_interior)
    ipts = np.stack([r * np.cos(a), r * np.sin(a)], 1)
    pts = np.concatenate([bpts, ipts])
    tri = Delaunay(pts)
    return Triangulation(2, 2, pts, tri.simplices, np.ones(len(tri.simplices)), "flat")


_GENERATORS = {
    "interval": (interval, (float, float, int)),
    "kuhn_cube": (kuhn_cube, (int, int)),
    "octa_sphere": (octa_sphere, (int,)),
    "icosa_sphere": (icosa_sphere, (int,)),
    "circle": (circle, (int,)),
    "flat_torus": (flat_torus, (int,)),
    "polygon_fan": (polygon_fan, (int, float)),
    "random_disk": (random_disk, (int, int, int)),
}


def generate_standard(kind, *params):
    """Build one of the named standard meshes, e.g. ``generate_standard("interval", 0, 1, 4)``."""
    try:
        fn, types = _GENERATORS[kind]
    except KeyError:
        raise ParameterError(f"unknown mesh kind {kind!r}; choose from {sorted(_GENERATORS)}")
    if len(params) > len(types):
        raise ParameterError(f"{kind} takes at most {len(types)} parameters")
    try:
        args = [t(p) for t, p in zip(types, params)]
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"bad parameters for {kind}: {exc}")
    if any(t is int and float(p) != int(float(p)) for t, p in zip(types, params)):
        raise ParameterError(f"{kind} expects integer parameters where counts are given")
    T = fn(*args)
    return validate(T)


# ---------------------------------------------------------------------------
# JSON i/o

def to_dict(T):
    return {
        "dimension": T.dimension,
        "ambient_dim": T.ambient_dim,
        "manifold_tag": T.manifold_tag,
        "vertices": T.vertices.tolist(),
        "simplices": T.simplices.tolist(),
        "orientation_signs": T.orientation_signs.tolist(),
    }


def save_mesh(T, path):
    Path(path).write_text(json.dumps(to_dict(T), indent=1) + "\n")


def _field(doc, name, kind):
    if name not in doc:
        raise MeshFormatError("missing required field", field=name)
    value = doc[name]
    if kind == "int" and (isinstance(value, bool) or not isinstance(value, int)):
        raise MeshFormatError(f"expected an integer, got {type(value).__name__}", field=name)
    if kind == "list" and not isinstance(value, list):
        raise MeshFormatError(f"expected a list, got {type(value).__name__}", field=name)
    if kind == "str" and not isinstance(value, str):
        raise MeshFormatError(f"expected a string, got {type(value).__name__}", field=name)
    return value


def from_dict(doc):
    if not isinstance(doc, dict):
        raise MeshFormatError("top level must be a JSON object")
    n = _field(doc, "dimension", "int")
    d = _field(doc, "ambient_dim", "int")
    tag = _field(doc, "manifold_tag", "str")
    verts = _field(doc, "vertices", "list")
    simp = _field(doc, "simplices", "list")
    signs = _field(doc, "orientation_signs", "list")
    if tag not in MANIFOLD_TAGS:
        raise MeshFormatError(f"unknown manifold tag {tag!r}", field="manifold_tag")
    for i, v in enumerate(verts):
        if (not isinstance(v, list) or len(v) != d
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
            raise MeshFormatError(f"vertex {i} must be a list of {d} numbers", field="vertices")
    for i, s in enumerate(simp):
        if (not isinstance(s, list) or len(s) != n + 1
                or not all(isinstance(c, int) and not isinstance(c, bool) for c in s)):
            raise MeshFormatError(f"simplex {i} must be a list of {n + 1} integers",
                                  field="simplices")
        bad = [c for c in s if not 0 <= c < len(verts)]
        if bad:
            raise MeshFormatError(f"simplex {i} has vertex index {bad[0]} out of range "
                                  f"[0, {len(verts)})", field="simplices")
    if len(signs) != len(simp) or any(s not in (1, -1) or isinstance(s, bool) for s in signs):
        raise MeshFormatError("need one sign in {+1, -1} per simplex", field="orientation_signs")
    try:
        T = Triangulation(n, d, np.array(verts, dtype=float).reshape(-1, d),
                          np.array(simp, dtype=np.int64).reshape(-1, n + 1), signs, tag)
    except ParameterError as exc:
        raise MeshFormatError(str(exc))
    return validate(T)


def load_mesh(path):
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshFormatError(exc.msg, line=exc.lineno)
    return from_dict(doc)
