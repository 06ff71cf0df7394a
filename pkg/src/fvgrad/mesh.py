"""Face-addressed 2D polygonal meshes for cell-centred finite volumes.

A mesh stores each straight edge segment as one face with an owner cell and
either a neighbour cell or a named boundary patch.  Hanging vertices simply
split a geometric edge into several faces, so composite (multi-level) meshes
need no special treatment.

Face vertices are stored in the order in which the owner traverses its
boundary anticlockwise, which makes ``(dy, -dx)`` the outward normal of the
owner.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "MeshError",
    "Mesh",
    "QualityMetrics",
    "build_mesh",
    "build_mesh_csr",
    "compute_geometry",
    "face_metrics",
    "quality_metrics",
    "validate_mesh",
    "write_mesh",
    "read_mesh",
    "dumps_mesh",
    "loads_mesh",
]

# relative geometry tolerances, fixed for double precision
CLOSURE_TOL = 1e-12
DIVERGENCE_TOL = 1e-10
ORTHO_TOL = 1e-12


class MeshError(ValueError):
    """Raised for topologically or geometrically invalid meshes."""


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


class Mesh:
    """Polygonal mesh with cached geometry.

    Parameters
    ----------
    points : (nv, 2) array_like
        Vertex coordinates.
    face_vertices : (nf, 2) array_like of int
        Vertex pair of every face, ordered anticlockwise as seen by the owner.
    owner, neighbour : (nf,) array_like of int
        Adjacent cells; ``neighbour`` is -1 on boundary faces.
    face_patch : (nf,) array_like of int
        Index into ``patch_names`` for boundary faces, -1 for interior faces.
    patch_names : sequence of str
    cell_face_ptr, cell_faces : array_like of int
        CSR layout of each cell's faces in anticlockwise order.
    levels : (nc,) array_like of int, optional
        Refinement level of every cell, zeros by default.

    Notes
    -----
    Geometry is computed on construction by :func:`compute_geometry`.  The
    arrays are flagged read-only; the mesh is meant to be shared freely
    between readers.
    """

    def __init__(self, points, face_vertices, owner, neighbour, face_patch,
                 patch_names, cell_face_ptr, cell_faces, levels=None):
        self.points = _readonly(np.asarray(points, dtype=float).reshape(-1, 2))
        self.face_vertices = _readonly(np.asarray(face_vertices, dtype=np.int64).reshape(-1, 2))
        self.owner = _readonly(np.asarray(owner, dtype=np.int64))
        self.neighbour = _readonly(np.asarray(neighbour, dtype=np.int64))
        self.face_patch = _readonly(np.asarray(face_patch, dtype=np.int64))
        self.patch_names = tuple(patch_names)
        self.cell_face_ptr = _readonly(np.asarray(cell_face_ptr, dtype=np.int64))
        self.cell_faces = _readonly(np.asarray(cell_faces, dtype=np.int64))
        self.n_cells = len(self.cell_face_ptr) - 1
        self.n_faces = len(self.face_vertices)
        if levels is None:
            levels = np.zeros(self.n_cells, dtype=np.int64)
        self.levels = _readonly(np.asarray(levels, dtype=np.int64))
        self._check_topology()
        compute_geometry(self)

    # topology -------------------------------------------------------------

    def _check_topology(self):
        nf, nc = self.n_faces, self.n_cells
        if not (len(self.owner) == len(self.neighbour) == len(self.face_patch) == nf):
            raise MeshError("face arrays have inconsistent lengths")
        if len(self.levels) != nc:
            raise MeshError("levels must have one entry per cell")
        if nf and (self.owner.min() < 0 or self.owner.max() >= nc):
            raise MeshError("face owner out of range")
        if nf and self.neighbour.max() >= nc:
            raise MeshError("face neighbour out of range")
        bnd = self.neighbour < 0
        if np.any(bnd & (self.face_patch < 0)):
            f = int(np.flatnonzero(bnd & (self.face_patch < 0))[0])
            raise MeshError(f"boundary face {f} is not assigned to a patch")
        if np.any(self.face_vertices < 0) or np.any(self.face_vertices >= len(self.points)):
            raise MeshError("face vertex index out of range")
        counts = np.diff(self.cell_face_ptr)
        if np.any(counts < 3):
            c = int(np.flatnonzero(counts < 3)[0])
            raise MeshError(f"cell {c} has fewer than 3 faces")
        # every face must be listed exactly by its owner and neighbour
        cell_of = np.repeat(np.arange(nc), counts)
        expected = np.concatenate([self.owner, self.neighbour[~bnd]])
        listed = np.bincount(self.cell_faces, minlength=nf)
        if len(self.cell_faces) != len(expected) or np.any(listed != 1 + (~bnd)):
            raise MeshError("cell face lists do not match face owner/neighbour")
        ok = (self.owner[self.cell_faces] == cell_of) | (self.neighbour[self.cell_faces] == cell_of)
        if not np.all(ok):
            raise MeshError("a cell lists a face it is not adjacent to")
        self.interior_faces = _readonly(np.flatnonzero(~bnd))
        self.boundary_faces = _readonly(np.flatnonzero(bnd))

    @property
    def is_boundary(self) -> np.ndarray:
        return self.neighbour < 0

    def patch(self, name: str) -> np.ndarray:
        """Face ids of the boundary patch called `name`."""
        k = self.patch_names.index(name)
        return np.flatnonzero(self.face_patch == k)

    def faces_of(self, cell: int) -> np.ndarray:
        return self.cell_faces[self.cell_face_ptr[cell]:self.cell_face_ptr[cell + 1]]

    def neighbours_of(self, cell: int) -> np.ndarray:
        """Neighbour cell ids of `cell` (boundary faces omitted)."""
        f = self.faces_of(cell)
        other = np.where(self.owner[f] == cell, self.neighbour[f], self.owner[f])
        return other[other >= 0]

    def copy(self) -> "Mesh":
        """Shallow copy whose attributes may be rebound independently."""
        return copy.copy(self)

    def __repr__(self):
        return (f"Mesh(cells={self.n_cells}, faces={self.n_faces}, "
                f"boundary_faces={len(self.boundary_faces)}, levels={sorted(set(self.levels.tolist()))})")


def compute_geometry(mesh: Mesh) -> Mesh:
    """Fill the geometry caches of `mesh` in place and return it.

    Cell areas and centroids come from a triangle fan around the mean of the
    cell's face midpoints; face centroids are segment midpoints.  The foot
    point ``c'`` of every interior face is the point of the segment joining
    the two cell centroids closest to the face centroid, clamped to the
    segment.

    Raises
    ------
    MeshError
        On zero-length faces or cells with non-positive area.
    """
    pts = mesh.points
    fv = mesh.face_vertices
    a = pts[fv[:, 0]]
    b = pts[fv[:, 1]]
    edge = b - a
    length = np.hypot(edge[:, 0], edge[:, 1])
    if np.any(length <= 0):
        f = int(np.flatnonzero(length <= 0)[0])
        raise MeshError(f"face {f} has zero length")
    mid = 0.5 * (a + b)
    normal = np.column_stack([edge[:, 1], -edge[:, 0]]) / length[:, None]

    nc = mesh.n_cells
    own, nbr = mesh.owner, mesh.neighbour
    inner = mesh.interior_faces
    counts = np.diff(mesh.cell_face_ptr).astype(float)

    def cell_sum(w_own, w_nbr):
        s = np.bincount(own, weights=w_own, minlength=nc)
        return s + np.bincount(nbr[inner], weights=w_nbr[inner], minlength=nc)

    ref = np.column_stack([cell_sum(mid[:, 0], mid[:, 0]), cell_sum(mid[:, 1], mid[:, 1])]) / counts[:, None]

    # triangle fan: owner sees (a, b), neighbour sees (b, a)
    def fan(cells, p, q):
        r = ref[cells]
        u, v = p - r, q - r
        area = 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
        cen = (u + v) / 3.0
        return area, cen

    ao, co = fan(own, a, b)
    an, cn = fan(nbr[inner], b[inner], a[inner])
    zero = np.zeros(mesh.n_faces)
    an_full, cnx, cny = zero.copy(), zero.copy(), zero.copy()
    an_full[inner] = an
    cnx[inner] = an * cn[:, 0]
    cny[inner] = an * cn[:, 1]
    volume = cell_sum(ao, an_full)
    if np.any(~(volume > 0)):
        c = int(np.flatnonzero(~(volume > 0))[0])
        raise MeshError(f"cell {c} has non-positive area {volume[c]!r} (degenerate or clockwise polygon)")
    mx = cell_sum(ao * co[:, 0], cnx)
    my = cell_sum(ao * co[:, 1], cny)
    centroid = ref + np.column_stack([mx, my]) / volume[:, None]

    # far point: neighbour centroid, or the face centroid on boundaries
    far = mid.copy()
    far[inner] = centroid[nbr[inner]]
    P = centroid[own]
    d = far - P
    dd = np.einsum("ij,ij->i", d, d)
    if np.any(dd <= 0):
        f = int(np.flatnonzero(dd <= 0)[0])
        raise MeshError(f"face {f} joins coincident centroids")
    t = np.einsum("ij,ij->i", mid - P, d) / dd
    clamped = (t < 0.0) | (t > 1.0)
    t = np.clip(t, 0.0, 1.0)
    t[mesh.boundary_faces] = 1.0
    cprime = P + t[:, None] * d
    cprime[mesh.boundary_faces] = mid[mesh.boundary_faces]

    mesh.face_centroid = _readonly(mid)
    mesh.face_area = _readonly(length)
    mesh.face_normal = _readonly(normal)
    mesh.cell_volume = _readonly(volume)
    mesh.cell_centroid = _readonly(centroid)
    mesh.face_far = _readonly(far)
    mesh.face_delta = _readonly(d)
    mesh.face_cprime = _readonly(cprime)
    # owner weight of the linear interpolation to c'
    mesh.face_weight = _readonly(1.0 - t)
    mesh.face_clamped = _readonly(clamped & ~mesh.is_boundary)
    mesh.clamp_count = int(mesh.face_clamped.sum())
    return mesh


# construction -------------------------------------------------------------

PatchSpec = Callable[[np.ndarray, np.ndarray], Sequence[str]] | Mapping[tuple, str] | None


def build_mesh(vertices, cells: Sequence[Sequence[int]], patches: PatchSpec = None,
               levels=None, default_patch: str | None = None) -> Mesh:
    """Assemble a face-addressed mesh from cell vertex loops.

    Parameters
    ----------
    vertices : (nv, 2) array_like
    cells : sequence of sequences of int
        Vertex loop of every cell, anticlockwise.  A coarse cell next to a
        refined region lists the hanging vertex so that every shared edge
        segment is a distinct face.
    patches : callable or mapping, optional
        Boundary patch assignment.  A callable receives the ``(k, 2)`` vertex
        pairs and ``(k, 2)`` midpoints of the boundary faces and returns one
        patch name per face; a mapping is keyed by vertex pairs in either
        order.
    levels : array_like of int, optional
        Per-cell refinement level.
    default_patch : str, optional
        Patch for boundary faces left unassigned by `patches`.

    Returns
    -------
    Mesh

    Raises
    ------
    MeshError
        For non-manifold or inconsistently oriented edges, unassigned
        boundary faces and degenerate cells.
    """
    if isinstance(cells, np.ndarray) and cells.ndim == 2:
        flat = cells.astype(np.int64).ravel()
        sizes = np.full(len(cells), cells.shape[1], dtype=np.int64)
    else:
        loops = [np.asarray(c, dtype=np.int64) for c in cells]
        if not loops:
            raise MeshError("mesh has no cells")
        sizes = np.array([len(c) for c in loops], dtype=np.int64)
        flat = np.concatenate(loops)
    ptr = np.concatenate([[0], np.cumsum(sizes)])
    return build_mesh_csr(vertices, ptr, flat, patches, levels, default_patch)


def build_mesh_csr(vertices, ptr, flat, patches: PatchSpec = None, levels=None,
                   default_patch: str | None = None) -> Mesh:
    """Like :func:`build_mesh` with cell loops given in CSR form.

    ``flat[ptr[c]:ptr[c + 1]]`` is the anticlockwise vertex loop of cell `c`.
    """
    pts = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise MeshError("vertex coordinates must be finite")
    nv = len(pts)
    ptr = np.asarray(ptr, dtype=np.int64)
    start = np.asarray(flat, dtype=np.int64)
    sizes = np.diff(ptr)
    if len(sizes) == 0:
        raise MeshError("mesh has no cells")
    if np.any(sizes < 3):
        raise MeshError(f"cell {int(np.flatnonzero(sizes < 3)[0])} has fewer than 3 vertices")
    if start.min() < 0 or start.max() >= nv:
        raise MeshError("cell vertex index out of range")
    # next vertex within each loop
    pos = np.arange(len(start))
    cell_of = np.repeat(np.arange(len(sizes)), sizes)
    nxt = pos + 1
    last = ptr[1:] - 1
    nxt[last] = ptr[:-1]
    end = start[nxt]
    if np.any(start == end):
        raise MeshError("cell with repeated consecutive vertex")

    lo = np.minimum(start, end)
    hi = np.maximum(start, end)
    key = lo * nv + hi
    _, first, inverse, count = np.unique(key, return_index=True, return_inverse=True, return_counts=True)
    if np.any(count > 2):
        k = int(np.flatnonzero(count > 2)[0])
        e = int(first[k])
        raise MeshError(f"non-manifold edge ({start[e]}, {end[e]}) shared by {count[k]} cells")

    # number faces by first appearance so owners come in cell order
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    face_of_half = rank[inverse]
    nf = len(order)
    first_half = first[order]
    owner = cell_of[first_half]
    face_vertices = np.column_stack([start[first_half], end[first_half]])
    neighbour = np.full(nf, -1, dtype=np.int64)
    is_second = np.ones(len(start), dtype=bool)
    is_second[first_half] = False
    second = np.flatnonzero(is_second)
    sf = face_of_half[second]
    if np.any(start[second] != end[first_half[sf]]):
        f = int(sf[np.flatnonzero(start[second] != end[first_half[sf]])[0]])
        raise MeshError(f"face {f} is traversed in the same direction by both cells (orientation mismatch)")
    if np.any(cell_of[second] == owner[sf]):
        raise MeshError("a cell uses the same edge twice")
    neighbour[sf] = cell_of[second]

    bnd = np.flatnonzero(neighbour < 0)
    face_patch = np.full(nf, -1, dtype=np.int64)
    names: list[str] = []
    if len(bnd):
        assigned = _assign_patches(patches, face_vertices[bnd], 0.5 * (pts[face_vertices[bnd, 0]] + pts[face_vertices[bnd, 1]]))
        for i, name in enumerate(assigned):
            if name is None:
                name = default_patch
            if name is None:
                v = face_vertices[bnd[i]]
                raise MeshError(f"boundary face ({v[0]}, {v[1]}) is not assigned to a patch")
            if name not in names:
                names.append(name)
        lookup = {n: k for k, n in enumerate(names)}
        face_patch[bnd] = [lookup[n if n is not None else default_patch] for n in assigned]

    return Mesh(pts, face_vertices, owner, neighbour, face_patch, names, ptr, face_of_half, levels)


def _assign_patches(patches, pairs, mids):
    if patches is None:
        return [None] * len(pairs)
    if callable(patches):
        out = list(patches(pairs, mids))
        if len(out) != len(pairs):
            raise MeshError("patch callable returned the wrong number of names")
        return out
    out = []
    for i, j in pairs.tolist():
        out.append(patches.get((i, j), patches.get((j, i))))
    return out


# quality metrics ----------------------------------------------------------

@dataclass(frozen=True)
class QualityMetrics:
    """Per-face grid irregularity measures.

    Attributes
    ----------
    non_orthogonality : ndarray
        Angle in radians between the centroid connector and the face normal.
    unevenness : ndarray
        Distance from the connector midpoint to the foot point ``c'``,
        relative to the connector length.
    skewness : ndarray
        Distance from the face centroid to ``c'``, relative to the connector
        length.
    """

    non_orthogonality: np.ndarray
    unevenness: np.ndarray
    skewness: np.ndarray


def face_metrics(P, N, c, n):
    """Irregularity measures for faces given by arrays of points.

    Parameters
    ----------
    P, N : (k, 2) array_like
        Owner and neighbour centroids.
    c : (k, 2) array_like
        Face centroids.
    n : (k, 2) array_like
        Unit face normals.

    Returns
    -------
    tuple of ndarray
        ``(non_orthogonality, unevenness, skewness)``.
    """
    P, N, c, n = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (P, N, c, n))
    d = N - P
    L = np.hypot(d[:, 0], d[:, 1])
    if np.any(L <= 0):
        raise MeshError("coincident cell centroids")
    cosang = np.einsum("ij,ij->i", d, n) / L
    angle = np.arccos(np.clip(cosang, -1.0, 1.0))
    t = np.clip(np.einsum("ij,ij->i", c - P, d) / L**2, 0.0, 1.0)
    cp = P + t[:, None] * d
    m = 0.5 * (P + N)
    uneven = np.hypot(*(cp - m).T) / L
    skew = np.hypot(*(c - cp).T) / L
    return angle, uneven, skew


def quality_metrics(mesh: Mesh) -> QualityMetrics:
    """Non-orthogonality, unevenness and skewness of every face.

    Boundary faces use the face centroid in place of the neighbour centroid,
    which gives them zero skewness and unevenness 1/2 by construction.
    """
    P = mesh.cell_centroid[mesh.owner]
    ang, unev, skew = face_metrics(P, mesh.face_far, mesh.face_centroid, mesh.face_normal)
    return QualityMetrics(ang, unev, skew)


# validation ---------------------------------------------------------------

def validate_mesh(mesh: Mesh) -> list[str]:
    """Check mesh invariants and return a list of human-readable violations.

    Checked: unit normals, positive face lengths and cell areas, per-cell
    closure of the face area vectors, the coordinate divergence identity,
    foot points lying on the centroid connector, interpolation weights in
    [0, 1], and a level jump of at most one across any face.
    """
    out: list[str] = []
    nc = mesh.n_cells
    own, nbr = mesh.owner, mesh.neighbour
    inner = mesh.interior_faces
    S, n, cf = mesh.face_area, mesh.face_normal, mesh.face_centroid

    nn = np.hypot(n[:, 0], n[:, 1])
    for f in np.flatnonzero(np.abs(nn - 1.0) > 1e-12)[:10]:
        out.append(f"face {f}: normal has length {nn[f]!r}")
    for f in np.flatnonzero(~(S > 0))[:10]:
        out.append(f"face {f}: non-positive length")
    for c in np.flatnonzero(~(mesh.cell_volume > 0))[:10]:
        out.append(f"cell {c}: non-positive area")

    def cell_sum(w):
        s = np.bincount(own, weights=w, minlength=nc)
        return s - np.bincount(nbr[inner], weights=w[inner], minlength=nc)

    Sx, Sy = S * n[:, 0], S * n[:, 1]
    perim = np.bincount(own, weights=S, minlength=nc) + np.bincount(nbr[inner], weights=S[inner], minlength=nc)
    closure = np.hypot(cell_sum(Sx), cell_sum(Sy))
    for c in np.flatnonzero(closure > CLOSURE_TOL * perim)[:10]:
        out.append(f"cell {c}: face area vectors do not close (|sum S n| = {closure[c]:.3e})")

    vol = mesh.cell_volume
    divx = cell_sum(cf[:, 0] * Sx) / vol
    divy = cell_sum(cf[:, 1] * Sy) / vol
    for c in np.flatnonzero((np.abs(divx - 1) > DIVERGENCE_TOL) | (np.abs(divy - 1) > DIVERGENCE_TOL))[:10]:
        out.append(f"cell {c}: coordinate divergence identity fails ({divx[c]!r}, {divy[c]!r})")

    P = mesh.cell_centroid[own[inner]]
    N = mesh.cell_centroid[nbr[inner]]
    d = N - P
    cp = mesh.face_cprime[inner]
    dd = np.einsum("ij,ij->i", d, d)
    # collinearity with the connector and position within it
    cross = (cp - P)[:, 0] * d[:, 1] - (cp - P)[:, 1] * d[:, 0]
    along = np.einsum("ij,ij->i", cp - P, d) / dd
    bad = (np.abs(cross) > 1e-10 * dd) | (along < -1e-12) | (along > 1 + 1e-12)
    for k in np.flatnonzero(bad)[:10]:
        out.append(f"face {inner[k]}: c' is not on the centroid connector")
    ortho = np.einsum("ij,ij->i", cf[inner] - cp, d)
    bad = (np.abs(ortho) > ORTHO_TOL * dd) & ~mesh.face_clamped[inner]
    for k in np.flatnonzero(bad)[:10]:
        out.append(f"face {inner[k]}: c - c' not orthogonal to the connector")
    w = mesh.face_weight
    for f in np.flatnonzero((w < 0) | (w > 1))[:10]:
        out.append(f"face {f}: interpolation weight {w[f]!r} outside [0, 1]")

    lv = mesh.levels
    jump = np.abs(lv[own[inner]] - lv[nbr[inner]])
    for k in np.flatnonzero(jump > 1)[:10]:
        f = inner[k]
        out.append(f"face {f}: level jump {jump[k]} between cells {own[f]} and {nbr[f]}")
    return out


# file format --------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_mesh(mesh: Mesh) -> str:
    """Serialise `mesh` to the JSON mesh format."""
    lines = ["{", '  "vertices": [']
    vs = [f"    [{_fmt(x)}, {_fmt(y)}]" for x, y in mesh.points.tolist()]
    lines.append(",\n".join(vs))
    lines.append("  ],")
    lines.append('  "faces": [')
    fs = []
    for f in range(mesh.n_faces):
        i, j = mesh.face_vertices[f].tolist()
        head = f'{{"v": [{i}, {j}], "owner": {int(mesh.owner[f])}, '
        if mesh.neighbour[f] >= 0:
            fs.append(f"    {head}\"neighbour\": {int(mesh.neighbour[f])}}}")
        else:
            fs.append(f"    {head}\"patch\": {json.dumps(mesh.patch_names[mesh.face_patch[f]])}}}")
    lines.append(",\n".join(fs))
    lines.append("  ],")
    lines.append('  "cells": [')
    cs = []
    for c in range(mesh.n_cells):
        cs.append('    {"faces": [' + ", ".join(str(int(f)) for f in mesh.faces_of(c)) + "]}")
    lines.append(",\n".join(cs))
    lines.append("  ],")
    lines.append('  "levels": [' + ", ".join(str(int(v)) for v in mesh.levels) + "]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_mesh(text: str) -> Mesh:
    """Parse the JSON mesh format."""
    try:
        data = json.loads(text)
        pts = np.array(data["vertices"], dtype=float).reshape(-1, 2)
        faces = data["faces"]
        cells = data["cells"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshError(f"malformed mesh file: {exc}") from exc
    nf = len(faces)
    fv = np.zeros((nf, 2), dtype=np.int64)
    owner = np.zeros(nf, dtype=np.int64)
    neighbour = np.full(nf, -1, dtype=np.int64)
    face_patch = np.full(nf, -1, dtype=np.int64)
    names: list[str] = []
    for k, f in enumerate(faces):
        try:
            fv[k] = f["v"]
            owner[k] = f["owner"]
            if "neighbour" in f and f["neighbour"] is not None:
                neighbour[k] = f["neighbour"]
            else:
                name = f["patch"]
                if name not in names:
                    names.append(name)
                face_patch[k] = names.index(name)
        except (KeyError, TypeError, ValueError) as exc:
            raise MeshError(f"malformed face {k}: {exc}") from exc
    sizes = [len(c["faces"]) for c in cells]
    ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    cf = np.array([f for c in cells for f in c["faces"]], dtype=np.int64)
    levels = data.get("levels")
    return Mesh(pts, fv, owner, neighbour, face_patch, names, ptr, cf, levels)


def write_mesh(mesh: Mesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_mesh(mesh))


def read_mesh(path) -> Mesh:
    with open(path, encoding="utf-8") as fh:
        return loads_mesh(fh.read())
