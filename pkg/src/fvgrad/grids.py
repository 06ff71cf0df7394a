"""Mesh generators for the four grid families used in convergence studies.

* ``cartesian``: uniform square cells.
* ``perturbed``: Cartesian vertices randomly displaced by up to a quarter of
  the spacing, independently at every level.
* ``composite``: two-level quadrilateral mesh with hanging vertices along a
  fixed interface skeleton.
* ``elliptic``: smooth curvilinear grids from an elliptic (Laplace) grid
  generator solved by Gauss-Seidel iteration.

Every generator is a pure function of its :class:`GridSpec`.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .mesh import Mesh, MeshError, build_mesh, build_mesh_csr

__all__ = [
    "GridSpec",
    "EllipticGridSpec",
    "splitmix64",
    "uniform_draws",
    "structured_mesh",
    "gen_cartesian",
    "gen_perturbed",
    "gen_composite",
    "gen_elliptic",
    "solve_elliptic",
    "refine_uniform",
    "generate",
    "cells_per_side",
    "nominal_spacing",
    "composite_skeleton",
    "interface_faces",
    "FAMILIES",
]

log = logging.getLogger(__name__)

FAMILIES = ("cartesian", "perturbed", "composite", "elliptic")
DEFAULT_BASE_N = {"cartesian": 4, "perturbed": 4, "composite": 8, "elliptic": 4}


@dataclass(frozen=True)
class EllipticGridSpec:
    """Settings of the elliptic grid generator.

    Attributes
    ----------
    boundary : {"sinusoidal", "identity"}
        ``sinusoidal`` uses wavy sides with nodes clustered towards the
        corners; ``identity`` maps the unit square onto itself.
    amplitude : float
        Amplitude of the boundary waves (sinusoidal only).
    solver_n : int
        Nodes per side of the computational grid, ``2**k + 1``.
    tolerance : float
        Stop once the largest nodal update of a sweep falls below this.
    max_iter : int
        Sweep cap.
    omega : float
        Relaxation factor; 1 is plain Gauss-Seidel.
    """

    boundary: str = "sinusoidal"
    amplitude: float = 0.1
    solver_n: int = 513
    tolerance: float = 1e-12
    max_iter: int = 1_000_000
    omega: float = 1.0

    def __post_init__(self):
        m = self.solver_n - 1
        if self.solver_n < 3 or m & (m - 1):
            raise ValueError("solver_n must be a power of two plus one")
        if self.boundary not in ("sinusoidal", "identity"):
            raise ValueError(f"unknown elliptic boundary {self.boundary!r}")
        if not 0 < self.omega < 2:
            raise ValueError("omega must lie in (0, 2)")


@dataclass(frozen=True)
class GridSpec:
    """Description of one mesh in a refinement series.

    Attributes
    ----------
    family : str
        One of ``FAMILIES``.
    level : int
        Refinement level r >= 0.
    base_n : int, optional
        Cells per side at r = 0; family default when omitted (8 coarse cells
        for composite, 4 otherwise).
    seed : int
        Seed of the perturbed family; level r uses ``seed + r``.
    domain : tuple
        ``(x0, x1, y0, y1)`` for cartesian and perturbed grids.
    straight_boundary : bool
        Perturbed only: move boundary vertices along the boundary so the
        domain stays exactly rectangular.
    amplitude : float
        Perturbed only: displacement bound as a fraction of the spacing.
    elliptic : EllipticGridSpec
    """

    family: str = "cartesian"
    level: int = 0
    base_n: int | None = None
    seed: int = 0
    domain: tuple = (0.0, 1.0, 0.0, 1.0)
    straight_boundary: bool = False
    amplitude: float = 0.25
    elliptic: EllipticGridSpec = field(default_factory=EllipticGridSpec)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown grid family {self.family!r}")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.base_n is None:
            object.__setattr__(self, "base_n", DEFAULT_BASE_N[self.family])
        if self.base_n < 2:
            raise ValueError("base_n must be >= 2")
        if self.family == "composite" and self.base_n % 4:
            raise ValueError("composite grids need base_n divisible by 4")
        if not 0 <= self.amplitude < 0.5:
            raise ValueError("perturbation amplitude must lie in [0, 0.5)")


def cells_per_side(spec: GridSpec) -> int:
    """Cells per side of the (background) grid at ``spec.level``.

    Perturbed level r perturbs the Cartesian grid of level r + 1, so that
    level 0 is already an 8 x 8 grid for ``base_n = 4``.
    """
    r = spec.level + (1 if spec.family == "perturbed" else 0)
    return spec.base_n * 2**r


def nominal_spacing(spec: GridSpec) -> float:
    """Characteristic spacing h, halved at every level.

    Cartesian, perturbed and elliptic grids use their (computational) cell
    size; composite grids use the coarse cell size.
    """
    if spec.family in ("cartesian", "perturbed"):
        x0, x1, _, _ = spec.domain
        return (x1 - x0) / cells_per_side(spec)
    return 1.0 / cells_per_side(spec)


# random numbers -----------------------------------------------------------

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, index) -> np.ndarray:
    """Output number `index` (0-based) of a SplitMix64 stream seeded by `seed`.

    The state after ``k + 1`` increments is ``seed + (k + 1) * gamma`` modulo
    2**64, so any output can be computed directly.
    """
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + (idx + np.uint64(1)) * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform_draws(seed: int, vertex_ids) -> np.ndarray:
    """Two uniform numbers in [0, 1) per vertex, shape ``(k, 2)``.

    Vertex ``k`` consumes outputs ``2k`` and ``2k + 1`` of the stream.
    """
    v = np.asarray(vertex_ids, dtype=np.uint64)
    idx = np.stack([2 * v, 2 * v + np.uint64(1)], axis=-1)
    z = splitmix64(seed, idx)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


# structured meshes --------------------------------------------------------

def structured_mesh(X, Y, levels=None) -> Mesh:
    """Quadrilateral mesh from node arrays indexed ``[i, j]``.

    ``i`` runs along the first (xi) direction and ``j`` along the second.
    Vertex ids are row-major with rows of constant ``j``.  Boundary patches
    are named ``bottom`` (j = 0), ``top``, ``left`` (i = 0) and ``right``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    ni, nj = X.shape
    pts = np.column_stack([X.T.ravel(), Y.T.ravel()])

    def vid(i, j):
        return j * ni + i

    I, J = np.meshgrid(np.arange(ni - 1), np.arange(nj - 1), indexing="xy")
    I, J = I.ravel(), J.ravel()
    cells = np.column_stack([vid(I, J), vid(I + 1, J), vid(I + 1, J + 1), vid(I, J + 1)])

    def patches(pairs, mids):
        i, j = pairs % ni, pairs // ni
        names = np.full(len(pairs), "", dtype=object)
        names[np.all(j == 0, axis=1)] = "bottom"
        names[np.all(j == nj - 1, axis=1)] = "top"
        names[np.all(i == 0, axis=1)] = "left"
        names[np.all(i == ni - 1, axis=1)] = "right"
        return [n or None for n in names]

    return build_mesh(pts, cells, patches, levels)


def _lattice(spec: GridSpec, n: int):
    x0, x1, y0, y1 = spec.domain
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    return np.meshgrid(xs, ys, indexing="ij")


def gen_cartesian(spec: GridSpec) -> Mesh:
    """Uniform ``n x n`` grid with ``n = base_n * 2**level``."""
    if spec.family != "cartesian":
        raise ValueError("gen_cartesian needs a cartesian spec")
    X, Y = _lattice(spec, cells_per_side(spec))
    return structured_mesh(X, Y)


def _convex_quads(mesh: Mesh) -> bool:
    p = mesh.points
    for c0 in range(0, mesh.n_cells, 1 << 16):
        cells = np.arange(c0, min(c0 + (1 << 16), mesh.n_cells))
        loops = []
        for k in range(4):
            f = mesh.cell_faces[mesh.cell_face_ptr[cells] + k]
            mine = mesh.owner[f] == cells
            loops.append(np.where(mine, mesh.face_vertices[f, 0], mesh.face_vertices[f, 1]))
        v = p[np.stack(loops, axis=1)]
        e = np.roll(v, -1, axis=1) - v
        en = np.roll(e, -1, axis=1)
        cross = e[..., 0] * en[..., 1] - e[..., 1] * en[..., 0]
        if np.any(cross <= 0):
            return False
    return True


def gen_perturbed(spec: GridSpec) -> Mesh:
    """Randomly distorted quadrilateral grid.

    The Cartesian grid of level ``level + 1`` has each vertex moved by
    ``(dx, dy)`` uniform in ``[-a h, a h)`` with ``a = spec.amplitude``.
    Draws come from SplitMix64 seeded with ``seed + level`` and indexed by
    the row-major vertex id.  With ``straight_boundary`` the boundary
    vertices only slide along their side and corners stay fixed; otherwise
    every vertex is displaced.

    Raises
    ------
    MeshError
        If a cell is not strictly convex, which cannot happen for
        amplitudes below 1/4.
    """
    if spec.family != "perturbed":
        raise ValueError("gen_perturbed needs a perturbed spec")
    n = cells_per_side(spec)
    X, Y = _lattice(spec, n)
    h = nominal_spacing(spec)
    ids = (np.arange(n + 1)[None, :] * (n + 1) + np.arange(n + 1)[:, None])  # [i, j] -> j*(n+1)+i
    u = uniform_draws(spec.seed + spec.level, ids.ravel()).reshape(n + 1, n + 1, 2)
    d = spec.amplitude * h * (2.0 * u - 1.0)
    dx, dy = d[..., 0], d[..., 1]
    if spec.straight_boundary:
        dx[0, :] = dx[-1, :] = 0.0
        dy[:, 0] = dy[:, -1] = 0.0
    X = X + dx
    Y = Y + dy
    mesh = structured_mesh(X, Y)
    if not _convex_quads(mesh):
        raise MeshError("perturbed grid has a non-convex cell")
    return mesh


# composite ----------------------------------------------------------------

def composite_skeleton():
    """Polylines separating the two refinement levels of the composite grid."""
    return [
        [(0.0, 0.5), (1.0, 0.5)],
        [(0.5, 0.0), (0.5, 1.0)],
        [(0.0, 0.25), (0.25, 0.25), (0.25, 0.0)],
        [(0.75, 1.0), (0.75, 0.75), (1.0, 0.75)],
    ]


def _is_fine(x, y):
    return (((x < 0.5) & (y > 0.5)) | ((x > 0.5) & (y < 0.5))
            | ((x < 0.25) & (y < 0.25)) | ((x > 0.75) & (y > 0.75)))


def interface_faces(mesh: Mesh) -> np.ndarray:
    """Interior faces whose two cells sit on different levels."""
    f = mesh.interior_faces
    return f[mesh.levels[mesh.owner[f]] != mesh.levels[mesh.neighbour[f]]]


def gen_composite(spec: GridSpec) -> Mesh:
    """Two-level composite grid on the unit square.

    Quadrants ``[0, .5] x [.5, 1]`` and ``[.5, 1] x [0, .5]`` and the corner
    squares ``[0, .25]^2`` and ``[.75, 1]^2`` hold fine cells (level 1) of
    half the coarse size; the rest is coarse (level 0).  Coarse cells next to
    fine ones carry the hanging vertex, giving them up to 8 faces.

    Raises
    ------
    MeshError
        If the generated level interface deviates from
        :func:`composite_skeleton`.
    """
    if spec.family != "composite":
        raise ValueError("gen_composite needs a composite spec")
    n = cells_per_side(spec)
    m = 2 * n
    H = 1.0 / n

    def vid(i, j):
        return j * (m + 1) + i

    # fine cells
    I, J = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    I, J = I.ravel(), J.ravel()
    fine = _is_fine((I + 0.5) / m, (J + 0.5) / m)
    I, J = I[fine], J[fine]
    fine_loops = np.column_stack([vid(I, J), vid(I + 1, J), vid(I + 1, J + 1), vid(I, J + 1)])

    # coarse cells with optional hanging vertex on each side
    CI, CJ = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    CI, CJ = CI.ravel(), CJ.ravel()
    coarse = ~_is_fine((CI + 0.5) * H, (CJ + 0.5) * H)
    CI, CJ = CI[coarse], CJ[coarse]

    def fine_at(ci, cj):
        inside = (ci >= 0) & (ci < n) & (cj >= 0) & (cj < n)
        return inside & _is_fine((ci + 0.5) * H, (cj + 0.5) * H)

    i0, j0 = 2 * CI, 2 * CJ
    cand = np.column_stack([
        vid(i0, j0), vid(i0 + 1, j0), vid(i0 + 2, j0), vid(i0 + 2, j0 + 1),
        vid(i0 + 2, j0 + 2), vid(i0 + 1, j0 + 2), vid(i0, j0 + 2), vid(i0, j0 + 1),
    ])
    keep = np.ones_like(cand, dtype=bool)
    keep[:, 1] = fine_at(CI, CJ - 1)
    keep[:, 3] = fine_at(CI + 1, CJ)
    keep[:, 5] = fine_at(CI, CJ + 1)
    keep[:, 7] = fine_at(CI - 1, CJ)

    sizes = np.concatenate([np.full(len(fine_loops), 4), keep.sum(axis=1)])
    flat = np.concatenate([fine_loops.ravel(), cand[keep]])
    levels = np.concatenate([np.ones(len(fine_loops), dtype=np.int64), np.zeros(len(cand), dtype=np.int64)])
    used, flat = np.unique(flat, return_inverse=True)
    ii, jj = used % (m + 1), used // (m + 1)
    pts = np.column_stack([ii / m, jj / m])
    ptr = np.concatenate([[0], np.cumsum(sizes)])

    def patches(pairs, mids):
        x, y = mids[:, 0], mids[:, 1]
        return np.where(y == 0.0, "bottom", np.where(y == 1.0, "top", np.where(x == 0.0, "left", "right"))).tolist()

    mesh = build_mesh_csr(pts, ptr, flat, patches, levels)
    _check_skeleton(mesh)
    return mesh


def _on_skeleton(p):
    x, y = p[:, 0], p[:, 1]
    on = np.isclose(y, 0.5) | np.isclose(x, 0.5)
    on |= np.isclose(y, 0.25) & (x <= 0.25) | np.isclose(x, 0.25) & (y <= 0.25)
    on |= np.isclose(y, 0.75) & (x >= 0.75) | np.isclose(x, 0.75) & (y >= 0.75)
    return on


def _check_skeleton(mesh: Mesh):
    f = interface_faces(mesh)
    total = mesh.face_area[f].sum()
    if abs(total - 3.0) > 1e-12:
        raise MeshError(f"composite interface length {total!r} differs from 3")
    a = mesh.points[mesh.face_vertices[f, 0]]
    b = mesh.points[mesh.face_vertices[f, 1]]
    if not (np.all(_on_skeleton(a)) and np.all(_on_skeleton(b))):
        raise MeshError("composite interface leaves the skeleton")


# elliptic -----------------------------------------------------------------

def _boundary_nodes(spec: EllipticGridSpec):
    """Node arrays with boundary values set and a transfinite interior guess."""
    n = spec.solver_n
    s = np.linspace(0.0, 1.0, n)
    if spec.boundary == "identity":
        bx, by = s.copy(), np.zeros(n)          # bottom, parameter xi
        lx, ly = np.zeros(n), s.copy()          # left, parameter eta
    else:
        a = spec.amplitude
        bx = 0.5 + 0.5 * np.sin(np.pi * (s - 0.5))
        by = a * np.sin(2 * np.pi * bx)
        ly = 0.5 + 0.5 * np.sin(np.pi * (s - 0.5))
        lx = -a * np.sin(2 * np.pi * ly)
    # pin the corners against rounding
    bx[0], bx[-1], ly[0], ly[-1] = 0.0, 1.0, 0.0, 1.0
    by[0] = by[-1] = lx[0] = lx[-1] = 0.0
    tx, ty = bx, by + 1.0
    rx, ry = lx + 1.0, ly

    xi = s[:, None]
    eta = s[None, :]
    # transfinite interpolation
    def tfi(b, t, l, r):
        return ((1 - eta) * b[:, None] + eta * t[:, None] + (1 - xi) * l[None, :] + xi * r[None, :]
                - ((1 - xi) * (1 - eta) * b[0] + xi * (1 - eta) * b[-1]
                   + (1 - xi) * eta * t[0] + xi * eta * t[-1]))

    X = tfi(bx, tx, lx, rx)
    Y = tfi(by, ty, ly, ry)
    X[:, 0], Y[:, 0] = bx, by
    X[:, -1], Y[:, -1] = tx, ty
    X[0, :], Y[0, :] = lx, ly
    X[-1, :], Y[-1, :] = rx, ry
    return X, Y


def _gauss_seidel_py(X, Y, tol, max_iter, omega):
    n = X.shape[0]
    for it in range(1, max_iter + 1):
        big = 0.0
        for j in range(1, n - 1):
            for i in range(1, n - 1):
                xa = 0.5 * (X[i + 1, j] - X[i - 1, j])
                ya = 0.5 * (Y[i + 1, j] - Y[i - 1, j])
                xb = 0.5 * (X[i, j + 1] - X[i, j - 1])
                yb = 0.5 * (Y[i, j + 1] - Y[i, j - 1])
                g11 = xa * xa + ya * ya
                g22 = xb * xb + yb * yb
                g12 = xa * xb + ya * yb
                den = 2.0 * (g11 + g22)
                cx = X[i + 1, j + 1] - X[i + 1, j - 1] - X[i - 1, j + 1] + X[i - 1, j - 1]
                cy = Y[i + 1, j + 1] - Y[i + 1, j - 1] - Y[i - 1, j + 1] + Y[i - 1, j - 1]
                xn = (g22 * (X[i + 1, j] + X[i - 1, j]) + g11 * (X[i, j + 1] + X[i, j - 1]) - 0.5 * g12 * cx) / den
                yn = (g22 * (Y[i + 1, j] + Y[i - 1, j]) + g11 * (Y[i, j + 1] + Y[i, j - 1]) - 0.5 * g12 * cy) / den
                dx = omega * (xn - X[i, j])
                dy = omega * (yn - Y[i, j])
                X[i, j] += dx
                Y[i, j] += dy
                big = max(big, abs(dx), abs(dy))
        if big < tol:
            return it, big
    return max_iter, big


try:  # pragma: no cover - exercised implicitly when numba is present
    import numba

    _gauss_seidel = numba.njit(cache=True)(_gauss_seidel_py)
except ImportError:  # pragma: no cover
    _gauss_seidel = _gauss_seidel_py


@functools.lru_cache(maxsize=8)
def solve_elliptic(spec: EllipticGridSpec):
    """Node coordinates ``(X, Y)`` of the converged elliptic grid.

    Solves ``g22 x_aa - 2 g12 x_ab + g11 x_bb = 0`` (and the same for y)
    with central differences, updating one node at a time with all others
    frozen, until the largest update of a sweep drops below
    ``spec.tolerance``.

    Raises
    ------
    RuntimeError
        If the sweep cap is reached first.
    """
    X, Y = _boundary_nodes(spec)
    iters, upd = _gauss_seidel(X, Y, spec.tolerance, spec.max_iter, spec.omega)
    if not upd < spec.tolerance:
        raise RuntimeError(f"elliptic grid solve did not converge in {iters} sweeps (last update {upd:.3e})")
    log.info("elliptic grid n=%d converged in %d sweeps", spec.solver_n, iters)
    X.flags.writeable = False
    Y.flags.writeable = False
    return X, Y


def gen_elliptic(spec: GridSpec) -> Mesh:
    """Curvilinear grid with computational spacing ``1 / (base_n * 2**level)``.

    Nodes are sampled from the converged solver grid, so the requested
    spacing must be a multiple of the solver spacing.
    """
    if spec.family != "elliptic":
        raise ValueError("gen_elliptic needs an elliptic spec")
    n = cells_per_side(spec)
    m = spec.elliptic.solver_n - 1
    if m % n:
        raise ValueError(f"solver_n={spec.elliptic.solver_n} cannot be sampled at {n} cells per side")
    X, Y = solve_elliptic(spec.elliptic)
    step = m // n
    return structured_mesh(X[::step, ::step], Y[::step, ::step])


_GENERATORS = {
    "cartesian": gen_cartesian,
    "perturbed": gen_perturbed,
    "composite": gen_composite,
    "elliptic": gen_elliptic,
}


def generate(spec: GridSpec) -> Mesh:
    """Mesh described by `spec`."""
    return _GENERATORS[spec.family](spec)


def refine_uniform(spec: GridSpec, r: int) -> Mesh:
    """Level-`r` member of the refinement series of `spec`."""
    return generate(replace(spec, level=r))
