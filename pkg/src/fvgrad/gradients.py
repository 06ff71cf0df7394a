"""Cell-centred gradient reconstruction.

Two families of operators are provided:

* Green-Gauss (divergence theorem) gradients, with optional corrector steps
  that account for the offset between the face centroid ``c`` and the
  interpolation point ``c'`` on the centroid connector.
* Weighted least-squares gradients with power-law weights
  ``w = dr**-q``, solved per cell with the closed-form 2 x 2 inverse.

Both operate on whole meshes with vectorised face loops; boundary faces
contribute the stored boundary values at their centroids.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .mesh import Mesh

__all__ = [
    "SchemeConfig",
    "RankDeficientStencil",
    "interpolate_face",
    "green_gauss",
    "least_squares",
    "compute_gradient",
    "squared_weights",
    "normal_equations_solve",
    "stencil_gradient",
    "parallelogram_gradient",
    "reference_parallelogram_gradient",
    "MAX_CORRECTORS",
]

MAX_CORRECTORS = 8
RANK_TOL = 1e-14


class RankDeficientStencil(ArithmeticError):
    """Least-squares stencil whose points do not span the plane."""

    def __init__(self, cells):
        self.cells = np.atleast_1d(np.asarray(cells))
        shown = ", ".join(str(int(c)) for c in self.cells[:10])
        more = "" if len(self.cells) <= 10 else f" (+{len(self.cells) - 10} more)"
        super().__init__(f"rank-deficient least-squares stencil at cell(s) {shown}{more}")


@dataclass(frozen=True)
class SchemeConfig:
    """Choice of gradient operator.

    Attributes
    ----------
    scheme : {"green_gauss", "least_squares"}
    correctors : int
        Corrector steps of the Green-Gauss scheme.
    q : float
        Weight exponent of the least-squares scheme.
    interface_weights : bool
        Least squares only: halve the squared weight of faces through which
        a coarse cell touches a finer level.
    include_boundary : bool
        Least squares only: use boundary faces as stencil points.
    """

    scheme: str = "least_squares"
    correctors: int = 0
    q: float = 1.0
    interface_weights: bool = False
    include_boundary: bool = True

    def __post_init__(self):
        aliases = {"gg": "green_gauss", "ls": "least_squares"}
        object.__setattr__(self, "scheme", aliases.get(self.scheme, self.scheme))
        if self.scheme not in ("green_gauss", "least_squares"):
            raise ValueError(f"unknown gradient scheme {self.scheme!r}")
        if not 0 <= self.correctors <= MAX_CORRECTORS:
            raise ValueError(f"correctors must lie in 0..{MAX_CORRECTORS}")
        if not np.isfinite(self.q) or self.q < 0:
            raise ValueError("q must be finite and non-negative")

    @property
    def label(self) -> str:
        if self.scheme == "green_gauss":
            return f"d{self.correctors}"
        tag = f"q{self.q:g}"
        return tag + ("i" if self.interface_weights else "")


def interpolate_face(mesh: Mesh, field: ScalarField) -> np.ndarray:
    """Linearly interpolated value at ``c'`` for every face.

    Interior faces blend owner and neighbour values with the cached owner
    weight; boundary faces return the boundary value.
    """
    w = mesh.face_weight
    return w * field.cell_values[mesh.owner] + (1.0 - w) * field.face_far_values(mesh)


def _divergence(mesh: Mesh, face_values: np.ndarray) -> np.ndarray:
    """``(1/vol) * sum_f phi_f S_f n_f`` per cell."""
    nc = mesh.n_cells
    own, nbr, inner = mesh.owner, mesh.neighbour, mesh.interior_faces
    flux = (face_values * mesh.face_area)[:, None] * mesh.face_normal
    out = np.empty((nc, 2))
    for k in range(2):
        s = np.bincount(own, weights=flux[:, k], minlength=nc)
        s -= np.bincount(nbr[inner], weights=flux[inner, k], minlength=nc)
        out[:, k] = s
    return out / mesh.cell_volume[:, None]


def green_gauss(mesh: Mesh, field: ScalarField, correctors: int = 0) -> np.ndarray:
    """Green-Gauss gradient with `correctors` corrector steps.

    The predictor uses interpolated values at ``c'``.  Each corrector step
    adds the previous gradient, interpolated to ``c'`` the same way, dotted
    with ``c - c'``.  Boundary faces always use the exact boundary value.

    Returns
    -------
    ndarray, shape (n_cells, 2)
    """
    if not 0 <= correctors <= MAX_CORRECTORS:
        raise ValueError(f"correctors must lie in 0..{MAX_CORRECTORS}")
    field.check(mesh)
    base = interpolate_face(mesh, field)
    grad = _divergence(mesh, base)
    if correctors == 0:
        return grad
    inner = mesh.interior_faces
    w = mesh.face_weight[inner, None]
    shift = mesh.face_centroid[inner] - mesh.face_cprime[inner]
    own, nbr = mesh.owner[inner], mesh.neighbour[inner]
    for _ in range(correctors):
        g = w * grad[own] + (1.0 - w) * grad[nbr]
        values = base.copy()
        values[inner] += np.einsum("ij,ij->i", g, shift)
        grad = _divergence(mesh, values)
    return grad


def squared_weights(dr, q: float) -> np.ndarray:
    """``dr**(-2q)`` computed as ``exp(-2q log dr)``."""
    dr = np.asarray(dr, dtype=float)
    if q == 0:
        return np.ones_like(dr)
    return np.exp(-2.0 * q * np.log(dr))


def normal_equations_solve(sxx, sxy, syy, sxp, syp, cells=None):
    """Closed-form solution of the weighted 2 x 2 normal equations.

    Parameters
    ----------
    sxx, sxy, syy : array_like
        ``sum w^2 dx^2``, ``sum w^2 dx dy``, ``sum w^2 dy^2``.
    sxp, syp : array_like
        ``sum w^2 dx dphi``, ``sum w^2 dy dphi``.
    cells : array_like, optional
        Identifiers reported when the system is singular.

    Raises
    ------
    RankDeficientStencil
        Where ``D < 1e-14 * sxx * syy``.
    """
    sxx, sxy, syy, sxp, syp = (np.asarray(a, dtype=float) for a in (sxx, sxy, syy, sxp, syp))
    D = sxx * syy - sxy * sxy
    bad = ~(D > RANK_TOL * sxx * syy) | ~(D > 0)
    if np.any(bad):
        ids = np.flatnonzero(np.atleast_1d(bad))
        if cells is not None:
            ids = np.asarray(cells)[ids]
        raise RankDeficientStencil(ids)
    gx = (syy * sxp - sxy * syp) / D
    gy = (sxx * syp - sxy * sxp) / D
    return np.stack([gx, gy], axis=-1)


def least_squares(mesh: Mesh, field: ScalarField, q: float = 1.0,
                  interface_weights: bool = False, include_boundary: bool = True) -> np.ndarray:
    """Weighted least-squares gradient with weights ``w_f = dr_f**-q``.

    ``dr_f`` is the distance from the cell centroid to the neighbour
    centroid, or to the face centroid for boundary faces.

    Parameters
    ----------
    interface_weights : bool
        Multiply the weight by ``1/sqrt(2)`` on faces through which a cell
        touches a neighbour of a finer level.
    include_boundary : bool
        Whether boundary faces enter the stencils.

    Returns
    -------
    ndarray, shape (n_cells, 2)

    Raises
    ------
    RankDeficientStencil
        Naming the cells whose stencil does not span the plane.
    """
    field.check(mesh)
    nc = mesh.n_cells
    d = mesh.face_delta
    dphi = field.face_far_values(mesh) - field.cell_values[mesh.owner]
    w2 = squared_weights(np.hypot(d[:, 0], d[:, 1]), q)
    use = np.ones(mesh.n_faces, dtype=bool)
    if not include_boundary:
        use[mesh.boundary_faces] = False
    inner = mesh.interior_faces
    own, nbr = mesh.owner, mesh.neighbour

    w_own = np.where(use, w2, 0.0)
    w_nbr = w2[inner].copy()
    if interface_weights:
        lo, ln = mesh.levels[own[inner]], mesh.levels[nbr[inner]]
        w_own[inner] *= np.where(ln > lo, 0.5, 1.0)
        w_nbr *= np.where(lo > ln, 0.5, 1.0)

    # the neighbour sees -d and -dphi, so every product is unchanged
    terms = (d[:, 0] * d[:, 0], d[:, 0] * d[:, 1], d[:, 1] * d[:, 1], d[:, 0] * dphi, d[:, 1] * dphi)
    sums = []
    for t in terms:
        s = np.bincount(own, weights=w_own * t, minlength=nc)
        s += np.bincount(nbr[inner], weights=w_nbr * t[inner], minlength=nc)
        sums.append(s)
    return normal_equations_solve(*sums, cells=np.arange(nc))


def compute_gradient(mesh: Mesh, field: ScalarField, config: SchemeConfig) -> np.ndarray:
    """Dispatch on `config`."""
    if config.scheme == "green_gauss":
        return green_gauss(mesh, field, config.correctors)
    return least_squares(mesh, field, config.q, config.interface_weights, config.include_boundary)


def stencil_gradient(offsets, dphi, q: float = 1.0, weight_scale=None) -> np.ndarray:
    """Weighted least-squares gradient of a single free-standing stencil.

    Parameters
    ----------
    offsets : (F, 2) array_like
        Stencil points relative to the centre.
    dphi : (..., F) array_like
        Value differences to the centre.
    q : float
        Weight exponent.
    weight_scale : (F,) array_like, optional
        Extra factor on the squared weights.

    Returns
    -------
    ndarray, shape (..., 2)
    """
    off = np.asarray(offsets, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    w2 = squared_weights(np.hypot(off[:, 0], off[:, 1]), q)
    if weight_scale is not None:
        w2 = w2 * np.asarray(weight_scale, dtype=float)
    dx, dy = off[:, 0], off[:, 1]
    return normal_equations_solve(np.sum(w2 * dx * dx), np.sum(w2 * dx * dy), np.sum(w2 * dy * dy),
                                  dphi @ (w2 * dx), dphi @ (w2 * dy))


def parallelogram_gradient(d_xi, d_eta, phi1, phi2, phi3, phi4) -> np.ndarray:
    """Central-difference gradient on a parallelogram stencil.

    ``phi1``/``phi3`` sit at ``P +/- d_xi`` and ``phi2``/``phi4`` at
    ``P +/- d_eta``.
    """
    ax, ay = d_xi
    bx, by = d_eta
    det = ax * by - ay * bx
    a = np.asarray(phi1) - np.asarray(phi3)
    b = np.asarray(phi2) - np.asarray(phi4)
    return np.stack([by * a - ay * b, ax * b - bx * a], axis=-1) / (2.0 * det)


def reference_parallelogram_gradient(mesh: Mesh, field: ScalarField, cell: int, tol: float = 1e-12):
    """Parallelogram central-difference gradient at an interior `cell`.

    The cell must have exactly four neighbours forming two pairs placed
    symmetrically about its centroid.

    Raises
    ------
    ValueError
        If the structure is not found.
    """
    f = mesh.faces_of(cell)
    if len(f) != 4 or np.any(mesh.neighbour[f] < 0):
        raise ValueError(f"cell {cell} does not have four neighbouring cells")
    nb = np.where(mesh.owner[f] == cell, mesh.neighbour[f], mesh.owner[f])
    P = mesh.cell_centroid[cell]
    off = mesh.cell_centroid[nb] - P
    scale = np.max(np.abs(off))
    # faces are anticlockwise, so opposite neighbours are two apart
    for k in (0, 1):
        if np.max(np.abs(off[k] + off[k + 2])) > tol * scale:
            raise ValueError(f"cell {cell} lacks the parallelogram neighbour structure")
    v = field.cell_values
    return parallelogram_gradient(0.5 * (off[0] - off[2]), 0.5 * (off[1] - off[3]),
                                  v[nb[0]], v[nb[1]], v[nb[2]], v[nb[3]])
