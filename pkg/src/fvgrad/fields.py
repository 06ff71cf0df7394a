"""Analytic test fields and their sampling onto meshes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

__all__ = [
    "AnalyticField",
    "Tanh2D",
    "Sin2D",
    "Linear",
    "Quadratic",
    "Tanh1D",
    "ScalarField",
    "sample",
    "exact_gradient",
    "make_field",
    "FIELD_NAMES",
]


class AnalyticField:
    """Smooth scalar field with closed-form gradient and Laplacian."""

    name = "field"

    def value(self, x, y):
        raise NotImplementedError

    def gradient(self, x, y):
        """Gradient as an array of shape ``(..., 2)``."""
        raise NotImplementedError

    def laplacian(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.value(x, y)


class Tanh2D(AnalyticField):
    """``tanh(x) tanh(y)``."""

    name = "tanh"

    def value(self, x, y):
        return np.tanh(x) * np.tanh(y)

    def gradient(self, x, y):
        tx, ty = np.tanh(x), np.tanh(y)
        return np.stack([(1 - tx**2) * ty, (1 - ty**2) * tx], axis=-1)

    def laplacian(self, x, y):
        tx, ty = np.tanh(x), np.tanh(y)
        return -2.0 * tx * ty * (2.0 - tx**2 - ty**2)


class Sin2D(AnalyticField):
    """``sin(pi x) sin(pi y)``."""

    name = "sin"

    def value(self, x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def gradient(self, x, y):
        sx, sy = np.sin(np.pi * x), np.sin(np.pi * y)
        cx, cy = np.cos(np.pi * x), np.cos(np.pi * y)
        return np.stack([np.pi * cx * sy, np.pi * sx * cy], axis=-1)

    def laplacian(self, x, y):
        return -2.0 * np.pi**2 * self.value(x, y)


@dataclass(frozen=True)
class Linear(AnalyticField):
    """``a + b x + c y``."""

    a: float = 0.0
    b: float = 1.0
    c: float = 0.0
    name = "linear"

    def value(self, x, y):
        return self.a + self.b * np.asarray(x, dtype=float) + self.c * np.asarray(y, dtype=float)

    def gradient(self, x, y):
        x = np.asarray(x, dtype=float)
        return np.stack(np.broadcast_arrays(self.b + 0 * x, self.c + 0 * np.asarray(y, dtype=float)), axis=-1)

    def laplacian(self, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


@dataclass(frozen=True)
class Quadratic(AnalyticField):
    """``c0 + cx x + cy y + cxx x^2 + cxy x y + cyy y^2``."""

    c0: float = 0.0
    cx: float = 0.0
    cy: float = 0.0
    cxx: float = 1.0
    cxy: float = 0.0
    cyy: float = 1.0
    name = "quadratic"

    def value(self, x, y):
        return (self.c0 + self.cx * x + self.cy * y
                + self.cxx * x * x + self.cxy * x * y + self.cyy * y * y)

    def gradient(self, x, y):
        return np.stack([self.cx + 2 * self.cxx * x + self.cxy * y,
                         self.cy + self.cxy * x + 2 * self.cyy * y], axis=-1)

    def laplacian(self, x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, 2.0 * (self.cxx + self.cyy))


class Tanh1D:
    """``tanh(x)`` with its first derivative."""

    name = "tanh1d"

    def value(self, x):
        return np.tanh(x)

    def derivative(self, x):
        return 1.0 - np.tanh(x) ** 2

    __call__ = value


FIELD_NAMES = ("tanh", "sin", "linear", "quadratic")


def make_field(name: str) -> AnalyticField:
    """Field selected by its command-line name."""
    table = {"tanh": Tanh2D, "sin": Sin2D, "linear": Linear, "quadratic": Quadratic}
    try:
        return table[name]()
    except KeyError:
        raise ValueError(f"unknown field {name!r}; choose from {FIELD_NAMES}") from None


@dataclass
class ScalarField:
    """Values at cell centroids and at the centroids of the boundary faces.

    ``boundary_values[k]`` belongs to face ``mesh.boundary_faces[k]``.
    """

    cell_values: np.ndarray
    boundary_values: np.ndarray

    def check(self, mesh: Mesh) -> None:
        if self.cell_values.shape != (mesh.n_cells,):
            raise ValueError("cell_values do not match the mesh")
        if self.boundary_values.shape != (len(mesh.boundary_faces),):
            raise ValueError("boundary_values do not match the mesh")

    def face_far_values(self, mesh: Mesh) -> np.ndarray:
        """Per face: neighbour cell value, or the boundary value."""
        out = np.empty(mesh.n_faces)
        inner = mesh.interior_faces
        out[inner] = self.cell_values[mesh.neighbour[inner]]
        out[mesh.boundary_faces] = self.boundary_values
        return out


def sample(field: AnalyticField, mesh: Mesh) -> ScalarField:
    """Exact values of `field` at cell centroids and boundary face centroids."""
    c = mesh.cell_centroid
    b = mesh.face_centroid[mesh.boundary_faces]
    return ScalarField(np.asarray(field.value(c[:, 0], c[:, 1]), dtype=float),
                       np.asarray(field.value(b[:, 0], b[:, 1]), dtype=float))


def exact_gradient(field: AnalyticField, mesh: Mesh) -> np.ndarray:
    """Exact gradient at every cell centroid, shape ``(n_cells, 2)``."""
    c = mesh.cell_centroid
    return np.asarray(field.gradient(c[:, 0], c[:, 1]), dtype=float).reshape(-1, 2)
