"""One-dimensional least-squares derivative experiments.

A stencil is a set of nonzero displacements ``dx_f`` from the evaluation
point.  Diagonal weights ``w_f = |dx_f|**-q`` give

    phi' = sum(dx dphi w^2) / sum(dx^2 w^2),

and the non-diagonal ("generalW") variant fits the difference quotients of
pairs of stencil points, which is exact for quadratics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import Tanh1D

__all__ = [
    "derivative_diagonal",
    "derivative_generalW",
    "Experiment1D",
    "ExperimentRow",
    "run_experiment",
    "parse_method",
    "method_derivative",
    "mean_last_orders",
]


def derivative_diagonal(dx, dphi, q: float = 0.0):
    """Weighted least-squares derivative with weights ``|dx|**-q``.

    Parameters
    ----------
    dx : (F,) array_like
        Nonzero displacements.
    dphi : (..., F) array_like
        Value differences ``phi(x0 + dx) - phi(x0)``.
    q : float
        Weight exponent.
    """
    dx = np.asarray(dx, dtype=float)
    if dx.size == 0:
        raise ValueError("empty stencil")
    if np.any(dx == 0):
        raise ValueError("stencil displacements must be nonzero")
    w2 = np.exp(-2.0 * q * np.log(np.abs(dx))) if q else np.ones_like(dx)
    return (np.asarray(dphi, dtype=float) @ (dx * w2)) / np.sum(dx * dx * w2)


def derivative_generalW(dx, dphi):
    """Derivative from the non-diagonal weighting that cancels curvature.

    Solves the ``F - 1`` equations
    ``phi' (1/dx_i - 1/dx_1) = dphi_i/dx_i^2 - dphi_1/dx_1^2``
    (``i = 2..F``) in the unweighted least-squares sense.

    Raises
    ------
    ValueError
        For fewer than two points or when all coefficients vanish.
    """
    dx = np.asarray(dx, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    if dx.size < 2:
        raise ValueError("generalW needs at least two stencil points")
    if np.any(dx == 0):
        raise ValueError("stencil displacements must be nonzero")
    a = 1.0 / dx[1:] - 1.0 / dx[0]
    if not np.any(a):
        raise ValueError("degenerate stencil: all coefficients vanish")
    rhs = dphi[..., 1:] / dx[1:] ** 2 - (dphi[..., :1] / dx[0] ** 2)
    return (rhs @ a) / np.dot(a, a)


def parse_method(name: str):
    """``"q1.5"`` -> ``("q", 1.5)``; ``"G"`` -> ``("G", None)``."""
    s = name.strip()
    if s.upper() == "G":
        return ("G", None)
    if s[:1].lower() == "q":
        try:
            q = float(s[1:])
        except ValueError:
            raise ValueError(f"bad method {name!r}") from None
        if not math.isfinite(q) or q < 0:
            raise ValueError(f"bad method {name!r}")
        return ("q", q)
    raise ValueError(f"bad method {name!r}; expected qN or G")


def method_derivative(method: str, dx, dphi):
    kind, q = parse_method(method)
    if kind == "G":
        return derivative_generalW(dx, dphi)
    return derivative_diagonal(dx, dphi, q)


@dataclass(frozen=True)
class Experiment1D:
    """Halving study of 1D derivative estimates of ``tanh``.

    Attributes
    ----------
    stencil : tuple of float
        Displacements at halving 0.
    halvings : int
        Number of halvings R; halvings 0..R are evaluated.
    methods : tuple of str
        ``qN`` for diagonal weights with exponent N, ``G`` for generalW.
    points : int
        Sample points, equispaced on ``[x0, x1]``.
    """

    stencil: tuple = (-0.1, 0.1)
    halvings: int = 5
    methods: tuple = ("q0", "q1", "q1.5", "q2", "q3", "G")
    points: int = 101
    x0: float = 0.0
    x1: float = 2.0

    def __post_init__(self):
        if not self.stencil or any(d == 0 for d in self.stencil):
            raise ValueError("stencil displacements must be nonzero")
        if self.halvings < 0:
            raise ValueError("halvings must be >= 0")
        for m in self.methods:
            parse_method(m)


@dataclass(frozen=True)
class ExperimentRow:
    halving: int
    method: str
    mean_abs_error: float
    observed_order: float  # nan for the first halving


def run_experiment(exp: Experiment1D) -> list[ExperimentRow]:
    """Mean absolute derivative error per method and halving.

    Returns rows ordered by method, then halving.  The observed order of a
    row is ``log2(e_{r-1} / e_r)``.
    """
    f = Tanh1D()
    x = np.linspace(exp.x0, exp.x1, exp.points)
    exact = f.derivative(x)
    rows = []
    for m in exp.methods:
        prev = None
        for r in range(exp.halvings + 1):
            dx = np.asarray(exp.stencil, dtype=float) / 2.0**r
            dphi = f.value(x[:, None] + dx[None, :]) - f.value(x)[:, None]
            err = float(np.mean(np.abs(method_derivative(m, dx, dphi) - exact)))
            order = math.log2(prev / err) if prev is not None and prev > 0 and err > 0 else math.nan
            rows.append(ExperimentRow(r, m, err, order))
            prev = err
    return rows


def mean_last_orders(rows: Sequence[ExperimentRow], method: str, count: int = 2) -> float:
    """Mean of the last `count` observed orders of `method`."""
    orders = [r.observed_order for r in rows if r.method == method and not math.isnan(r.observed_order)]
    if len(orders) < count:
        raise ValueError("not enough halvings for an order estimate")
    return float(np.mean(orders[-count:]))
