"""Error norms, observed orders and refinement studies."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .fields import exact_gradient, make_field, sample
from .gradients import SchemeConfig, compute_gradient
from .grids import EllipticGridSpec, GridSpec, generate, interface_faces, nominal_spacing
from .mesh import Mesh

__all__ = [
    "eps_norms",
    "observed_order",
    "CELL_CLASSES",
    "classify_cells",
    "class_norms",
    "StudySpec",
    "StudyRow",
    "ErrorReport",
    "run_study",
    "fine_interface_cell",
    "format_float",
    "STUDY_COLUMNS",
]

CELL_CLASSES = ("interior", "boundary", "interface")
NORMS = ("mean", "mean_vol", "max")
STUDY_COLUMNS = ("family", "level", "h", "scheme", "q", "correctors", "norm", "cell_class",
                 "value", "observed_order")


def eps_norms(grad, exact, mesh: Mesh | None = None, volume_weighted: bool = False):
    """Mean and maximum of the Euclidean gradient error over cells.

    Parameters
    ----------
    grad, exact : (M, 2) array_like
    mesh : Mesh, optional
        Needed for volume weighting.
    volume_weighted : bool
        Weight each cell's error by its area and divide by the total area.

    Returns
    -------
    (float, float)
        ``(eps_mean, eps_max)``.
    """
    e = np.hypot(*(np.asarray(grad, dtype=float) - np.asarray(exact, dtype=float)).reshape(-1, 2).T)
    if volume_weighted:
        if mesh is None:
            raise ValueError("volume weighting needs the mesh")
        vol = mesh.cell_volume
        mean = float(np.sum(vol * e) / np.sum(vol))
    else:
        mean = float(np.mean(e))
    return mean, float(np.max(e))


def observed_order(errors: Sequence[float]) -> np.ndarray:
    """``log2(e_r / e_{r+1})`` for each consecutive pair.

    Raises
    ------
    ValueError
        For fewer than two levels or non-positive errors.
    """
    e = np.asarray(errors, dtype=float)
    if e.size < 2:
        raise ValueError("need at least two levels")
    if np.any(~(e > 0)):
        raise ValueError("errors must be positive")
    return np.log2(e[:-1] / e[1:])


def classify_cells(mesh: Mesh) -> np.ndarray:
    """Index into ``CELL_CLASSES`` for every cell.

    Cells next to a level jump are ``interface`` cells; of the remaining
    ones, cells owning a boundary face are ``boundary`` cells.  The classes
    partition the mesh.
    """
    cls = np.zeros(mesh.n_cells, dtype=np.int64)
    cls[mesh.owner[mesh.boundary_faces]] = 1
    f = interface_faces(mesh)
    cls[mesh.owner[f]] = 2
    cls[mesh.neighbour[f]] = 2
    return cls


def class_norms(err: np.ndarray, mesh: Mesh, cls: np.ndarray | None = None) -> dict:
    """Norms of the per-cell error magnitude `err` for every non-empty class.

    Returns
    -------
    dict
        ``{class: {"mean": .., "mean_vol": .., "max": .., "count": .., "volume": ..}}``
        including the key ``"all"``.
    """
    if cls is None:
        cls = classify_cells(mesh)
    vol = mesh.cell_volume
    out = {}
    groups = [("all", np.ones(mesh.n_cells, dtype=bool))]
    groups += [(name, cls == k) for k, name in enumerate(CELL_CLASSES)]
    for name, sel in groups:
        if not sel.any():
            continue
        e, v = err[sel], vol[sel]
        out[name] = {"mean": float(e.mean()), "mean_vol": float(np.sum(v * e) / np.sum(v)),
                     "max": float(e.max()), "count": int(sel.sum()), "volume": float(v.sum())}
    return out


def fine_interface_cell(mesh: Mesh, y_target: float = 0.25) -> int:
    """Fine composite cell just right of the ``x = 0.5`` level interface.

    Its left neighbour is coarse; its other neighbours are fine.  The cell
    nearest to ``y = y_target`` is returned.
    """
    f = interface_faces(mesh)
    n = mesh.face_normal[f]
    x = mesh.face_centroid[f]
    vertical = np.abs(n[:, 1]) < 1e-12
    on_line = np.abs(x[:, 0] - 0.5) < 1e-12
    cand = f[vertical & on_line]
    cells = np.where(mesh.levels[mesh.owner[cand]] > mesh.levels[mesh.neighbour[cand]],
                     mesh.owner[cand], mesh.neighbour[cand])
    cells = cells[mesh.cell_centroid[cells, 0] > 0.5]
    if len(cells) == 0:
        raise ValueError("mesh has no fine cell right of x = 0.5")
    k = np.argmin(np.abs(mesh.cell_centroid[cells, 1] - y_target))
    return int(cells[k])


@dataclass(frozen=True)
class StudySpec:
    """A refinement study of gradient schemes on one grid family.

    Attributes
    ----------
    family : str
    levels : tuple of int
    field : str
        Field name understood by :func:`fvgrad.fields.make_field`.
    schemes : tuple of SchemeConfig
    seed : int
    base_n : int, optional
    straight_boundary : bool
    elliptic : EllipticGridSpec
    breakdown : bool
        Also report the interior/boundary/interface classes.
    """

    family: str = "cartesian"
    levels: tuple = (0, 1, 2, 3)
    field: str = "tanh"
    schemes: tuple = (SchemeConfig("green_gauss"), SchemeConfig("least_squares", q=1.0))
    seed: int = 0
    base_n: int | None = None
    straight_boundary: bool = False
    elliptic: EllipticGridSpec = dc_field(default_factory=EllipticGridSpec)
    breakdown: bool = True

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("need at least one level")
        if list(self.levels) != sorted(set(self.levels)):
            raise ValueError("levels must be increasing")
        make_field(self.field)

    def grid(self, level: int) -> GridSpec:
        return GridSpec(self.family, level, self.base_n, self.seed,
                        straight_boundary=self.straight_boundary, elliptic=self.elliptic)


@dataclass(frozen=True)
class StudyRow:
    family: str
    level: int
    h: float
    scheme: str
    q: float | None
    correctors: int | None
    norm: str
    cell_class: str
    value: float
    observed_order: float

    @property
    def label(self) -> str:
        if self.scheme == "gg":
            return f"d{self.correctors}"
        return f"q{self.q:g}" + ("i" if self.scheme == "ls_iw" else "")


def _scheme_columns(cfg: SchemeConfig):
    if cfg.scheme == "green_gauss":
        return "gg", None, cfg.correctors
    return ("ls_iw" if cfg.interface_weights else "ls"), cfg.q, None


def format_float(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


@dataclass
class ErrorReport:
    """Long-format table of study results."""

    rows: list

    def select(self, label: str, norm: str, cell_class: str = "all") -> list:
        """Rows of one scheme label (``d0``, ``q1.5``, ``q2i``, ...), ordered by level."""
        out = [r for r in self.rows if r.label == label and r.norm == norm and r.cell_class == cell_class]
        return sorted(out, key=lambda r: r.level)

    def values(self, label: str, norm: str, cell_class: str = "all") -> np.ndarray:
        return np.array([r.value for r in self.select(label, norm, cell_class)])

    def orders(self, label: str, norm: str, cell_class: str = "all") -> np.ndarray:
        return observed_order(self.values(label, norm, cell_class))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(STUDY_COLUMNS)
        for r in self.rows:
            w.writerow([r.family, r.level, format_float(r.h), r.scheme, format_float(r.q),
                        "" if r.correctors is None else r.correctors, r.norm, r.cell_class,
                        format_float(r.value), format_float(r.observed_order)])
        return buf.getvalue()

    def to_gnuplot(self) -> str:
        """One data block per scheme and norm (cell class ``all``).

        Blocks are separated by two blank lines so gnuplot's ``index``
        selects them; columns are level, h, value, observed order.
        """
        keys = []
        for r in self.rows:
            k = (r.label, r.norm)
            if r.cell_class == "all" and k not in keys:
                keys.append(k)
        blocks = []
        for label, norm in keys:
            lines = [f"# scheme={label} norm={norm}", "# level h value observed_order"]
            for r in self.select(label, norm):
                lines.append(f"{r.level} {format_float(r.h)} {format_float(r.value)} {format_float(r.observed_order)}")
            blocks.append("\n".join(lines))
        return "\n\n\n".join(blocks) + "\n"


def _level_results(spec: StudySpec, level: int):
    grid = spec.grid(level)
    mesh = generate(grid)
    fld = make_field(spec.field)
    values = sample(fld, mesh)
    exact = exact_gradient(fld, mesh)
    cls = classify_cells(mesh)
    out = []
    for cfg in spec.schemes:
        g = compute_gradient(mesh, values, cfg)
        err = np.hypot(*(g - exact).T)
        norms = class_norms(err, mesh, cls)
        if not spec.breakdown:
            norms = {"all": norms["all"]}
        out.append((cfg, norms))
    return nominal_spacing(grid), out


def run_study(spec: StudySpec, threads: int = 1) -> ErrorReport:
    """Run every scheme of `spec` on every level.

    Levels may be processed concurrently; the returned table does not
    depend on `threads`.
    """
    if threads > 1 and len(spec.levels) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: _level_results(spec, r), spec.levels))
    else:
        results = [_level_results(spec, r) for r in spec.levels]

    rows = []
    previous = {}
    for level, (h, per_scheme) in zip(spec.levels, results):
        for cfg, norms in per_scheme:
            scheme, q, corr = _scheme_columns(cfg)
            for cell_class, vals in norms.items():
                for norm in NORMS:
                    v = vals[norm]
                    key = (scheme, q, corr, norm, cell_class)
                    prev = previous.get(key)
                    order = math.log2(prev / v) if prev is not None and prev > 0 and v > 0 else math.nan
                    previous[key] = v
                    rows.append(StudyRow(spec.family, level, h, scheme, q, corr, norm, cell_class, v, order))
    return ErrorReport(rows)
