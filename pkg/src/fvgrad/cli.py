"""Command-line interface.

Subcommands: ``grid``, ``gradient``, ``ls1d``, ``poisson``, ``study``.
Exit status is 0 on success, 1 on invalid input and 2 on numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .analysis import StudySpec, class_norms, format_float, run_study
from .fields import FIELD_NAMES, exact_gradient, make_field, sample
from .gradients import RankDeficientStencil, SchemeConfig, compute_gradient
from .grids import FAMILIES, EllipticGridSpec, GridSpec, generate, nominal_spacing
from .ls1d import Experiment1D, parse_method, run_experiment
from .mesh import MeshError, read_mesh, validate_mesh, write_mesh
from .poisson import FluxScheme, PoissonError, make_problem, solve

log = logging.getLogger("fvgrad")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_levels(text: str) -> list[int]:
    """``"a..b"`` (inclusive) or a single integer."""
    s = str(text).strip()
    try:
        if ".." in s:
            a, b = s.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(s)
    except ValueError:
        raise UsageError(f"bad level range {text!r}; expected a..b") from None
    if lo < 0 or hi < lo:
        raise UsageError(f"bad level range {text!r}")
    return list(range(lo, hi + 1))


def parse_schemes(text: str) -> tuple:
    """Comma list of ``dC`` (Green-Gauss, C correctors), ``qN`` and ``qNi``."""
    out = []
    for tok in str(text).split(","):
        t = tok.strip()
        if not t:
            continue
        try:
            if t[0] == "d":
                out.append(SchemeConfig("green_gauss", correctors=int(t[1:])))
            elif t[0] == "q":
                iw = t.endswith("i")
                out.append(SchemeConfig("least_squares", q=float(t[1:-1] if iw else t[1:]),
                                        interface_weights=iw))
            else:
                raise ValueError
        except ValueError:
            raise UsageError(f"bad scheme {t!r}; use dC, qN or qNi") from None
    if not out:
        raise UsageError("no schemes given")
    return tuple(out)


def _onoff(text):
    if text in ("on", "off"):
        return text == "on"
    raise argparse.ArgumentTypeError("expected on or off")


def _add_grid_options(p, default_family="cartesian", families=FAMILIES):
    p.add_argument("--grid", "--family", dest="family", choices=families, default=default_family,
                   help="grid family")
    p.add_argument("--base-n", type=int, default=None, help="cells per side at level 0")
    p.add_argument("--seed", type=int, default=0, help="seed of the perturbed family")
    p.add_argument("--solver-n", type=int, default=513,
                   help="nodes per side of the elliptic grid solve (2**k + 1)")
    p.add_argument("--amplitude", type=float, default=0.1,
                   help="boundary wave amplitude of the elliptic family")


def _add_scheme_options(p):
    p.add_argument("--scheme", choices=("gg", "ls"), default="ls", help="gradient scheme")
    p.add_argument("--correctors", type=int, default=0, help="Green-Gauss corrector steps")
    p.add_argument("--q", type=float, default=1.0, help="least-squares weight exponent")
    p.add_argument("--interface-weights", type=_onoff, default=False, metavar="{on,off}",
                   help="halve squared weights of faces touching a finer level")


def _add_common(p):
    p.add_argument("--config", help="JSON file whose keys override the flags")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads for independent levels")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fvgrad", description="Finite-volume gradient reconstruction toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("grid", help="generate or validate a mesh")
    _add_common(p)
    _add_grid_options(p)
    p.add_argument("--level", type=int, default=0, help="refinement level")
    p.add_argument("--straight-boundary", action="store_true",
                   help="perturbed family: keep boundary vertices on the boundary")
    p.add_argument("--validate", metavar="MESH", help="validate an existing mesh file instead")

    p = sub.add_parser("gradient", help="gradient errors of one scheme over a refinement series")
    _add_common(p)
    _add_grid_options(p)
    _add_scheme_options(p)
    p.add_argument("--levels", default="0..7", help="inclusive level range a..b")
    p.add_argument("--field", choices=FIELD_NAMES, default="tanh")

    p = sub.add_parser("ls1d", help="1D least-squares derivative halving study")
    _add_common(p)
    p.add_argument("--stencil", default="-0.10,0.10", help="comma-separated displacements")
    p.add_argument("--halvings", type=int, default=5)
    p.add_argument("--methods", default="q0,q1,q1.5,q2,q3,G")

    p = sub.add_parser("poisson", help="manufactured Poisson problem over a refinement series")
    _add_common(p)
    _add_grid_options(p, families=("cartesian", "perturbed"))
    _add_scheme_options(p)
    p.add_argument("--flux", choices=("overrelaxed", "standard"), default="overrelaxed")
    p.add_argument("--problem", choices=("tanh", "sin"), default="tanh")
    p.add_argument("--levels", default="0..4", help="inclusive level range a..b")
    p.add_argument("--relax", type=float, default=1.0, help="outer under-relaxation factor")

    p = sub.add_parser("study", help="multi-scheme convergence study in long CSV format")
    _add_common(p)
    _add_grid_options(p)
    p.add_argument("--levels", default="0..7", help="inclusive level range a..b")
    p.add_argument("--field", choices=FIELD_NAMES, default="tanh")
    p.add_argument("--schemes", default="d0,d1,d2,q0,q1,q1.5,q2",
                   help="comma list of dC, qN, qNi (i = interface weights)")
    p.add_argument("--gnuplot", help="also write gnuplot-ready blocks to this path")
    p.add_argument("--no-breakdown", action="store_true", help="skip per-cell-class norms")
    return ap


def _apply_config(parser, args):
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold an object")
    known = vars(args)
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("command", "config") or dest not in known:
            raise UsageError(f"unknown config key {key!r}")
        if dest == "family" and value not in FAMILIES:
            raise UsageError(f"unknown grid family {value!r}")
        if dest == "interface_weights" and isinstance(value, str):
            value = _onoff(value)
        setattr(args, dest, value)
    return args


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _elliptic(args) -> EllipticGridSpec:
    return EllipticGridSpec(amplitude=args.amplitude, solver_n=args.solver_n)


def _grid_spec(args, level: int, **extra) -> GridSpec:
    return GridSpec(args.family, level, args.base_n, args.seed,
                    elliptic=_elliptic(args) if args.family == "elliptic" else EllipticGridSpec(),
                    **extra)


def _scheme(args) -> SchemeConfig:
    return SchemeConfig("green_gauss" if args.scheme == "gg" else "least_squares",
                        args.correctors, args.q, bool(args.interface_weights))


def _orders(values):
    out = [math.nan]
    for a, b in zip(values[:-1], values[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else math.nan)
    return out


def _map_levels(fn, levels, threads):
    if threads > 1 and len(levels) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, levels))
    return [fn(r) for r in levels]


def cmd_grid(args) -> int:
    if args.validate:
        mesh = read_mesh(args.validate)
        problems = validate_mesh(mesh)
        for p in problems:
            print(p)
        print(f"{mesh!r}: {len(problems)} violations")
        return EXIT_OK if not problems else EXIT_INVALID
    mesh = generate(_grid_spec(args, args.level, straight_boundary=args.straight_boundary))
    problems = validate_mesh(mesh)
    if args.out:
        write_mesh(mesh, args.out)
        print(f"{mesh!r} written to {args.out}; {len(problems)} violations")
    else:
        from .mesh import dumps_mesh
        sys.stdout.write(dumps_mesh(mesh))
    return EXIT_OK if not problems else EXIT_INVALID


def cmd_gradient(args) -> int:
    levels = parse_levels(args.levels)
    cfg = _scheme(args)
    fld = make_field(args.field)

    def run(r):
        spec = _grid_spec(args, r)
        mesh = generate(spec)
        try:
            g = compute_gradient(mesh, sample(fld, mesh), cfg)
        except RankDeficientStencil as exc:
            exc.args = (f"level {r}: {exc}",)
            raise
        err = np.hypot(*(g - exact_gradient(fld, mesh)).T)
        n = class_norms(err, mesh)["all"]
        return r, nominal_spacing(spec), mesh.n_cells, n["mean"], n["mean_vol"], n["max"]

    rows = _map_levels(run, levels, args.threads)
    cols = list(zip(*rows))
    om, ov, ox = _orders(cols[3]), _orders(cols[4]), _orders(cols[5])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "h", "cells", "eps_mean", "eps_mean_vol", "eps_max",
                "order_mean", "order_mean_vol", "order_max"])
    for k, (r, h, nc, m, mv, mx) in enumerate(rows):
        w.writerow([r, format_float(h), nc, format_float(m), format_float(mv), format_float(mx),
                    format_float(om[k]), format_float(ov[k]), format_float(ox[k])])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_ls1d(args) -> int:
    try:
        stencil = tuple(float(s) for s in str(args.stencil).split(",") if s.strip())
    except ValueError:
        raise UsageError(f"bad stencil {args.stencil!r}") from None
    methods = tuple(m.strip() for m in str(args.methods).split(",") if m.strip())
    for m in methods:
        parse_method(m)
    rows = run_experiment(Experiment1D(stencil, int(args.halvings), methods))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["halving", "method", "mean_abs_error", "observed_order"])
    for r in rows:
        w.writerow([r.halving, r.method, format_float(r.mean_abs_error), format_float(r.observed_order)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_poisson(args) -> int:
    levels = parse_levels(args.levels)
    problem = make_problem(args.problem)
    scheme = FluxScheme(args.flux, _scheme(args))
    base_n = args.base_n or 32

    def run(r):
        if args.family == "perturbed":
            # perturbed level r perturbs the Cartesian grid of level r + 1
            if base_n % 2:
                raise UsageError("perturbed Poisson grids need an even base_n")
            spec = GridSpec("perturbed", r, base_n // 2, args.seed, straight_boundary=True)
        else:
            spec = GridSpec("cartesian", r, base_n)
        mesh = generate(spec)
        try:
            rep = solve(mesh, problem, scheme, relax=args.relax)
        except PoissonError as exc:
            raise type(exc)(f"level {r}: {exc}") from exc
        log.info("level %d: %d outer iterations", r, rep.outer_iterations)
        return r, nominal_spacing(spec), rep.eps_mean, rep.eps_max

    rows = _map_levels(run, levels, args.threads)
    orders = _orders([row[2] for row in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "h", "eps_mean", "eps_max", "order"])
    for (r, h, m, mx), o in zip(rows, orders):
        w.writerow([r, format_float(h), format_float(m), format_float(mx), format_float(o)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_study(args) -> int:
    spec = StudySpec(args.family, tuple(parse_levels(args.levels)), args.field,
                     parse_schemes(args.schemes), args.seed, args.base_n,
                     elliptic=_elliptic(args), breakdown=not args.no_breakdown)
    report = run_study(spec, threads=args.threads)
    _emit(report.to_csv(), args.out)
    if args.gnuplot:
        _emit(report.to_gnuplot(), args.gnuplot)
    return EXIT_OK


COMMANDS = {"grid": cmd_grid, "gradient": cmd_gradient, "ls1d": cmd_ls1d,
            "poisson": cmd_poisson, "study": cmd_study}


def _join_negative_values(argv):
    # "--stencil -0.1,0.1" would otherwise be read as an unknown flag
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--stencil", "--levels") and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
        args = _apply_config(parser, args)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fvgrad: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RankDeficientStencil, PoissonError, RuntimeError, FloatingPointError) as exc:
        print(f"fvgrad: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (MeshError, ValueError, OSError) as exc:
        print(f"fvgrad: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
