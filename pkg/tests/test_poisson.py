import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from fvgrad.fields import Linear, Quadratic
from fvgrad.gradients import SchemeConfig, compute_gradient
from fvgrad.grids import GridSpec, generate
from fvgrad.poisson import (Discretisation, FluxScheme, InvertedGeometry, NonConvergence,
                            PoissonProblem, Stagnation, conjugate_gradient, flux_boundary,
                            flux_overrelaxed, flux_standard, make_problem, solve)

finite = st.floats(-3, 3)


def test_overrelaxed_orthogonal_face_is_two_point():
    f = flux_overrelaxed(2.0, [1, 0], [0, 0], [0.5, 0], 1.0, 2.0, [7.0, -9.0])
    assert f == pytest.approx(-2.0 * 1.0 / 0.5)


def test_overrelaxed_45_degrees():
    # d* = (1, 1) has length sqrt(2) and t* = (0, -1)
    S, n, P, N = 1.5, np.array([1.0, 0.0]), np.array([0.0, 0.0]), np.array([1.0, 1.0])
    g = np.array([0.0, 2.0])
    f = flux_overrelaxed(S, n, P, N, 0.0, 0.0, g)
    assert f == pytest.approx(-S * (g @ np.array([0.0, -1.0])))


@settings(max_examples=50, deadline=None)
@given(finite, finite, finite, st.floats(-1, 1), st.floats(0.2, 2), st.floats(0.1, 3))
def test_overrelaxed_linear_exact(a, b, c, skew_y, dx, k):
    fld = Linear(a, b, c)
    P, N, n = np.array([0.0, 0.0]), np.array([dx, skew_y]), np.array([1.0, 0.0])
    g = np.array([b, c])
    f = flux_overrelaxed(1.3, n, P, N, fld.value(*P), fld.value(*N), g, k)
    assert f == pytest.approx(-1.3 * k * b, abs=1e-12 * (1 + abs(b) + abs(c)))


@settings(max_examples=50, deadline=None)
@given(finite, finite, finite, st.floats(-1, 1), st.floats(0.2, 2), st.floats(-0.5, 0.5))
def test_standard_linear_exact(a, b, c, skew_y, dx, cy):
    fld = Linear(a, b, c)
    P, N, n = np.array([0.0, 0.0]), np.array([dx, skew_y]), np.array([1.0, 0.0])
    cf = np.array([0.5 * dx, cy])
    g = np.array([b, c])
    f = flux_standard(0.7, n, cf, P, N, fld.value(*P), fld.value(*N), g, g)
    assert f == pytest.approx(-0.7 * b, abs=1e-12 * (1 + abs(b) + abs(c)))


def test_standard_equals_overrelaxed_on_cartesian_face():
    n, P, N, c = np.array([0.0, 1.0]), np.array([0.2, 0.0]), np.array([0.2, 0.4]), np.array([0.2, 0.2])
    gP, gN = np.array([1.0, 2.0]), np.array([-3.0, 0.5])
    fs = flux_standard(0.4, n, c, P, N, 1.0, 3.0, gP, gN)
    fo = flux_overrelaxed(0.4, n, P, N, 1.0, 3.0, 0.5 * (gP + gN))
    assert fs == pytest.approx(fo, rel=1e-15)


def test_standard_skewness_term_proportional_to_offset():
    fld = Quadratic(cxx=0.0, cxy=1.0, cyy=0.0)  # phi = x y
    P, N, n = np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([1.0, 0.0])
    diffs = []
    for s in (0.1, 0.2):
        cf = np.array([0.5, s])
        fs = flux_standard(1.0, n, cf, P, N, fld.value(*P), fld.value(*N), fld.gradient(*P), fld.gradient(*N))
        fo = flux_overrelaxed(1.0, n, P, N, fld.value(*P), fld.value(*N), fld.gradient(0.5, 0.0))
        diffs.append(fs - fo)
    assert diffs[0] != 0
    assert diffs[1] / diffs[0] == pytest.approx(2.0)


def test_boundary_projection_hand_value():
    P, c, n = np.array([0.3, 0.4]), np.array([0.0, 0.5]), np.array([-1.0, 0.0])
    g = np.array([0.0, 2.0])
    # P_f = (0.3, 0.5), distance 0.3; phi(P_f) = 1 + 2 * 0.1
    f = flux_boundary(1.0, n, c, P, 1.0, 0.0, g)
    assert f == pytest.approx(-(0.0 - 1.2) / 0.3)


def test_boundary_cartesian_half_spacing():
    f = flux_boundary(0.25, [0, -1], [0.5, 0.0], [0.5, 0.125], 2.0, 1.0, [5.0, 5.0])
    assert f == pytest.approx(-0.25 * (1.0 - 2.0) / 0.125)


@settings(max_examples=50, deadline=None)
@given(finite, finite, finite, st.floats(0.05, 1), st.floats(-1, 1))
def test_boundary_linear_exact(a, b, c, px, py):
    fld = Linear(a, b, c)
    P, cf, n = np.array([px, py]), np.array([0.0, 0.0]), np.array([-1.0, 0.0])
    f = flux_boundary(1.0, n, cf, P, fld.value(*P), fld.value(*cf), np.array([b, c]))
    assert f == pytest.approx(b, abs=1e-11 * (1 + abs(b) + abs(c)))


def test_inverted_geometry():
    with pytest.raises(InvertedGeometry):
        flux_overrelaxed(1.0, [1, 0], [0, 0], [-1, 0], 0.0, 0.0, [0, 0])
    with pytest.raises(InvertedGeometry):
        flux_boundary(1.0, [1, 0], [0, 0], [0, 0], 0.0, 0.0, [0, 0])


def test_two_by_two_linear_exact():
    m = generate(GridSpec("cartesian", 0, base_n=2))
    rep = solve(m, make_problem("linear"))
    assert rep.eps_max < 1e-12


@pytest.mark.parametrize("kind", ["overrelaxed", "standard"])
@pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
def test_linear_exact_on_distorted_grid(kind, q):
    # least-squares gradients are exact for linear fields, so is the solution
    m = generate(GridSpec("perturbed", 0, seed=4, straight_boundary=True))
    rep = solve(m, make_problem("linear"), FluxScheme(kind, SchemeConfig("ls", q=q)))
    assert rep.eps_max < 1e-9


def test_matrix_symmetric_positive_definite():
    m = generate(GridSpec("perturbed", 0, seed=1, straight_boundary=True))
    A = Discretisation(m).matrix
    assert abs(A - A.T).max() == 0
    assert np.all(np.linalg.eigvalsh(A.toarray()) > 0)


def test_cartesian_assemblies_coefficient_identical():
    m = generate(GridSpec("cartesian", 1, base_n=8))
    a, b = Discretisation(m, "overrelaxed"), Discretisation(m, "standard")
    np.testing.assert_allclose(a.a_face, b.a_face, rtol=1e-13)
    np.testing.assert_allclose(a.a_boundary, b.a_boundary, rtol=1e-13)
    assert abs(a.matrix - b.matrix).max() <= 1e-13 * abs(a.matrix).max()


def test_conservation_of_converged_solution():
    m = generate(GridSpec("perturbed", 1, seed=2, straight_boundary=True))
    prob = make_problem("tanh")
    scheme = FluxScheme("standard", SchemeConfig("ls", q=1.0))
    rep = solve(m, prob, scheme)
    disc = Discretisation(m, "standard")
    grad = compute_gradient(m, rep.solution, scheme.gradient)
    F, Fb = disc.face_fluxes(rep.solution.cell_values, rep.solution.boundary_values, grad)
    nc = m.n_cells
    per_cell = (np.bincount(disc.own, F, nc) - np.bincount(disc.nbr, F, nc) + np.bincount(disc.bown, Fb, nc))
    c = m.cell_centroid
    src = prob.source(c[:, 0], c[:, 1]) * m.cell_volume
    scale = np.abs(F).max()
    # interior fluxes cancel pairwise, leaving source = boundary outflow
    assert abs(per_cell.sum() - Fb.sum()) <= 1e-10 * scale
    assert abs(src.sum() - Fb.sum()) <= 1e-8 * np.abs(src).sum()
    assert np.max(np.abs(src - per_cell)) <= 1e-9 * np.abs(src).max()


def test_cartesian_second_order():
    errs = [solve(generate(GridSpec("cartesian", r, base_n=8)), make_problem("tanh")).eps_mean for r in range(3)]
    assert math.log2(errs[-2] / errs[-1]) == pytest.approx(2.0, abs=0.2)


def test_sin_problem_source():
    p = make_problem("sin")
    assert p.source(0.5, 0.5) == pytest.approx(2 * math.pi**2)


def test_non_convergence_reported():
    m = generate(GridSpec("perturbed", 1, seed=5, straight_boundary=True))
    with pytest.raises(NonConvergence):
        solve(m, make_problem("tanh"), FluxScheme("overrelaxed", SchemeConfig("gg")), max_outer=1)


def test_stagnation_reported_distinctly():
    m = generate(GridSpec("perturbed", 1, seed=5, straight_boundary=True))
    with pytest.raises(Stagnation):
        solve(m, make_problem("tanh"), FluxScheme("overrelaxed", SchemeConfig("gg")),
              stall_window=1, stall_ratio=1.0)


def test_under_relaxation_still_converges():
    m = generate(GridSpec("perturbed", 0, seed=5, straight_boundary=True))
    a = solve(m, make_problem("tanh"), FluxScheme("standard", SchemeConfig("ls")))
    b = solve(m, make_problem("tanh"), FluxScheme("standard", SchemeConfig("ls")), relax=0.7)
    assert b.outer_iterations > a.outer_iterations
    np.testing.assert_allclose(a.solution.cell_values, b.solution.cell_values, atol=1e-9)


def test_conjugate_gradient_matches_direct_solve():
    m = generate(GridSpec("perturbed", 1, seed=8, straight_boundary=True))
    A = Discretisation(m).matrix.tocsc()
    b = np.random.default_rng(0).standard_normal(m.n_cells)
    x, it, ok = conjugate_gradient(A, b, rtol=1e-13)
    assert ok and it > 0
    np.testing.assert_allclose(x, spla.spsolve(A, b), rtol=1e-9, atol=1e-12)


def test_problem_validation():
    with pytest.raises(ValueError):
        PoissonProblem(Linear(), k=0.0)
    with pytest.raises(ValueError):
        make_problem("cosh")
    with pytest.raises(ValueError):
        FluxScheme("upwind")
    with pytest.raises(ValueError):
        solve(generate(GridSpec("cartesian", 0)), make_problem("tanh"), relax=0.0)


def test_manufactured_source_consistency():
    for name in ("tanh", "sin"):
        p = make_problem(name)
        x, y, h = 0.3, 0.6, 2e-4
        lap = (p.exact.value(x + h, y) + p.exact.value(x - h, y) + p.exact.value(x, y + h)
               + p.exact.value(x, y - h) - 4 * p.exact.value(x, y)) / h**2
        assert p.source(x, y) == pytest.approx(-lap, rel=1e-6)
