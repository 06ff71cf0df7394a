import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fvgrad.analysis import fine_interface_cell
from fvgrad.fields import Linear, Quadratic, ScalarField, Tanh2D, sample
from fvgrad.gradients import (RankDeficientStencil, SchemeConfig, compute_gradient, green_gauss,
                              interpolate_face, least_squares, normal_equations_solve,
                              parallelogram_gradient, reference_parallelogram_gradient,
                              stencil_gradient)
from fvgrad.grids import GridSpec, generate, structured_mesh

Q_VALUES = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0]


def test_interpolation_midpoint():
    m = generate(GridSpec("cartesian", 0))
    v = np.zeros(m.n_cells)
    f = m.interior_faces[0]
    v[m.owner[f]], v[m.neighbour[f]] = 1.0, 3.0
    phi = interpolate_face(m, ScalarField(v, np.zeros(len(m.boundary_faces))))
    assert phi[f] == pytest.approx(2.0)


def test_interpolation_linear_exact(family_mesh):
    fld = Linear(0.2, 1.3, -0.7)
    phi = interpolate_face(family_mesh, sample(fld, family_mesh))
    cp = family_mesh.face_cprime
    far = family_mesh.face_far
    # boundary faces hold the value at the face centroid
    target = np.where(family_mesh.is_boundary, fld.value(far[:, 0], far[:, 1]), fld.value(cp[:, 0], cp[:, 1]))
    np.testing.assert_allclose(phi, target, atol=1e-13)


def test_interpolation_composite_interface():
    m = generate(GridSpec("composite", 0))
    cell = fine_interface_cell(m)
    f = m.faces_of(cell)
    f = f[m.neighbour[f] >= 0]
    other = np.where(m.owner[f] == cell, m.neighbour[f], m.owner[f])
    k = np.flatnonzero(m.levels[other] == 0)[0]
    face, coarse = f[k], other[k]
    v = np.zeros(m.n_cells)
    v[cell], v[coarse] = 2.0, 5.0
    phi = interpolate_face(m, ScalarField(v, np.zeros(len(m.boundary_faces))))
    assert phi[face] == pytest.approx(0.3 * 5.0 + 0.7 * 2.0)


def test_green_gauss_boundary_cell_hand_value():
    # cells of width 1 next to the boundary x = 0, phi = x^2
    xs = np.array([0.0, 1.0, 2.0, 3.0])
    ys = np.array([0.0, 1.0, 2.0, 3.0])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    m = structured_mesh(X, Y)
    fld = Quadratic(cxx=1.0, cyy=0.0)
    g = green_gauss(m, sample(fld, m))
    P = np.flatnonzero(np.all(np.isclose(m.cell_centroid, [0.5, 1.5]), axis=1))[0]
    assert g[P, 0] == pytest.approx(1.25, abs=1e-14)


def test_least_squares_hand_value():
    g = stencil_gradient([[1, 0], [0, 2]], [1.0, 4.0], q=0.0)
    np.testing.assert_allclose(g, [1.0, 2.0])


def test_parallelogram_hand_value():
    # phi = 2x + 3y on the lattice spanned by (1, 0) and (0.5, 1)
    a, b = np.array([1.0, 0.0]), np.array([0.5, 1.0])
    phi = lambda p: 2 * p[0] + 3 * p[1]
    g = parallelogram_gradient(a, b, phi(a), phi(b), phi(-a), phi(-b))
    np.testing.assert_allclose(g, [2.0, 3.0])
    assert abs(a[0] * b[1] - a[1] * b[0]) == pytest.approx(1.0)


def test_parallelogram_cartesian_reduces_to_central_differences():
    h = 0.1
    g = parallelogram_gradient((h, 0), (0, h), 5.0, 7.0, 1.0, 2.0)
    np.testing.assert_allclose(g, [(5.0 - 1.0) / (2 * h), (7.0 - 2.0) / (2 * h)])


def test_constant_field_zero_gradient(family_mesh):
    s = ScalarField(np.full(family_mesh.n_cells, 3.7), np.full(len(family_mesh.boundary_faces), 3.7))
    h = np.sqrt(family_mesh.cell_volume.min())
    for c in (0, 1, 2):
        assert np.max(np.abs(green_gauss(family_mesh, s, c))) < 1e-13 * 3.7 / h
    for q in Q_VALUES:
        assert np.max(np.abs(least_squares(family_mesh, s, q))) == 0.0


@pytest.mark.parametrize("q", Q_VALUES)
@pytest.mark.parametrize("iw", [False, True])
def test_least_squares_linear_exact(family_mesh, q, iw):
    fld = Linear(0.4, -1.7, 2.3)
    g = least_squares(family_mesh, sample(fld, family_mesh), q, interface_weights=iw)
    np.testing.assert_allclose(g, np.tile([-1.7, 2.3], (family_mesh.n_cells, 1)), rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.sampled_from(Q_VALUES), st.integers(0, 2**32))
def test_least_squares_linear_exact_random_meshes(a, b, c, q, seed):
    m = generate(GridSpec("perturbed", 0, seed=seed))
    g = least_squares(m, sample(Linear(a, b, c), m), q)
    np.testing.assert_allclose(g, np.tile([b, c], (m.n_cells, 1)), atol=1e-11 * (1 + abs(a) + abs(b) + abs(c)))


def test_green_gauss_linear_exact_on_cartesian():
    m = generate(GridSpec("cartesian", 1))
    g = green_gauss(m, sample(Linear(0, 2, -1), m))
    np.testing.assert_allclose(g, np.tile([2.0, -1.0], (m.n_cells, 1)), atol=1e-13)


def _interior_parallelogram_cells(m):
    out = []
    for c in range(m.n_cells):
        try:
            reference_parallelogram_gradient(m, sample(Linear(), m), c)
            out.append(c)
        except ValueError:
            pass
    return out


def _sheared_lattice():
    xi, eta = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 9), indexing="ij")
    return structured_mesh(xi + 0.5 * eta, eta)


@pytest.mark.parametrize("make", [lambda: generate(GridSpec("cartesian", 1)), _sheared_lattice],
                         ids=["cartesian", "sheared"])
def test_parallelogram_reduction(make):
    m = make()
    s = sample(Tanh2D(), m)
    cells = _interior_parallelogram_cells(m)
    assert cells
    gg = green_gauss(m, s)
    for q in Q_VALUES:
        ls = least_squares(m, s, q)
        for c in cells:
            ref = reference_parallelogram_gradient(m, s, c)
            np.testing.assert_allclose(gg[c], ref, atol=1e-12)
            np.testing.assert_allclose(ls[c], ref, atol=1e-12)


def test_parallelogram_requires_structure():
    m = generate(GridSpec("cartesian", 0))
    with pytest.raises(ValueError):
        reference_parallelogram_gradient(m, sample(Linear(), m), 0)


def test_symmetric_stencil_all_q_agree():
    h = 0.1
    off = np.array([[h, 0], [0, h], [-h, 0], [0, -h]])
    f = Tanh2D()
    P = np.array([0.3, 0.2])
    d = f.value(*(P + off).T) - f.value(*P)
    ref = parallelogram_gradient((h, 0), (0, h), *f.value(*(P + off).T))
    for q in Q_VALUES:
        np.testing.assert_allclose(stencil_gradient(off, d, q), ref, atol=1e-13)


def _stencil_error_order(offsets, q, f=Tanh2D(), P=(0.3, 0.2), halvings=5):
    P = np.asarray(P)
    exact = f.gradient(*P)
    errs = []
    for r in range(halvings + 1):
        off = np.asarray(offsets) / 2**r
        d = f.value(*(P + off).T) - f.value(*P)
        errs.append(np.linalg.norm(stencil_gradient(off, d, q) - exact))
    errs = np.array(errs)
    return np.log2(errs[-2] / errs[-1])


def _equal_angle(F, radii):
    th = 2 * np.pi * np.arange(F) / F + 0.3
    return np.stack([radii * np.cos(th), radii * np.sin(th)], axis=1)


def test_equal_angle_five_points_second_order():
    off = _equal_angle(5, 0.1 * np.array([1.0, 0.5, 0.8, 0.3, 0.6]))
    assert _stencil_error_order(off, 1.5) == pytest.approx(2.0, abs=0.2)


def test_equal_angle_three_points_first_order():
    off = _equal_angle(3, 0.1 * np.array([1.0, 0.5, 0.8]))
    assert _stencil_error_order(off, 1.5) == pytest.approx(1.0, abs=0.2)


def test_balanced_line_stencil_q_three_halves():
    # collinear pair at unequal distances plus a perpendicular pair
    off = np.array([[-0.1, 0.0], [0.05, 0.0], [0.0, 0.1], [0.0, -0.1]])
    assert _stencil_error_order(off, 1.5) == pytest.approx(2.0, abs=0.15)
    assert _stencil_error_order(off, 1.0) == pytest.approx(1.0, abs=0.15)


def test_composite_probe():
    m = generate(GridSpec("composite", 5))
    cell = fine_interface_cell(m)
    g = green_gauss(m, sample(Linear(0, 1, 0), m))
    assert g[cell, 0] == pytest.approx(0.95, abs=0.01)


def test_correctors_change_skewed_result():
    m = generate(GridSpec("perturbed", 1, seed=3))
    s = sample(Tanh2D(), m)
    assert not np.allclose(green_gauss(m, s, 0), green_gauss(m, s, 1))


def test_rank_deficient_stencil_named():
    with pytest.raises(RankDeficientStencil) as exc:
        normal_equations_solve([1.0, 1.0], [0.0, 1.0], [1.0, 1.0], [0, 0], [0, 0], cells=[10, 11])
    assert list(exc.value.cells) == [11]
    assert "11" in str(exc.value)


def test_rank_deficient_mesh_without_boundary():
    # a lone row of cells has only collinear neighbours once boundary faces are dropped
    X, Y = np.meshgrid(np.linspace(0, 3, 4), np.linspace(0, 1, 2), indexing="ij")
    m = structured_mesh(X, Y)
    with pytest.raises(RankDeficientStencil):
        least_squares(m, sample(Linear(), m), include_boundary=False)


def test_scheme_config_validation():
    assert SchemeConfig("gg").scheme == "green_gauss"
    assert SchemeConfig("ls", q=1.5, interface_weights=True).label == "q1.5i"
    assert SchemeConfig("gg", correctors=2).label == "d2"
    for bad in (dict(scheme="fd"), dict(correctors=9), dict(q=-1.0), dict(q=math.inf)):
        with pytest.raises(ValueError):
            SchemeConfig(**bad)


def test_compute_gradient_dispatch():
    m = generate(GridSpec("perturbed", 0, seed=1))
    s = sample(Tanh2D(), m)
    np.testing.assert_array_equal(compute_gradient(m, s, SchemeConfig("gg", correctors=1)), green_gauss(m, s, 1))
    np.testing.assert_array_equal(compute_gradient(m, s, SchemeConfig("ls", q=2.0)), least_squares(m, s, 2.0))


def test_green_gauss_equals_least_squares_q1_on_cartesian():
    m = generate(GridSpec("cartesian", 3))
    s = sample(Tanh2D(), m)
    np.testing.assert_allclose(green_gauss(m, s), least_squares(m, s, 1.0), atol=1e-12)


def test_interface_weights_only_touch_coarse_side():
    m = generate(GridSpec("composite", 0))
    s = sample(Tanh2D(), m)
    a = least_squares(m, s, 1.0, interface_weights=False)
    b = least_squares(m, s, 1.0, interface_weights=True)
    changed = np.flatnonzero(np.any(a != b, axis=1))
    assert len(changed) > 0
    assert np.all(m.levels[changed] == 0)
