import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fvgrad.fields import (FIELD_NAMES, Linear, Quadratic, ScalarField, Sin2D, Tanh1D, Tanh2D,
                           exact_gradient, make_field, sample)
from fvgrad.mesh import build_mesh

coords = st.floats(-2, 2, allow_nan=False)
H = 1e-5


def _fd_gradient(f, x, y):
    return np.array([(f.value(x + H, y) - f.value(x - H, y)) / (2 * H),
                     (f.value(x, y + H) - f.value(x, y - H)) / (2 * H)])


def _fd_laplacian(f, x, y, h=1e-3):
    return (f.value(x + h, y) + f.value(x - h, y) + f.value(x, y + h) + f.value(x, y - h)
            - 4 * f.value(x, y)) / h**2


@pytest.mark.parametrize("name", FIELD_NAMES)
@settings(max_examples=40, deadline=None)
@given(x=coords, y=coords)
def test_gradient_matches_finite_differences(name, x, y):
    f = make_field(name)
    np.testing.assert_allclose(f.gradient(x, y), _fd_gradient(f, x, y), atol=1e-6)


@pytest.mark.parametrize("name", FIELD_NAMES)
@settings(max_examples=40, deadline=None)
@given(x=coords, y=coords)
def test_laplacian_matches_finite_differences(name, x, y):
    f = make_field(name)
    assert f.laplacian(x, y) == pytest.approx(_fd_laplacian(f, x, y), abs=1e-4)


def test_tanh_zero_on_axis():
    y = np.linspace(-1, 1, 7)
    assert np.all(Tanh2D().value(0.0, y) == 0)


def test_sin_peak():
    assert Sin2D().value(0.5, 0.5) == pytest.approx(1.0)


def test_quadratic_gradient_example():
    np.testing.assert_allclose(Quadratic().gradient(1.0, 2.0), [2.0, 4.0])


def test_tanh1d_derivative():
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(Tanh1D().derivative(x), (np.tanh(x + H) - np.tanh(x - H)) / (2 * H), atol=1e-9)


def test_sample_and_exact_gradient_on_square():
    m = build_mesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]], default_patch="wall")
    s = sample(Linear(0, 1, 0), m)
    assert s.cell_values[0] == pytest.approx(0.5)
    np.testing.assert_allclose(np.sort(s.boundary_values), [0, 0.5, 0.5, 1])
    np.testing.assert_allclose(exact_gradient(Linear(2, 3, -4), m), [[3, -4]])
    np.testing.assert_allclose(exact_gradient(Tanh2D(), m),
                               [[(1 - np.tanh(0.5) ** 2) * np.tanh(0.5)] * 2])


def test_scalar_field_shape_check():
    m = build_mesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], default_patch="wall")
    with pytest.raises(ValueError):
        ScalarField(np.zeros(2), np.zeros(3)).check(m)
    with pytest.raises(ValueError):
        ScalarField(np.zeros(1), np.zeros(2)).check(m)


def test_unknown_field():
    with pytest.raises(ValueError):
        make_field("cubic")
