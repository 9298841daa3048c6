import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zkblowup.grid import (Field2D, Grid2D, differentiate, inner_product, integrate_x,
                           laplacian, make_grid, norm, scaling_lambda, weight_phi,
                           weight_phi_x, weight_phitilde)


@pytest.mark.parametrize("nx,ny,lx,ly", [(7, 8, 1, 1), (8, 12, 1, 1), (4, 8, 1, 1),
                                         (8, 8, 0, 1), (8, 8, 1, -2)])
def test_bad_grids(nx, ny, lx, ly):
    with pytest.raises(ValueError):
        Grid2D(nx, ny, lx, ly)


def test_coordinates_and_layout():
    g = make_grid(16, 8, 4.0, 2.0)
    assert g.shape == (8, 16)
    assert g.x[0] == -4.0 and g.hx == 0.5
    assert np.isclose(g.y[-1], 2.0 - g.hy)
    f = Field2D.from_function(g, lambda x, y: x + 10 * y)
    # x runs fastest in the flattened layout
    flat = f.values.ravel()
    assert flat[1] - flat[0] == pytest.approx(g.hx)


def test_field_shape_mismatch():
    g = make_grid(8, 8, 1.0, 1.0)
    with pytest.raises(ValueError):
        Field2D(g, np.zeros(10))
    with pytest.raises(ValueError):
        Field2D(g, np.full((8, 8), np.nan)).check_finite()


@pytest.mark.parametrize("scheme,tol", [("spectral", 1e-12), ("fd2", 2e-2)])
def test_derivatives_of_mode(scheme, tol):
    g = make_grid(64, 32, np.pi, np.pi)
    f = Field2D.from_function(g, lambda x, y: np.sin(2 * x) * np.cos(y))
    dx = differentiate(f, "x", 1, scheme).values
    assert np.max(np.abs(dx - 2 * np.cos(2 * g.X) * np.cos(g.Y))) < tol * 2
    lap = laplacian(f, scheme).values
    assert np.max(np.abs(lap + 5 * f.values)) < tol * 5


def test_fd2_symbol_matches_stencil(rng):
    g = make_grid(16, 16, 3.0, 2.0)
    a = rng.standard_normal(g.shape)
    for axis in ("x", "y"):
        for order in (1, 2):
            via_fft = g.multiplier(a, g.symbol(axis, order, "fd2"))
            stencil = differentiate(Field2D(g, a), axis, order, "fd2").values
            assert np.allclose(via_fft, stencil, atol=1e-12)


def test_bad_axis_and_order():
    g = make_grid(8, 8, 1.0, 1.0)
    f = Field2D(g, np.zeros(g.shape))
    for scheme in ("spectral", "fd2"):
        with pytest.raises(ValueError):
            differentiate(f, "z", 1, scheme)
        with pytest.raises(ValueError):
            differentiate(f, "x", 3, scheme)
    with pytest.raises(ValueError):
        differentiate(f, "x", 1, "fd4")


def test_inner_product_gaussian():
    g = make_grid(128, 128, 10.0, 10.0)
    f = Field2D.from_function(g, lambda x, y: np.exp(-(x**2 + y**2) / 2))
    assert norm(f) ** 2 == pytest.approx(np.pi, rel=1e-12)
    with pytest.raises(ValueError):
        inner_product(f, Field2D(make_grid(64, 64, 10.0, 10.0), np.zeros((64, 64))))


def test_scaling_lambda_gaussian():
    # Lambda e^{-r^2/2} = (1 - r^2) e^{-r^2/2}
    g = make_grid(128, 128, 12.0, 12.0)
    f = Field2D.from_function(g, lambda x, y: np.exp(-(x**2 + y**2) / 2))
    r2 = g.X**2 + g.Y**2
    assert np.max(np.abs(scaling_lambda(f).values - (1 - r2) * f.values)) < 1e-10


def test_integrate_x_gaussian():
    g = make_grid(128, 64, 10.0, 8.0)
    f = Field2D.from_function(g, lambda x, y: np.exp(-x**2) * np.cos(y))
    p = integrate_x(f)
    assert p.n == g.ny and p.l == g.ly
    assert np.allclose(p.values, np.sqrt(np.pi) * np.cos(p.coords), atol=1e-12)


def test_weights():
    x = np.linspace(-5, 5, 11)
    a = 1.01
    phi = weight_phi(x, a)
    assert np.allclose(weight_phitilde(x, a), phi / (2 * np.sqrt(a * weight_phi_x(x, a))))
    for fn in (weight_phi, weight_phi_x, weight_phitilde):
        with pytest.raises(ValueError):
            fn(x, 0.0)


@settings(max_examples=20, deadline=None)
@given(kx=st.integers(0, 10), ky=st.integers(0, 10))
def test_laplacian_eigenfunctions(kx, ky):
    g = make_grid(32, 32, np.pi, np.pi)
    f = Field2D.from_function(g, lambda x, y: np.cos(kx * x) * np.cos(ky * y))
    assert np.allclose(laplacian(f).values, -(kx**2 + ky**2) * f.values, atol=1e-9)
