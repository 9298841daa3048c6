import numpy as np
import pytest

from zkblowup.grid import Field2D, diff_array, ip_array, lambda_array, make_grid, weight_phi_x
from zkblowup.linops import (OperatorSpec, apply_helmholtz, apply_L, apply_virial,
                             assemble_sparse)


def _smooth_random(g, rng, width=2.0):
    c = rng.standard_normal(3)
    return np.exp(-((g.X - c[0]) ** 2 + (g.Y - c[1]) ** 2) / width**2) * (1 + 0.3 * c[2] * g.X)


def test_spec_validation(gs_small):
    with pytest.raises(ValueError):
        OperatorSpec("laplace")
    with pytest.raises(ValueError):
        OperatorSpec("linearized_L")
    with pytest.raises(ValueError):
        OperatorSpec("virial_L", gs_small.q, alpha1=0.0)
    with pytest.raises(ValueError):
        OperatorSpec("helmholtz", scheme="fd4")


def test_L_lambda_q(gs_small):
    q = gs_small.q
    lq = q.like(lambda_array(q.values, q.grid))
    out = apply_L(q, lq).values + 2 * q.values
    # x grad Q is not periodic, so the wrap column rings; compare away from it
    g = q.grid
    inner = (np.abs(g.X) < 10) & (np.abs(g.Y) < 10)
    assert np.max(np.abs(out[inner])) / np.max(q.values) < 1e-6


def test_L_quadratic_form_on_q(gs_small):
    # LQ = -2 Q^3 from the ground-state equation, so (LQ, Q) = -2 int Q^4
    q = gs_small.q
    g = q.grid
    q4 = np.sum(q.values**4) * g.cell
    assert ip_array(apply_L(q, q).values, q.values, g) == pytest.approx(-2 * q4, rel=1e-9)


@pytest.mark.parametrize("axis", ["x", "y"])
def test_L_kernel(gs_small, axis):
    q = gs_small.q
    d = q.like(diff_array(q.values, q.grid, axis, 1))
    assert np.linalg.norm(apply_L(q, d).values) / np.linalg.norm(d.values) < 1e-6


def test_helmholtz_mode():
    g = make_grid(32, 16, np.pi, np.pi)
    u = Field2D.from_function(g, lambda x, y: np.cos(3 * x))
    assert np.allclose(apply_helmholtz(u).values, 10 * u.values, atol=1e-11)


@pytest.mark.parametrize("kind", ["linearized_L", "virial_L"])
@pytest.mark.parametrize("scheme", ["spectral", "fd2"])
def test_symmetry(gs_small, gs_small_fd2, rng, kind, scheme):
    q = (gs_small if scheme == "spectral" else gs_small_fd2).q
    op = OperatorSpec(kind, q, 1.01, scheme)
    g = q.grid
    u, v = _smooth_random(g, rng), _smooth_random(g, rng)
    a, b = ip_array(op.apply(u), v, g), ip_array(u, op.apply(v), g)
    assert abs(a - b) <= 1e-9 * max(abs(a), abs(b))


def test_virial_zero(gs_small):
    q = gs_small.q
    assert np.all(apply_virial(q, q.like(np.zeros(q.grid.shape))).values == 0)


def test_grid_mismatch(gs_small):
    other = Field2D(make_grid(64, 64, 16.0, 16.0), np.zeros((64, 64)))
    with pytest.raises(ValueError):
        apply_L(gs_small.q, other)
    with pytest.raises(ValueError):
        apply_virial(gs_small.q, other)


def test_sparse_helmholtz_diagonal():
    g = make_grid(8, 8, 2.0, 3.0)
    sp = assemble_sparse(OperatorSpec("helmholtz", scheme="fd2"), g)
    assert sp.n == 64
    assert np.allclose(sp.matrix.diagonal(), 1 + 2 / g.hx**2 + 2 / g.hy**2)
    rows, cols, vals = sp.triplets
    assert len(rows) == 64 * 5


@pytest.mark.parametrize("kind", ["linearized_L", "virial_L", "helmholtz"])
def test_sparse_matches_matrix_free(gs_small_fd2, rng, kind):
    q = gs_small_fd2.q
    spec = OperatorSpec(kind, q, 1.01, "fd2")
    sp = assemble_sparse(spec)
    u = rng.standard_normal(q.grid.shape)
    ref = spec.apply(u)
    assert np.max(np.abs(sp.matvec(u) - ref.ravel())) <= 1e-12 * np.max(np.abs(ref))
    assert sp.symmetric and sp.symmetry_defect() == 0.0
    assert np.all(np.isfinite(sp.matrix.data))


def test_sparse_refuses_spectral(gs_small):
    with pytest.raises(ValueError):
        assemble_sparse(OperatorSpec("linearized_L", gs_small.q))


def test_virial_is_conjugated_outline_form(gs_small):
    """(virial u, u) for u = v sqrt(phi') equals the weighted form
    int (3 v_x^2 + v_y^2) phi' + v^2 (phi' - phi_xxx) - 3 Q^2 v^2 phi' + 6 Q Q_x v^2 phi."""
    q = gs_small.q
    g = q.grid
    a = 1.01
    v = np.exp(-((g.X - 1.0) ** 2 + (g.Y + 0.5) ** 2) / 3.0)
    w = weight_phi_x(g.X, a)
    u = v * np.sqrt(w)
    lhs = ip_array(apply_virial(q, q.like(u), a).values, u, g)
    phi = 1.0 + np.exp(g.X / a)
    qx = diff_array(q.values, g, "x", 1)
    vx, vy = diff_array(v, g, "x", 1), diff_array(v, g, "y", 1)
    dens = (w * (3 * vx**2 + vy**2) + v**2 * (w - w / a**2)
            - 3 * q.values**2 * v**2 * w + 6 * q.values * qx * v**2 * phi)
    assert lhs == pytest.approx(np.sum(dens) * g.cell, rel=1e-6)
