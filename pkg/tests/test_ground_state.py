import numpy as np
import pytest

from zkblowup.grid import Field2D, make_grid
from zkblowup.ground_state import (ConvergenceError, energy, gradient_norm_sq, petviashvili,
                                   petviashvili_1d, residual_elliptic, symmetry_deviation)


def test_1d_selftest():
    x, q, it = petviashvili_1d(2048, 40.0)
    assert np.max(np.abs(q - np.sqrt(2) / np.cosh(x))) < 1e-10


def test_converged_spectral(gs_small):
    assert gs_small.residual_inf < 1e-10
    assert residual_elliptic(gs_small.q) == pytest.approx(gs_small.residual_inf)
    assert symmetry_deviation(gs_small.q) < 1e-12
    assert np.all(gs_small.q.values > -1e-12)
    assert gs_small.q.values.max() == pytest.approx(2.2062, abs=1e-3)


def test_pohozaev_identities(gs_small):
    q = gs_small.q
    g2 = gradient_norm_sq(q)
    assert abs(energy(q)) / g2 < 1e-8
    # in 2D, |grad Q|^2 = 1/2 int Q^4 and mass = 1/2 int Q^4
    q4 = np.sum(q.values**4) * q.grid.cell
    assert g2 == pytest.approx(q4 / 2, rel=1e-8)
    assert gs_small.mass == pytest.approx(q4 / 2, rel=1e-8)


def test_fd2_converges(gs_small_fd2):
    assert gs_small_fd2.residual_inf < 1e-10
    assert gs_small_fd2.scheme == "fd2"


def test_initial_guess_checks():
    g = make_grid(32, 32, 10.0, 10.0)
    with pytest.raises(ValueError):
        petviashvili(g, init=Field2D(g, -np.ones(g.shape)))
    with pytest.raises(ValueError):
        petviashvili(g, init=Field2D(make_grid(64, 64, 10.0, 10.0), np.ones((64, 64))))
    with pytest.raises(ValueError):
        petviashvili(g, tol=0)
    with pytest.raises(ValueError):
        petviashvili(g, scheme="fd4")


def test_collapse_detected():
    g = make_grid(32, 32, 10.0, 10.0)
    with pytest.raises(ConvergenceError):
        petviashvili(g, init=Field2D(g, np.zeros(g.shape)))


def test_nonconvergence_reported():
    g = make_grid(64, 64, 12.0, 12.0)
    gs = petviashvili(g, max_iter=3)
    assert not gs.converged and gs.iterations == 3


def test_translated_seed_recentres_by_symmetrization():
    # symmetrization happens after the loop; a centred seed keeps Q centred
    g = make_grid(64, 64, 12.0, 12.0)
    gs = petviashvili(g)
    assert np.unravel_index(np.argmax(gs.q.values), g.shape) == (32, 32)
