"""Ground state of -Delta Q + Q - Q^3 = 0 by Petviashvili iteration."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import (Field2D, Grid2D, _check_scheme, diff_array, ip_array,
                   laplacian_array)

log = logging.getLogger(__name__)

STAB_EXPONENT = 1.5  # p / (p - 1) for the cubic nonlinearity


class ConvergenceError(RuntimeError):
    """An iterative solver failed in a way that cannot be reported as a result."""


@dataclass
class GroundState:
    q: Field2D
    residual_inf: float
    iterations: int
    mass: float
    converged: bool
    scheme: str = "spectral"


def helmholtz_symbol(grid: Grid2D, scheme: str = "spectral") -> np.ndarray:
    """Fourier symbol of -Delta + 1 (real, positive)."""
    return (1.0 - grid.symbol("x", 2, scheme) - grid.symbol("y", 2, scheme)).real


def residual_array(q: np.ndarray, grid: Grid2D, scheme: str = "spectral") -> np.ndarray:
    return -laplacian_array(q, grid, scheme) + q - q**3


def residual_elliptic(q: Field2D, scheme: str = "spectral") -> float:
    """Sup norm of -Delta q + q - q^3."""
    return float(np.max(np.abs(residual_array(q.values, q.grid, scheme))))


def _reflect_x(a):
    return np.roll(a[:, ::-1], 1, axis=1)


def _reflect_y(a):
    return np.roll(a[::-1, :], 1, axis=0)


def symmetrize(a: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Average over the reflections of the grid (dihedral group when square)."""
    a = 0.5 * (a + _reflect_x(a))
    a = 0.5 * (a + _reflect_y(a))
    if grid.nx == grid.ny and grid.lx == grid.ly:
        a = 0.5 * (a + a.T)
    return a


def symmetry_deviation(q: Field2D) -> float:
    """Largest deviation from evenness in x, in y and (square grids) from x<->y symmetry."""
    a = q.values
    dev = max(np.max(np.abs(a - _reflect_x(a))), np.max(np.abs(a - _reflect_y(a))))
    g = q.grid
    if g.nx == g.ny and g.lx == g.ly:
        dev = max(dev, np.max(np.abs(a - a.T)))
    return float(dev)


def default_seed(grid: Grid2D) -> np.ndarray:
    return 2.0 * np.exp(-(grid.X**2 + grid.Y**2) / 2.0)


def petviashvili(grid: Grid2D, tol: float = 1e-12, max_iter: int = 2000,
                 scheme: str = "spectral", init: Field2D | None = None,
                 residual_tol: float | None = None) -> GroundState:
    """Petviashvili iteration for the positive ground state.

    Q_{n+1} = S_n^{3/2} (-Delta+1)^{-1} Q_n^3 with
    S_n = <(-Delta+1)Q_n, Q_n> / <Q_n^3, Q_n>.  The inverse is exact in
    Fourier space for both schemes (the fd2 stencil is diagonal there too).

    Iteration stops when the sup change between iterates is below ``tol`` and
    the elliptic residual is below ``residual_tol``.  The latter defaults to
    ``tol`` raised to the round-off floor of the discrete Laplacian on this
    grid, since the spectral residual cannot drop under ~eps*k_max^2*max|Q|.
    """
    _check_scheme(scheme)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if init is not None:
        if init.grid != grid:
            raise ValueError("initial guess lives on a different grid")
        q = np.array(init.values, dtype=float)
        if np.any(q < 0):
            raise ValueError("initial guess must be non-negative")
    else:
        q = default_seed(grid)

    sym = helmholtz_symbol(grid, scheme)
    if residual_tol is None:
        floor = 50 * np.finfo(float).eps * float(sym.max()) * max(2.5, float(q.max()))
        residual_tol = max(tol, floor)

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        qh = grid.fft(q)
        q3 = q**3
        q3h = grid.fft(q3)
        num = ip_array(grid.ifft(sym * qh), q, grid)
        den = ip_array(q3, q, grid)
        if not np.isfinite(den) or den <= 1e-300:
            raise ConvergenceError("Petviashvili iterate collapsed to zero; bad seed")
        s = num / den
        q_new = grid.ifft(s**STAB_EXPONENT * q3h / sym)
        change = float(np.max(np.abs(q_new - q)))
        q = q_new
        if float(np.max(np.abs(q))) < 1e-8:
            raise ConvergenceError("Petviashvili iterate collapsed to zero; bad seed")
        if change <= tol:
            res = float(np.max(np.abs(residual_array(q, grid, scheme))))
            if res <= residual_tol:
                converged = True
                break
    q = symmetrize(q, grid)
    res = float(np.max(np.abs(residual_array(q, grid, scheme))))
    if not converged:
        log.warning("Petviashvili did not converge in %d iterations (residual %.3e)", it, res)
    return GroundState(Field2D(grid, q), res, it, ip_array(q, q, grid), converged, scheme)


def petviashvili_1d(n: int, l: float, tol: float = 1e-13, max_iter: int = 2000):
    """1D analogue -Q'' + Q = Q^3 on [-l, l); returns (x, Q, iterations).

    The exact solution is sqrt(2) sech(x), which makes this a self-test of
    the iteration itself.
    """
    h = 2.0 * l / n
    x = -l + h * np.arange(n)
    k = 2 * np.pi * sfft.rfftfreq(n, d=h)
    sym = 1.0 + k**2
    q = 2.0 * np.exp(-(x**2) / 2.0)
    for it in range(1, max_iter + 1):
        q3h = sfft.rfft(q**3)
        num = np.dot(sfft.irfft(sym * sfft.rfft(q), n), q)
        den = np.dot(q**3, q)
        q_new = sfft.irfft((num / den) ** STAB_EXPONENT * q3h / sym, n)
        change = np.max(np.abs(q_new - q))
        q = q_new
        if change <= tol:
            break
    return x, q, it


# ----------------------------------------------------------------------------
# diagnostics

def energy(q: Field2D, scheme: str = "spectral") -> float:
    """E(Q) = 1/2 |grad Q|^2 - 1/4 int Q^4."""
    g = q.grid
    qx = diff_array(q.values, g, "x", 1, scheme)
    qy = diff_array(q.values, g, "y", 1, scheme)
    grad2 = ip_array(qx, qx, g) + ip_array(qy, qy, g)
    return 0.5 * grad2 - 0.25 * ip_array(q.values**2, q.values**2, g)


def gradient_norm_sq(q: Field2D, scheme: str = "spectral") -> float:
    g = q.grid
    qx = diff_array(q.values, g, "x", 1, scheme)
    qy = diff_array(q.values, g, "y", 1, scheme)
    return ip_array(qx, qx, g) + ip_array(qy, qy, g)
