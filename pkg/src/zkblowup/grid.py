"""Periodic tensor grids, fields on them, and the basic calculus.

Arrays are stored with shape ``(ny, nx)`` so that the x-index runs fastest
in row-major order.  Every derivative comes in two flavours: Fourier
multipliers (``"spectral"``) and centred second-order stencils with
periodic wrap (``"fd2"``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

SCHEMES = ("spectral", "fd2")


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``ZKC_THREADS``."""
    try:
        return max(1, int(os.environ.get("ZKC_THREADS", "1")))
    except ValueError:
        return 1


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on [-lx, lx) x [-ly, ly)."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if not isinstance(n, (int, np.integer)) or n < 8 or not _is_pow2(int(n)):
                raise ValueError(f"grid sizes must be powers of two >= 8, got {n}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("half-widths must be positive")

    @property
    def hx(self) -> float:
        return 2.0 * self.lx / self.nx

    @property
    def hy(self) -> float:
        return 2.0 * self.ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell(self) -> float:
        return self.hx * self.hy

    @cached_property
    def x(self) -> np.ndarray:
        return -self.lx + self.hx * np.arange(self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return -self.ly + self.hy * np.arange(self.ny)

    @cached_property
    def X(self) -> np.ndarray:
        return np.broadcast_to(self.x[None, :], self.shape)

    @cached_property
    def Y(self) -> np.ndarray:
        return np.broadcast_to(self.y[:, None], self.shape)

    # wavenumbers for the real FFT layout: x is the halved (last) axis
    @cached_property
    def kx(self) -> np.ndarray:
        return 2 * np.pi * sfft.rfftfreq(self.nx, d=self.hx)[None, :]

    @cached_property
    def ky(self) -> np.ndarray:
        return 2 * np.pi * sfft.fftfreq(self.ny, d=self.hy)[:, None]

    def symbol(self, axis: str, order: int, scheme: str = "spectral") -> np.ndarray:
        """Fourier symbol of d^order/d(axis)^order on this grid.

        Odd-order spectral symbols vanish on the Nyquist mode so that real
        fields map to real fields and the operator stays skew-adjoint.
        """
        _check_scheme(scheme)
        if axis == "x":
            k, h, n = self.kx, self.hx, self.nx
        elif axis == "y":
            k, h, n = self.ky, self.hy, self.ny
        else:
            raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
        if order == 1:
            if scheme == "spectral":
                s = 1j * k.copy()
                s[np.isclose(np.abs(k), np.pi / h)] = 0.0
            else:
                s = 1j * np.sin(k * h) / h
        elif order == 2:
            if scheme == "spectral":
                s = -(k**2) + 0j
            else:
                s = -(2.0 - 2.0 * np.cos(k * h)) / h**2 + 0j
        else:
            raise ValueError("order must be 1 or 2")
        return s

    def fft(self, a: np.ndarray) -> np.ndarray:
        return sfft.rfft2(a, workers=fft_workers())

    def ifft(self, a_hat: np.ndarray) -> np.ndarray:
        return sfft.irfft2(a_hat, s=self.shape, workers=fft_workers())

    def multiplier(self, a: np.ndarray, sym: np.ndarray) -> np.ndarray:
        """Apply a Fourier multiplier to a real array (or stack of arrays)."""
        return self.ifft(self.fft(a) * sym)

    def __repr__(self) -> str:
        return f"Grid2D(nx={self.nx}, ny={self.ny}, lx={self.lx:g}, ly={self.ly:g})"


def make_grid(nx: int, ny: int, lx: float, ly: float) -> Grid2D:
    return Grid2D(int(nx), int(ny), float(lx), float(ly))


@dataclass(frozen=True)
class Field2D:
    """Real samples on a :class:`Grid2D`; ``values`` has shape ``(ny, nx)``."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            if v.size == self.grid.nx * self.grid.ny:
                v = v.reshape(self.grid.shape)
            else:
                raise ValueError(f"field of size {v.size} does not fit {self.grid}")
        object.__setattr__(self, "values", v)

    def check_finite(self) -> "Field2D":
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")
        return self

    def like(self, values: np.ndarray) -> "Field2D":
        return Field2D(self.grid, values)

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "Field2D":
        return cls(grid, np.broadcast_to(fn(grid.X, grid.Y), grid.shape).copy())


@dataclass(frozen=True)
class Profile1D:
    """Real samples on the periodic 1D grid [-l, l) with ``n`` nodes."""

    l: float
    values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def h(self) -> float:
        return 2.0 * self.l / self.n

    @property
    def coords(self) -> np.ndarray:
        return -self.l + self.h * np.arange(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * sfft.fftfreq(self.n, d=self.h)


def _same_grid(f: Field2D, g: Field2D) -> None:
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


# ----------------------------------------------------------------------------
# array-level kernels (used by the solvers, which work on raw arrays)

def diff_array(a: np.ndarray, grid: Grid2D, axis: str, order: int,
               scheme: str = "spectral") -> np.ndarray:
    _check_scheme(scheme)
    if scheme == "spectral":
        return grid.multiplier(a, grid.symbol(axis, order, "spectral"))
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    ax, h = (-1, grid.hx) if axis == "x" else (-2, grid.hy)
    if order == 1:
        return (np.roll(a, -1, axis=ax) - np.roll(a, 1, axis=ax)) / (2 * h)
    if order == 2:
        return (np.roll(a, -1, axis=ax) - 2 * a + np.roll(a, 1, axis=ax)) / h**2
    raise ValueError("order must be 1 or 2")


def laplacian_array(a: np.ndarray, grid: Grid2D, scheme: str = "spectral") -> np.ndarray:
    if scheme == "spectral":
        return grid.multiplier(a, grid.symbol("x", 2) + grid.symbol("y", 2))
    return diff_array(a, grid, "x", 2, scheme) + diff_array(a, grid, "y", 2, scheme)


def lambda_array(a: np.ndarray, grid: Grid2D, scheme: str = "spectral") -> np.ndarray:
    return (a + grid.X * diff_array(a, grid, "x", 1, scheme)
            + grid.Y * diff_array(a, grid, "y", 1, scheme))


def ip_array(a: np.ndarray, b: np.ndarray, grid: Grid2D) -> float:
    return float(np.vdot(a, b).real * grid.cell)


# ----------------------------------------------------------------------------
# public field-level API

def differentiate(f: Field2D, axis: str, order: int, scheme: str = "spectral") -> Field2D:
    """Partial derivative of order 1 or 2 along ``axis``."""
    return f.like(diff_array(f.values, f.grid, axis, order, scheme))


def laplacian(f: Field2D, scheme: str = "spectral") -> Field2D:
    return f.like(laplacian_array(f.values, f.grid, scheme))


def inner_product(f: Field2D, g: Field2D) -> float:
    """Left-rectangle quadrature of f*g over the periodic cell."""
    _same_grid(f, g)
    return ip_array(f.values, g.values, f.grid)


def norm(f: Field2D) -> float:
    return float(np.sqrt(inner_product(f, f)))


def scaling_lambda(f: Field2D, scheme: str = "spectral") -> Field2D:
    """The L2-scaling generator f + x f_x + y f_y."""
    return f.like(lambda_array(f.values, f.grid, scheme))


def weight_phi(x, alpha1: float):
    """Monotone weight 1 + exp(x/alpha1)."""
    if alpha1 <= 0:
        raise ValueError("alpha1 must be positive")
    return 1.0 + np.exp(np.asarray(x, dtype=float) / alpha1)


def weight_phi_x(x, alpha1: float):
    if alpha1 <= 0:
        raise ValueError("alpha1 must be positive")
    return np.exp(np.asarray(x, dtype=float) / alpha1) / alpha1


def weight_phitilde(x, alpha1: float):
    """phi / (2 sqrt(alpha1 phi')), which simplifies to cosh(x / (2 alpha1))."""
    if alpha1 <= 0:
        raise ValueError("alpha1 must be positive")
    return np.cosh(np.asarray(x, dtype=float) / (2.0 * alpha1))


def integrate_x(f: Field2D) -> Profile1D:
    """Rectangle-rule integral over x, leaving a profile in y."""
    return Profile1D(f.grid.ly, f.values.sum(axis=1) * f.grid.hx)
