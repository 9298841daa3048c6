"""The linearized operator L = -Delta + 1 - 3Q^2 and the conjugated virial operator.

Virial operator, for the weight phi(x) = 1 + exp(x/alpha1) after the
substitution u = v sqrt(phi'):

    -3 d_xx - d_yy + (1 - 1/(4 alpha1^2)) - 3Q^2 + 6 alpha1 (1 + exp(-x/alpha1)) Q Q_x

Both operators are "constant-coefficient part + multiplication by a
potential".  The spectral path applies the first part as a Fourier
multiplier; the fd2 path uses periodic 5-point stencils, and
:func:`assemble_sparse` builds the same fd2 operator as a sparse matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .grid import Field2D, Grid2D, _check_scheme, _same_grid, diff_array

KINDS = ("linearized_L", "virial_L", "helmholtz")


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    kind: str
    q: Field2D | None = None
    alpha1: float = 1.01
    scheme: str = "spectral"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        _check_scheme(self.scheme)
        if self.kind != "helmholtz" and self.q is None:
            raise ValueError(f"{self.kind} needs the ground state q")
        if self.kind == "virial_L" and not self.alpha1 > 0:
            raise ValueError("alpha1 must be positive")

    @property
    def grid(self) -> Grid2D:
        if self.q is None:
            raise ValueError("helmholtz spec without q carries no grid; pass one explicitly")
        return self.q.grid

    @property
    def xx_coeff(self) -> float:
        return 3.0 if self.kind == "virial_L" else 1.0

    @property
    def shift(self) -> float:
        if self.kind == "virial_L":
            return 1.0 - 1.0 / (4.0 * self.alpha1**2)
        return 1.0

    @cached_property
    def potential(self) -> np.ndarray | float:
        if self.kind == "helmholtz":
            return 0.0
        g, q = self.q.grid, self.q.values
        v = -3.0 * q**2
        if self.kind == "virial_L":
            qx = diff_array(q, g, "x", 1, self.scheme)
            a = self.alpha1
            v = v + 6.0 * a * (1.0 + np.exp(-g.X / a)) * q * qx
        return v

    def const_symbol(self, grid: Grid2D) -> np.ndarray:
        """Fourier symbol of the constant-coefficient part (real, positive)."""
        return (self.shift - self.xx_coeff * grid.symbol("x", 2, self.scheme)
                - grid.symbol("y", 2, self.scheme)).real

    def apply(self, u: np.ndarray, grid: Grid2D | None = None) -> np.ndarray:
        """Apply to an array of shape (ny, nx) or a stack (..., ny, nx)."""
        grid = grid or self.grid
        if self.scheme == "spectral":
            out = grid.multiplier(u, self.const_symbol(grid))
        else:
            out = (self.shift * u - self.xx_coeff * diff_array(u, grid, "x", 2, "fd2")
                   - diff_array(u, grid, "y", 2, "fd2"))
        return out + self.potential * u

    def aslinearoperator(self, grid: Grid2D | None = None, sigma: float = 0.0) -> sla.LinearOperator:
        grid = grid or self.grid
        n = grid.nx * grid.ny

        def mv(v):
            u = v.reshape(grid.shape)
            return (self.apply(u, grid) - sigma * u).ravel()

        return sla.LinearOperator((n, n), matvec=mv, dtype=float)


def _grid_of(spec: OperatorSpec, grid: Grid2D | None) -> Grid2D:
    if grid is not None:
        return grid
    return spec.grid


def apply_L(q: Field2D, u: Field2D, scheme: str = "spectral") -> Field2D:
    """Lu = -Delta u + u - 3 q^2 u."""
    _same_grid(q, u)
    return u.like(OperatorSpec("linearized_L", q, scheme=scheme).apply(u.values))


def apply_virial(q: Field2D, u: Field2D, alpha1: float = 1.01, scheme: str = "spectral") -> Field2D:
    _same_grid(q, u)
    return u.like(OperatorSpec("virial_L", q, alpha1, scheme).apply(u.values))


def apply_helmholtz(u: Field2D, scheme: str = "spectral") -> Field2D:
    return u.like(OperatorSpec("helmholtz", scheme=scheme).apply(u.values, u.grid))


@dataclass
class SparseOperator:
    n: int
    matrix: sp.csr_matrix = field(repr=False)
    symmetric: bool = True

    @property
    def triplets(self):
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ np.ravel(u)

    def symmetry_defect(self) -> float:
        d = self.matrix - self.matrix.T
        return float(abs(d).max()) if d.nnz else 0.0


def _second_difference(n: int, h: float) -> sp.csr_matrix:
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    d = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    d[0, n - 1] = 1.0
    d[n - 1, 0] = 1.0
    return (d / h**2).tocsr()


def assemble_sparse(spec: OperatorSpec, grid: Grid2D | None = None) -> SparseOperator:
    """Sparse fd2 matrix; rows/cols follow the x-fastest flattening."""
    if spec.scheme != "fd2":
        raise ValueError("sparse assembly is only defined for the fd2 scheme")
    grid = _grid_of(spec, grid)
    dxx = _second_difference(grid.nx, grid.hx)
    dyy = _second_difference(grid.ny, grid.hy)
    ix, iy = sp.identity(grid.nx, format="csr"), sp.identity(grid.ny, format="csr")
    lap_x = sp.kron(iy, dxx, format="csr")
    lap_y = sp.kron(dyy, ix, format="csr")
    n = grid.nx * grid.ny
    pot = np.broadcast_to(spec.potential, grid.shape).ravel()
    a = -spec.xx_coeff * lap_x - lap_y + sp.diags(spec.shift + pot, format="csr")
    a = a.tocsr()
    a.sum_duplicates()
    return SparseOperator(n, a, symmetric=True)
