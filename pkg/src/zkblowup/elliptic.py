"""Inverse application of the symmetric operators and the correction profile P.

The inverse uses preconditioned CG with the Fourier inverse of the
constant-coefficient part as preconditioner.  The virial operator and L
are indefinite, so CG is watched for breakdown (vanishing or non-finite
curvature, stagnation) and falls back to MINRES.

P solves (LP)_x = Lambda Q with P -> 0 as x -> +inf and P -> F(y) as
x -> -inf.  Writing P = R + F(y) m(x) with a smooth left mask m, only the
decaying remainder R is solved for on the periodic grid; every derivative of
the F m part is taken analytically, so nothing non-periodic is fed to an FFT.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as sla

from .constant_c import c_q_value, solve_far_field
from .grid import Field2D, Grid2D, Profile1D, diff_array, ip_array, lambda_array
from .ground_state import ConvergenceError, petviashvili
from .linops import OperatorSpec

log = logging.getLogger(__name__)


@dataclass
class SolveResult:
    solution: Field2D
    relative_residual: float
    iterations: int
    method: str = "cg"


def _orthonormal(vectors, grid: Grid2D) -> list[np.ndarray]:
    basis = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for b in basis:
            w -= ip_array(b, w, grid) * b
        nrm = np.sqrt(ip_array(w, w, grid))
        if nrm > 0:
            basis.append(w / nrm)
    return basis


def _projector(basis, grid):
    if not basis:
        return lambda a: a

    def proj(a):
        a = a.copy()
        for b in basis:
            a -= ip_array(b, a, grid) * b
        return a

    return proj


def pcg_apply_inverse(op: OperatorSpec, rhs: Field2D, tol: float = 1e-10, max_iter: int = 2000,
                      sigma: float = 0.0, deflate=(), x0: np.ndarray | None = None) -> SolveResult:
    """Solve (op - sigma) x = rhs.

    ``deflate`` lists fields spanning an (approximate) kernel; the solve then
    happens on their orthogonal complement, with rhs projected first.
    """
    grid = rhs.grid
    if op.q is not None and op.q.grid != grid:
        raise ValueError(f"grid mismatch: {op.q.grid} vs {grid}")
    proj = _projector(_orthonormal([getattr(d, "values", d) for d in deflate], grid), grid)
    b = proj(rhs.values)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return SolveResult(rhs.like(np.zeros(grid.shape)), 0.0, 0, "trivial")

    psym = op.const_symbol(grid) - sigma
    psym = np.where(psym > 1e-12, psym, 1.0)

    def amul(u):
        return proj(op.apply(u, grid) - sigma * u)

    def prec(r):
        return proj(grid.multiplier(r, 1.0 / psym))

    x = np.zeros(grid.shape) if x0 is None else proj(np.asarray(x0, dtype=float).reshape(grid.shape))
    r = b - amul(x) if x0 is not None else b.copy()
    z = prec(r)
    p = z.copy()
    rz = float(np.vdot(r, z))
    best = np.inf
    stall = 0
    it = 0
    broke = None
    for it in range(1, max_iter + 1):
        ap = amul(p)
        pap = float(np.vdot(p, ap))
        if not np.isfinite(pap) or abs(pap) <= 1e-14 * np.linalg.norm(p) * np.linalg.norm(ap):
            broke = "curvature"
            break
        a = rz / pap
        x += a * p
        r -= a * ap
        rn = float(np.linalg.norm(r)) / bnorm
        if not np.isfinite(rn):
            broke = "non-finite"
            break
        if rn <= tol:
            break
        if rn < 0.5 * best:
            best, stall = rn, 0
        else:
            stall += 1
            if stall > 200:
                broke = "stagnation"
                break
        z = prec(r)
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    true = float(np.linalg.norm(amul(x) - b)) / bnorm
    if broke is None and true <= tol * 10:
        return SolveResult(rhs.like(x), true, it, "cg")

    log.info("CG %s after %d iterations (residual %.2e); switching to MINRES",
             broke or "cap", it, true)
    n = grid.nx * grid.ny
    aop = sla.LinearOperator((n, n), matvec=lambda v: amul(v.reshape(grid.shape)).ravel(), dtype=float)
    mop = sla.LinearOperator((n, n), matvec=lambda v: prec(v.reshape(grid.shape)).ravel(), dtype=float)
    count = [0]
    xm, _ = sla.minres(aop, b.ravel(), x0=x.ravel() if np.all(np.isfinite(x)) else None,
                       M=mop, rtol=tol, maxiter=max_iter,
                       callback=lambda _: count.__setitem__(0, count[0] + 1))
    xm = xm.reshape(grid.shape)
    true = float(np.linalg.norm(amul(xm) - b)) / bnorm
    if not np.isfinite(true) or true > max(10 * tol, 1e-6):
        raise ConvergenceError(f"inverse application failed: residual {true:.2e} after CG+MINRES")
    return SolveResult(rhs.like(xm), true, it + count[0], "minres")


# ----------------------------------------------------------------------------
# the correction profile P


def left_mask(x, l: float, order: int = 0):
    """m(x) = (1 - tanh((x + l)/2)) / 2 and its first three derivatives."""
    t = np.tanh((np.asarray(x, dtype=float) + l) / 2.0)
    s = 1.0 - t**2
    if order == 0:
        return 0.5 * (1.0 - t)
    if order == 1:
        return -0.25 * s
    if order == 2:
        return 0.25 * t * s
    if order == 3:
        return 0.125 * s * (1.0 - 3.0 * t**2)
    raise ValueError("order must be 0..3")


@dataclass
class ProfileP:
    """P = remainder + far(y) * m(x) on an x-elongated grid."""

    p: Field2D
    far_field_f: Profile1D
    remainder: Field2D = field(repr=False)
    q: Field2D = field(repr=False)
    l: float = 20.0
    diagnostics: dict = field(default_factory=dict)

    def mask(self, order: int = 0):
        return left_mask(self.p.grid.x, self.l, order)[None, :]

    def _far(self, order: int = 0):
        f = self.far_field_f
        v = f.values
        if order == 0:
            return v[:, None]
        k = f.wavenumbers
        d = np.fft.ifft((1j * k) ** order * np.fft.fft(v)).real
        return d[:, None]

    def derivative(self, ax: int, ay: int) -> np.ndarray:
        """d^ax/dx^ax d^ay/dy^ay of P, with ax <= 3 and ay <= 2."""
        g = self.remainder.grid
        r = self.remainder.values
        for _ in range(ax):
            r = diff_array(r, g, "x", 1)
        for _ in range(ay):
            r = diff_array(r, g, "y", 1)
        return r + self._far(ay) * self.mask(ax)


def _extend_ground_state(q: Field2D, l: float) -> Field2D:
    """Ground state on [-2l, 2l) x [-l, l) at the spacing of ``q``."""
    g = q.grid
    big = Grid2D(2 * g.nx, g.ny, 2 * g.lx, g.ly)
    seed = np.zeros(big.shape)
    seed[:, g.nx // 2: g.nx // 2 + g.nx] = np.maximum(q.values, 0.0)
    gs = petviashvili(big, init=Field2D(big, seed))
    if not gs.converged:
        raise ConvergenceError("ground state on the elongated grid did not converge")
    return gs.q


def solve_profile_P(q: Field2D, tol: float = 1e-10, pq_tol: float = 0.05) -> ProfileP:
    """Correction profile with (LP)_x = Lambda Q and (P, Q_x) = (P, Q_y) = 0.

    ``q`` is a ground state on a square-cell grid [-l, l)^2; the solve runs on
    [-2l, 2l) x [-l, l) at the same spacing.
    """
    l = q.grid.ly
    qe = _extend_ground_state(q, l)
    g = qe.grid
    Q = qe.values
    lq = lambda_array(Q, g)
    gy = lq.sum(axis=1) * g.hx                              # int Lambda Q dx
    m0, m1, m2 = (left_mask(g.x, l, k)[None, :] for k in range(3))
    rem = lq + gy[:, None] * m1
    rem -= rem.mean(axis=1, keepdims=True)
    # S = int_x^inf rem, via the spectral antiderivative; fix the constant at the right edge
    kx = g.kx
    kinv = np.zeros_like(kx, dtype=complex)
    kinv[:, 1:] = 1.0 / (1j * kx[:, 1:])
    anti = g.ifft(g.fft(rem) * kinv)
    s = anti[:, -1:] - anti
    s -= 0.5 * (s[:, :1] + s[:, -1:])

    far = solve_far_field(Profile1D(l, -gy))               # -F'' + F = -g
    fy = far.values[:, None]
    rhs = -s + fy * m2 + 3.0 * Q**2 * fy * m0

    qx = diff_array(Q, g, "x", 1)
    qy = diff_array(Q, g, "y", 1)
    op = OperatorSpec("linearized_L", qe)
    sol = pcg_apply_inverse(op, Field2D(g, rhs), tol=tol, max_iter=4000, deflate=(qx, qy))
    r = sol.solution.values
    # add kernel elements so that P itself is orthogonal to Q_x and Q_y
    pfull = r + fy * m0
    gram = np.array([[ip_array(qx, qx, g), ip_array(qx, qy, g)],
                     [ip_array(qy, qx, g), ip_array(qy, qy, g)]])
    coef = np.linalg.solve(gram, [ip_array(pfull, qx, g), ip_array(pfull, qy, g)])
    r = r - coef[0] * qx - coef[1] * qy
    pv = r + fy * m0

    prof = ProfileP(Field2D(g, pv), far, Field2D(g, r), qe, l)
    c_q = c_q_value(Profile1D(l, gy))
    pq = ip_array(pv, Q, g)
    ix = int(np.argmin(np.abs(g.x - 0.75 * l)))
    diag = {
        "p_q": pq,
        "p_qx": ip_array(pv, qx, g),
        "p_qy": ip_array(pv, qy, g),
        "p_norm": float(np.sqrt(ip_array(pv, pv, g))),
        "qx_norm": float(np.sqrt(ip_array(qx, qx, g))),
        "qy_norm": float(np.sqrt(ip_array(qy, qy, g))),
        "c_q": c_q,
        "p_q_rel_error": abs(pq - c_q) / c_q,
        "right_decay": float(np.max(np.abs(pv[:, ix])) / np.max(np.abs(pv))),
        "bulk_residual": bulk_residual(prof),
        "solve_residual": sol.relative_residual,
        "solve_iterations": sol.iterations,
        "solve_method": sol.method,
    }
    prof.diagnostics = diag
    if diag["p_q_rel_error"] > pq_tol:
        raise ConvergenceError(f"(P,Q) = {pq:.6g} disagrees with c_Q = {c_q:.6g}")
    return prof


def _apply_L_split(prof: ProfileP, dx_order: int = 0) -> np.ndarray:
    """d^k/dx^k of L P (k = 0 or 1) using split derivatives."""
    Q = prof.q.values
    g = prof.q.grid
    p = prof.derivative
    lap = p(dx_order + 2, 0) + p(dx_order, 2)
    if dx_order == 0:
        return -lap + p(0, 0) - 3.0 * Q**2 * p(0, 0)
    qx = diff_array(Q, g, "x", 1)
    return -lap + p(1, 0) - 3.0 * Q**2 * p(1, 0) - 6.0 * Q * qx * p(0, 0)


def bulk_residual(prof: ProfileP) -> float:
    """L2 norm of (LP)_x - Lambda Q over |x| <= l/2."""
    g = prof.q.grid
    res = _apply_L_split(prof, 1) - lambda_array(prof.q.values, g)
    sel = np.abs(g.x) <= prof.l / 2
    return float(np.sqrt(np.sum(res[:, sel] ** 2) * g.cell))


def approximate_solution_defect(prof: ProfileP, b: float) -> float:
    """Sup norm of (Delta Qb - Qb + Qb^3)_x + b Lambda Qb for Qb = Q + b P."""
    g = prof.q.grid
    Q = prof.q.values
    d = prof.derivative

    def qd(ax, ay):
        a = Q
        for _ in range(ax):
            a = diff_array(a, g, "x", 1)
        for _ in range(ay):
            a = diff_array(a, g, "y", 1)
        return a + b * d(ax, ay)

    qb, qbx, qby = qd(0, 0), qd(1, 0), qd(0, 1)
    lap_x = qd(3, 0) + qd(1, 2)
    lam = qb + g.X * qbx + g.Y * qby
    return float(np.max(np.abs(lap_x - qbx + 3.0 * qb**2 * qbx + b * lam)))


def defect_order(prof: ProfileP, bs=(0.01, 0.005)) -> tuple[float, list[float]]:
    e = [approximate_solution_defect(prof, b) for b in bs]
    return float(np.log(e[0] / e[1]) / np.log(bs[0] / bs[1])), e
