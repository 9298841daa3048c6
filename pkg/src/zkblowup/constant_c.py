"""The blow-up constant c from the x-integrated scaling generator of Q.

With g(y) = int Lambda Q dx, two routes give the same number:

* Fourier quotient  c = int 2/(1+xi^2) |g^(xi)|^2 / int |g^(xi)|^2
* BVP               -F'' + F = g,  c = 2 int F g / int g^2

They agree algebraically (Parseval), so their discrepancy measures only
round-off.  The blow-up rate exponent is 1/(3 - c).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import Field2D, Profile1D, diff_array, integrate_x, lambda_array


@dataclass
class ConstantCResult:
    c_fourier: float
    c_bvp: float
    g: Profile1D
    f_profile: Profile1D
    c_q: float
    discrepancy: float

    @property
    def exponent(self) -> float:
        """Blow-up rate exponent 1/(3 - c)."""
        return 1.0 / (3.0 - self.c_fourier)

    def as_dict(self) -> dict:
        return {"c_fourier": self.c_fourier, "c_bvp": self.c_bvp, "c_q": self.c_q,
                "discrepancy": self.discrepancy, "exponent": self.exponent}


def g_profile(q: Field2D, scheme: str = "spectral", check_tol: float | None = 1e-4) -> Profile1D:
    """g(y) = int Lambda Q dx on the grid's y-axis.

    Cross-checked against y d/dy int Q dx (the x-terms of Lambda Q integrate
    to zero); raises if the two disagree by more than ``check_tol`` relative.
    """
    g = q.grid
    lq = lambda_array(q.values, g, scheme)
    prof = integrate_x(q.like(lq))
    if check_tol is not None:
        qy = diff_array(q.values, g, "y", 1, scheme)
        alt = g.y * qy.sum(axis=1) * g.hx
        scale = max(np.max(np.abs(alt)), 1e-300)
        dev = np.max(np.abs(alt - prof.values)) / scale
        if dev > check_tol:
            raise ValueError(f"g formulas disagree ({dev:.2e} relative)")
    return prof


def _spectrum(g: Profile1D) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(g.values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("g has non-finite samples")
    p = np.abs(sfft.fft(v)) ** 2
    if not np.any(p > 0):
        raise ZeroDivisionError("g vanishes identically")
    return g.wavenumbers, p


def constant_c_fourier(g: Profile1D) -> float:
    xi, p = _spectrum(g)
    return float(np.sum(2.0 / (1.0 + xi**2) * p) / np.sum(p))


def solve_far_field(g: Profile1D) -> Profile1D:
    """Periodic solution of -F'' + F = g by division with 1 + xi^2."""
    xi = g.wavenumbers
    f = sfft.ifft(sfft.fft(np.asarray(g.values, dtype=float)) / (1.0 + xi**2)).real
    return Profile1D(g.l, f)


def constant_c_bvp(g: Profile1D) -> tuple[Profile1D, float]:
    v = np.asarray(g.values, dtype=float)
    den = float(np.dot(v, v))
    if den == 0.0:
        raise ZeroDivisionError("g vanishes identically")
    f = solve_far_field(g)
    return f, 2.0 * float(np.dot(f.values, v)) / den


def c_q_value(g: Profile1D) -> float:
    """1/4 int g^2 dy."""
    return 0.25 * float(np.dot(g.values, g.values)) * g.h


def compute_constant_c(q: Field2D, scheme: str = "spectral") -> ConstantCResult:
    g = g_profile(q, scheme)
    cf = constant_c_fourier(g)
    f, cb = constant_c_bvp(g)
    for name, c in (("fourier", cf), ("bvp", cb)):
        if not 0.0 < c < 2.0:
            raise ArithmeticError(f"c_{name} = {c} outside (0, 2)")
    return ConstantCResult(cf, cb, g, f, c_q_value(g), abs(cf - cb))


def spectra_columns(res: ConstantCResult) -> dict[str, np.ndarray]:
    """Columns for CSV export: wavenumber, |g^|^2 and the weighted integrand."""
    xi, p = _spectrum(res.g)
    order = np.argsort(xi)
    xi, p = xi[order], p[order]
    return {"xi": xi, "g_hat_sq": p, "weighted": 2.0 / (1.0 + xi**2) * p}
