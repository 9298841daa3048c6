"""Reduced modulation dynamics and blow-up rate fits.

In the rescaled time s (ds/dt = 1/lambda^3):

    b_s = -c b^2,   lambda_s = -b lambda,   (x1)_s = lambda,   (x2)_s = 0,   t_s = lambda^3

b / lambda^c is a first integral, and lambda^(3-c) is affine in t, so
b0 > 0 collapses at T = lambda0^3 / ((3-c) b0) with lambda ~ (T-t)^(1/(3-c)).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

LAMBDA_FLOOR = 1e-6


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    s: float
    b: float
    lam: float
    x1: float
    x2: float


@dataclass
class Trajectory:
    points: list[TrajectoryPoint] = field(repr=False)
    c: float
    b0: float
    lambda0: float
    regime: str
    stop_reason: str = "horizon"
    blowup_time: float | None = None
    fitted_exponent: float | None = None
    # per-step t increments; T - t is rebuilt from these so that it keeps full
    # relative precision long after it has dropped below eps * T
    increments: np.ndarray = field(default=None, repr=False)

    def time_to_end(self) -> np.ndarray:
        """t_end - t_i summed from the stored increments (not by subtraction)."""
        inc = np.asarray(self.increments, dtype=float)
        r = np.zeros(len(self.points))
        r[:-1] = np.cumsum(inc[::-1])[::-1]
        return r

    def array(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])

    def invariant_drift(self) -> float:
        """max relative change of b / lambda^c along the trajectory."""
        b, lam = self.array("b"), self.array("lam")
        k = b / lam**self.c
        if self.b0 == 0:
            return float(np.max(np.abs(k)))
        return float(np.max(np.abs(k / k[0] - 1.0)))


def regime_of(b0: float) -> str:
    return "blowup" if b0 > 0 else ("steady" if b0 == 0 else "exit")


def blowup_time(b0: float, c: float, lambda0: float = 1.0) -> float:
    if b0 <= 0:
        return np.inf
    return lambda0**3 / ((3.0 - c) * b0)


def closed_form_lambda(b0: float, c: float, t, lambda0: float = 1.0):
    """lambda(t) = (lambda0^(3-c) - (3-c) (b0/lambda0^c) t)^(1/(3-c))."""
    if not 0.0 < c < 2.0:
        raise ValueError("c must lie in (0, 2)")
    t = np.asarray(t, dtype=float)
    if b0 > 0 and np.any(t >= blowup_time(b0, c, lambda0)):
        raise ValueError("t at or past the blow-up time")
    k = b0 / lambda0**c
    out = (lambda0 ** (3.0 - c) - (3.0 - c) * k * t) ** (1.0 / (3.0 - c))
    return float(out) if out.ndim == 0 else out


def _rhs(y, c):
    b, lam = y[0], y[1]
    return np.array([-c * b * b, -b * lam, lam, 0.0, lam**3])


def integrate_ode(b0: float, lambda0: float = 1.0, c: float = 1.6632, dt: float = 1e-2,
                  horizon: float = 50.0, eps: float = 2e-3, lambda_floor: float = LAMBDA_FLOOR,
                  max_steps: int = 2_000_000) -> Trajectory:
    """Classical RK4 in s.

    The step is the smallest of a relative step eps/(c|b|) (b changes by a
    fraction ~eps), a t-step dt/lambda^3, and what is left to the horizon.
    For b0 > 0 the relative step grows geometrically with s, so reaching the
    lambda floor costs O(log(1/lambda_floor)/eps) steps.
    """
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    if not dt > 0 or not horizon > 0:
        raise ValueError("dt and horizon must be positive")
    y = np.array([b0, lambda0, 0.0, 0.0, 0.0])
    s = 0.0
    pts = [TrajectoryPoint(0.0, 0.0, b0, lambda0, 0.0, 0.0)]
    reason = "horizon"
    incs = []
    for _ in range(max_steps):
        b, lam, t = y[0], y[1], y[4]
        if t >= horizon * (1 - 1e-14):
            break
        if lam < lambda_floor:
            reason = "lambda_floor"
            break
        ds = dt / lam**3
        if b != 0:
            ds = min(ds, eps / (c * abs(b)))
        ds = min(ds, (horizon - t) / lam**3)
        if ds < 1e-300 or not np.isfinite(ds):
            reason = "step_underflow"
            break
        k1 = _rhs(y, c)
        k2 = _rhs(y + 0.5 * ds * k1, c)
        k3 = _rhs(y + 0.5 * ds * k2, c)
        k4 = _rhs(y + ds * k3, c)
        dy = ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        y = y + dy
        s += ds
        incs.append(dy[4])
        if not np.all(np.isfinite(y)) or y[1] <= 0:
            reason = "step_underflow"
            break
        pts.append(TrajectoryPoint(float(y[4]), s, float(y[0]), float(y[1]), float(y[2]), float(y[3])))
    else:
        reason = "max_steps"
    return Trajectory(pts, c, b0, lambda0, regime_of(b0), reason, increments=np.array(incs))


@dataclass
class BlowupFit:
    exponent: float
    blowup_time: float
    l0: float
    b_limit: float
    b_limit_candidates: dict
    decades: float
    time_left: float = 0.0  # T - t at the last point


def _tail(traj: Trajectory, n_tail: int = 50) -> float:
    """int_{s_end}^inf lambda^3 ds for a local power law lambda ~ s^-p on the last points."""
    s, lam = traj.array("s"), traj.array("lam")
    ss, ll = s[-n_tail:], lam[-n_tail:]
    p = -np.polyfit(np.log(ss), np.log(ll), 1)[0]
    if 3 * p <= 1:
        raise ArithmeticError("tail does not converge; not a finite-time collapse")
    return float(lam[-1] ** 3 * s[-1] / (3 * p - 1))


def fit_blowup_exponent(traj: Trajectory, decades: float = 1.0) -> BlowupFit:
    """Fit log lambda = log A + beta log(T - t) over the final ``decades`` of lambda.

    The remaining time T - t_end is a free parameter of the fit, seeded by a
    power-law tail estimate; beta is the reported exponent.
    """
    if traj.regime != "blowup":
        raise ValueError("exponent fit needs a blow-up trajectory")
    lam, t, b = traj.array("lam"), traj.array("t"), traj.array("b")
    if lam[-1] > 1e-3 * traj.lambda0:
        raise ArithmeticError("insufficient dynamic range: lambda did not drop three decades")
    sel = lam <= lam[-1] * 10**decades
    rem = traj.time_to_end()[sel]
    ls = np.log(lam[sel])
    gap0 = _tail(traj)

    def resid(p):
        return p[0] + p[1] * np.log(rem + np.exp(p[2])) - ls

    beta0, a0 = np.polyfit(np.log(rem + gap0), ls, 1)
    sol = least_squares(resid, [a0, beta0, np.log(gap0)], xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=2000)
    _, slope, lg = sol.x
    gap = float(np.exp(lg))
    if not np.isfinite(gap) or gap <= 0:
        raise ArithmeticError("blow-up fit failed")
    T = float(t[-1] + gap)
    c = traj.c
    l0 = float(lam[-1] / gap ** (1.0 / (3.0 - c)))
    blim = float(b[-1] / gap ** (c / (3.0 - c)))
    traj.blowup_time, traj.fitted_exponent = T, float(slope)
    return BlowupFit(float(slope), T, l0, blim,
                     {"l0_cubed": l0**3, "l0_cubed_over_3_minus_c": l0**3 / (3.0 - c)},
                     float(np.log10(lam[sel][0] / lam[sel][-1])), gap)


@dataclass
class X1Law:
    case: str               # bounded | logarithmic | power | ambiguous
    rate_exponent: float    # q in dx1/dt ~ (T-t)^q
    power: float | None     # (1-c)/(3-c) style exponent of x1 itself for the power case
    residuals: dict


def x1_law(traj: Trajectory, decades: float = 2.0, tol: float = 0.01) -> X1Law:
    """Classify the growth of x1 near the collapse.

    dx1/dt = lambda^-2 ~ (T-t)^q; q > -1 leaves x1 bounded, q = -1 gives a
    logarithm, q < -1 a power (T-t)^(q+1).  Each candidate law is also fitted
    to x1 directly (linear least squares in its two free constants) and the
    relative residuals are reported.
    """
    fit = fit_blowup_exponent(traj)
    lam, t, x1 = traj.array("lam"), traj.array("t"), traj.array("x1")
    sel = lam <= lam[-1] * 10**decades
    tau = traj.time_to_end()[sel] + fit.time_left
    q = -2.0 * fit.exponent
    gamma = q + 1.0
    basis = {
        "bounded": tau ** max(gamma, 1e-3),
        "logarithmic": np.log(tau),
        "power": tau ** min(gamma, -1e-3),
    }
    res = {}
    for name, col in basis.items():
        a = np.column_stack([np.ones_like(col), col])
        coef, *_ = np.linalg.lstsq(a, x1[sel], rcond=None)
        r = x1[sel] - a @ coef
        res[name] = float(np.linalg.norm(r) / max(np.linalg.norm(x1[sel]), 1e-300))
    if abs(gamma) <= tol:
        case = "logarithmic"
    elif abs(gamma) <= 3 * tol:
        case = "ambiguous"
    else:
        case = "bounded" if gamma > 0 else "power"
    return X1Law(case, q, gamma if case == "power" else None, res)


def write_trajectory_csv(path, traj: Trajectory) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "s", "b", "lambda", "x1", "x2"])
        for p in traj.points:
            w.writerow([repr(p.t), repr(p.s), repr(p.b), repr(p.lam), repr(p.x1), repr(p.x2)])
    return path
