"""Run configuration, golden-value comparisons and the JSON report."""

from __future__ import annotations

import json
import platform
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from . import __version__

# key -> (reference value, tolerance, kind, anchor).  kind is "abs", "rel" or
# "range" (tolerance is then the accepted (lo, hi) interval).
GOLDENS: dict[str, tuple] = {
    "c_fourier": (1.6632, 0.005, "abs", "blow-up constant c, Fourier quotient"),
    "c_bvp": (1.6632, 0.005, "abs", "blow-up constant c, far-field BVP"),
    "blowup_exponent": (0.7481, 0.003, "abs", "rate exponent 1/(3-c)"),
    "det_mstar": (391.2525, 0.01, "rel", "determinant of M*"),
    "qy_pairing": (12.9692, 0.01, "rel", "(Q_y, phi Q_y)"),
    "virial_lambda1": (-12.6913, 0.01, "rel", "lowest virial eigenvalue"),
    "virial_lambda2": (-2.9114, 0.01, "rel", "second virial eigenvalue"),
    "gram_det": (0.8367, 0.01, "rel", "Gram determinant of f1, f2, f3"),
    "a_11": (2.9247, 0.02, "rel", "Sylvester matrix entry (1,1), alpha1=1.01"),
    "a_12": (0.5925, 0.02, "rel", "Sylvester matrix entry (1,2), alpha1=1.01"),
    "a_13": (-4.4347, 0.02, "rel", "Sylvester matrix entry (1,3), alpha1=1.01"),
    "a_22": (1.9171, 0.02, "rel", "Sylvester matrix entry (2,2), alpha1=1.01"),
    "a_23": (2.6850, 0.02, "rel", "Sylvester matrix entry (2,3), alpha1=1.01"),
    "a_33": (13.0383, 0.02, "rel", "Sylvester matrix entry (3,3), alpha1=1.01"),
    "eig_a_1": (-0.1009, 0.003, "abs", "Sylvester eigenvalue 1, alpha1=1.01"),
    "eig_a_2": (2.86624, 0.02, "rel", "Sylvester eigenvalue 2, alpha1=1.01"),
    "eig_a_3": (15.1147, 0.02, "rel", "Sylvester eigenvalue 3, alpha1=1.01"),
    "eig_a_1_alpha105": (-0.0091, 0.003, "abs", "Sylvester eigenvalue 1, alpha1=1.05"),
    "eig_a_1_alpha110": (0.1254, 0.02, "rel", "Sylvester eigenvalue 1, alpha1=1.1"),
    "eig_a_2_alpha110": (3.4533, 0.02, "rel", "Sylvester eigenvalue 2, alpha1=1.1"),
    "eig_a_3_alpha110": (20.8220, 0.02, "rel", "Sylvester eigenvalue 3, alpha1=1.1"),
    "fe_quotient": (-0.0103, 0.004, "abs", "Weinstein M (1,1), f_e = f1 - 0.85 f2 + 0.5 f3"),
    "m_22": (-0.6918, (-0.75, -0.55), "range", "Weinstein M (2,2)"),
    "mass": (11.7009, 1e-4, "rel", "mass of Q (refinement oracle)"),
}


def compare(key: str, computed: float) -> dict:
    ref, tol, kind, anchor = GOLDENS[key]
    computed = float(computed)
    if kind == "abs":
        ok = abs(computed - ref) <= tol
    elif kind == "rel":
        ok = abs(computed - ref) <= tol * abs(ref)
    else:
        ok = tol[0] <= computed <= tol[1]
        tol = list(tol)
    return {"computed": computed, "paper_value": ref, "tolerance": tol,
            "tolerance_kind": kind, "anchor": anchor, "pass": bool(ok)}


@dataclass
class RunConfig:
    command: str = "report-all"
    nx: int = 512
    ny: int = 512
    lx: float = 20.0
    ly: float = 20.0
    scheme: str = "spectral"
    alpha1: float = 1.01
    alpha2: float | None = None
    tol: float = 1e-12
    solve_tol: float = 1e-11
    eig_tol: float = 1e-8
    input: str | None = None
    output: str | None = None

    def __post_init__(self):
        if self.alpha2 is None:
            self.alpha2 = self.alpha1 - 1.0 / 200.0


@dataclass
class ReportBundle:
    config: RunConfig
    stages: dict = field(default_factory=dict)
    goldens: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def add_stage(self, name: str, result: dict):
        self.stages[name] = result

    def check(self, key: str, computed: float):
        if key in self.goldens:
            raise KeyError(f"golden {key} recorded twice")
        self.goldens[key] = compare(key, computed)

    @property
    def all_pass(self) -> bool:
        return all(g["pass"] for g in self.goldens.values())


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def environment_stamp(bundle: ReportBundle) -> dict:
    return {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "timings_s": bundle.timings,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def emit_report(bundle: ReportBundle) -> str:
    """JSON text with sorted keys; the environment stamp is the only volatile part."""
    if not bundle.stages:
        raise ValueError("report bundle has no stage results")
    doc = {
        "config": asdict(bundle.config),
        "stages": bundle.stages,
        "goldens": bundle.goldens,
        "summary": {"goldens": len(bundle.goldens),
                    "passed": sum(g["pass"] for g in bundle.goldens.values())},
        "environment": environment_stamp(bundle),
    }
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
