"""Coercivity certificate for the virial operator.

Matrices reported:

* M*  = [[(LQ, phi LQ), (LQ, phi Q_x)], [., (Q_x, phi Q_x)]] with LQ the scaling
  generator applied to Q, plus the pairing (Q_y, phi Q_y);
* the Gram matrix of the unit even weighted fields f1, f2, f3;
* the Sylvester matrix A_ij = -(T^-1 f_i, f_j) + a (f_i, h)(f_j, h) with
  T the virial operator, a = 1/lambda_2 and h = e_2;
* the 2x2 generalized-Weinstein matrix M for (f_e, f_o).

Two scalings are carried side by side.  "unit" uses the unit-norm fields
throughout.  "displayed" uses the raw weighted fields, with the (T^-1 f, f)
sign, which is the scaling the golden entries use.
Definiteness and eigenvalue signs agree between the two (congruence).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .elliptic import pcg_apply_inverse
from .grid import (Field2D, diff_array, ip_array, lambda_array, weight_phi,
                   weight_phitilde)
from .linops import OperatorSpec
from .spectra import EigPair, count_negative, parity_classify

log = logging.getLogger(__name__)

DEFAULT_FE = (1.0, -0.85, 0.5)


@dataclass
class BasisSet:
    f1: Field2D
    f2: Field2D
    f3: Field2D
    f_o: Field2D
    alpha1: float
    raw_norms: tuple = ()

    @property
    def even(self) -> list[Field2D]:
        return [self.f1, self.f2, self.f3]

    @property
    def all(self) -> list[Field2D]:
        return [self.f1, self.f2, self.f3, self.f_o]

    def raw(self, i: int) -> np.ndarray:
        return self.all[i].values * self.raw_norms[i]


def basis_functions(q: Field2D, alpha1: float = 1.01, parity_tol: float = 1e-8,
                    scheme: str = "spectral") -> BasisSet:
    if not alpha1 > 0:
        raise ValueError("alpha1 must be positive")
    g = q.grid
    Q = q.values
    pt = weight_phitilde(g.X, alpha1)
    raw = [np.exp(-g.X / (2.0 * alpha1)) * Q,
           pt * diff_array(Q, g, "x", 1, scheme),
           pt * lambda_array(Q, g, scheme),
           pt * diff_array(Q, g, "y", 1, scheme)]
    norms = tuple(float(np.sqrt(ip_array(r, r, g))) for r in raw)
    fields = [Field2D(g, r / n) for r, n in zip(raw, norms)]
    for f, want in zip(fields, ("even", "even", "even", "odd")):
        got = parity_classify(f, parity_tol)
        if got != want:
            raise ValueError(f"weighted field has parity {got}, expected {want}; Q is not symmetric")
    return BasisSet(*fields, alpha1=alpha1, raw_norms=norms)


def mstar_matrix(q: Field2D, alpha1: float = 1.01, scheme: str = "spectral"):
    """(M*, det M*, (Q_y, phi Q_y))."""
    g = q.grid
    Q = q.values
    phi = weight_phi(g.X, alpha1)
    lq = lambda_array(Q, g, scheme)
    qx = diff_array(Q, g, "x", 1, scheme)
    qy = diff_array(Q, g, "y", 1, scheme)
    off = ip_array(lq, phi * qx, g)
    m = np.array([[ip_array(lq, phi * lq, g), off], [off, ip_array(qx, phi * qx, g)]])
    return m, float(np.linalg.det(m)), ip_array(qy, phi * qy, g)


def gram_matrix(b: BasisSet):
    fs = b.even
    g = fs[0].grid
    m = np.array([[ip_array(u.values, v.values, g) for v in fs] for u in fs])
    return m, float(np.linalg.det(m))


def sylvester_matrix(tinv_fs, fs, a: float = 0.0, h=None, ip=None) -> np.ndarray:
    """A_ij = -(T^-1 f_i, f_j) + a (f_i, h)(f_j, h), symmetrized.

    ``tinv_fs`` are the precomputed T^-1 f_i; ``ip`` is the inner product.
    """
    n = len(fs)
    a_m = np.array([[-ip(tinv_fs[i], fs[j]) for j in range(n)] for i in range(n)])
    if h is not None and a != 0.0:
        c = np.array([ip(f, h) for f in fs])
        a_m += a * np.outer(c, c)
    return 0.5 * (a_m + a_m.T)


@dataclass
class CoercivityCertificate:
    alpha1: float
    mstar: np.ndarray
    det_mstar: float
    qy_pairing: float
    gram: np.ndarray
    gram_det: float
    matrix_a: np.ndarray              # lemma convention, unit fields
    eigs_a: np.ndarray
    matrix_a_displayed: np.ndarray    # (T^-1 f_i, f_j) with raw fields
    eigs_a_displayed: np.ndarray
    fe_coeffs: tuple
    fe_source: str
    fe_quotient: float
    matrix_m: np.ndarray
    eigs_m: np.ndarray
    matrix_m_displayed: np.ndarray
    virial_eigenvalues: list
    virial_negatives: int
    parities: list
    verdict: str
    failed_stage: str | None = None
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        def lst(a):
            return np.asarray(a).tolist()
        return {
            "alpha1": self.alpha1,
            "mstar": lst(self.mstar),
            "det_mstar": self.det_mstar,
            "qy_pairing": self.qy_pairing,
            "gram": lst(self.gram),
            "gram_det": self.gram_det,
            "matrix_a": lst(self.matrix_a),
            "eigs_a": lst(self.eigs_a),
            "matrix_a_displayed": lst(self.matrix_a_displayed),
            "eigs_a_displayed": lst(self.eigs_a_displayed),
            "fe_coeffs": list(self.fe_coeffs),
            "fe_source": self.fe_source,
            "fe_quotient": self.fe_quotient,
            "matrix_m": lst(self.matrix_m),
            "eigs_m": lst(self.eigs_m),
            "matrix_m_displayed": lst(self.matrix_m_displayed),
            "virial_eigenvalues": lst(self.virial_eigenvalues),
            "virial_negatives": self.virial_negatives,
            "eigenvector_parities": list(self.parities),
            "verdict": self.verdict,
            "failed_stage": self.failed_stage,
            **self.extras,
        }


def weinstein_matrix(b: BasisSet, tinv: dict, eig: list[EigPair], fe_coeffs=DEFAULT_FE,
                     displayed: bool = False):
    """2x2 matrix M for (f_e, f_o) and its eigenvalues.

    ``tinv`` maps basis index (0..3) to T^-1 of the *unit* field.  f_e is the
    combination of the unit fields (or of the raw fields when ``displayed``)
    normalized to unit length; f_o is unit, or raw when ``displayed``.
    """
    g = b.f1.grid
    lam1, e1 = eig[0].value, eig[0].vector.values
    lam2, e2 = eig[1].value, eig[1].vector.values
    scale = b.raw_norms if displayed else (1.0, 1.0, 1.0, 1.0)
    fe = sum(c * s * f.values for c, s, f in zip(fe_coeffs, scale, b.even))
    tfe = sum(c * s * tinv[i] for i, (c, s) in enumerate(zip(fe_coeffs, scale)))
    nfe = np.sqrt(ip_array(fe, fe, g))
    fe, tfe = fe / nfe, tfe / nfe
    fo, tfo = b.f_o.values * scale[3], tinv[3] * scale[3]
    m11 = ip_array(tfe, fe, g) - ip_array(fe, e2, g) ** 2 / lam2
    m22 = ip_array(tfo, fo, g) - ip_array(fo, e1, g) ** 2 / lam1
    m12 = ip_array(tfe, fo, g)
    m = np.array([[m11, m12], [m12, m22]])
    return m, np.linalg.eigvalsh(m)


def certify_coercivity(q: Field2D, alpha1: float = 1.01, fe_coeffs=DEFAULT_FE,
                       solve_tol: float = 1e-11, eig_tol: float = 1e-8,
                       scheme: str = "spectral") -> CoercivityCertificate:
    g = q.grid
    op = OperatorSpec("virial_L", q, alpha1, scheme)
    stage = "spectrum"
    try:
        neg = count_negative(op, floor_gap=1e-3, tol=eig_tol)
        eig = neg.pairs[:2]
        stage = "basis"
        b = basis_functions(q, alpha1, scheme=scheme)
        mstar, det_mstar, qy = mstar_matrix(q, alpha1, scheme)
        gram, gdet = gram_matrix(b)
        stage = "inverse"
        tinv = {i: pcg_apply_inverse(op, f, tol=solve_tol, max_iter=4000).solution.values
                for i, f in enumerate(b.all)}
    except Exception as exc:
        raise RuntimeError(f"[coercivity:{stage}] {exc}") from exc

    def ip(u, v):
        return ip_array(u, getattr(v, "values", v), g)

    fs = [f.values for f in b.even]
    a_lemma = sylvester_matrix([tinv[i] for i in range(3)], fs, 1.0 / eig[1].value,
                               eig[1].vector.values, ip)
    eigs_a = np.linalg.eigvalsh(a_lemma)
    rn = np.asarray(b.raw_norms[:3])
    a_disp = sylvester_matrix([tinv[i] * rn[i] for i in range(3)], [f * n for f, n in zip(fs, rn)],
                              ip=ip)
    a_disp = -a_disp
    eigs_disp = np.linalg.eigvalsh(a_disp)

    m, eigs_m = weinstein_matrix(b, tinv, eig, fe_coeffs)
    m_disp, _ = weinstein_matrix(b, tinv, eig, fe_coeffs, displayed=True)
    default_ok = bool(np.all(eigs_m < 0))
    fe_source = "default"
    if not default_ok and eigs_a[-1] > 0:
        # the Sylvester lemma's own witness: top eigenvector of A gives (T^-1 f, f) < 0
        w = np.linalg.eigh(a_lemma)[1][:, -1]
        if abs(w[0]) > 1e-12:
            w = w / w[0]
        fe_coeffs = tuple(float(c) for c in w)
        m, eigs_m = weinstein_matrix(b, tinv, eig, fe_coeffs)
        # same f_e expressed through the raw fields
        raw_coeffs = [c / n for c, n in zip(fe_coeffs, b.raw_norms[:3])]
        m_disp, _ = weinstein_matrix(b, tinv, eig, raw_coeffs, displayed=True)
        fe_source = "sylvester_eigenvector"

    failed = None
    if neg.count != 2:
        failed = "spectrum"
    elif not eigs_a[-1] > 0:
        failed = "sylvester"
    elif not np.all(eigs_m < 0):
        failed = "weinstein"
    cert = CoercivityCertificate(
        alpha1=alpha1, mstar=mstar, det_mstar=det_mstar, qy_pairing=qy,
        gram=gram, gram_det=gdet, matrix_a=a_lemma, eigs_a=eigs_a,
        matrix_a_displayed=a_disp, eigs_a_displayed=eigs_disp,
        fe_coeffs=tuple(fe_coeffs), fe_source=fe_source, fe_quotient=float(m[0, 0]),
        matrix_m=m, eigs_m=eigs_m, matrix_m_displayed=m_disp,
        virial_eigenvalues=neg.eigenvalues, virial_negatives=neg.count,
        parities=[p.parity_y for p in eig],
        verdict="coercive" if failed is None else "failed", failed_stage=failed,
        extras={
            # D carries the opposite sign of the displayed table; its spectrum is -eigs
            "eigs_d": np.sort(-eigs_disp).tolist(),
            "fe_quotient_displayed": float(m_disp[0, 0]),
            "virial_gap": neg.gap_certificate,
            "default_fe_negative_definite": default_ok,
        },
    )
    log.info("alpha1=%g verdict=%s eigs_a=%s", alpha1, cert.verdict, eigs_a)
    return cert
