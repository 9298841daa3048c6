"""Command line front end.

Exit codes: 0 success, 1 computation failure, 2 usage error.  A negative
coercivity verdict is a successful computation and exits 0.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .coercivity import certify_coercivity
from .constant_c import compute_constant_c, spectra_columns
from .dynamics import fit_blowup_exponent, integrate_ode, write_trajectory_csv, x1_law
from .elliptic import defect_order, solve_profile_P
from .grid import make_grid
from .ground_state import (energy, gradient_norm_sq, petviashvili, petviashvili_1d,
                           symmetry_deviation)
from .linops import OperatorSpec
from .report import ReportBundle, RunConfig, emit_report
from .spectra import count_negative, eigs_smallest, export_eigpair

log = logging.getLogger("zkblowup")


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage


def _stage(name, fn, *a, **kw):
    print(f"[{name}] running", file=sys.stderr)
    try:
        return fn(*a, **kw)
    except Exception as exc:  # noqa: BLE001 - every failure gets a stage label
        raise StageError(name, exc) from exc


def _grid_args(p):
    p.add_argument("--nx", type=int, default=512)
    p.add_argument("--ny", type=int, default=512)
    p.add_argument("--l", type=float, default=20.0, help="half-width in both directions")
    p.add_argument("--lx", type=float, default=None)
    p.add_argument("--ly", type=float, default=None)
    p.add_argument("--scheme", choices=["spectral", "fd2"], default="spectral")
    p.add_argument("--tol", type=float, default=1e-12)


def _config(args, command) -> RunConfig:
    lx = args.lx if getattr(args, "lx", None) is not None else getattr(args, "l", 20.0)
    ly = args.ly if getattr(args, "ly", None) is not None else getattr(args, "l", 20.0)
    return RunConfig(command=command, nx=getattr(args, "nx", 512), ny=getattr(args, "ny", 512),
                     lx=lx, ly=ly, scheme=getattr(args, "scheme", "spectral"),
                     alpha1=getattr(args, "alpha1", 1.01), tol=getattr(args, "tol", 1e-12),
                     input=getattr(args, "q", None), output=getattr(args, "out", None))


def _ground_state(cfg: RunConfig):
    grid = make_grid(cfg.nx, cfg.ny, cfg.lx, cfg.ly)
    gs = petviashvili(grid, tol=cfg.tol, scheme=cfg.scheme)
    if not gs.converged:
        raise RuntimeError(f"ground state did not converge (residual {gs.residual_inf:.2e})")
    return gs


def _gs_summary(gs) -> dict:
    q = gs.q
    g2 = gradient_norm_sq(q, gs.scheme)
    return {"residual_inf": gs.residual_inf, "iterations": gs.iterations, "mass": gs.mass,
            "converged": gs.converged, "scheme": gs.scheme,
            "energy_over_grad2": energy(q, gs.scheme) / g2,
            "max_q": float(np.max(q.values)), "symmetry_deviation": symmetry_deviation(q)}


def _load_q(args):
    return io.read_field(args.q)


def cmd_ground_state(args) -> int:
    cfg = _config(args, "ground-state")
    gs = _stage("ground-state", _ground_state, cfg)
    if args.out:
        io.write_field(args.out, gs.q)
    if args.json:
        io.write_json(args.json, _gs_summary(gs))
    print(f"mass={gs.mass:.10f} residual={gs.residual_inf:.3e} iterations={gs.iterations}")
    return 0


def cmd_spectrum(args) -> int:
    q = _stage("spectrum:load", _load_q, args)
    op = OperatorSpec(args.operator, q, args.alpha1, args.scheme)
    pairs = _stage("spectrum", eigs_smallest, op, args.k, args.eig_tol)
    neg = _stage("spectrum:count", count_negative, op, args.floor_gap)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, p in enumerate(pairs):
            export_eigpair(out / f"{args.operator}_{i}", p)
    doc = {"operator": args.operator, "alpha1": args.alpha1,
           "eigenpairs": [p.sidecar() for p in pairs], "negative_count": neg.count,
           "kernel_count": neg.kernel, "gap_certificate": neg.gap_certificate}
    if args.json:
        io.write_json(args.json, doc)
    for p in pairs:
        print(f"{p.value:+.8f} residual={p.residual:.1e} parity={p.parity_y}")
    return 0


def cmd_constant_c(args) -> int:
    q = _stage("constant-c:load", _load_q, args)
    res = _stage("constant-c", compute_constant_c, q)
    if args.out:
        io.write_json(args.out, res.as_dict())
    if args.csv:
        stem = Path(args.csv)
        io.write_profiles_csv(stem.with_name(stem.name + "_profiles.csv"),
                              {"y": res.g.coords, "g": res.g.values, "F": res.f_profile.values})
        io.write_profiles_csv(stem.with_name(stem.name + "_spectrum.csv"), spectra_columns(res))
    print(f"c_fourier={res.c_fourier:.8f} c_bvp={res.c_bvp:.8f} exponent={res.exponent:.6f}")
    return 0


def _profile_doc(prof):
    order, errs = defect_order(prof)
    d = dict(prof.diagnostics)
    d.update({"defect_order": order, "defects": errs})
    return d


def cmd_profile_p(args) -> int:
    q = _stage("profile-p:load", _load_q, args)
    prof = _stage("profile-p", solve_profile_P, q, args.solve_tol)
    doc = _stage("profile-p:diagnostics", _profile_doc, prof)
    if args.out:
        io.write_field(args.out, prof.p)
    if args.json:
        io.write_json(args.json, doc)
    print(f"(P,Q)={doc['p_q']:.8f} c_Q={doc['c_q']:.8f} defect order={doc['defect_order']:.3f}")
    return 0


def cmd_coercivity(args) -> int:
    q = _stage("coercivity:load", _load_q, args)
    cert = _stage("coercivity", certify_coercivity, q, args.alpha1, solve_tol=args.solve_tol)
    doc = cert.as_dict()
    if args.out:
        io.write_json(args.out, doc)
    print(f"alpha1={args.alpha1} verdict={cert.verdict} eigs_a_displayed={np.round(cert.eigs_a_displayed, 5)}")
    return 0


def _one_trajectory(b0, c, args):
    tr = integrate_ode(b0, args.lambda0, c, dt=args.dt, horizon=args.horizon)
    doc = {"b0": b0, "c": c, "regime": tr.regime, "stop_reason": tr.stop_reason,
           "points": len(tr.points), "invariant_drift": tr.invariant_drift(),
           "final": vars(tr.points[-1])}
    if tr.regime == "blowup" and tr.points[-1].lam < 1e-3 * args.lambda0:
        fit = fit_blowup_exponent(tr)
        law = x1_law(tr)
        doc.update({"blowup_time": fit.blowup_time, "fitted_exponent": fit.exponent,
                    "predicted_exponent": 1.0 / (3.0 - c), "l0": fit.l0, "b_limit": fit.b_limit,
                    "b_limit_candidates": fit.b_limit_candidates, "x1_case": law.case,
                    "x1_rate_exponent": law.rate_exponent})
    return tr, doc


def cmd_dynamics(args) -> int:
    runs = []
    for c in args.c:
        for b0 in args.b0:
            tr, doc = _stage("dynamics", _one_trajectory, b0, c, args)
            runs.append(doc)
            if args.csv and len(args.c) * len(args.b0) == 1:
                write_trajectory_csv(args.csv, tr)
            elif args.csv:
                stem = Path(args.csv)
                write_trajectory_csv(stem.with_name(f"{stem.stem}_c{c:g}_b{b0:g}.csv"), tr)
            msg = f"c={c:g} b0={b0:g} regime={doc['regime']}"
            if "fitted_exponent" in doc:
                msg += f" exponent={doc['fitted_exponent']:.6f}"
            print(msg)
    if args.out:
        io.write_json(args.out, {"runs": runs})
    return 0


def report_all(cfg: RunConfig, out_dir: Path | None = None) -> ReportBundle:
    """Every stage at the given configuration, with golden comparisons."""
    bundle = ReportBundle(cfg)
    clock = time.perf_counter

    t0 = clock()
    gs = _stage("ground-state", _ground_state, cfg)
    q = gs.q
    summary = _gs_summary(gs)
    x, q1, _ = petviashvili_1d(2048, 40.0)
    summary["selftest_1d_error"] = float(np.max(np.abs(q1 - np.sqrt(2) / np.cosh(x))))
    bundle.add_stage("ground_state", summary)
    bundle.check("mass", gs.mass)
    bundle.timings["ground_state"] = clock() - t0
    if out_dir:
        io.write_field(out_dir / "q.zkf", q)

    t0 = clock()
    cres = _stage("constant-c", compute_constant_c, q)
    bundle.add_stage("constant_c", cres.as_dict())
    bundle.check("c_fourier", cres.c_fourier)
    bundle.check("c_bvp", cres.c_bvp)
    bundle.check("blowup_exponent", cres.exponent)
    bundle.timings["constant_c"] = clock() - t0

    t0 = clock()
    prof = _stage("profile-p", solve_profile_P, q, cfg.solve_tol)
    bundle.add_stage("profile_p", _stage("profile-p:diagnostics", _profile_doc, prof))
    bundle.timings["profile_p"] = clock() - t0

    t0 = clock()
    lneg = _stage("spectrum:L", count_negative, OperatorSpec("linearized_L", q, scheme=cfg.scheme))
    bundle.add_stage("spectrum_L", {"eigenvalues": lneg.eigenvalues, "negative_count": lneg.count,
                                    "kernel_count": lneg.kernel})
    bundle.timings["spectrum_L"] = clock() - t0

    for alpha in (cfg.alpha1, 1.05, 1.1):
        t0 = clock()
        cert = _stage(f"coercivity:{alpha:g}", certify_coercivity, q, alpha,
                      solve_tol=cfg.solve_tol, eig_tol=cfg.eig_tol, scheme=cfg.scheme)
        bundle.add_stage(f"coercivity_alpha{alpha:g}", cert.as_dict())
        bundle.timings[f"coercivity_alpha{alpha:g}"] = clock() - t0
        a, e = cert.matrix_a_displayed, cert.eigs_a_displayed
        if alpha == cfg.alpha1:
            bundle.check("det_mstar", cert.det_mstar)
            bundle.check("qy_pairing", cert.qy_pairing)
            bundle.check("virial_lambda1", cert.virial_eigenvalues[0])
            bundle.check("virial_lambda2", cert.virial_eigenvalues[1])
            bundle.check("gram_det", cert.gram_det)
            for key, (i, j) in {"a_11": (0, 0), "a_12": (0, 1), "a_13": (0, 2),
                                "a_22": (1, 1), "a_23": (1, 2), "a_33": (2, 2)}.items():
                bundle.check(key, a[i, j])
            for i in range(3):
                bundle.check(f"eig_a_{i + 1}", e[i])
            bundle.check("fe_quotient", cert.extras["fe_quotient_displayed"])
            bundle.check("m_22", cert.matrix_m_displayed[1, 1])
        elif alpha == 1.05:
            bundle.check("eig_a_1_alpha105", e[0])
        else:
            for i in range(3):
                bundle.check(f"eig_a_{i + 1}_alpha110", e[i])
    verdicts = [bundle.stages[f"coercivity_alpha{a:g}"]["verdict"] for a in (cfg.alpha1, 1.05, 1.1)]
    bundle.add_stage("coercivity_verdicts", {"verdicts": verdicts,
                                             "expected": ["coercive", "coercive", "failed"]})

    t0 = clock()
    dyn = {}
    for c in (0.5, 1.0, 1.6632, cres.c_fourier):
        tr = integrate_ode(0.1, 1.0, c, horizon=1e6)
        fit = fit_blowup_exponent(tr)
        dyn[f"{c:.6g}"] = {"fitted_exponent": fit.exponent, "predicted": 1.0 / (3.0 - c),
                           "x1_case": x1_law(tr).case, "invariant_drift": tr.invariant_drift()}
    bundle.add_stage("dynamics", dyn)
    bundle.timings["dynamics"] = clock() - t0
    return bundle


def cmd_report_all(args) -> int:
    cfg = _config(args, "report-all")
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    bundle = report_all(cfg, out_dir)
    text = emit_report(bundle)
    if args.out:
        Path(args.out).write_text(text)
    elif out_dir:
        (out_dir / "report.json").write_text(text)
    else:
        sys.stdout.write(text)
    for key, g in bundle.goldens.items():
        print(f"{'PASS' if g['pass'] else 'FAIL'} {key}: computed {g['computed']:.6g} "
              f"reference {g['paper_value']:.6g}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zkblowup", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground-state", help="Petviashvili ground state to a ZKF1 file")
    _grid_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--json")
    p.set_defaults(fn=cmd_ground_state)

    p = sub.add_parser("spectrum", help="lowest eigenpairs of L, the virial operator or Helmholtz")
    p.add_argument("--q", required=True)
    p.add_argument("--operator", choices=["virial_L", "linearized_L", "helmholtz"], default="virial_L")
    p.add_argument("--alpha1", type=float, default=1.01)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--scheme", choices=["spectral", "fd2"], default="spectral")
    p.add_argument("--eig-tol", type=float, default=1e-8)
    p.add_argument("--floor-gap", type=float, default=1e-3)
    p.add_argument("--out-dir")
    p.add_argument("--json")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("constant-c", help="blow-up constant by both routes")
    p.add_argument("--q", required=True)
    p.add_argument("--out")
    p.add_argument("--csv", help="stem for g/F profile and spectrum CSV files")
    p.set_defaults(fn=cmd_constant_c)

    p = sub.add_parser("profile-p", help="correction profile P and its diagnostics")
    p.add_argument("--q", required=True)
    p.add_argument("--solve-tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(fn=cmd_profile_p)

    p = sub.add_parser("coercivity", help="coercivity certificate at one alpha1")
    p.add_argument("--q", required=True)
    p.add_argument("--alpha1", type=float, default=1.01)
    p.add_argument("--solve-tol", type=float, default=1e-11)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_coercivity)

    p = sub.add_parser("dynamics", help="reduced ODE trajectories (sweeps over b0 and c)")
    p.add_argument("--b0", type=float, nargs="+", default=[0.1])
    p.add_argument("--c", type=float, nargs="+", default=[1.6632])
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_dynamics)

    p = sub.add_parser("report-all", help="every stage plus golden comparisons")
    _grid_args(p)
    p.add_argument("--alpha1", type=float, default=1.01)
    p.add_argument("--out")
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_report_all)
    return ap


def _check_usage(args, ap):
    if hasattr(args, "lambda0") and args.lambda0 <= 0:
        ap.error("--lambda0 must be positive")
    if getattr(args, "alpha1", 1.0) <= 0:
        ap.error("--alpha1 must be positive")
    if hasattr(args, "c") and any(not 0 < c < 2 for c in args.c):
        ap.error("--c values must lie in (0, 2)")
    for name in ("nx", "ny"):
        n = getattr(args, name, None)
        if n is not None and (n < 8 or n & (n - 1)):
            ap.error(f"--{name} must be a power of two >= 8")


def run_command(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _check_usage(args, ap)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        stage = args.command
        print(f"error: [{stage}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
