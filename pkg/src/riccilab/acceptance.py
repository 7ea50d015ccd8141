"""Acceptance suite: every gate criterion as a runnable, file-emitting check.

``run_all`` executes the eleven computational criteria (the twelfth,
bit-identical reruns, is established by running this suite twice and comparing
the output trees, which the test suite and the CLI's --check-determinism flag
do).  Each criterion writes its data files and figures under its own
directory, so the emitted tree doubles as the reproduction report.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import plots
from .balls import (ball_volume_profile, closed_form_profile, closed_form_volume,
                    geodesic_jacobi_ray, profile_for_state)
from .entropy import (entropy_estimate, evolution_audit, hypothesis_sign,
                      monotonicity_audit, radial_identity_check)
from .flow import FlowCaps, closed_form_flow, integrate_flow, measure_evolution_check
from .geometries import MetricState, catalog_lookup, scale_metric
from .rescaling import classify_blowup, growth_shift_identity, parabolic_rescale
from .reporting import (PROFILE_HEADER, RADIAL_HEADER, classification_record,
                        fmt, profile_rows, write_csv, write_jsonl)

EUCLIDEAN = catalog_lookup("euclidean")
HYPERBOLIC = catalog_lookup("hyperbolic")
SPHERE = catalog_lookup("round-sphere")
NIL = catalog_lookup("nil")
SU2 = catalog_lookup("su2")
SOL = catalog_lookup("sol")

UNIT = MetricState((1.0, 1.0, 1.0), 0.0)
NIL_WINDOW = (100.0, 140.0)
NIL_TIMES = (0.0, 10.0, 1000.0)
RAY_TOL = 1e-8


@dataclass
class CriterionResult:
    cid: str
    name: str
    passed: bool
    details: list[str]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.cid} {self.name}: " + "; ".join(self.details)


class _Shared:
    """Inputs reused by several criteria, computed once up front."""

    def __init__(self):
        self.nil_traj = integrate_flow(NIL, UNIT, t_end=1e4, tol=1e-10)


def _check(details, label, value, bound, comparison="<="):
    ok = value <= bound if comparison == "<=" else value < bound
    details.append(f"{label} {fmt(value)} {comparison} {fmt(bound)}"
                   + ("" if ok else " VIOLATED"))
    return ok


def c01_flat_exactness(shared, out: Path) -> CriterionResult:
    rg = np.linspace(0.1, 5.0, 25)
    profile = ball_volume_profile(EUCLIDEAN, UNIT, rg, "product230", rtol=1e-10)
    ref = 4.0 * np.pi / 3.0 * rg ** 3
    err = float(np.max(np.abs(profile.vol_ball / ref - 1.0)))
    write_csv(out / "profile.csv", PROFILE_HEADER, profile_rows(profile))
    plots.plot_profile(profile, out / "profile.png")
    details = []
    ok = _check(details, "euclidean engine vs (4/3) pi r^3 max rel err", err, 1e-8)
    return CriterionResult("c01", "flat_exactness", ok, details)


def c02_space_form_oracle(shared, out: Path) -> CriterionResult:
    rg = np.linspace(0.25, 3.0, 12)
    profile = ball_volume_profile(HYPERBOLIC, UNIT, rg, "product230", rtol=1e-10)
    ref = np.array([closed_form_volume(-1.0, 1.0, r)[0] for r in rg])
    err = float(np.max(np.abs(profile.vol_ball / ref - 1.0)))
    write_csv(out / "hyperbolic_profile.csv", PROFILE_HEADER, profile_rows(profile))
    plots.plot_profile(profile, out / "hyperbolic_profile.png")
    ray = geodesic_jacobi_ray(SPHERE, UNIT, (0.0, 0.0, 1.0), r_max=3.5,
                              rtol=1e-11, atol=1e-14)
    conj_err = abs(ray.conjugate_radius - math.pi)
    write_csv(out / "sphere_ray.csv", ["rho", "j"], zip(ray.rho, ray.j))
    details = []
    ok = _check(details, "hyperbolic engine vs pi(sinh 2r - 2r) max rel err", err, 1e-6)
    ok &= _check(details, "round-sphere conjugate radius error vs pi", conj_err, 1e-6)
    return CriterionResult("c02", "space_form_oracle", ok, details)


def c03_entropy_recovery(shared, out: Path) -> CriterionResult:
    details = []
    prof = closed_form_profile(HYPERBOLIC, UNIT, np.linspace(6.0, 10.0, 12))
    est_h = entropy_estimate(prof, (6.0, 10.0))
    ok = _check(details, "hyperbolic |h - 2|", abs(est_h.h - 2.0), 0.04)

    prof = profile_for_state(EUCLIDEAN, UNIT, np.linspace(500.0, 1000.0, 12))
    est_e = entropy_estimate(prof, (500.0, 1000.0))
    ok &= _check(details, "euclidean |h|", abs(est_e.h), 0.01)

    audit = monotonicity_audit(shared.nil_traj, NIL_WINDOW, NIL_TIMES,
                               quadrature="product230", rtol=RAY_TOL)
    rows = [("hyperbolic", 0.0, est_h.h, est_h.stderr, 6.0, 10.0, ""),
            ("euclidean", 0.0, est_e.h, est_e.stderr, 500.0, 1000.0, "")]
    for t, e, p in zip(audit.times, audit.estimates, audit.proxies):
        ok &= _check(details, f"nil h at t={t:g}", e.h, 0.05)
        rows.append(("nil", t, e.h, e.stderr, e.window[0], e.window[1], fmt(p)))
    write_csv(out / "entropy.csv",
              ["scenario", "t", "h", "stderr", "window_lo", "window_hi", "proxy"], rows)
    return CriterionResult("c03", "entropy_recovery", ok, details)


def c04_entropy_scaling(shared, out: Path) -> CriterionResult:
    details = []
    ok = True
    base = closed_form_profile(HYPERBOLIC, UNIT, np.linspace(6.0, 10.0, 12))
    h0 = entropy_estimate(base, (6.0, 10.0))
    rows = [(1.0, h0.h, h0.stderr)]
    for c in (0.25, 4.0):
        sq = math.sqrt(c)
        scaled = scale_metric(UNIT, c)
        prof = closed_form_profile(HYPERBOLIC, scaled,
                                   np.linspace(6.0 * sq, 10.0 * sq, 12))
        hc = entropy_estimate(prof, (6.0 * sq, 10.0 * sq))
        rows.append((c, hc.h, hc.stderr))
        tol = 3.0 * (sq * hc.stderr + h0.stderr)
        ok &= _check(details, f"|h(c g) sqrt(c) - h| at c={c:g}",
                     abs(hc.h * sq - h0.h), tol)
    write_csv(out / "scaling.csv", ["c", "h", "stderr"], rows)
    return CriterionResult("c04", "entropy_scaling", ok, details)


def c05_measure_audit(shared, out: Path) -> CriterionResult:
    details = []
    ok = True
    runs = [("su2", SU2, UNIT, 0.5, 501),
            ("nil", NIL, UNIT, 1.0, 1001),
            ("sol", SOL, UNIT, 1.0, 2001)]
    rows = []
    for name, model, initial, t_end, n in runs:
        traj = integrate_flow(model, initial, t_end, tol=1e-10,
                              t_eval=np.linspace(0.0, t_end, n))
        ts, res = measure_evolution_check(traj)
        ok &= _check(details, f"{name} max measure residual", float(res.max()), 1e-5)
        rows.extend((name, t, v) for t, v in zip(ts, res))
    write_csv(out / "measure_residuals.csv", ["scenario", "t", "residual"], rows)
    return CriterionResult("c05", "measure_audit", ok, details)


def c06_rescaling_shift(shared, out: Path) -> CriterionResult:
    details = []
    prof = closed_form_profile(HYPERBOLIC, UNIT, np.array([0.25, 0.5, 0.75, 1.0, 1.25]))
    gs = growth_shift_identity(prof, 4.0, 1.0)
    details.append(f"offset (3/2) log 4 = {fmt(gs.offset)}")
    ok = _check(details, "scale-consistent shift residual", gs.residual_scaled, 1e-10)
    details.append(f"verbatim-form residual (reported) {fmt(gs.residual_verbatim)}")

    cf = closed_form_flow(SPHERE, 1.0, 0.2499)
    resc, transform = parabolic_rescale(cf, 0.2)
    rm0 = resc.curvature_at(0.0).riemann_norm
    ok &= _check(details, "|rescaled |Rm(0)| - 1|", abs(rm0 - 1.0), 1e-8)
    write_csv(out / "shift.csv",
              ["K", "r", "offset", "residual_scaled", "residual_verbatim",
               "rescale_base_time", "rescale_factor", "rescaled_rm0"],
              [(4.0, 1.0, gs.offset, gs.residual_scaled, gs.residual_verbatim,
                transform.base_time, transform.factor, rm0)])
    return CriterionResult("c06", "rescaling_shift", ok, details)


def c07_type_classification(shared, out: Path) -> CriterionResult:
    details = []
    sphere_traj = integrate_flow(SPHERE, UNIT, 1.0, tol=1e-10,
                                 caps=FlowCaps(curvature_cap=1e8))
    fit_sp = classify_blowup(sphere_traj)
    ok = fit_sp.type_verdict == "I"
    details.append(f"round-sphere verdict {fit_sp.type_verdict} (want I)"
                   + ("" if ok else " VIOLATED"))
    ok &= _check(details, "round-sphere |exponent + 1|",
                 abs(fit_sp.exponent + 1.0), 0.01)
    ok &= _check(details, "round-sphere (T-t)|Rm| spread",
                 fit_sp.constant_spread, 0.01)

    fit_nil = classify_blowup(shared.nil_traj, horizon=1e4)
    nil_ok = fit_nil.type_verdict == "III"
    details.append(f"nil verdict {fit_nil.type_verdict} (want III)"
                   + ("" if nil_ok else " VIOLATED"))
    ok &= nil_ok
    ok &= _check(details, "nil |exponent + 1|", abs(fit_nil.exponent + 1.0), 0.05)
    write_jsonl(out / "classify.jsonl",
                [classification_record("round-sphere", fit_sp),
                 classification_record("nil", fit_nil)])
    plots.plot_blowup(sphere_traj, fit_sp, out / "sphere_blowup.png")
    plots.plot_blowup(shared.nil_traj, fit_nil, out / "nil_blowup.png")
    return CriterionResult("c07", "type_classification", ok, details)


def c08_evolution_decomposition(shared, out: Path) -> CriterionResult:
    details = []
    ok = True
    traj = closed_form_flow(HYPERBOLIC, 1.0, 1.0, t_start=-0.01)
    audits = []
    rows = []
    for r in (1.0, 2.0, 3.0):
        audit = evolution_audit(traj, r, 0.0, dt=1e-4)
        V0 = math.pi * (math.sinh(2 * r) - 2 * r)
        A0 = 4.0 * math.pi * math.sinh(r) ** 2
        expect_measured = (6.0 - 2.0 * r * A0 / V0) / r
        expect_shell = -2.0 * A0 / V0
        ok &= _check(details, f"r={r:g} |measured - analytic|",
                     abs(audit.domega_dt_measured - expect_measured), 1e-4)
        ok &= _check(details, f"r={r:g} |shell - analytic|",
                     abs(audit.shell_term - expect_shell), 1e-4)
        audits.append(audit)
        rows.append((r, audit.domega_dt_measured, expect_measured, audit.rhs_eq2,
                     audit.shell_term, expect_shell))
    write_csv(out / "decomposition.csv",
              ["r", "measured", "measured_analytic", "rhs_eq2", "shell",
               "shell_analytic"], rows)
    plots.plot_evolution_audit(audits, out / "decomposition.png",
                               title="hyperbolic evolution decomposition at t=0")
    return CriterionResult("c08", "evolution_decomposition", ok, details)


def c09_radial_identity(shared, out: Path) -> CriterionResult:
    details = []
    ok = True
    rows = []
    cases = [("euclidean", EUCLIDEAN, 1.0), ("hyperbolic", HYPERBOLIC, 2.0)]
    for name, model, r in cases:
        dr = 1e-3
        grid = r + dr * np.arange(-2, 3)
        prof = profile_for_state(model, UNIT, grid)
        check = radial_identity_check(prof, r, dr)
        ok &= _check(details, f"{name} corrected residual (dr=1e-3)",
                     check.corrected_residual, 1e-5)
        details.append(f"{name} printed-form residual (reported) "
                       f"{fmt(check.printed_residual)}")
        rows.append((check.r, check.dr, check.lhs_d2omega_dr2, check.corrected_rhs,
                     check.printed_rhs, check.corrected_residual,
                     check.printed_residual))
    write_csv(out / "radial.csv", RADIAL_HEADER, rows)
    return CriterionResult("c09", "radial_identity", ok, details)


def c10_hypothesis_sign(shared, out: Path) -> CriterionResult:
    details = []
    rows = []
    rg = np.linspace(0.5, 1.5, 11)
    p = profile_for_state(EUCLIDEAN, UNIT, rg)
    val_eu = hypothesis_sign(p, UNIT, 1.0)
    p = closed_form_profile(HYPERBOLIC, UNIT, rg)
    val_hy = hypothesis_sign(p, UNIT, 1.0)
    rg_sp = np.linspace(math.pi / 2 - 0.2, math.pi / 2 + 0.2, 9)
    p = closed_form_profile(SPHERE, UNIT, rg_sp)
    val_sp = hypothesis_sign(p, UNIT, math.pi / 2)

    expect_eu = -8.0 * math.pi
    expect_hy = -6.0 * math.pi * (math.sinh(2.0) - 2.0) - 4.0 * math.pi * math.sinh(2.0)
    expect_sp = 6.0 * math.pi ** 2
    ok = val_eu < 0 and val_hy < 0 and val_sp > 0
    details.append(f"signs euclidean {fmt(val_eu)} < 0, hyperbolic {fmt(val_hy)} < 0, "
                   f"round-sphere {fmt(val_sp)} > 0" + ("" if ok else " VIOLATED"))
    for name, val, expect in (("euclidean", val_eu, expect_eu),
                              ("hyperbolic", val_hy, expect_hy),
                              ("round-sphere", val_sp, expect_sp)):
        ok &= _check(details, f"{name} vs closed form rel err",
                     abs(val - expect) / abs(expect), 5e-3)
        rows.append((name, val, expect))
    write_csv(out / "signs.csv", ["scenario", "value", "closed_form"], rows)
    return CriterionResult("c10", "hypothesis_sign_oracle", ok, details)


def c11_monotonicity_findings(shared, out: Path) -> CriterionResult:
    details = []
    traj = closed_form_flow(HYPERBOLIC, 1.0, 3.0)
    audit = monotonicity_audit(traj, (6.0, 10.0), (0.0, 0.5, 2.0))
    ok = True
    for t, est in zip(audit.times, audit.estimates):
        expect = 2.0 / math.sqrt(1.0 + 4.0 * t)
        ok &= _check(details, f"hyperbolic t={t:g} |h/expected - 1|",
                     abs(est.h / expect - 1.0), 0.02)
    verdict_ok = audit.verdict == "decreasing"
    details.append(f"hyperbolic verdict {audit.verdict} (want decreasing)"
                   + ("" if verdict_ok else " VIOLATED"))
    ok &= verdict_ok

    from .entropy import collapse_proxy
    proxy = collapse_proxy(shared.nil_traj.state_at(1e4))
    ok &= _check(details, "nil collapse proxy at horizon", proxy, 0.1, "<")

    rows = [("hyperbolic", t, e.h, e.stderr, p) for t, e, p in
            zip(audit.times, audit.estimates, audit.proxies)]
    rows.append(("nil", 1e4, "", "", proxy))
    write_csv(out / "monotonicity.csv",
              ["scenario", "t", "h", "stderr", "proxy"], rows)
    plots.plot_entropy_series(audit, out / "hyperbolic_entropy.png",
                              title="hyperbolic entropy series")
    return CriterionResult("c11", "monotonicity_findings", ok, details)


CRITERIA = [
    c01_flat_exactness,
    c02_space_form_oracle,
    c03_entropy_recovery,
    c04_entropy_scaling,
    c05_measure_audit,
    c06_rescaling_shift,
    c07_type_classification,
    c08_evolution_decomposition,
    c09_radial_identity,
    c10_hypothesis_sign,
    c11_monotonicity_findings,
]


def _warm_up_matplotlib():
    from matplotlib.figure import Figure
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    fig = Figure(figsize=(1, 1))
    FigureCanvasAgg(fig)
    ax = fig.subplots()
    ax.plot([0, 1], [0, 1])
    fig.canvas.draw()


def run_all(out_root, threads: int = 1, echo=print) -> list[CriterionResult]:
    """Run the computational acceptance criteria, write the report tree.

    The data tree under ``out_root/outputs`` is byte-identical across reruns
    and thread counts; per-run metadata (wall time, thread count) lives in the
    manifest one level up.
    """
    out_root = Path(out_root)
    outputs = out_root / "outputs"
    outputs.mkdir(parents=True, exist_ok=True)
    _warm_up_matplotlib()
    shared = _Shared()

    def run_one(fn):
        cid = fn.__name__.split("_")[0]
        name = fn.__name__.split("_", 1)[1]
        crit_dir = outputs / f"{cid}_{name}"
        crit_dir.mkdir(parents=True, exist_ok=True)
        return fn(shared, crit_dir)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run_one, fn) for fn in CRITERIA]
            results = [f.result() for f in futures]
    else:
        results = [run_one(fn) for fn in CRITERIA]

    rows = [(r.cid, r.name, "PASS" if r.passed else "FAIL", "; ".join(r.details))
            for r in results]
    write_csv(outputs / "acceptance_report.csv",
              ["criterion", "name", "status", "details"], rows)
    for r in results:
        echo(r.line())
    return results
