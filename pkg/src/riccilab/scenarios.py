"""Scenario execution behind the CLI subcommands.

Each command takes a ScenarioConfig, writes its delimited outputs and figure
siblings under a directory, and returns manifest extras describing the run.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import plots
from .balls import ball_volume_profile, profile_for_state
from .config import ScenarioConfig
from .entropy import (default_fd_step, evolution_audit, monotonicity_audit,
                      radial_identity_check, soliton_check, supersolution_compare)
from .errors import ConfigError
from .flow import FlowCaps, SolitonSpec, integrate_flow
from .geometries import (SPACE_FORM, GeometryModel, MetricState, catalog_lookup,
                         catalog_names)
from .rescaling import classify_blowup
from .reporting import (AUDIT_HEADER, ENTROPY_HEADER, PROFILE_HEADER,
                        RADIAL_HEADER, SOLITON_HEADER, TRAJECTORY_HEADER,
                        classification_record, entropy_rows, fmt, profile_rows,
                        trajectory_rows, write_csv, write_jsonl)


def catalog_listing() -> list[str]:
    lines = []
    for name in catalog_names():
        model = catalog_lookup(name)
        if model.backend == SPACE_FORM:
            detail = f"kappa={model.kappa:+g}"
        else:
            detail = "lambda=({:g},{:g},{:g})".format(*model.lam)
        lines.append(f"{name:14s} {model.backend:20s} {detail}")
    return lines


def build_trajectory(cfg: ScenarioConfig):
    model = catalog_lookup(cfg.geometry)
    initial = MetricState(cfg.initial_coeffs, 0.0)
    caps = FlowCaps(cfg.curvature_cap, cfg.coefficient_floor)
    t_eval = None
    if cfg.sample_count > 1:
        t_eval = np.linspace(0.0, cfg.t_end, cfg.sample_count)
    return model, integrate_flow(model, initial, cfg.t_end, cfg.tol, caps, t_eval)


def cmd_flow(cfg: ScenarioConfig, out: Path) -> dict:
    model, traj = build_trajectory(cfg)
    write_csv(out / "trajectory.csv", TRAJECTORY_HEADER, trajectory_rows(traj))
    plots.plot_trajectory(traj, out / "trajectory.png")
    extras = {
        "termination_reason": traj.termination_reason,
        "samples": len(traj.ts),
        "t_final": fmt(traj.ts[-1]),
    }
    if traj.singular_time is not None:
        extras["singular_time_estimate"] = fmt(traj.singular_time)
    return extras


def cmd_volume(cfg: ScenarioConfig, out: Path) -> dict:
    model = catalog_lookup(cfg.geometry)
    state = MetricState(cfg.initial_coeffs, 0.0)
    profile = ball_volume_profile(model, state, cfg.r_grid(), cfg.quadrature,
                                  rtol=cfg.ray_tol)
    write_csv(out / "profile.csv", PROFILE_HEADER, profile_rows(profile))
    plots.plot_profile(profile, out / "profile.png")
    return {
        "quadrature": f"{profile.quadrature[0]} ({profile.quadrature[1]} nodes)",
        "min_conjugate_radius": fmt(profile.min_conjugate_radius),
    }


def cmd_entropy(cfg: ScenarioConfig, out: Path) -> dict:
    model, traj = build_trajectory(cfg)
    audit = monotonicity_audit(traj, (cfg.window_lo, cfg.window_hi), cfg.t_sequence,
                               lattice_lengths=cfg.lattice_lengths,
                               quadrature=cfg.quadrature, rtol=cfg.ray_tol,
                               window_scaling=cfg.window_scaling)
    write_csv(out / "entropy.csv", ENTROPY_HEADER, entropy_rows(audit))
    plots.plot_entropy_series(audit, out / "entropy.png")
    return {"verdict": audit.verdict}


def default_soliton_spec(model: GeometryModel, initial: MetricState):
    """Self-similar marker for the Einstein members of the catalog, or None."""
    c0 = initial.coeffs[0]
    if model.backend == SPACE_FORM:
        if model.kappa < 0:
            return SolitonSpec(epsilon=1, time_origin=-c0 / 4.0)
        return SolitonSpec(epsilon=-1, time_origin=c0 / 4.0)
    if all(l == 0 for l in model.lam):
        return SolitonSpec(epsilon=0, time_origin=0.0)
    return None


def cmd_audit(cfg: ScenarioConfig, out: Path) -> dict:
    model, traj = build_trajectory(cfg)
    t0, t1 = traj.time_span()
    radii = np.asarray(cfg.audit_radii, dtype=float)
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise ConfigError("audit_radii must be positive and increasing")

    usable, skipped = [], []
    for t in cfg.t_sequence:
        dt = default_fd_step(t)
        (usable if (t - dt > t0 and t + dt < t1) else skipped).append(t)
    if not usable:
        raise ConfigError(
            f"no audit time in ({t0}, {t1}) with finite-difference margin; "
            f"got t_sequence={cfg.t_sequence}")

    entropy_series = monotonicity_audit(
        traj, (cfg.window_lo, cfg.window_hi), usable,
        lattice_lengths=cfg.lattice_lengths, quadrature=cfg.quadrature,
        rtol=cfg.ray_tol, window_scaling=cfg.window_scaling)
    cells = supersolution_compare(traj, radii, usable,
                                  quadrature=cfg.quadrature, rtol=cfg.ray_tol)
    cell_index = {(c.t, c.r): c for c in cells}

    rows = []
    audits_for_plot = []
    for k, t in enumerate(usable):
        est = entropy_series.estimates[k]
        proxy = entropy_series.proxies[k]
        for r in radii:
            audit = evolution_audit(traj, float(r), float(t),
                                    quadrature=cfg.quadrature, rtol=cfg.ray_tol)
            cell = cell_index[(float(t), float(r))]
            rows.append((cfg.geometry, t, r, cell.omega, audit.domega_dt_measured,
                         audit.rhs_eq2, audit.shell_term, cell.hypothesis_sign,
                         cell.bound, est.h, est.stderr, proxy,
                         entropy_series.verdict))
            if k == 0:
                audits_for_plot.append(audit)
    write_csv(out / "audit.csv", AUDIT_HEADER, rows)
    plots.plot_evolution_audit(audits_for_plot, out / "audit.png",
                               title=f"evolution decomposition: {cfg.geometry} at t={usable[0]:g}")
    plots.plot_supersolution(cells, out / "supersolution.png")

    radial_rows = []
    state0 = traj.state_at(usable[0])
    for r in radii:
        dr = 1e-3 * max(1.0, r)
        local = r + dr * np.arange(-2, 3)
        prof = profile_for_state(model, state0, local, cfg.quadrature, rtol=cfg.ray_tol)
        check = radial_identity_check(prof, float(r), dr)
        radial_rows.append((check.r, check.dr, check.lhs_d2omega_dr2,
                            check.corrected_rhs, check.printed_rhs,
                            check.corrected_residual, check.printed_residual))
    write_csv(out / "radial.csv", RADIAL_HEADER, radial_rows)

    extras = {"verdict": entropy_series.verdict, "audit_times": len(usable)}
    if skipped:
        extras["skipped_times"] = ",".join(f"{t:g}" for t in skipped)

    spec = default_soliton_spec(model, MetricState(cfg.initial_coeffs, 0.0))
    soliton_rows = []
    if spec is not None:
        for t in usable:
            if spec.epsilon != 0 and abs(t - spec.time_origin) < 1e-9:
                continue
            for r in radii:
                sc = soliton_check(traj, spec, float(r), float(t),
                                   quadrature=cfg.quadrature, rtol=cfg.ray_tol)
                soliton_rows.append((t, r, sc.measured, sc.remark_prediction))
        write_csv(out / "soliton.csv", SOLITON_HEADER, soliton_rows)
        extras["soliton_epsilon"] = spec.epsilon
    return extras


def cmd_classify(cfg: ScenarioConfig, out: Path) -> dict:
    model, traj = build_trajectory(cfg)
    fit = classify_blowup(traj, horizon=cfg.horizon)
    write_jsonl(out / "classify.jsonl", [classification_record(cfg.geometry, fit)])
    plots.plot_blowup(traj, fit, out / "blowup.png",
                      title=f"blow-up fit: {cfg.geometry} (type {fit.type_verdict})")
    extras = {"verdict": fit.type_verdict, "exponent": fmt(fit.exponent),
              "constant": fmt(fit.fitted_constant)}
    if fit.singular_time is not None:
        extras["singular_time"] = fmt(fit.singular_time)
    return extras
