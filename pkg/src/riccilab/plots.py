"""Figure rendering for the report path.

Every report CSV gets a PNG sibling.  Figures are drawn with the
object-oriented matplotlib API (no pyplot state) so scenario threads do not
interfere, and saved with fixed metadata so reruns are byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_SAVE_KW = dict(dpi=110, metadata={"Software": "riccilab"})
_COLORS = ("#0F3460", "#E94560", "#2E8B57", "#B8860B")


def _new_fig(nrows=1, ncols=1, width=6.4, height=4.2):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols)
    return fig, axes


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    return path


def plot_trajectory(traj, path, title=""):
    fig, (ax1, ax2) = _new_fig(1, 2, width=9.0)
    ts = traj.ts
    coeffs = np.exp(traj.log_coeffs)
    span = ts[-1] - ts[0]
    positive = ts > 0
    for k, label in enumerate("ABC"):
        ax1.plot(ts, coeffs[:, k], color=_COLORS[k], label=label, lw=1.4)
    ax1.set_xlabel("t")
    ax1.set_ylabel("metric coefficients")
    if span > 100 and positive.sum() > 2:
        ax1.set_xscale("log")
        ax1.set_yscale("log")
    ax1.legend(frameon=False)
    rm = traj.rm_norms
    ax2.plot(ts, rm, color=_COLORS[3], lw=1.4)
    ax2.set_xlabel("t")
    ax2.set_ylabel("|Rm|")
    if rm.max() > 0 and rm.min() > 0 and rm.max() / max(rm.min(), 1e-300) > 50:
        ax2.set_yscale("log")
        if span > 100 and positive.sum() > 2:
            ax2.set_xscale("log")
    fig.suptitle(title or f"flow: {traj.model.name}")
    return _save(fig, path)


def plot_profile(profile, path, title=""):
    fig, (ax1, ax2) = _new_fig(1, 2, width=9.0)
    r = profile.r_grid
    ax1.plot(r, profile.vol_ball, color=_COLORS[0], lw=1.4)
    ax1.set_xlabel("r")
    ax1.set_ylabel("Vol B(r)")
    if profile.vol_ball.max() / profile.vol_ball.min() > 1e3:
        ax1.set_yscale("log")
    ax2.plot(r, profile.area_sphere, color=_COLORS[1], lw=1.4)
    flags = profile.conjugate_flags
    if flags.any():
        ax2.axvspan(r[flags].min(), r[-1], alpha=0.15, color=_COLORS[1],
                    label="past conjugate radius")
        ax2.legend(frameon=False)
    ax2.set_xlabel("r")
    ax2.set_ylabel("Area S(r)")
    fig.suptitle(title or f"ball volumes: {profile.model.name}")
    return _save(fig, path)


def plot_entropy_series(audit, path, title=""):
    fig, ax = _new_fig()
    ts = np.asarray(audit.times)
    hs = np.array([e.h for e in audit.estimates])
    se = np.array([e.stderr for e in audit.estimates])
    ax.errorbar(ts, hs, yerr=3 * se, color=_COLORS[0], marker="o", ms=4,
                lw=1.2, capsize=3, label="entropy estimate")
    ax2 = ax.twinx()
    ax2.plot(ts, audit.proxies, color=_COLORS[1], marker="s", ms=3, lw=1.0,
             label="collapse proxy")
    ax2.set_ylabel("collapse proxy", color=_COLORS[1])
    ax.set_xlabel("t")
    ax.set_ylabel("h estimate")
    ax.set_title(title or f"entropy along the flow (verdict: {audit.verdict})")
    return _save(fig, path)


def plot_evolution_audit(audits, path, title=""):
    fig, ax = _new_fig()
    rs = [a.r for a in audits]
    ax.plot(rs, [a.domega_dt_measured for a in audits], "o-", color=_COLORS[0],
            lw=1.2, ms=4, label="measured d omega/dt")
    ax.plot(rs, [a.rhs_eq2 for a in audits], "s--", color=_COLORS[1],
            lw=1.2, ms=4, label="interior term -R/r")
    ax.plot(rs, [a.shell_term for a in audits], "^:", color=_COLORS[2],
            lw=1.2, ms=4, label="shell term")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("r")
    ax.set_ylabel("rate")
    ax.legend(frameon=False)
    ax.set_title(title or "growth-function evolution decomposition")
    return _save(fig, path)


def plot_blowup(traj, fit, path, title=""):
    fig, ax = _new_fig()
    rm = traj.rm_norms
    if fit.type_verdict == "I" and fit.singular_time is not None:
        x = fit.singular_time - traj.ts
        xlabel = "T - t"
    else:
        x = traj.ts
        xlabel = "t"
    mask = (x > 0) & (rm > 0)
    ax.loglog(x[mask], rm[mask], ".", color=_COLORS[0], ms=3, label="|Rm|")
    if np.isfinite(fit.exponent):
        xref = np.array([x[mask].min(), x[mask].max()])
        yref = fit.fitted_constant / xref
        ax.loglog(xref, yref, "--", color=_COLORS[1], lw=1.2,
                  label=f"slope {fit.exponent:+.3f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("|Rm|")
    ax.legend(frameon=False)
    ax.set_title(title or f"blow-up fit: type {fit.type_verdict}")
    return _save(fig, path)


def plot_supersolution(cells, path, title=""):
    fig, ax = _new_fig()
    radii = sorted({c.r for c in cells})
    for k, r in enumerate(radii):
        sub = sorted((c for c in cells if c.r == r), key=lambda c: c.t)
        ts = [c.t for c in sub]
        color = _COLORS[k % len(_COLORS)]
        ax.plot(ts, [c.omega for c in sub], "o-", color=color, lw=1.2, ms=3,
                label=f"omega, r={r:g}")
        ax.plot(ts, [c.bound for c in sub], "--", color=color, lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("omega and decay bound (dashed)")
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(title or "growth function vs supersolution bound")
    return _save(fig, path)
