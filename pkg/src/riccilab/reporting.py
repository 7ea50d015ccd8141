"""Deterministic delimited output: CSV / JSON-lines writers and manifests.

All floats are rendered with 17 significant digits so files round-trip the
underlying doubles exactly and reruns are byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int,)):
        return str(x)
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    return f"{xf:.17g}"


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return path


def write_jsonl(path, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, allow_nan=True) + "\n")
    return path


def write_manifest(path, entries):
    """Plain-text run record: one 'key: value' line per entry, insertion order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for key, value in entries:
            fh.write(f"{key}: {value}\n")
    return path


TRAJECTORY_HEADER = ["t", "A", "B", "C", "R", "rm_norm", "K23", "K31", "K12"]


def trajectory_rows(traj):
    for t, state, rep in traj.samples:
        A, B, C = state.coeffs
        K23, K31, K12 = rep.sectional
        yield (t, A, B, C, rep.scalar, rep.riemann_norm, K23, K31, K12)


PROFILE_HEADER = ["r", "vol_ball", "area_sphere", "conjugate_flag"]


def profile_rows(profile):
    flags = profile.conjugate_flags
    for i, r in enumerate(profile.r_grid):
        yield (r, profile.vol_ball[i], profile.area_sphere[i], bool(flags[i]))


ENTROPY_HEADER = ["t", "h", "stderr", "window_lo", "window_hi", "collapse_proxy"]


def entropy_rows(audit):
    for t, est, proxy in zip(audit.times, audit.estimates, audit.proxies):
        yield (t, est.h, est.stderr, est.window[0], est.window[1], proxy)


AUDIT_HEADER = ["scenario", "t", "r", "omega", "domega_dt_measured", "rhs_eq2",
                "shell_term", "hypothesis_sign", "bound_eq5", "h_estimate",
                "h_stderr", "collapse_proxy", "verdict"]

RADIAL_HEADER = ["r", "dr", "lhs_d2omega_dr2", "corrected_rhs", "printed_rhs",
                 "corrected_residual", "printed_residual"]

SOLITON_HEADER = ["t", "r", "measured", "remark_prediction"]


def classification_record(scenario, fit):
    return {
        "scenario": scenario,
        "verdict": fit.type_verdict,
        "T": fit.singular_time,
        "exponent": None if math.isnan(fit.exponent) else fit.exponent,
        "constant": fit.fitted_constant,
        "residual": fit.fit_residual,
    }
