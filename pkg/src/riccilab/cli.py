"""Command-line scenario runner.

Subcommands: catalog, flow, volume, entropy, audit, classify, reproduce-all.
Flags override config-file entries, which override defaults.  Every run writes
a manifest (config hash, tool version, wall time) next to its output tree.
Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import filecmp
import os
import sys
import time
from pathlib import Path

from . import __version__, acceptance, scenarios
from .config import (ScenarioConfig, build_config, config_hash, config_lines,
                     load_config_file)
from .errors import ConfigError, RicciLabError
from .reporting import write_manifest


def _add_common_flags(p):
    p.add_argument("--config", help="scenario config file (flat key = value with [sections])")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int,
                   help="worker threads (default: REL_THREADS or 1)")
    p.add_argument("--geometry", help="catalog key")
    p.add_argument("--initial-coeffs", help="three comma-separated positive reals")
    p.add_argument("--t-end", type=float, help="flow end time")
    p.add_argument("--tol", type=float, help="flow integrator tolerance")
    p.add_argument("--curvature-cap", type=float)
    p.add_argument("--coefficient-floor", type=float)
    p.add_argument("--sample-count", type=int,
                   help="force this many uniform flow samples (0: adaptive steps)")
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--r-count", type=int)
    p.add_argument("--r-spacing", choices=["linear", "log"])
    p.add_argument("--quadrature", help="direction quadrature name")
    p.add_argument("--ray-tol", type=float, help="Jacobi ray tolerance")
    p.add_argument("--window-lo", type=float, help="entropy window lower radius")
    p.add_argument("--window-hi", type=float, help="entropy window upper radius")
    p.add_argument("--window-scaling", choices=["metric", "fixed"])
    p.add_argument("--t-sequence", help="comma-separated sample times")
    p.add_argument("--horizon", type=float, help="long-time horizon for classification")
    p.add_argument("--audit-radii", help="comma-separated audit radii")
    p.add_argument("--lattice-lengths", help="three comma-separated lattice lengths")
    p.add_argument("--seed", type=int, help="reserved for stochastic cross-checks")


def _parse_triple_flag(s):
    parts = [float(p) for p in s.replace(",", " ").split()]
    if len(parts) != 3:
        raise ConfigError(f"expected three numbers, got {s!r}")
    return tuple(parts)


def _parse_floats_flag(s):
    return tuple(float(p) for p in s.replace(",", " ").split())


def _flag_overrides(args) -> dict:
    conv = {
        "geometry": str, "t_end": float, "tol": float, "curvature_cap": float,
        "coefficient_floor": float, "sample_count": int, "r_min": float,
        "r_max": float, "r_count": int, "r_spacing": str, "quadrature": str,
        "ray_tol": float, "window_lo": float, "window_hi": float,
        "window_scaling": str, "horizon": float, "seed": int,
    }
    overrides = {}
    for name in conv:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "initial_coeffs", None) is not None:
        overrides["initial_coeffs"] = _parse_triple_flag(args.initial_coeffs)
    if getattr(args, "lattice_lengths", None) is not None:
        overrides["lattice_lengths"] = _parse_triple_flag(args.lattice_lengths)
    if getattr(args, "t_sequence", None) is not None:
        overrides["t_sequence"] = _parse_floats_flag(args.t_sequence)
    if getattr(args, "audit_radii", None) is not None:
        overrides["audit_radii"] = _parse_floats_flag(args.audit_radii)
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    elif os.environ.get("REL_THREADS"):
        try:
            overrides["threads"] = int(os.environ["REL_THREADS"])
        except ValueError:
            raise ConfigError(f"REL_THREADS={os.environ['REL_THREADS']!r} is not an integer")
    return overrides


def _build_cfg(args) -> ScenarioConfig:
    file_overrides = load_config_file(args.config) if args.config else None
    return build_config(file_overrides, _flag_overrides(args))


_COMMANDS = {
    "flow": scenarios.cmd_flow,
    "volume": scenarios.cmd_volume,
    "entropy": scenarios.cmd_entropy,
    "audit": scenarios.cmd_audit,
    "classify": scenarios.cmd_classify,
}


def _run_scenario(command, args) -> int:
    cfg = _build_cfg(args)
    out_root = Path(cfg.out_dir)
    outputs = out_root / "outputs"
    started = time.perf_counter()
    extras = _COMMANDS[command](cfg, outputs)
    wall = time.perf_counter() - started
    entries = [("command", command), ("tool_version", __version__),
               ("config_hash", config_hash(cfg)), ("threads", cfg.threads),
               ("wall_time_s", f"{wall:.3f}")]
    entries.extend(sorted(extras.items()))
    entries.append(("config", ""))
    entries.extend(("  " + line.split(" = ")[0], line.split(" = ", 1)[1])
                   for line in config_lines(cfg))
    write_manifest(out_root / "manifest.txt", entries)
    print(f"{command}: outputs in {outputs}")
    return 0


def _tree_files(root: Path):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


def trees_identical(a: Path, b: Path) -> bool:
    fa, fb = _tree_files(a), _tree_files(b)
    if fa != fb:
        return False
    return all(filecmp.cmp(a / f, b / f, shallow=False) for f in fa)


def _run_reproduce_all(args) -> int:
    overrides = _flag_overrides(args)
    out_root = Path(overrides.get("out_dir", "acceptance_out"))
    threads = overrides.get("threads", 1)
    started = time.perf_counter()
    results = acceptance.run_all(out_root, threads=threads)
    wall = time.perf_counter() - started
    entries = [("command", "reproduce-all"), ("tool_version", __version__),
               ("threads", threads), ("wall_time_s", f"{wall:.3f}"),
               ("criteria_passed", sum(r.passed for r in results)),
               ("criteria_total", len(results))]
    write_manifest(out_root / "manifest.txt", entries)

    ok = all(r.passed for r in results)
    if args.check_determinism:
        for label, n in (("rerun_threads1", 1), ("rerun_threads8", 8)):
            rerun_root = out_root.parent / (out_root.name + "_" + label)
            acceptance.run_all(rerun_root, threads=n, echo=lambda s: None)
            same = trees_identical(out_root / "outputs", rerun_root / "outputs")
            print(f"determinism vs {label}: {'bit-identical' if same else 'MISMATCH'}")
            ok &= same
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="riccilab",
        description="Ricci flow and volume entropy laboratory for homogeneous 3-manifolds")
    parser.add_argument("--version", action="version", version=f"riccilab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list the model geometries")
    for name, help_text in [
            ("flow", "integrate a flow trajectory, write CSV + figure"),
            ("volume", "ball-volume profile of the initial metric"),
            ("entropy", "entropy series along the flow"),
            ("audit", "evolution/radial/supersolution/soliton audit tables"),
            ("classify", "blow-up type classification")]:
        p = sub.add_parser(name, help=help_text)
        _add_common_flags(p)
    p = sub.add_parser("reproduce-all", help="run the acceptance suite end to end")
    _add_common_flags(p)
    p.add_argument("--check-determinism", action="store_true",
                   help="rerun twice (1 and 8 threads) and compare output trees")

    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            for line in scenarios.catalog_listing():
                print(line)
            return 0
        if args.command == "reproduce-all":
            return _run_reproduce_all(args)
        return _run_scenario(args.command, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RicciLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
