"""Command-line runner: simulate scenarios, compute capability maps, analyze
logs and validate configurations.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
divergence during integration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .actuators import ACTUATOR_1, ACTUATOR_2_HF, ACTUATOR_2_HS
from .analysis import (
    capability_map,
    measured_assistance,
    measured_assistance_per_rep,
    sts_metrics,
    transfer_speed_table,
)
from .config import build_geometry, build_scenario, load_config, validate_config
from .engine import SimLog, run_scenario
from .errors import ConfigError, NumericalDivergence, StsBotError
from .kinematics import LinkMassModel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _out_dir(args) -> Path:
    root = args.out or os.environ.get("STSBOT_OUT_ROOT", "stsbot_out")
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out: Path, command: str, cfg: dict, seed: int, outputs: list[str]) -> None:
    manifest = {
        "tool": "stsbot",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": cfg,
        "outputs": outputs,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    report = validate_config(cfg)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.ok:
        for e in report.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    scenario = build_scenario(cfg)
    log = run_scenario(scenario)
    out = _out_dir(args)
    log.write_csv(out / "log.csv")
    _write_manifest(out, "simulate", cfg, cfg["seed"], ["log.csv"])
    print(f"wrote {out / 'log.csv'} ({len(log)} samples)")
    return EXIT_OK


def _cmd_map(args) -> int:
    cfg = load_config(args.config)
    report = validate_config(cfg)
    if not report.ok:
        for e in report.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    geom = build_geometry(cfg)
    masses = LinkMassModel.for_geometry(geom, cfg["masses.m_h"], cfg["masses.m_v"])
    configuration = cfg["map.configuration"]
    if configuration not in ("rehab", "transfer"):
        print("error: map.configuration must be rehab or transfer", file=sys.stderr)
        return EXIT_CONFIG
    requirement = cfg["map.requirement"]
    cmap = capability_map(
        geom, masses, ACTUATOR_1,
        ACTUATOR_2_HS if configuration == "rehab" else ACTUATOR_2_HF,
        configuration=configuration,
        y_range=(cfg["map.y_min"], cfg["map.y_max"]),
        z_range=(cfg["map.z_min"], cfg["map.z_max"]),
        step=cfg["map.step"],
        requirement=None if requirement < 0 else requirement,
    )
    out = _out_dir(args)
    lines = ["y_m,z_m,fz_max_N,mask"]
    for iz, z in enumerate(cmap.zs):
        for iy, y in enumerate(cmap.ys):
            v = cmap.value[iz, iy]
            lines.append(f"{y:.17g},{z:.17g},{v:.17g},{int(cmap.mask[iz, iy])}")
    (out / "map.csv").write_text("\n".join(lines) + "\n")
    meta = {
        "configuration": configuration,
        "requirement_N": cmap.requirement,
        "mask_legend": {"0": "ok", "1": "unreachable", "2": "joint_limits",
                        "3": "singular", "4": "gravity_infeasible"},
        "grid": {"y_min": cfg["map.y_min"], "y_max": cfg["map.y_max"],
                 "z_min": cfg["map.z_min"], "z_max": cfg["map.z_max"],
                 "step": cfg["map.step"]},
    }
    (out / "map.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "map", cfg, cfg["seed"], ["map.csv", "map.json"])
    print(f"wrote {out / 'map.csv'}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    log = SimLog.from_csv(args.log)
    out = _out_dir(args)
    summary: dict = {"meta": log.meta, "samples": len(log)}
    mode = log.meta.get("mode", "none")
    if mode == "transfer":
        payload = float(log.meta.get("payload", 0.0))
        table = transfer_speed_table({payload: log})
        up, down = table[payload]
        summary["transfer"] = {"payload_kg": payload,
                               "lifting_speed_m_s": up, "lowering_speed_m_s": down}
    else:
        height = float(log.meta.get("height", 0.0))
        weight = float(log.meta.get("weight", 0.0))
        if weight > 0.0:
            reps = sts_metrics(log)
            summary["repetitions"] = [vars(m) for m in reps]
            if height > 0.0:
                summary["repetitions_normalized"] = [
                    vars(m.normalized(height, weight)) for m in reps]
            summary["measured_assistance"] = measured_assistance(log, weight)
            summary["measured_assistance_per_rep"] = measured_assistance_per_rep(log, weight)
            summary["target_assistance"] = float(log.meta.get("fz_pct", 0.0))
    (out / "metrics.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out / 'metrics.json'}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = validate_config(cfg)
    for w in report.warnings:
        print(f"warning: {w}")
    for e in report.errors:
        print(f"error: {e}")
    if report.ok:
        print("configuration ok")
        return EXIT_OK
    return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stsbot",
        description="Simulator and analysis suite for a 2-DOF sit-to-stand assistance robot",
    )
    parser.add_argument("--version", action="version", version=f"stsbot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and write the CSV log")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--jobs", type=int, default=1, help="reserved for batch sweeps")
    p_sim.set_defaults(func=_cmd_simulate)

    p_map = sub.add_parser("map", help="compute a workspace capability map")
    p_map.add_argument("--config", required=True)
    p_map.add_argument("--out", default=None)
    p_map.add_argument("--jobs", type=int, default=1, help="reserved for batch sweeps")
    p_map.set_defaults(func=_cmd_map)

    p_an = sub.add_parser("analyze", help="compute metrics from a simulation log")
    p_an.add_argument("--log", required=True)
    p_an.add_argument("--out", default=None)
    p_an.set_defaults(func=_cmd_analyze)

    p_val = sub.add_parser("validate", help="check a configuration without running")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalDivergence as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except StsBotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
