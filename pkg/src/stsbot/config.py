"""Scenario configuration: a flat ``key = value`` text format with a typed
schema, plus validation and the run manifest.

All numbers are SI.  Unknown keys are errors; every value left out resolves
to its schema default, and the fully resolved mapping is what lands in the
manifest so a run can be reproduced from the manifest alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .actuators import FrictionModel
from .control import AssistMode, AssistModeConfig, TransferConfig
from .engine import Scenario
from .errors import ConfigError, OutOfJointLimits, Unreachable
from .human import ChairModel, HarnessModel, HumanParams, STSReference
from .kinematics import RobotGeometry, inverse_kinematics, strut_length

_MODES = [m.value for m in AssistMode]

# key -> (type, default); type in {"float", "int", "bool", "str"}
SCHEMA: dict[str, tuple[str, object]] = {
    "mode": ("str", "follow_me"),
    "fz_pct": ("float", 0.0),
    "ky": ("float", 0.0),
    "clamp_forward_only": ("bool", False),
    "seed": ("int", 0),
    "dt": ("float", 1e-3),
    "repetitions": ("int", 3),
    "pause": ("float", 2.0),
    "settle": ("float", 0.5),
    "rep_jitter": ("float", 0.05),
    "robot_attached": ("bool", True),
    "allow_peak": ("bool", False),
    "payload": ("float", 0.0),
    "human.enabled": ("bool", True),
    "human.height": ("float", 1.75),
    "human.mass": ("float", 81.13),
    "human.mobility": ("float", 1.0),
    "human.seat_height": ("float", 0.43),
    "human.standing_z_factor": ("float", 0.54),
    "chair_y": ("float", 0.67),
    "sts.duration": ("float", 2.0),
    "harness.stiffness": ("float", 1.0e5),
    "harness.damping": ("float", 400.0),
    "harness.offset_y": ("float", 0.0),
    "harness.offset_z": ("float", 0.03),
    "chair.stiffness": ("float", 2.0e4),
    "chair.damping": ("float", 400.0),
    "chair.support_cap": ("float", 1.2),
    "chair.seat_depth": ("float", 0.45),
    "chair.edge_taper": ("float", 0.10),
    "chair.edge_offset": ("float", 0.10),
    "geometry.l_ab": ("float", 0.38),
    "geometry.l_ac": ("float", 0.61),
    "geometry.l_ce": ("float", 0.75),
    "geometry.l_cd": ("float", 0.38),
    "geometry.base_height": ("float", 0.44),
    "geometry.p1_y": ("float", 0.25),
    "geometry.p1_z": ("float", -0.10),
    "geometry.d_g": ("float", 0.60),
    "geometry.stroke_1": ("float", 0.220),
    "geometry.q_a_min": ("float", -0.10),
    "geometry.q_a_max": ("float", 0.90),
    "geometry.q_c_min": ("float", -1.20),
    "geometry.q_c_max": ("float", 0.50),
    "masses.m_h": ("float", 2.65),
    "masses.m_v": ("float", 4.91),
    "damping.q_a": ("float", 0.5),
    "damping.q_c": ("float", 0.5),
    "transfer.v_z": ("float", 0.03),
    "transfer.q_a_locked": ("float", 0.30),
    "transfer.q_c_start": ("float", 0.45),
    "transfer.q_c_end": ("float", -0.50),
    "transfer.kp": ("float", 5000.0),
    "transfer.ki": ("float", 20000.0),
    "friction.act1.a": ("float", 120.0),
    "friction.act1.b": ("float", 0.02),
    "friction.act2_hs.a": ("float", 35.0),
    "friction.act2_hs.b": ("float", 0.05),
    "friction.act2_hf.a": ("float", 15.0),
    "friction.act2_hf.b": ("float", 0.05),
    # plant-side overrides; negative means "same as controller model"
    "plant_friction.act1.a": ("float", -1.0),
    "plant_friction.act1.b": ("float", -1.0),
    "plant_friction.act2_hs.a": ("float", -1.0),
    "plant_friction.act2_hs.b": ("float", -1.0),
    "plant_friction.act2_hf.a": ("float", -1.0),
    "plant_friction.act2_hf.b": ("float", -1.0),
    "map.configuration": ("str", "rehab"),
    "map.y_min": ("float", -0.2),
    "map.y_max": ("float", 1.0),
    "map.z_min": ("float", 0.2),
    "map.z_max": ("float", 1.4),
    "map.step": ("float", 0.02),
    "map.requirement": ("float", -1.0),
}


def _coerce(key: str, raw: str):
    kind, _ = SCHEMA[key]
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"key '{key}': cannot parse {raw!r} as {kind}") from exc


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into a fully resolved mapping."""
    resolved = {k: d for k, (_, d) in SCHEMA.items()}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        resolved[key] = _coerce(key, raw)
    return resolved


def load_config(path) -> dict:
    """Load a config file; a .json file is treated as a manifest snapshot."""
    text = open(path).read()
    if str(path).endswith(".json"):
        doc = json.loads(text)
        cfg = doc.get("config", doc)
        unknown = set(cfg) - set(SCHEMA)
        if unknown:
            raise ConfigError(f"manifest carries unknown keys: {sorted(unknown)}")
        resolved = {k: d for k, (_, d) in SCHEMA.items()}
        resolved.update(cfg)
        return resolved
    return parse_config_text(text)


# ---------------------------------------------------------------------------
# building runtime objects


def build_geometry(cfg: dict) -> RobotGeometry:
    return RobotGeometry(
        l_ab=cfg["geometry.l_ab"], l_ac=cfg["geometry.l_ac"],
        l_ce=cfg["geometry.l_ce"], l_cd=cfg["geometry.l_cd"],
        base_height=cfg["geometry.base_height"],
        p1=(cfg["geometry.p1_y"], cfg["geometry.p1_z"]),
        d_g=cfg["geometry.d_g"],
        q_a_limits=(cfg["geometry.q_a_min"], cfg["geometry.q_a_max"]),
        q_c_limits=(cfg["geometry.q_c_min"], cfg["geometry.q_c_max"]),
        stroke_1=cfg["geometry.stroke_1"],
    )


def _friction(cfg: dict, stem: str, fallback: tuple[float, float] | None = None) -> FrictionModel:
    a, b = cfg[f"{stem}.a"], cfg[f"{stem}.b"]
    if fallback is not None:
        a = fallback[0] if a < 0.0 else a
        b = fallback[1] if b < 0.0 else b
    return FrictionModel(a, b)


def build_scenario(cfg: dict) -> Scenario:
    mode = cfg["mode"]
    if mode not in _MODES:
        raise ConfigError(f"mode must be one of {_MODES}, got '{mode}'")
    geom = build_geometry(cfg)
    human = None
    if cfg["human.enabled"] and mode != "transfer":
        human = HumanParams.nominal(
            height=cfg["human.height"], mass=cfg["human.mass"],
            mobility=cfg["human.mobility"], seat_height=cfg["human.seat_height"],
            chair_y=cfg["chair_y"], standing_z_factor=cfg["human.standing_z_factor"],
        )
    mode_config = None
    transfer = None
    if mode == "transfer":
        transfer = TransferConfig(
            v_z_target=cfg["transfer.v_z"], q_a_locked=cfg["transfer.q_a_locked"],
            kp=cfg["transfer.kp"], ki=cfg["transfer.ki"],
            q_c_start=cfg["transfer.q_c_start"], q_c_end=cfg["transfer.q_c_end"],
        )
    else:
        mode_config = AssistModeConfig(
            mode=AssistMode(mode), user_height=cfg["human.height"],
            user_weight=cfg["human.mass"], fz_pct=cfg["fz_pct"], ky=cfg["ky"],
            clamp_forward_only=cfg["clamp_forward_only"],
        )
    ctrl = (
        _friction(cfg, "friction.act1"),
        _friction(cfg, "friction.act2_hs"),
        _friction(cfg, "friction.act2_hf"),
    )
    plant = (
        _friction(cfg, "plant_friction.act1", (ctrl[0].a, ctrl[0].b)),
        _friction(cfg, "plant_friction.act2_hs", (ctrl[1].a, ctrl[1].b)),
        _friction(cfg, "plant_friction.act2_hf", (ctrl[2].a, ctrl[2].b)),
    )
    from .kinematics import LinkMassModel

    return Scenario(
        geom=geom,
        masses=LinkMassModel.for_geometry(geom, cfg["masses.m_h"], cfg["masses.m_v"]),
        human=human,
        chair=ChairModel(
            stiffness=cfg["chair.stiffness"], damping=cfg["chair.damping"],
            support_cap=cfg["chair.support_cap"], seat_depth=cfg["chair.seat_depth"],
            edge_taper=cfg["chair.edge_taper"], edge_offset=cfg["chair.edge_offset"],
        ),
        harness=HarnessModel(
            stiffness=cfg["harness.stiffness"], damping=cfg["harness.damping"],
            rest_offset=(cfg["harness.offset_y"], cfg["harness.offset_z"]),
        ),
        mode_config=mode_config,
        transfer=transfer,
        sts=STSReference(duration=cfg["sts.duration"]),
        repetitions=cfg["repetitions"],
        pause=cfg["pause"],
        payload=cfg["payload"],
        robot_attached=cfg["robot_attached"],
        dt=cfg["dt"],
        seed=cfg["seed"],
        allow_peak=cfg["allow_peak"],
        damping=(cfg["damping.q_a"], cfg["damping.q_c"]),
        ctrl_frictions=ctrl,
        plant_frictions=plant,
        settle=cfg["settle"],
        rep_jitter=cfg["rep_jitter"],
    )


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    errors: list[str]
    warnings: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_config(cfg: dict) -> ValidationReport:
    """Schema is already enforced at parse time; this adds mode/geometry
    consistency without running the simulation."""
    errors: list[str] = []
    warnings: list[str] = []

    mode = cfg["mode"]
    if mode not in _MODES:
        errors.append(f"mode must be one of {_MODES}, got '{mode}'")
        return ValidationReport(errors, warnings)

    fz, ky = cfg["fz_pct"], cfg["ky"]
    if mode == "follow_me" and (fz != 0.0 or ky != 0.0):
        errors.append("follow_me requires fz_pct = 0 and ky = 0 (mode/parameter table)")
    if mode == "weight_unloading" and not (fz > 0.0 and ky == 0.0):
        errors.append("weight_unloading requires fz_pct > 0 and ky = 0 (mode/parameter table)")
    if mode == "com_balance" and not (fz > 0.0 and ky > 0.0):
        errors.append("com_balance requires fz_pct > 0 and ky > 0 (mode/parameter table)")
    if mode == "transfer" and (fz != 0.0 or ky != 0.0):
        warnings.append("transfer ignores fz_pct and ky")
    if not (0.0 <= fz < 1.0):
        errors.append("fz_pct must lie in [0, 1)")
    if ky < 0.0:
        errors.append("ky must be non-negative")
    if not (0.0 < cfg["dt"] <= 5e-3):
        errors.append("dt must lie in (0, 0.005] s")
    if cfg["repetitions"] < 1:
        errors.append("repetitions must be >= 1")
    if cfg["payload"] > 0.0 and mode != "transfer":
        errors.append("payload requires mode = transfer")

    try:
        geom = build_geometry(cfg)
    except (ValueError, ConfigError) as exc:
        errors.append(f"geometry: {exc}")
        return ValidationReport(errors, warnings)

    if mode != "transfer" and cfg["human.enabled"] and cfg["robot_attached"]:
        human = HumanParams.nominal(
            cfg["human.height"], cfg["human.mass"], cfg["human.mobility"],
            cfg["human.seat_height"], cfg["chair_y"],
            standing_z_factor=cfg["human.standing_z_factor"],
        )
        off = (cfg["harness.offset_y"], cfg["harness.offset_z"])
        for name, com in (("seated", human.seated_com), ("standing", human.standing_com)):
            target = (com[0] + off[0], com[1] + off[1])
            try:
                inverse_kinematics(geom, target)
            except (Unreachable, OutOfJointLimits) as exc:
                errors.append(
                    f"human.{name} CoM attach point {target} unreachable "
                    f"(chair_y/harness offsets): {type(exc).__name__}")

    # strut travel across the q_a range must fit the ball-screw stroke
    n = 200
    lo, hi = geom.q_a_limits
    lengths = [strut_length(geom, lo + (hi - lo) * i / n) for i in range(n + 1)]
    travel = max(lengths) - min(lengths)
    if travel > geom.stroke_1:
        warnings.append(
            f"strut travel {travel:.3f} m over the q_a range exceeds stroke_1 "
            f"{geom.stroke_1:.3f} m")
    return ValidationReport(errors, warnings)
