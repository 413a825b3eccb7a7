"""Assist-mode force fields, the open-loop force controller and the transfer
speed controller.

The force pipeline is: desired field at the effector -> structure-mass
compensation in joint space -> map through the transmissions -> per-actuator
friction compensation -> envelope clamp.  With matched plant models the
static effector force error is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .actuators import (
    ActuatorSpec,
    FrictionModel,
    clamp_to_capability,
    friction_force,
)
from .errors import ConfigError, SingularTransmission, WrongMode
from .kinematics import (
    GRAVITY,
    SINGULARITY_EPS,
    EffectorState,
    JointState,
    LinkMassModel,
    RobotGeometry,
    act_diag,
    dk_entries,
    effector_position,
    gravity_vec,
    transfer_actuator_velocity,
)

# Motor-positive output direction relative to length growth: the strut pushes
# (extension-positive), the belt pulls (payout-negative).  Length-conjugate
# forces from the kinematics layer are flipped through these signs at the
# actuator boundary.
TRANSMISSION_SIGN_1 = 1.0
TRANSMISSION_SIGN_2 = -1.0


class AssistMode(Enum):
    FOLLOW_ME = "follow_me"
    WEIGHT_UNLOADING = "weight_unloading"
    COM_BALANCE = "com_balance"
    TRANSFER = "transfer"


@dataclass(frozen=True)
class AssistModeConfig:
    """Mode selection plus the parameters of the workspace force field.

    fz_pct is the vertical unloading as a fraction of bodyweight, ky the
    stiffness of the forward virtual spring, e_yi the effector y position
    captured when the mode is armed.
    """

    mode: AssistMode
    user_height: float
    user_weight: float
    fz_pct: float = 0.0
    ky: float = 0.0
    e_yi: float = 0.0
    clamp_forward_only: bool = False

    def __post_init__(self):
        if not (0.0 <= self.fz_pct < 1.0):
            raise ConfigError("fz_pct must lie in [0, 1)")
        if self.ky < 0.0:
            raise ConfigError("ky must be non-negative")
        if self.user_height <= 0.0 or self.user_weight <= 0.0:
            raise ConfigError("user height and weight must be positive")
        m = self.mode
        if m is AssistMode.FOLLOW_ME and (self.fz_pct != 0.0 or self.ky != 0.0):
            raise ConfigError("follow_me requires fz_pct = 0 and ky = 0 (safety net only)")
        if m is AssistMode.WEIGHT_UNLOADING and not (self.fz_pct > 0.0 and self.ky == 0.0):
            raise ConfigError("weight_unloading requires fz_pct > 0 and ky = 0")
        if m is AssistMode.COM_BALANCE and not (self.fz_pct > 0.0 and self.ky > 0.0):
            raise ConfigError("com_balance requires fz_pct > 0 and ky > 0")

    def with_e_yi(self, e_yi: float) -> "AssistModeConfig":
        return replace(self, e_yi=e_yi)


def anchor_y(config: AssistModeConfig) -> float:
    """Anchor axis of the virtual spring: start position plus a thigh length."""
    if config.mode is not AssistMode.COM_BALANCE:
        raise WrongMode("anchor_y is only defined for com_balance")
    return config.e_yi + 0.25 * config.user_height


def desired_force_field(config: AssistModeConfig, effector: EffectorState) -> tuple[float, float]:
    """Desired (f_y, f_z) the robot should exert on the user at this pose."""
    if config.mode is AssistMode.TRANSFER:
        raise WrongMode("transfer uses the speed controller, not a force field")
    if config.mode is AssistMode.FOLLOW_ME:
        return 0.0, 0.0
    f_z = config.fz_pct * config.user_weight * GRAVITY
    if config.mode is AssistMode.WEIGHT_UNLOADING:
        return 0.0, f_z
    # com_balance: linear spring toward the anchor axis, reversing past it
    f_y = config.ky * (anchor_y(config) - effector.y)
    if config.clamp_forward_only and f_y < 0.0:
        f_y = 0.0
    return f_y, f_z


@dataclass(frozen=True)
class ForceCommand:
    f1: float
    f2: float
    saturated_1: bool
    saturated_2: bool


def force_controller_step(
    geom: RobotGeometry,
    masses: LinkMassModel,
    specs: tuple[ActuatorSpec, ActuatorSpec],
    frictions: tuple[FrictionModel, FrictionModel],
    config: AssistModeConfig,
    q: JointState,
    motor_vels: tuple[float, float],
    allow_peak: bool = False,
    trace: dict | None = None,
) -> ForceCommand:
    """One cycle of the open-loop force controller (rehabilitation modes).

    motor_vels are the encoder speeds of the two drives [rad/s].  No force
    feedback anywhere: gravity and friction are compensated from models only.
    """
    y, z = effector_position(geom, q.q_a, q.q_c)
    f_y, f_z = desired_force_field(config, EffectorState(y, z))

    d1, d2 = act_diag(geom, q.q_a, q.q_c)
    if abs(d1) <= SINGULARITY_EPS:
        raise SingularTransmission("q_a", d1)
    if abs(d2) <= SINGULARITY_EPS:
        raise SingularTransmission("q_c", d2)

    j11, j12, j21, j22 = dk_entries(geom, q.q_a, q.q_c)
    g_a, g_c = gravity_vec(geom, masses, q.q_a, q.q_c)
    # joint-space demand: deliver the field and hold the structure
    tau_a = j11 * f_y + j21 * f_z + g_a
    tau_c = j12 * f_y + j22 * f_z + g_c

    f1_map = TRANSMISSION_SIGN_1 * tau_a / d1
    f2_map = TRANSMISSION_SIGN_2 * tau_c / d2

    f1_fric = f1_map + friction_force(frictions[0], motor_vels[0])
    f2_fric = f2_map + friction_force(frictions[1], motor_vels[1])

    f1, sat1 = clamp_to_capability(specs[0], f1_fric, allow_peak)
    f2, sat2 = clamp_to_capability(specs[1], f2_fric, allow_peak)

    if trace is not None:
        trace.update(
            fy_des=f_y, fz_des=f_z,
            f1_map=f1_map, f2_map=f2_map,
            f1_fric=f1_fric, f2_fric=f2_fric,
        )
    return ForceCommand(f1, f2, sat1, sat2)


# ---------------------------------------------------------------------------
# transfer speed controller


class Direction(Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class TransferConfig:
    """Speed-controlled transfer along the one-DOF arc about C."""

    v_z_target: float = 0.03
    q_a_locked: float = 0.30
    direction: Direction = Direction.UP
    kp: float = 5000.0
    ki: float = 20000.0
    q_c_start: float = 0.45
    q_c_end: float = -0.50

    def __post_init__(self):
        if self.v_z_target <= 0.0:
            raise ConfigError("v_z_target must be positive")
        if self.q_c_start <= self.q_c_end:
            raise ConfigError("q_c_start must sit below q_c_end on the arc (larger q_c)")

    @property
    def signed_v_z(self) -> float:
        return self.v_z_target if self.direction is Direction.UP else -self.v_z_target


@dataclass(frozen=True)
class SpeedControllerState:
    integral: float = 0.0


def speed_controller_step(
    geom: RobotGeometry,
    spec_hf: ActuatorSpec,
    transfer: TransferConfig,
    q_c: float,
    v2_measured: float,
    dt: float,
    state: SpeedControllerState,
    v_z_signed: float | None = None,
    diag: dict | None = None,
) -> tuple[float, SpeedControllerState]:
    """PI belt-speed regulation toward the kinematic reference.

    The error is taken in the motor (reel-in positive) convention so that a
    lift demand produces positive tension; anti-windup freezes the integrator
    while the command sits on the one-sided envelope.  ``v_z_signed``
    overrides the configured target (0 holds position between phases).
    """
    if v_z_signed is None:
        v_z_signed = transfer.signed_v_z
    if v_z_signed == 0.0:
        v2_ref = 0.0
    else:
        v2_ref = transfer_actuator_velocity(geom, transfer.q_a_locked, q_c, v_z_signed)
    err = v2_measured - v2_ref  # reel-in positive
    unclamped = transfer.kp * err + state.integral
    f2, saturated = clamp_to_capability(spec_hf, unclamped, allow_peak=False)
    if not saturated:
        state = SpeedControllerState(state.integral + transfer.ki * err * dt)
    if diag is not None:
        diag.update(v2_ref=v2_ref, saturated=saturated)
    return f2, state


def transfer_trajectory(
    geom: RobotGeometry,
    q_a_locked: float,
    q_c_range: tuple[float, float],
    n: int = 50,
) -> np.ndarray:
    """Effector points on the circular arc about C, uniform in q_c."""
    qs = np.linspace(q_c_range[0], q_c_range[1], n)
    pts = np.empty((n, 2))
    for i, qc in enumerate(qs):
        pts[i] = effector_position(geom, q_a_locked, float(qc))
    return pts
