"""Surrogate human sit-to-stand biomechanics.

The human is a point mass at the CoM.  Legs are modelled as a force channel
from the ground: a weight-bearing feedforward (whatever the chair and the
harness are not carrying) plus PD tracking of a minimum-jerk reference,
clamped to a mobility-scaled capacity.  The feet ground-reaction force equals
that leg force, so the chair/feet split responds to where the CoM is over
the seat: the chair's supportable share tapers off as the CoM advances
toward the seat edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .kinematics import GRAVITY

CAPACITY_FACTOR = 1.3  # peak leg force of a fully able adult, x bodyweight


@dataclass(frozen=True)
class HumanParams:
    height: float
    mass: float
    mobility: float = 1.0
    seat_height: float = 0.43
    seated_com: tuple[float, float] = (0.0, 0.68)
    standing_com: tuple[float, float] = (0.4375, 0.9625)

    def __post_init__(self):
        if self.height <= 0.0 or self.mass <= 0.0:
            raise ValueError("height and mass must be positive")
        if not (0.0 <= self.mobility <= 1.0):
            raise ValueError("mobility is a fraction in [0, 1]")
        if self.standing_com[1] <= self.seated_com[1]:
            raise ValueError("standing CoM must be above seated CoM")

    @classmethod
    def nominal(
        cls,
        height: float,
        mass: float,
        mobility: float = 1.0,
        seat_height: float = 0.43,
        chair_y: float = 0.0,
        standing_z_factor: float = 0.54,
    ) -> "HumanParams":
        """Anthropometric defaults: forward travel one thigh length
        (0.25*height), standing CoM at standing_z_factor*height."""
        seated = (chair_y, seat_height + 0.25)
        standing = (chair_y + 0.25 * height, standing_z_factor * height)
        return cls(height, mass, mobility, seat_height, seated, standing)

    @property
    def weight(self) -> float:
        return self.mass * GRAVITY

    @property
    def capacity(self) -> float:
        """Peak leg-force magnitude available to this person."""
        return self.mobility * CAPACITY_FACTOR * self.weight

    @property
    def track_kp(self) -> float:
        return 1600.0 * (self.mass / 80.0)

    @property
    def track_kd(self) -> float:
        return 2.0 * math.sqrt(self.track_kp * self.mass)


@dataclass(frozen=True)
class STSReference:
    """Minimum-jerk interpolation between the seated and standing CoM."""

    duration: float = 2.0

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")


def minimum_jerk(tau: float) -> tuple[float, float, float]:
    """(s, ds/dtau, d2s/dtau2) of the quintic 10t^3 - 15t^4 + 6t^5."""
    if tau <= 0.0:
        return 0.0, 0.0, 0.0
    if tau >= 1.0:
        return 1.0, 0.0, 0.0
    t2 = tau * tau
    t3 = t2 * tau
    s = t3 * (10.0 - 15.0 * tau + 6.0 * t2)
    ds = 30.0 * t2 * (1.0 - tau) * (1.0 - tau)
    dds = 60.0 * tau - 180.0 * t2 + 120.0 * t3
    return s, ds, dds


def reference_com(
    params: HumanParams, ref: STSReference, t: float
) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
    """CoM reference (pos, vel, acc) at time t, clamped to the endpoints."""
    tau = t / ref.duration
    s, ds, dds = minimum_jerk(tau)
    dy = params.standing_com[0] - params.seated_com[0]
    dz = params.standing_com[1] - params.seated_com[1]
    inv_t = 1.0 / ref.duration
    pos = (params.seated_com[0] + s * dy, params.seated_com[1] + s * dz)
    vel = (ds * dy * inv_t, ds * dz * inv_t)
    acc = (dds * dy * inv_t * inv_t, dds * dz * inv_t * inv_t)
    return pos, vel, acc


@dataclass
class HumanState:
    com: tuple[float, float]
    vel: tuple[float, float] = (0.0, 0.0)
    chair_fz: float = 0.0
    feet_f: tuple[float, float] = (0.0, 0.0)
    seat_off: bool = False
    harness_f: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class ChairModel:
    """Unilateral seat contact with a support share that tapers at the edge.

    The spring-damper acts at the seat plane; the force it may carry is
    capped by taper(y) * support_cap * bodyweight, so weight shifts onto the
    feet as the CoM advances toward the edge.
    """

    stiffness: float = 2.0e4
    damping: float = 400.0
    support_cap: float = 1.2
    seat_depth: float = 0.45
    edge_taper: float = 0.10
    edge_offset: float = 0.10  # seat front edge this far ahead of the seated CoM

    def plane_z(self, params: HumanParams) -> float:
        """Seat plane placed so the spring carries exactly bodyweight at the
        seated reference (no settling transient)."""
        return params.seated_com[1] + params.weight / self.stiffness

    def support_fraction(self, params: HumanParams, y: float) -> float:
        edge = params.seated_com[0] + self.edge_offset
        back = edge - self.seat_depth
        if y >= edge or y <= back:
            return 0.0
        if y >= edge - self.edge_taper:
            return (edge - y) / self.edge_taper
        return 1.0

    def force(
        self, params: HumanParams, com: tuple[float, float], vel: tuple[float, float],
        latched: bool,
    ) -> float:
        if latched:
            return 0.0
        pen = self.plane_z(params) - com[1]
        if pen <= 0.0:
            return 0.0
        raw = self.stiffness * pen - self.damping * vel[1]
        cap = self.support_fraction(params, com[0]) * self.support_cap * params.weight
        return max(0.0, min(raw, cap))


def muscle_effort(
    params: HumanParams,
    state: HumanState,
    ref_pos: tuple[float, float],
    ref_vel: tuple[float, float],
) -> tuple[float, float]:
    """Leg force on the CoM: gravity-support baseline plus PD tracking.

    The baseline carries whatever bodyweight the chair and harness are not
    already supporting.  The total is clamped to feet-can-only-push in z and
    to the person's capacity in norm, so a low-mobility surrogate fails the
    motion (sit-back) instead of producing impossible forces.
    """
    baseline = max(0.0, params.weight - state.chair_fz - state.harness_f[1])
    kp, kd = params.track_kp, params.track_kd
    fx = kp * (ref_pos[0] - state.com[0]) + kd * (ref_vel[0] - state.vel[0])
    fz = baseline + kp * (ref_pos[1] - state.com[1]) + kd * (ref_vel[1] - state.vel[1])
    fz = max(0.0, fz)
    norm = math.hypot(fx, fz)
    cap = params.capacity
    if norm > cap:
        if cap <= 0.0:
            return 0.0, 0.0
        scale = cap / norm
        fx *= scale
        fz *= scale
    return fx, fz


def contact_step(
    params: HumanParams,
    chair: ChairModel,
    state: HumanState,
    harness_f: tuple[float, float],
    ref_pos: tuple[float, float],
    ref_vel: tuple[float, float],
    dt: float,
) -> HumanState:
    """One semi-implicit Euler step of the CoM under chair, legs, harness
    and gravity.  Seat-off latches the first time the chair force hits zero
    and stays latched for the rest of the repetition."""
    chair_fz = chair.force(params, state.com, state.vel, state.seat_off)
    probe = replace(state, chair_fz=chair_fz, harness_f=harness_f)
    muscle = muscle_effort(params, probe, ref_pos, ref_vel)
    m = params.mass
    ax = (muscle[0] + harness_f[0]) / m
    az = (muscle[1] + chair_fz + harness_f[1]) / m - GRAVITY
    vel = (state.vel[0] + ax * dt, state.vel[1] + az * dt)
    com = (state.com[0] + vel[0] * dt, state.com[1] + vel[1] * dt)
    seat_off = state.seat_off or chair_fz <= 0.0
    return HumanState(com, vel, chair_fz, muscle, seat_off, harness_f)


@dataclass(frozen=True)
class HarnessModel:
    """Stiff spring-damper coupling between the effector and the CoM.

    rest_offset is captured at attach time so the coupling starts unloaded;
    the force on the human is equal and opposite to the force on the robot.
    """

    stiffness: float = 1.0e5
    damping: float = 400.0
    rest_offset: tuple[float, float] = (0.0, 0.03)

    def force_on_human(
        self,
        effector_pos: tuple[float, float],
        effector_vel: tuple[float, float],
        com: tuple[float, float],
        com_vel: tuple[float, float],
    ) -> tuple[float, float]:
        dx = effector_pos[0] - com[0] - self.rest_offset[0]
        dz = effector_pos[1] - com[1] - self.rest_offset[1]
        return (
            self.stiffness * dx + self.damping * (effector_vel[0] - com_vel[0]),
            self.stiffness * dz + self.damping * (effector_vel[1] - com_vel[1]),
        )
