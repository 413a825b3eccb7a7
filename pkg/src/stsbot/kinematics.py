"""Closed-form geometry of the two-link floor-lift arm and its transmissions.

Frame and sign conventions used everywhere in this package:

* World origin is on the floor directly below joint A; +y points forward
  (toward the user), +z up.  Joint A sits at (0, base_height).
* A point at distance d along the mast AC is at
  (d*sin(q_a), base_height + d*cos(q_a)); q_a = 0 means the mast is vertical
  and positive q_a leans it forward.
* The boom CDE points along (cos(q_a+q_c), -sin(q_a+q_c)); with q_a = q_c = 0
  the boom is horizontal and positive q_c swings the effector E down.
* The strut (actuator 1) spans from the base anchor p1 (coordinates given
  relative to A) to point B on the mast; L1 is anchor-to-B distance.
* The belt (actuator 2) leaves the base along the mast axis, wraps the mast
  pulley at G (d_g beyond C), runs to the sheave at D and anchors back at G.
  L2 = 2*|G - D| is belt payout at the drum: the two working spans halve the
  travel and double the pull applied at D.

Under these choices dL1/dq_c = 0 and dL2/dq_a = 0 exactly; each transmission
drives one joint and the actuator jacobian is diagonal.

Actuator force sign:  functions here work in the length-conjugate convention
(positive force does positive work while the corresponding length grows).
For the belt that means tension comes out negative; the controller layer
flips to the motor convention (tension positive) at the actuator boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfJointLimits, SingularTransmission, Unreachable

GRAVITY = 9.81

# Guard on the actuator-jacobian diagonal [m/rad]; below this the
# transmission is treated as singular rather than regularized, so the
# controllers can never silently command near-infinite forces.
SINGULARITY_EPS = 1e-6


@dataclass(frozen=True)
class RobotGeometry:
    """Link lengths, anchor points and joint limits of the arm.

    All lengths in metres, limits in radians.  ``p1`` is the actuator-1 base
    anchor expressed in the frame of joint A.  ``d_g`` is how far the belt
    pulley G sits beyond C along the mast axis.
    """

    l_ab: float = 0.38
    l_ac: float = 0.61
    l_ce: float = 0.75
    l_cd: float = 0.38
    base_height: float = 0.44
    p1: tuple[float, float] = (0.25, -0.10)
    d_g: float = 0.60
    q_a_limits: tuple[float, float] = (-0.10, 0.90)
    q_c_limits: tuple[float, float] = (-1.20, 0.50)
    stroke_1: float = 0.220

    def __post_init__(self):
        for name in ("l_ab", "l_ac", "l_ce", "l_cd", "base_height", "d_g", "stroke_1"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.l_cd >= self.l_ce:
            raise ValueError("l_cd must be smaller than l_ce")
        if self.q_a_limits[0] >= self.q_a_limits[1]:
            raise ValueError("q_a_limits must be a non-empty interval")
        if self.q_c_limits[0] >= self.q_c_limits[1]:
            raise ValueError("q_c_limits must be a non-empty interval")

    @property
    def anchor_world(self) -> tuple[float, float]:
        """Actuator-1 base anchor in world coordinates."""
        return (self.p1[0], self.base_height + self.p1[1])

    def in_limits(self, q_a: float, q_c: float, tol: float = 1e-9) -> bool:
        return (
            self.q_a_limits[0] - tol <= q_a <= self.q_a_limits[1] + tol
            and self.q_c_limits[0] - tol <= q_c <= self.q_c_limits[1] + tol
        )


@dataclass(frozen=True)
class JointState:
    q_a: float
    q_c: float
    qd_a: float = 0.0
    qd_c: float = 0.0


@dataclass(frozen=True)
class EffectorState:
    """Task-space state of E in the world frame."""

    y: float
    z: float
    vy: float = 0.0
    vz: float = 0.0


@dataclass(frozen=True)
class LinkMassModel:
    """Masses, centre-of-mass offsets and rod inertias of the two links.

    ``L_h`` is measured along the mast from A, ``L_v`` along the boom from C.
    Inertias are about each link's own CoM.
    """

    m_h: float = 2.65
    m_v: float = 4.91
    L_h: float = 0.305
    L_v: float = 0.375
    I_h: float = 2.65 * 0.61**2 / 12.0
    I_v: float = 4.91 * 0.75**2 / 12.0

    def __post_init__(self):
        if self.m_h < 0.0 or self.m_v < 0.0:
            raise ValueError("link masses must be non-negative")

    @classmethod
    def for_geometry(cls, geom: RobotGeometry, m_h: float = 2.65, m_v: float = 4.91,
                     L_h: float | None = None, L_v: float | None = None) -> "LinkMassModel":
        """Slender-rod defaults: CoM at half length, I = m*l^2/12."""
        L_h = geom.l_ac / 2.0 if L_h is None else L_h
        L_v = geom.l_ce / 2.0 if L_v is None else L_v
        if not (0.0 <= L_h <= geom.l_ac and 0.0 <= L_v <= geom.l_ce):
            raise ValueError("CoM offsets must lie within the link lengths")
        return cls(m_h, m_v, L_h, L_v,
                   m_h * geom.l_ac**2 / 12.0, m_v * geom.l_ce**2 / 12.0)


# ---------------------------------------------------------------------------
# forward kinematics


def effector_position(geom: RobotGeometry, q_a: float, q_c: float) -> tuple[float, float]:
    phi = q_a + q_c
    return (
        geom.l_ac * math.sin(q_a) + geom.l_ce * math.cos(phi),
        geom.base_height + geom.l_ac * math.cos(q_a) - geom.l_ce * math.sin(phi),
    )


def dk_entries(geom: RobotGeometry, q_a: float, q_c: float) -> tuple[float, float, float, float]:
    """Row-major entries of d(E_y,E_z)/d(q_a,q_c)."""
    phi = q_a + q_c
    sf, cf = math.sin(phi), math.cos(phi)
    sa, ca = math.sin(q_a), math.cos(q_a)
    return (
        geom.l_ac * ca - geom.l_ce * sf,
        -geom.l_ce * sf,
        -geom.l_ac * sa - geom.l_ce * cf,
        -geom.l_ce * cf,
    )


def forward_kinematics(geom: RobotGeometry, q: JointState) -> EffectorState:
    y, z = effector_position(geom, q.q_a, q.q_c)
    j11, j12, j21, j22 = dk_entries(geom, q.q_a, q.q_c)
    return EffectorState(y, z, j11 * q.qd_a + j12 * q.qd_c, j21 * q.qd_a + j22 * q.qd_c)


def jacobian_dk(geom: RobotGeometry, q: JointState) -> np.ndarray:
    j11, j12, j21, j22 = dk_entries(geom, q.q_a, q.q_c)
    return np.array([[j11, j12], [j21, j22]])


# ---------------------------------------------------------------------------
# inverse kinematics


def inverse_kinematics(geom: RobotGeometry, target: tuple[float, float]) -> JointState:
    """Solve E = target on the elbow-up branch (C above/behind E).

    Raises Unreachable when the target is outside the annulus spanned by the
    two links, OutOfJointLimits when the solution violates the configured
    joint limits.
    """
    ry = float(target[0])
    rz = float(target[1]) - geom.base_height
    r2 = ry * ry + rz * rz
    r = math.sqrt(r2)
    lo = abs(geom.l_ac - geom.l_ce)
    hi = geom.l_ac + geom.l_ce
    if r < lo - 1e-12 or r > hi + 1e-12 or r < 1e-12:
        raise Unreachable(target)

    # interior angle at C between CA and CE maps directly onto sin(q_c)
    s_qc = (geom.l_ac**2 + geom.l_ce**2 - r2) / (2.0 * geom.l_ac * geom.l_ce)
    s_qc = max(-1.0, min(1.0, s_qc))
    q_c = math.asin(s_qc)  # lower-half branch: elbow-up

    c_alpha = (geom.l_ac**2 + r2 - geom.l_ce**2) / (2.0 * geom.l_ac * r)
    alpha = math.acos(max(-1.0, min(1.0, c_alpha)))
    q_a = math.atan2(ry, rz) - alpha

    if not geom.in_limits(q_a, q_c):
        raise OutOfJointLimits(
            f"IK solution (q_a={q_a:.4f}, q_c={q_c:.4f}) outside limits "
            f"{geom.q_a_limits} x {geom.q_c_limits}"
        )
    return JointState(q_a, q_c)


# ---------------------------------------------------------------------------
# transmissions


def strut_length(geom: RobotGeometry, q_a: float) -> float:
    by = geom.l_ab * math.sin(q_a)
    bz = geom.l_ab * math.cos(q_a)
    return math.hypot(by - geom.p1[0], bz - geom.p1[1])


def belt_length(geom: RobotGeometry, q_c: float) -> float:
    return 2.0 * math.sqrt(
        geom.d_g**2 + geom.l_cd**2 + 2.0 * geom.d_g * geom.l_cd * math.sin(q_c)
    )


def actuator_lengths(geom: RobotGeometry, q: JointState) -> tuple[float, float]:
    """(L1, L2): strut length and belt payout at the drum."""
    return strut_length(geom, q.q_a), belt_length(geom, q.q_c)


def act_diag(geom: RobotGeometry, q_a: float, q_c: float) -> tuple[float, float]:
    """Diagonal of the actuator jacobian: (dL1/dq_a, dL2/dq_c)."""
    l1 = strut_length(geom, q_a)
    d_l1 = -geom.l_ab * (geom.p1[0] * math.cos(q_a) - geom.p1[1] * math.sin(q_a)) / l1
    l2 = belt_length(geom, q_c)
    d_l2 = 4.0 * geom.d_g * geom.l_cd * math.cos(q_c) / l2
    return d_l1, d_l2


def jacobian_act(geom: RobotGeometry, q: JointState) -> np.ndarray:
    d1, d2 = act_diag(geom, q.q_a, q.q_c)
    return np.array([[d1, 0.0], [0.0, d2]])


def jacobian_total(geom: RobotGeometry, q: JointState) -> np.ndarray:
    """J_dk . inv(J_act): actuator rates to effector rates."""
    d1, d2 = act_diag(geom, q.q_a, q.q_c)
    if abs(d1) <= SINGULARITY_EPS:
        raise SingularTransmission("q_a", d1)
    if abs(d2) <= SINGULARITY_EPS:
        raise SingularTransmission("q_c", d2)
    j = jacobian_dk(geom, q)
    return j @ np.array([[1.0 / d1, 0.0], [0.0, 1.0 / d2]])


def effector_force_to_actuator_forces(
    geom: RobotGeometry, q: JointState, f_eff: tuple[float, float]
) -> tuple[float, float]:
    """Actuator forces statically equivalent to f_eff applied at E.

    Solves J_act^T F = J_dk^T f_eff, i.e. returns length-conjugate forces:
    a positive F2 does positive work while the belt pays out, which for a
    hanging load corresponds to physical tension.
    """
    d1, d2 = act_diag(geom, q.q_a, q.q_c)
    if abs(d1) <= SINGULARITY_EPS:
        raise SingularTransmission("q_a", d1)
    if abs(d2) <= SINGULARITY_EPS:
        raise SingularTransmission("q_c", d2)
    j11, j12, j21, j22 = dk_entries(geom, q.q_a, q.q_c)
    tau_a = j11 * f_eff[0] + j21 * f_eff[1]
    tau_c = j12 * f_eff[0] + j22 * f_eff[1]
    return tau_a / d1, tau_c / d2


def transfer_actuator_velocity(
    geom: RobotGeometry, q_a_locked: float, q_c: float, v_z: float
) -> float:
    """Belt payout rate for a target vertical effector speed, mast locked."""
    d_ez = -geom.l_ce * math.cos(q_a_locked + q_c)
    if abs(d_ez) <= SINGULARITY_EPS:
        raise SingularTransmission("q_c", d_ez)
    _, d_l2 = act_diag(geom, q_a_locked, q_c)
    return d_l2 * v_z / d_ez


# ---------------------------------------------------------------------------
# gravity model


def gravity_potential(
    geom: RobotGeometry,
    masses: LinkMassModel,
    q_a: float,
    q_c: float,
    bracket_term: bool = False,
) -> float:
    """Potential energy of both links (constant offsets dropped).

    ``bracket_term`` selects an alternate mass model that lumps an extra
    boom-bracket moment m_v*g*l_cd*cos(q_a) onto the mast; kept only for
    comparison, never the default.
    """
    phi = q_a + q_c
    v = (
        masses.m_h * GRAVITY * masses.L_h * math.cos(q_a)
        + masses.m_v * GRAVITY * (geom.l_ac * math.cos(q_a) - masses.L_v * math.sin(phi))
    )
    if bracket_term:
        v += masses.m_v * GRAVITY * geom.l_cd * math.cos(q_a)
    return v


def gravity_vec(
    geom: RobotGeometry,
    masses: LinkMassModel,
    q_a: float,
    q_c: float,
    bracket_term: bool = False,
) -> tuple[float, float]:
    """g(q) = dV/dq as plain floats (hot-path form)."""
    phi = q_a + q_c
    w2 = masses.m_v * GRAVITY * masses.L_v * math.cos(phi)
    g_a = -(masses.m_h * masses.L_h + masses.m_v * geom.l_ac) * GRAVITY * math.sin(q_a) - w2
    if bracket_term:
        g_a -= masses.m_v * GRAVITY * geom.l_cd * math.sin(q_a)
    return g_a, -w2


def gravity_torques(
    geom: RobotGeometry,
    masses: LinkMassModel,
    q: JointState,
    bracket_term: bool = False,
) -> tuple[float, float]:
    """Joint torques needed to hold the structure: g(q) = dV/dq."""
    return gravity_vec(geom, masses, q.q_a, q.q_c, bracket_term)
