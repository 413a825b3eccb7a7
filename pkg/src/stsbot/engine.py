"""Fixed-step coupled dynamics of the arm and the surrogate human.

The plant integrates M(q)*qdd + C(q,qd)*qd + g(q) + D*qd =
J_act^T * F_transmitted + J_dk^T * F_harness with RK4 at a fixed step
(1 ms default).  Transmitted forces are the motor commands minus the plant's
own tanh friction, the belt clamped to tension-only.  The brake replaces the
q_a equation by an exact kinematic lock.  Everything is deterministic for a
given scenario and seed: the only randomness is a per-repetition duration
jitter drawn once from the seeded generator when the schedule is built.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .actuators import (
    ACTUATOR_1,
    ACTUATOR_2_HF,
    ACTUATOR_2_HS,
    DEFAULT_FRICTION_1,
    DEFAULT_FRICTION_2_HF,
    DEFAULT_FRICTION_2_HS,
    ActuatorSpec,
    FrictionModel,
    velocity_exceeded,
)
from .control import (
    AssistMode,
    AssistModeConfig,
    SpeedControllerState,
    TransferConfig,
    force_controller_step,
    speed_controller_step,
)
from .errors import ConfigError, NumericalDivergence
from .human import ChairModel, HarnessModel, HumanParams, STSReference, minimum_jerk
from .kinematics import (
    GRAVITY,
    JointState,
    LinkMassModel,
    RobotGeometry,
    act_diag,
    dk_entries,
    effector_position,
    gravity_potential,
    gravity_vec,
    inverse_kinematics,
)

# phase codes in the log
PHASE_SETTLE = 0
PHASE_RISE = 1
PHASE_PAUSE = 2
PHASE_DESCENT = 3
PHASE_PAUSE2 = 4

# hard floor under the human CoM: engages only when a failed motion collapses
# (a crumpled body still keeps its CoM above the ground plane)
FLOOR_Z = 0.10
FLOOR_STIFFNESS = 5.0e4
FLOOR_DAMPING = 1.0e3

CHANNELS = [
    "time", "rep", "phase",
    "q_a", "q_c", "qd_a", "qd_c",
    "e_y", "e_z", "e_vy", "e_vz",
    "fy_des", "fz_des",
    "f1_map", "f2_map", "f1_fric", "f2_fric", "f1_cmd", "f2_cmd",
    "sat_1", "sat_2", "vel_exc_1", "vel_exc_2",
    "f1_trans", "f2_trans",
    "v2_belt", "v2_ref",
    "harness_fy", "harness_fz",
    "com_y", "com_z", "vcom_y", "vcom_z", "acom_y", "acom_z",
    "chair_fz", "feet_fy", "feet_fz",
    "seat_off", "brake",
]
IDX = {name: i for i, name in enumerate(CHANNELS)}

CSV_SCHEMA_VERSION = "stsbot-log v1"


@dataclass
class SimLog:
    """Uniform-rate time series of every simulation channel."""

    dt: float
    data: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    def __len__(self) -> int:
        return len(self.data["time"])

    def to_csv(self) -> str:
        names = list(self.data.keys())
        cols = [self.data[n] for n in names]
        lines = [f"# {CSV_SCHEMA_VERSION}"]
        lines.append("# meta " + json.dumps(self.meta, sort_keys=True))
        lines.append(",".join(names))
        for i in range(len(cols[0])):
            lines.append(",".join(f"{c[i]:.17g}" for c in cols))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, path) -> "SimLog":
        meta: dict = {}
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("#") or CSV_SCHEMA_VERSION not in header:
                raise ConfigError(f"{path}: not a {CSV_SCHEMA_VERSION} file")
            line = fh.readline().strip()
            if line.startswith("# meta "):
                meta = json.loads(line[len("# meta "):])
                line = fh.readline().strip()
            names = line.split(",")
            rows = [list(map(float, ln.split(","))) for ln in fh if ln.strip()]
        arr = np.asarray(rows, dtype=float)
        data = {n: arr[:, i].copy() for i, n in enumerate(names)}
        t = data["time"]
        dt = float(t[1] - t[0]) if len(t) > 1 else float(meta.get("dt", 1e-3))
        return cls(dt, data, meta)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one deterministic simulation."""

    geom: RobotGeometry = RobotGeometry()
    masses: LinkMassModel | None = None
    human: HumanParams | None = None
    chair: ChairModel = ChairModel()
    harness: HarnessModel = HarnessModel()
    mode_config: AssistModeConfig | None = None
    transfer: TransferConfig | None = None
    sts: STSReference = STSReference()
    repetitions: int = 1
    pause: float = 2.0
    payload: float = 0.0
    robot_attached: bool = True
    dt: float = 1e-3
    seed: int = 0
    allow_peak: bool = False
    damping: tuple[float, float] = (0.5, 0.5)
    specs: tuple[ActuatorSpec, ActuatorSpec, ActuatorSpec] = (
        ACTUATOR_1, ACTUATOR_2_HS, ACTUATOR_2_HF)
    ctrl_frictions: tuple[FrictionModel, FrictionModel, FrictionModel] = (
        DEFAULT_FRICTION_1, DEFAULT_FRICTION_2_HS, DEFAULT_FRICTION_2_HF)
    plant_frictions: tuple[FrictionModel, FrictionModel, FrictionModel] = (
        DEFAULT_FRICTION_1, DEFAULT_FRICTION_2_HS, DEFAULT_FRICTION_2_HF)
    settle: float = 0.5
    rep_jitter: float = 0.05
    initial_q: JointState | None = None

    def validate(self) -> None:
        if not (0.0 < self.dt <= 5e-3):
            raise ConfigError("dt must lie in (0, 5e-3] s")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.pause < 0.0:
            raise ConfigError("pause must be non-negative")
        if self.payload < 0.0:
            raise ConfigError("payload must be non-negative")
        is_transfer = self.transfer is not None
        if self.payload > 0.0 and not is_transfer:
            raise ConfigError("payload requires the transfer configuration")
        if is_transfer and not self.robot_attached:
            raise ConfigError("transfer requires the robot")
        if not is_transfer and self.robot_attached and self.mode_config is None:
            raise ConfigError("rehabilitation runs need an assist mode config")
        if not is_transfer and self.human is None and not self.robot_attached:
            raise ConfigError("nothing to simulate: no human and no robot")

    def resolved_masses(self) -> LinkMassModel:
        return self.masses if self.masses is not None else LinkMassModel.for_geometry(self.geom)


@dataclass
class SimState:
    """Integrator state between steps (value object, copy to keep)."""

    t: float = 0.0
    q_a: float = 0.0
    q_c: float = 0.0
    qd_a: float = 0.0
    qd_c: float = 0.0
    com: tuple[float, float] = (0.0, 0.0)
    vcom: tuple[float, float] = (0.0, 0.0)
    seat_off: bool = False


@dataclass(frozen=True)
class _Segment:
    t0: float
    t1: float
    rep: int
    phase: int
    p0: tuple[float, float]
    p1: tuple[float, float]


class _Schedule:
    """Piecewise minimum-jerk reference with a monotone lookup cursor."""

    def __init__(self, segments: list[_Segment]):
        self.segments = segments
        self._i = 0

    @property
    def total(self) -> float:
        return self.segments[-1].t1

    def segment_at(self, t: float) -> _Segment:
        segs = self.segments
        i = self._i
        while i + 1 < len(segs) and t >= segs[i].t1:
            i += 1
        self._i = i
        return segs[i]

    def reference(self, t: float):
        seg = self.segment_at(t)
        dur = seg.t1 - seg.t0
        dy = seg.p1[0] - seg.p0[0]
        dz = seg.p1[1] - seg.p0[1]
        if dur <= 0.0 or (dy == 0.0 and dz == 0.0):
            return seg.p1, (0.0, 0.0)
        s, ds, _ = minimum_jerk((t - seg.t0) / dur)
        inv = 1.0 / dur
        return (seg.p0[0] + s * dy, seg.p0[1] + s * dz), (ds * dy * inv, ds * dz * inv)


def _build_schedule(scenario: Scenario) -> _Schedule:
    rng = np.random.default_rng(scenario.seed)
    segs: list[_Segment] = []
    zero = (0.0, 0.0)
    t = 0.0
    if scenario.transfer is not None:
        tr = scenario.transfer
        z0 = effector_position(scenario.geom, tr.q_a_locked, tr.q_c_start)[1]
        z1 = effector_position(scenario.geom, tr.q_a_locked, tr.q_c_end)[1]
        dur = abs(z1 - z0) / tr.v_z_target
        segs.append(_Segment(t, t + scenario.settle, -1, PHASE_SETTLE, zero, zero))
        t += scenario.settle
        for rep in range(scenario.repetitions):
            for phase, d in ((PHASE_RISE, dur), (PHASE_PAUSE, scenario.pause),
                             (PHASE_DESCENT, dur), (PHASE_PAUSE2, scenario.pause)):
                segs.append(_Segment(t, t + d, rep, phase, zero, zero))
                t += d
        return _Schedule(segs)

    human = scenario.human
    seated = human.seated_com if human else zero
    standing = human.standing_com if human else zero
    segs.append(_Segment(t, t + scenario.settle, -1, PHASE_SETTLE, seated, seated))
    t += scenario.settle
    for rep in range(scenario.repetitions):
        dur = scenario.sts.duration
        if scenario.rep_jitter > 0.0:
            dur *= 1.0 + scenario.rep_jitter * float(rng.uniform(-1.0, 1.0))
        segs.append(_Segment(t, t + dur, rep, PHASE_RISE, seated, standing))
        t += dur
        segs.append(_Segment(t, t + scenario.pause, rep, PHASE_PAUSE, standing, standing))
        t += scenario.pause
        segs.append(_Segment(t, t + dur, rep, PHASE_DESCENT, standing, seated))
        t += dur
        segs.append(_Segment(t, t + scenario.pause, rep, PHASE_PAUSE2, seated, seated))
        t += scenario.pause
    return _Schedule(segs)


class Plant:
    """Precomputed plant model: ``step`` integrates one control period."""

    def __init__(self, scenario: Scenario, schedule: _Schedule | None = None):
        scenario.validate()
        self.scenario = scenario
        g = scenario.geom
        m = scenario.resolved_masses()
        self.geom = g
        self.masses = m
        self.is_transfer = scenario.transfer is not None
        self.has_human = scenario.human is not None and not self.is_transfer
        self.attached = scenario.robot_attached
        self.has_arm = self.attached
        self.A1 = m.I_h + m.m_h * m.L_h**2 + m.m_v * g.l_ac**2
        self.B1 = m.I_v + m.m_v * m.L_v**2
        self.G1 = m.m_v * g.l_ac * m.L_v
        self.d_a, self.d_c = scenario.damping
        self.spec1 = scenario.specs[0]
        self.spec2 = scenario.specs[2] if self.is_transfer else scenario.specs[1]
        self.pf1 = scenario.plant_frictions[0]
        self.pf2 = scenario.plant_frictions[2] if self.is_transfer else scenario.plant_frictions[1]
        self.payload = scenario.payload
        self.harness = scenario.harness
        self.chair = scenario.chair
        self.human = scenario.human
        self.schedule = schedule or _build_schedule(scenario)
        if self.human is not None:
            self.chair_plane = self.chair.plane_z(self.human)

    # -- force pieces -----------------------------------------------------

    def _harness_force(self, e, ev, com, vcom):
        h = self.harness
        dx = e[0] - com[0] - h.rest_offset[0]
        dz = e[1] - com[1] - h.rest_offset[1]
        return (
            h.stiffness * dx + h.damping * (ev[0] - vcom[0]),
            h.stiffness * dz + h.damping * (ev[1] - vcom[1]),
        )

    def _chair_force(self, com, vcom, latched):
        if latched or self.human is None:
            return 0.0
        pen = self.chair_plane - com[1]
        if pen <= 0.0:
            return 0.0
        raw = self.chair.stiffness * pen - self.chair.damping * vcom[1]
        cap = (
            self.chair.support_fraction(self.human, com[0])
            * self.chair.support_cap
            * self.human.weight
        )
        return max(0.0, min(raw, cap))

    def _muscle(self, com, vcom, chair_fz, harness, ref_pos, ref_vel):
        hp = self.human
        baseline = max(0.0, hp.weight - chair_fz - harness[1])
        kp, kd = hp.track_kp, hp.track_kd
        fx = kp * (ref_pos[0] - com[0]) + kd * (ref_vel[0] - vcom[0])
        fz = baseline + kp * (ref_pos[1] - com[1]) + kd * (ref_vel[1] - vcom[1])
        fz = max(0.0, fz)
        norm = math.hypot(fx, fz)
        cap = hp.capacity
        if norm > cap:
            if cap <= 0.0:
                return 0.0, 0.0
            s = cap / norm
            fx *= s
            fz *= s
        return fx, fz

    @staticmethod
    def _floor_force(cz, cvz):
        pen = FLOOR_Z - cz
        if pen <= 0.0:
            return 0.0
        return max(0.0, FLOOR_STIFFNESS * pen - FLOOR_DAMPING * cvz)

    def transmitted_forces(self, state: "SimState", commands: tuple[float, float]
                           ) -> tuple[float, float]:
        """Plant-side transmitted forces for this control period.

        Friction is sampled at the control rate (held over the RK4 step):
        the tanh slope near zero speed is far stiffer than any structural
        mode and belongs to the drive electronics timescale, not the rigid
        body ODE.  The belt cannot push, so its transmitted force is
        clamped to tension.
        """
        d1, d2 = act_diag(self.geom, state.q_a, state.q_c)
        w1 = self.spec1.ratio * 1000.0 * (d1 * state.qd_a)
        w2 = self.spec2.ratio * 1000.0 * (-(d2 * state.qd_c))
        f1t = commands[0] - self.pf1.a * math.tanh(self.pf1.b * w1)
        f2t = max(0.0, commands[1] - self.pf2.a * math.tanh(self.pf2.b * w2))
        if self.is_transfer:
            f1t = 0.0
        return f1t, f2t

    # -- derivative -------------------------------------------------------

    def _deriv(self, t, s, f1t, f2t, latched):
        """s = (q_a, q_c, qd_a, qd_c, cy, cz, cvy, cvz) -> ds/dt.

        f1t/f2t are the transmitted actuator forces, already net of plant
        friction for this control period.
        """
        g = self.geom
        q_a, q_c, qd_a, qd_c, cy, cz, cvy, cvz = s

        hx = hz = 0.0
        ax = az = 0.0
        if self.has_human:
            com = (cy, cz)
            vcom = (cvy, cvz)
            if self.attached:
                j11, j12, j21, j22 = dk_entries(g, q_a, q_c)
                e = effector_position(g, q_a, q_c)
                ev = (j11 * qd_a + j12 * qd_c, j21 * qd_a + j22 * qd_c)
                hx, hz = self._harness_force(e, ev, com, vcom)
            chair_fz = self._chair_force(com, vcom, latched)
            ref_pos, ref_vel = self.schedule.reference(t)
            mx, mz = self._muscle(com, vcom, chair_fz, (hx, hz), ref_pos, ref_vel)
            mz += self._floor_force(cz, cvz)
            m = self.human.mass
            ax = (mx + hx) / m
            az = (mz + chair_fz + hz) / m - GRAVITY

        if not self.has_arm:
            return (0.0, 0.0, 0.0, 0.0, cvy, cvz, ax, az)

        d1, d2 = act_diag(g, q_a, q_c)
        g_a, g_c = gravity_vec(g, self.masses, q_a, q_c)

        if self.is_transfer:
            # brake engaged: exact 1-DOF integration about C
            d_ez = -g.l_ce * math.cos(q_a + q_c)
            rhs = -d2 * f2t - g_c - self.payload * GRAVITY * d_ez - self.d_c * qd_c
            m_eff = self.B1 + self.payload * g.l_ce**2
            return (0.0, qd_c, 0.0, rhs / m_eff, cvy, cvz, ax, az)

        tau_act_a = d1 * f1t
        tau_act_c = -d2 * f2t

        tau_h_a = tau_h_c = 0.0
        if self.has_human and self.attached:
            j11, j12, j21, j22 = dk_entries(g, q_a, q_c)
            tau_h_a = -(j11 * hx + j21 * hz)
            tau_h_c = -(j12 * hx + j22 * hz)

        s_c = math.sin(q_c)
        c_c = math.cos(q_c)
        gamma = -self.G1 * s_c
        gamma_p = -self.G1 * c_c
        m11 = self.A1 + self.B1 + 2.0 * gamma
        m12 = self.B1 + gamma
        m22 = self.B1
        cor_a = gamma_p * (2.0 * qd_a * qd_c + qd_c * qd_c)
        cor_c = -gamma_p * qd_a * qd_a
        rhs_a = tau_act_a + tau_h_a - g_a - self.d_a * qd_a - cor_a
        rhs_c = tau_act_c + tau_h_c - g_c - self.d_c * qd_c - cor_c
        det = m11 * m22 - m12 * m12
        qdd_a = (m22 * rhs_a - m12 * rhs_c) / det
        qdd_c = (m11 * rhs_c - m12 * rhs_a) / det
        return (qd_a, qd_c, qdd_a, qdd_c, cvy, cvz, ax, az)

    # -- integration ------------------------------------------------------

    def step(self, state: SimState, commands: tuple[float, float], dt: float) -> SimState:
        """One RK4 step; joint limits applied as hard stops afterwards."""
        f1, f2 = self.transmitted_forces(state, commands) if self.has_arm else (0.0, 0.0)
        latched = state.seat_off
        s = (state.q_a, state.q_c, state.qd_a, state.qd_c,
             state.com[0], state.com[1], state.vcom[0], state.vcom[1])
        t = state.t
        k1 = self._deriv(t, s, f1, f2, latched)
        h2 = dt / 2.0
        s2 = tuple(s[i] + h2 * k1[i] for i in range(8))
        k2 = self._deriv(t + h2, s2, f1, f2, latched)
        s3 = tuple(s[i] + h2 * k2[i] for i in range(8))
        k3 = self._deriv(t + h2, s3, f1, f2, latched)
        s4 = tuple(s[i] + dt * k3[i] for i in range(8))
        k4 = self._deriv(t + dt, s4, f1, f2, latched)
        h6 = dt / 6.0
        out = [s[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(8)]

        q_a, q_c, qd_a, qd_c = out[0], out[1], out[2], out[3]
        if self.has_arm:
            lo, hi = self.geom.q_a_limits
            if q_a < lo:
                q_a, qd_a = lo, max(0.0, qd_a)
            elif q_a > hi:
                q_a, qd_a = hi, min(0.0, qd_a)
            lo, hi = self.geom.q_c_limits
            if q_c < lo:
                q_c, qd_c = lo, max(0.0, qd_c)
            elif q_c > hi:
                q_c, qd_c = hi, min(0.0, qd_c)
        if self.is_transfer:
            q_a, qd_a = state.q_a, 0.0  # exact lock

        new = SimState(t + dt, q_a, q_c, qd_a, qd_c,
                       (out[4], out[5]), (out[6], out[7]), latched)

        # seat-off latch: once the chair unloads it stays unloaded
        if self.has_human and not latched:
            if self._chair_force(new.com, new.vcom, False) <= 0.0:
                new.seat_off = True

        if not all(math.isfinite(v) for v in (q_a, q_c, qd_a, qd_c, *new.com, *new.vcom)):
            raise NumericalDivergence(f"non-finite state at t={t:.3f}s")
        if abs(qd_a) > 50.0 or abs(qd_c) > 50.0 \
                or abs(new.vcom[0]) > 20.0 or abs(new.vcom[1]) > 20.0:
            raise NumericalDivergence(f"runaway velocity at t={t:.3f}s")
        return new

    def mechanical_energy(self, state: SimState) -> float:
        """Arm kinetic + potential energy (human terms excluded)."""
        gamma = -self.G1 * math.sin(state.q_c)
        m11 = self.A1 + self.B1 + 2.0 * gamma
        m12 = self.B1 + gamma
        ke = 0.5 * (m11 * state.qd_a**2 + 2.0 * m12 * state.qd_a * state.qd_c
                    + self.B1 * state.qd_c**2)
        return ke + gravity_potential(self.geom, self.masses, state.q_a, state.q_c)


def dynamics_step(plant: Plant, state: SimState, commands: tuple[float, float],
                  dt: float) -> SimState:
    """Public single-step entry point (see Plant.step)."""
    return plant.step(state, commands, dt)


# ---------------------------------------------------------------------------
# scenario execution


def _initial_state(scenario: Scenario) -> tuple[SimState, float]:
    """Start state plus the armed effector y position (e_yi)."""
    if scenario.transfer is not None:
        tr = scenario.transfer
        e_y = effector_position(scenario.geom, tr.q_a_locked, tr.q_c_start)[0]
        return SimState(q_a=tr.q_a_locked, q_c=tr.q_c_start), e_y
    if scenario.human is None:
        q0 = scenario.initial_q or JointState(0.2, 0.0)
        e_y = effector_position(scenario.geom, q0.q_a, q0.q_c)[0]
        return SimState(q_a=q0.q_a, q_c=q0.q_c), e_y
    com0 = scenario.human.seated_com
    if not scenario.robot_attached:
        return SimState(com=com0), com0[0]
    r0 = scenario.harness.rest_offset
    e0 = (com0[0] + r0[0], com0[1] + r0[1])
    q0 = inverse_kinematics(scenario.geom, e0)
    return SimState(q_a=q0.q_a, q_c=q0.q_c, com=com0), e0[0]


def run_scenario(scenario: Scenario) -> SimLog:
    """Execute the scenario and return the complete fixed-rate log."""
    scenario.validate()
    schedule = _build_schedule(scenario)
    plant = Plant(scenario, schedule)
    state, e_yi = _initial_state(scenario)

    mode_config = scenario.mode_config
    if mode_config is not None:
        mode_config = mode_config.with_e_yi(e_yi)

    geom = scenario.geom
    masses = plant.masses
    dt = scenario.dt
    n_steps = int(round(schedule.total / dt))
    is_transfer = scenario.transfer is not None
    rehab_ctrl = (scenario.robot_attached and not is_transfer
                  and mode_config is not None
                  and mode_config.mode is not AssistMode.TRANSFER)
    pi_state = SpeedControllerState()

    rows = np.zeros((n_steps, len(CHANNELS)))
    trace: dict = {}
    ref_track = _Schedule(schedule.segments)  # independent cursor for logging

    i_rep, i_phase = IDX["rep"], IDX["phase"]
    for i in range(n_steps):
        t = state.t
        seg = ref_track.segment_at(t)

        d1, d2 = act_diag(geom, state.q_a, state.q_c)
        l1_rate = d1 * state.qd_a
        l2_rate = d2 * state.qd_c

        f1_cmd = f2_cmd = 0.0
        sat1 = sat2 = False
        v2_ref = 0.0
        trace.clear()
        if rehab_ctrl:
            w1 = scenario.specs[0].ratio * 1000.0 * l1_rate
            w2 = scenario.specs[1].ratio * 1000.0 * (-l2_rate)
            cmd = force_controller_step(
                geom, masses, (scenario.specs[0], scenario.specs[1]),
                (scenario.ctrl_frictions[0], scenario.ctrl_frictions[1]),
                mode_config, JointState(state.q_a, state.q_c, state.qd_a, state.qd_c),
                (w1, w2), allow_peak=scenario.allow_peak, trace=trace,
            )
            f1_cmd, f2_cmd, sat1, sat2 = cmd.f1, cmd.f2, cmd.saturated_1, cmd.saturated_2
        elif is_transfer:
            if seg.phase == PHASE_RISE:
                v_z_signed = scenario.transfer.v_z_target
            elif seg.phase == PHASE_DESCENT:
                v_z_signed = -scenario.transfer.v_z_target
            else:
                v_z_signed = 0.0
            diag: dict = {}
            f2_cmd, pi_state = speed_controller_step(
                geom, scenario.specs[2], scenario.transfer, state.q_c,
                l2_rate, dt, pi_state, v_z_signed=v_z_signed, diag=diag,
            )
            v2_ref = diag["v2_ref"]
            sat2 = diag["saturated"]

        state = plant.step(state, (f1_cmd, f2_cmd), dt)

        # log the new sample with consistently recomputed forces
        row = rows[i]
        row[0] = state.t
        row[i_rep] = seg.rep
        row[i_phase] = seg.phase
        row[3] = state.q_a
        row[4] = state.q_c
        row[5] = state.qd_a
        row[6] = state.qd_c
        e = ev = None
        if scenario.robot_attached:
            j11, j12, j21, j22 = dk_entries(geom, state.q_a, state.q_c)
            e = effector_position(geom, state.q_a, state.q_c)
            ev = (j11 * state.qd_a + j12 * state.qd_c,
                  j21 * state.qd_a + j22 * state.qd_c)
            row[IDX["e_y"]], row[IDX["e_z"]] = e
            row[IDX["e_vy"]], row[IDX["e_vz"]] = ev
        if rehab_ctrl:
            row[IDX["fy_des"]] = trace.get("fy_des", 0.0)
            row[IDX["fz_des"]] = trace.get("fz_des", 0.0)
            row[IDX["f1_map"]] = trace.get("f1_map", 0.0)
            row[IDX["f2_map"]] = trace.get("f2_map", 0.0)
            row[IDX["f1_fric"]] = trace.get("f1_fric", 0.0)
            row[IDX["f2_fric"]] = trace.get("f2_fric", 0.0)
        row[IDX["f1_cmd"]] = f1_cmd
        row[IDX["f2_cmd"]] = f2_cmd
        row[IDX["sat_1"]] = float(sat1)
        row[IDX["sat_2"]] = float(sat2)
        nd1, nd2 = act_diag(geom, state.q_a, state.q_c)
        nl1_rate = nd1 * state.qd_a
        nl2_rate = nd2 * state.qd_c
        if scenario.robot_attached:
            spec2 = plant.spec2
            row[IDX["vel_exc_1"]] = float(
                velocity_exceeded(scenario.specs[0], nl1_rate, scenario.allow_peak))
            row[IDX["vel_exc_2"]] = float(
                velocity_exceeded(spec2, nl2_rate, scenario.allow_peak))
            f1t, f2t = plant.transmitted_forces(state, (f1_cmd, f2_cmd))
            row[IDX["f1_trans"]] = f1t
            row[IDX["f2_trans"]] = f2t
        row[IDX["v2_belt"]] = nl2_rate
        row[IDX["v2_ref"]] = v2_ref
        if plant.has_human:
            com, vcom = state.com, state.vcom
            hx = hz = 0.0
            if scenario.robot_attached:
                hx, hz = plant._harness_force(e, ev, com, vcom)
            chair_fz = plant._chair_force(com, vcom, state.seat_off)
            ref_pos, ref_vel = ref_track.reference(state.t)
            mx, mz = plant._muscle(com, vcom, chair_fz, (hx, hz), ref_pos, ref_vel)
            mz += plant._floor_force(com[1], vcom[1])
            m = scenario.human.mass
            row[IDX["harness_fy"]] = hx
            row[IDX["harness_fz"]] = hz
            row[IDX["com_y"]] = com[0]
            row[IDX["com_z"]] = com[1]
            row[IDX["vcom_y"]] = vcom[0]
            row[IDX["vcom_z"]] = vcom[1]
            row[IDX["acom_y"]] = (mx + hx) / m
            row[IDX["acom_z"]] = (mz + chair_fz + hz) / m - GRAVITY
            row[IDX["chair_fz"]] = chair_fz
            row[IDX["feet_fy"]] = mx
            row[IDX["feet_fz"]] = mz
            row[IDX["seat_off"]] = float(state.seat_off)
        row[IDX["brake"]] = float(is_transfer)

    data = {name: rows[:, k].copy() for k, name in enumerate(CHANNELS)}
    meta = {
        "dt": scenario.dt,
        "seed": scenario.seed,
        "repetitions": scenario.repetitions,
        "pause": scenario.pause,
        "settle": scenario.settle,
        "robot_attached": scenario.robot_attached,
        "payload": scenario.payload,
        "mode": (mode_config.mode.value if mode_config is not None
                 else ("transfer" if is_transfer else "none")),
        "fz_pct": mode_config.fz_pct if mode_config is not None else 0.0,
        "ky": mode_config.ky if mode_config is not None else 0.0,
        "height": scenario.human.height if scenario.human else 0.0,
        "weight": scenario.human.mass if scenario.human else 0.0,
        "mobility": scenario.human.mobility if scenario.human else 0.0,
        "duration": scenario.sts.duration,
        "v_z_target": scenario.transfer.v_z_target if is_transfer else 0.0,
    }
    return SimLog(scenario.dt, data, meta)


def transparency_pair(scenario_wr: Scenario, scenario_wor: Scenario) -> tuple[SimLog, SimLog]:
    """Run a matched with-robot / without-robot pair for paired metrics."""
    if scenario_wr.human != scenario_wor.human:
        raise ConfigError("transparency pair needs identical human parameters")
    if scenario_wr.seed != scenario_wor.seed:
        raise ConfigError("transparency pair needs identical seeds")
    if not scenario_wr.robot_attached or scenario_wor.robot_attached:
        raise ConfigError("first scenario must be WR, second WoR")
    return run_scenario(scenario_wr), run_scenario(scenario_wor)
