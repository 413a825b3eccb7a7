"""Workspace capability maps, STS metrics, assistance/transfer tables and
waveform similarity for simulation logs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actuators import ActuatorSpec
from .engine import PHASE_DESCENT, PHASE_PAUSE, PHASE_RISE, SimLog
from .errors import DegenerateInput, EmptyWindow, OutOfJointLimits, SingularTransmission, Unreachable
from .kinematics import (
    GRAVITY,
    JointState,
    LinkMassModel,
    RobotGeometry,
    SINGULARITY_EPS,
    act_diag,
    dk_entries,
    gravity_vec,
    inverse_kinematics,
)

MASK_OK = 0
MASK_UNREACHABLE = 1
MASK_LIMITS = 2
MASK_SINGULAR = 3
MASK_INFEASIBLE = 4

# motion-window segmentation
SPEED_THRESHOLD = 0.02  # m/s
HYSTERESIS = 0.100  # s


# ---------------------------------------------------------------------------
# capability maps


@dataclass
class CapabilityMap:
    """Max upward effector force per workspace cell, with mask codes."""

    ys: np.ndarray
    zs: np.ndarray
    value: np.ndarray  # (nz, ny), NaN where masked
    mask: np.ndarray   # (nz, ny) int codes
    requirement: float
    configuration: str = "rehab"

    def cell_ok(self, iy: int, iz: int) -> bool:
        return self.mask[iz, iy] == MASK_OK

    def meets(self, iy: int, iz: int) -> bool:
        return self.cell_ok(iy, iz) and self.value[iz, iy] >= self.requirement


def _max_fz_cell(
    geom: RobotGeometry,
    masses: LinkMassModel,
    q: JointState,
    spec1: ActuatorSpec | None,
    spec2: ActuatorSpec,
) -> float | None:
    """Closed-form 1-D program: largest F_z >= 0 (F_y = 0) keeping the
    drives inside their peak envelopes, gravity self-load included.

    Each drive force is affine in F_z; the binding constraint gives the
    cell value.  Returns None when holding gravity alone (F_z = 0) is
    already infeasible.
    """
    d1, d2 = act_diag(geom, q.q_a, q.q_c)
    if abs(d1) <= SINGULARITY_EPS or abs(d2) <= SINGULARITY_EPS:
        raise SingularTransmission("q_a" if abs(d1) <= SINGULARITY_EPS else "q_c")
    j11, j12, j21, j22 = dk_entries(geom, q.q_a, q.q_c)
    g_a, g_c = gravity_vec(geom, masses, q.q_a, q.q_c)

    uppers: list[float] = []
    lowers: list[float] = [0.0]

    def box(a: float, b: float, lo: float, hi: float) -> bool:
        """Accumulate lo <= a + b*Fz <= hi; False when plainly infeasible."""
        if b > 0.0:
            uppers.append((hi - a) / b)
            lowers.append((lo - a) / b)
        elif b < 0.0:
            uppers.append((lo - a) / b)
            lowers.append((hi - a) / b)
        else:
            return lo - 1e-9 <= a <= hi + 1e-9
        return True

    # belt motor force (tension-positive) = -(g_c + J22*Fz)/d2, one-sided
    if not box(-g_c / d2, -j22 / d2, 0.0, spec2.f_max_peak):
        return None
    if spec1 is not None:
        # strut motor force = (g_a + J21*Fz)/d1, symmetric envelope
        if not box(g_a / d1, j21 / d1, -spec1.f_max_peak, spec1.f_max_peak):
            return None

    fz_max = min(uppers) if uppers else math.inf
    fz_min = max(lowers)
    if fz_min > 1e-9 or fz_max < 0.0:
        return None  # cannot even hold the structure at this pose
    return fz_max


def capability_map(
    geom: RobotGeometry,
    masses: LinkMassModel,
    spec1: ActuatorSpec,
    spec2: ActuatorSpec,
    configuration: str = "rehab",
    y_range: tuple[float, float] = (-0.2, 1.0),
    z_range: tuple[float, float] = (0.2, 1.4),
    step: float = 0.02,
    requirement: float | None = None,
) -> CapabilityMap:
    """Peak vertical force map over a (y, z) lattice.

    ``rehab`` constrains both drives; ``transfer`` locks q_a at each cell's
    IK solution (the brake carries the mast torque) so only the belt limits
    apply.
    """
    if configuration not in ("rehab", "transfer"):
        raise ValueError("configuration must be 'rehab' or 'transfer'")
    if requirement is None:
        requirement = 650.0 if configuration == "rehab" else 1962.0
    ys = np.arange(y_range[0], y_range[1] + step / 2, step)
    zs = np.arange(z_range[0], z_range[1] + step / 2, step)
    value = np.full((len(zs), len(ys)), np.nan)
    mask = np.full((len(zs), len(ys)), MASK_OK, dtype=int)
    use_spec1 = spec1 if configuration == "rehab" else None
    for iz, z in enumerate(zs):
        for iy, y in enumerate(ys):
            try:
                q = inverse_kinematics(geom, (float(y), float(z)))
            except Unreachable:
                mask[iz, iy] = MASK_UNREACHABLE
                continue
            except OutOfJointLimits:
                mask[iz, iy] = MASK_LIMITS
                continue
            try:
                fz = _max_fz_cell(geom, masses, q, use_spec1, spec2)
            except SingularTransmission:
                mask[iz, iy] = MASK_SINGULAR
                continue
            if fz is None:
                mask[iz, iy] = MASK_INFEASIBLE
                continue
            value[iz, iy] = fz
    return CapabilityMap(ys, zs, value, mask, requirement, configuration)


def nominal_sts_path(
    height: float = 1.91,
    chair_y: float = 0.44,
    harness_dz: float = 0.02,
    seat_height: float = 0.43,
    n: int = 200,
) -> np.ndarray:
    """Nominal effector path of a sit-to-stand: straight segment from the
    seated to the standing CoM, shifted up by the harness ride height.

    The default placement keeps the full path inside the force-capability
    aperture of the analysis; simulation scenarios place the chair for
    harness clearance instead.
    """
    seated = (chair_y, seat_height + 0.25 + harness_dz)
    standing = (chair_y + 0.25 * height, 0.55 * height + harness_dz)
    s = np.linspace(0.0, 1.0, n)
    return np.column_stack((
        seated[0] + s * (standing[0] - seated[0]),
        seated[1] + s * (standing[1] - seated[1]),
    ))


def band_cells(cmap: CapabilityMap, path: np.ndarray, width: float = 0.04) -> list[tuple[int, int]]:
    """Grid cells within ``width`` of the polyline (all cells, masked or not)."""
    out = []
    for iz, z in enumerate(cmap.zs):
        for iy, y in enumerate(cmap.ys):
            d = np.min(np.hypot(path[:, 0] - y, path[:, 1] - z))
            if d <= width:
                out.append((iy, iz))
    return out


def connected_fraction(cells: set[tuple[int, int]]) -> float:
    """Size of the largest 4-connected component over the cell count."""
    if not cells:
        return 0.0
    remaining = set(cells)
    best = 0
    while remaining:
        seed = remaining.pop()
        comp = 1
        frontier = [seed]
        while frontier:
            cy, cz = frontier.pop()
            for nb in ((cy + 1, cz), (cy - 1, cz), (cy, cz + 1), (cy, cz - 1)):
                if nb in remaining:
                    remaining.remove(nb)
                    frontier.append(nb)
                    comp += 1
        best = max(best, comp)
    return best / len(cells)


# ---------------------------------------------------------------------------
# motion windows and repetition handling


def repetition_indices(log: SimLog) -> list[int]:
    reps = sorted({int(r) for r in log["rep"] if r >= 0})
    return reps


def rise_window(log: SimLog, rep: int) -> np.ndarray:
    """Boolean row mask of the rise phase plus its pause for one repetition."""
    r = log["rep"]
    p = log["phase"]
    return (r == rep) & ((p == PHASE_RISE) | (p == PHASE_PAUSE))


def motion_window(log: SimLog, rep: int, speed_channels=("vcom_y", "vcom_z")) -> np.ndarray:
    """Velocity-threshold segmentation with hysteresis inside one rise phase.

    Falls back to the full rise window when the log holds no motion (static
    fidelity checks still need a window).
    """
    base = rise_window(log, rep)
    if not base.any():
        raise EmptyWindow(f"repetition {rep} not present in log")
    speed = np.hypot(log[speed_channels[0]], log[speed_channels[1]])
    above = base & (speed > SPEED_THRESHOLD)
    if not above.any():
        return base
    idx = np.flatnonzero(above)
    pad = int(round(HYSTERESIS / log.dt))
    lo = max(idx[0] - pad, np.flatnonzero(base)[0])
    hi = min(idx[-1] + pad, np.flatnonzero(base)[-1])
    out = np.zeros_like(base)
    out[lo:hi + 1] = True
    return out


# ---------------------------------------------------------------------------
# STS metrics


@dataclass
class StsMetrics:
    disp_y: float
    disp_z: float
    peak_vy: float
    peak_vz: float
    peak_ay: float
    peak_az: float
    peak_feet: float
    peak_chair: float
    seat_off_time: float

    def normalized(self, height: float, weight: float) -> "StsMetrics":
        """Lengths and velocities by stature, forces by bodyweight."""
        w = weight * GRAVITY
        return StsMetrics(
            self.disp_y / height, self.disp_z / height,
            self.peak_vy / height, self.peak_vz / height,
            self.peak_ay / height, self.peak_az / height,
            self.peak_feet / w, self.peak_chair / w,
            self.seat_off_time,
        )


def sts_metrics(log: SimLog, rep: int | None = None) -> list[StsMetrics]:
    """Per-repetition displacement, peak velocity/acceleration and GRF peaks."""
    reps = [rep] if rep is not None else repetition_indices(log)
    out = []
    for k in reps:
        win = motion_window(log, k)
        t = log["time"][win]
        cy, cz = log["com_y"][win], log["com_z"][win]
        seat = log["seat_off"][win]
        so = t[np.flatnonzero(seat > 0.5)[0]] - t[0] if (seat > 0.5).any() else math.nan
        out.append(StsMetrics(
            disp_y=float(cy.max() - cy.min()),
            disp_z=float(cz.max() - cz.min()),
            peak_vy=float(np.abs(log["vcom_y"][win]).max()),
            peak_vz=float(np.abs(log["vcom_z"][win]).max()),
            peak_ay=float(np.abs(log["acom_y"][win]).max()),
            peak_az=float(np.abs(log["acom_z"][win]).max()),
            peak_feet=float(log["feet_fz"][win].max()),
            peak_chair=float(log["chair_fz"][win].max()),
            seat_off_time=float(so),
        ))
    return out


# ---------------------------------------------------------------------------
# measured assistance (GRF-sum reading)


def measured_assistance_per_rep(log: SimLog, weight: float) -> list[float]:
    """1 - mean(chair+feet)/(m g) over each repetition's motion window."""
    w = weight * GRAVITY
    vals = []
    for k in repetition_indices(log):
        win = motion_window(log, k)
        grf = log["chair_fz"][win] + log["feet_fz"][win]
        vals.append(1.0 - float(grf.mean()) / w)
    if not vals:
        raise EmptyWindow("log holds no repetitions")
    return vals


def measured_assistance(log: SimLog, weight: float) -> float:
    """Participant-level mean of the per-repetition assistance fractions."""
    return float(np.mean(measured_assistance_per_rep(log, weight)))


def assistance_error_table(
    logs_by_level: dict[float, list[tuple[SimLog, float]]]
) -> dict[float, tuple[float, float, int]]:
    """Per target level: (mean error, sd, n) in bodyweight fraction.

    Errors are pooled per repetition across all (log, weight) pairs of a
    level; averaging across participants follows the nested-mean convention
    (per-repetition values first, then the pool statistics).
    """
    table = {}
    for level, pairs in logs_by_level.items():
        errors = []
        for log, weight in pairs:
            errors.extend(a - level for a in measured_assistance_per_rep(log, weight))
        if not errors:
            raise EmptyWindow(f"no repetitions at level {level}")
        arr = np.asarray(errors)
        table[level] = (float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0, len(arr))
    return table


# ---------------------------------------------------------------------------
# transfer speeds


def _phase_speed(log: SimLog, rep: int, phase: int, v_target: float) -> float:
    sel = (log["rep"] == rep) & (log["phase"] == phase)
    if not sel.any():
        raise EmptyWindow(f"phase {phase} of repetition {rep} missing")
    v = np.abs(log["e_vz"][sel])
    regulated = np.flatnonzero(v >= 0.5 * v_target)
    if len(regulated) < 10:
        return float(v.mean())
    lo, hi = regulated[0], regulated[-1]
    trim = max(1, (hi - lo) // 10)
    return float(v[lo + trim:hi - trim + 1].mean())


def transfer_speed_table(
    logs_by_payload: dict[float, SimLog]
) -> dict[float, tuple[float, float]]:
    """Mean regulated |v_z| while raising and lowering, per payload."""
    out = {}
    for payload, log in logs_by_payload.items():
        v_target = float(log.meta.get("v_z_target", 0.03))
        ups, downs = [], []
        for k in repetition_indices(log):
            ups.append(_phase_speed(log, k, PHASE_RISE, v_target))
            downs.append(_phase_speed(log, k, PHASE_DESCENT, v_target))
        out[payload] = (float(np.mean(ups)), float(np.mean(downs)))
    return out


# ---------------------------------------------------------------------------
# waveform similarity


def cmc(waveforms) -> float:
    """Coefficient of multiple correlation of equal-length waveforms.

    sqrt(max(0, 1 - within-time scatter / grand scatter)); invariant under a
    global affine transform applied identically to every waveform.
    """
    y = np.asarray(waveforms, dtype=float)
    if y.ndim != 2 or y.shape[0] < 2 or y.shape[1] < 2:
        raise DegenerateInput("need at least two waveforms of length >= 2")
    w, t = y.shape
    mean_t = y.mean(axis=0)
    grand = y.mean()
    denom = ((y - grand) ** 2).sum() / (w * t - 1)
    if denom == 0.0:
        raise DegenerateInput("waveform set carries no variance")
    numer = ((y - mean_t) ** 2).sum() / (t * (w - 1))
    return math.sqrt(max(0.0, 1.0 - numer / denom))


def resample(series: np.ndarray, n: int) -> np.ndarray:
    """Linear resampling onto n uniformly spaced points."""
    series = np.asarray(series, dtype=float)
    if len(series) < 2:
        raise DegenerateInput("cannot resample fewer than 2 samples")
    x = np.linspace(0.0, 1.0, len(series))
    return np.interp(np.linspace(0.0, 1.0, n), x, series)


def mean_rise_waveform(log: SimLog, channel: str, n: int = 101) -> np.ndarray:
    """Across-repetition mean of a channel over the rise motion window,
    time-normalized to n samples."""
    reps = repetition_indices(log)
    if not reps:
        raise EmptyWindow("log holds no repetitions")
    acc = np.zeros(n)
    for k in reps:
        win = motion_window(log, k)
        acc += resample(log[channel][win], n)
    return acc / len(reps)
