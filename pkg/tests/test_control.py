import math
from dataclasses import replace

import numpy as np
import pytest

from stsbot.actuators import ACTUATOR_1, ACTUATOR_2_HF, ACTUATOR_2_HS, FrictionModel
from stsbot.control import (
    AssistMode,
    AssistModeConfig,
    SpeedControllerState,
    TransferConfig,
    anchor_y,
    desired_force_field,
    force_controller_step,
    speed_controller_step,
    transfer_trajectory,
)
from stsbot.errors import ConfigError, WrongMode
from stsbot.kinematics import (
    EffectorState,
    JointState,
    LinkMassModel,
    RobotGeometry,
    effector_position,
)

GEOM = RobotGeometry()
MASSES = LinkMassModel.for_geometry(GEOM)
ZERO_FRICTION = FrictionModel(0.0, 0.0)


def cfg(mode, fz=0.0, ky=0.0, height=1.75, weight=81.13, e_yi=0.0):
    return AssistModeConfig(mode, height, weight, fz_pct=fz, ky=ky, e_yi=e_yi)


# ---------------------------------------------------------------------------
# mode/parameter table


@pytest.mark.parametrize("mode,fz,ky,ok", [
    (AssistMode.FOLLOW_ME, 0.0, 0.0, True),
    (AssistMode.FOLLOW_ME, 0.1, 0.0, False),
    (AssistMode.FOLLOW_ME, 0.0, 100.0, False),
    (AssistMode.WEIGHT_UNLOADING, 0.1, 0.0, True),
    (AssistMode.WEIGHT_UNLOADING, 0.0, 0.0, False),
    (AssistMode.WEIGHT_UNLOADING, 0.1, 50.0, False),
    (AssistMode.COM_BALANCE, 0.1, 200.0, True),
    (AssistMode.COM_BALANCE, 0.0, 200.0, False),
    (AssistMode.COM_BALANCE, 0.1, 0.0, False),
    (AssistMode.TRANSFER, 0.0, 0.0, True),
])
def test_mode_parameter_consistency(mode, fz, ky, ok):
    if ok:
        cfg(mode, fz, ky)
    else:
        with pytest.raises(ConfigError):
            cfg(mode, fz, ky)


def test_fz_pct_range_enforced():
    with pytest.raises(ConfigError):
        cfg(AssistMode.WEIGHT_UNLOADING, fz=1.0)
    with pytest.raises(ConfigError):
        cfg(AssistMode.WEIGHT_UNLOADING, fz=-0.1)


# ---------------------------------------------------------------------------
# anchor axis


def test_anchor_y_cohort_mean_height():
    c = cfg(AssistMode.COM_BALANCE, fz=0.05, ky=300.0, height=1.75, e_yi=0.0)
    assert anchor_y(c) == pytest.approx(0.4375, abs=1e-12)


def test_anchor_y_tall_user_with_offset():
    c = cfg(AssistMode.COM_BALANCE, fz=0.05, ky=300.0, height=1.91, e_yi=0.10)
    assert anchor_y(c) == pytest.approx(0.5775, abs=1e-12)


def test_anchor_y_degenerate_height():
    c = cfg(AssistMode.COM_BALANCE, fz=0.05, ky=300.0, height=1e-300, e_yi=0.25)
    assert anchor_y(c) == pytest.approx(0.25, abs=1e-15)


def test_anchor_y_wrong_mode():
    with pytest.raises(WrongMode):
        anchor_y(cfg(AssistMode.FOLLOW_ME))


# ---------------------------------------------------------------------------
# force fields


def test_follow_me_field_is_zero():
    c = cfg(AssistMode.FOLLOW_ME)
    for y, z in ((0.3, 0.8), (0.9, 1.2), (0.6, 0.5)):
        assert desired_force_field(c, EffectorState(y, z)) == (0.0, 0.0)


def test_weight_unloading_field_magnitude():
    c = cfg(AssistMode.WEIGHT_UNLOADING, fz=0.10, weight=81.13)
    fy, fz = desired_force_field(c, EffectorState(0.7, 0.9))
    assert fy == 0.0
    assert fz == pytest.approx(0.10 * 81.13 * 9.81, abs=1e-9)
    assert fz == pytest.approx(79.59, abs=0.01)


def test_com_balance_spring_zero_at_anchor():
    c = cfg(AssistMode.COM_BALANCE, fz=0.05, ky=300.0, height=1.75, e_yi=0.2)
    fy, fz = desired_force_field(c, EffectorState(anchor_y(c), 0.9))
    assert fy == pytest.approx(0.0, abs=1e-12)
    assert fz == pytest.approx(0.05 * 81.13 * 9.81, abs=1e-9)


def test_com_balance_spring_sign_matches_anchor_side():
    c = cfg(AssistMode.COM_BALANCE, fz=0.05, ky=300.0, height=1.75, e_yi=0.0)
    a = anchor_y(c)
    for y in (a - 0.3, a - 0.01, a + 0.01, a + 0.3):
        fy, _ = desired_force_field(c, EffectorState(y, 0.9))
        assert math.copysign(1.0, fy) == math.copysign(1.0, a - y) or fy == 0.0


def test_com_balance_forward_only_clamp():
    c = replace(cfg(AssistMode.COM_BALANCE, fz=0.05, ky=300.0, e_yi=0.0),
                clamp_forward_only=True)
    fy, _ = desired_force_field(c, EffectorState(anchor_y(c) + 0.2, 0.9))
    assert fy == 0.0


def test_field_affine_in_parameters():
    # superposition in (fz_pct, ky) at a fixed state
    state = EffectorState(0.55, 0.85)
    c1 = cfg(AssistMode.COM_BALANCE, fz=0.04, ky=100.0, e_yi=0.1)
    c2 = cfg(AssistMode.COM_BALANCE, fz=0.08, ky=200.0, e_yi=0.1)
    f1 = desired_force_field(c1, state)
    f2 = desired_force_field(c2, state)
    assert f2[0] == pytest.approx(2.0 * f1[0], rel=1e-12)
    assert f2[1] == pytest.approx(2.0 * f1[1], rel=1e-12)


def test_transfer_has_no_force_field():
    with pytest.raises(WrongMode):
        desired_force_field(cfg(AssistMode.TRANSFER), EffectorState(0.5, 0.8))


# ---------------------------------------------------------------------------
# force controller


def controller(config, q, motor_vels=(0.0, 0.0), frictions=(ZERO_FRICTION, ZERO_FRICTION),
               allow_peak=False, trace=None):
    return force_controller_step(
        GEOM, MASSES, (ACTUATOR_1, ACTUATOR_2_HS), frictions, config, q, motor_vels,
        allow_peak=allow_peak, trace=trace)


def test_massless_frictionless_follow_me_commands_nothing():
    empty = LinkMassModel(0.0, 0.0, 0.305, 0.375, 0.0, 0.0)
    cmd = force_controller_step(
        GEOM, empty, (ACTUATOR_1, ACTUATOR_2_HS), (ZERO_FRICTION, ZERO_FRICTION),
        cfg(AssistMode.FOLLOW_ME), JointState(0.3, -0.4), (0.0, 0.0))
    assert cmd.f1 == pytest.approx(0.0, abs=1e-12)
    assert cmd.f2 == pytest.approx(0.0, abs=1e-12)


def test_static_command_cancels_gravity_exactly():
    # applying the command in the plant model yields zero acceleration
    from stsbot.kinematics import act_diag, gravity_vec

    for qa, qc in ((0.1, 0.2), (0.5, -0.9), (0.8, -0.3)):
        cmd = controller(cfg(AssistMode.FOLLOW_ME), JointState(qa, qc))
        d1, d2 = act_diag(GEOM, qa, qc)
        tau_act = np.array([d1 * cmd.f1, -d2 * cmd.f2])
        g = np.array(gravity_vec(GEOM, MASSES, qa, qc))
        assert np.allclose(tau_act, g, atol=1e-9)


def test_unloading_produces_belt_tension():
    cmd = controller(cfg(AssistMode.WEIGHT_UNLOADING, fz=0.10), JointState(0.2, -0.3))
    assert cmd.f2 > 0.0
    assert not cmd.saturated_2


def test_controller_saturation_flags():
    cmd = controller(cfg(AssistMode.WEIGHT_UNLOADING, fz=0.6, weight=120.0),
                     JointState(0.0, 0.0))
    assert cmd.saturated_1 or cmd.saturated_2


def test_controller_trace_stages():
    trace = {}
    fr = FrictionModel(50.0, 0.05)
    controller(cfg(AssistMode.WEIGHT_UNLOADING, fz=0.10), JointState(0.2, -0.4),
               motor_vels=(10.0, -10.0), frictions=(fr, fr), trace=trace)
    assert set(trace) == {"fy_des", "fz_des", "f1_map", "f2_map", "f1_fric", "f2_fric"}
    assert trace["f1_fric"] == pytest.approx(
        trace["f1_map"] + 50.0 * math.tanh(0.05 * 10.0), abs=1e-12)


def test_controller_rejects_transfer_mode():
    with pytest.raises(WrongMode):
        controller(cfg(AssistMode.TRANSFER), JointState(0.2, -0.3))


# ---------------------------------------------------------------------------
# speed controller


def test_pi_on_reference_returns_integrator():
    tr = TransferConfig(v_z_target=0.04, q_a_locked=0.3)
    state = SpeedControllerState(integral=123.0)
    from stsbot.kinematics import transfer_actuator_velocity

    v2_ref = transfer_actuator_velocity(GEOM, 0.3, -0.2, tr.signed_v_z)
    f2, _ = speed_controller_step(GEOM, ACTUATOR_2_HF, tr, -0.2, v2_ref, 1e-3, state)
    assert f2 == pytest.approx(123.0, abs=1e-9)


def test_pi_integrator_frozen_while_saturated():
    tr = TransferConfig(v_z_target=0.04, q_a_locked=0.3, kp=1e6)
    state = SpeedControllerState()
    # huge error drives the command onto the envelope; integrator must freeze
    _, new_state = speed_controller_step(GEOM, ACTUATOR_2_HF, tr, -0.2, 1.0, 1e-3, state)
    assert new_state.integral == 0.0


def test_pi_accumulates_when_inside_envelope():
    tr = TransferConfig(v_z_target=0.04, q_a_locked=0.3, kp=10.0, ki=100.0)
    state = SpeedControllerState()
    f2, new_state = speed_controller_step(GEOM, ACTUATOR_2_HF, tr, -0.2, 0.01, 1e-3, state,
                                          v_z_signed=0.0)
    assert new_state.integral == pytest.approx(100.0 * 0.01 * 1e-3, abs=1e-15)
    assert f2 == pytest.approx(10.0 * 0.01, abs=1e-12)


def test_transfer_config_validation():
    with pytest.raises(ConfigError):
        TransferConfig(v_z_target=0.0)
    with pytest.raises(ConfigError):
        TransferConfig(q_c_start=-0.6, q_c_end=0.0)


# ---------------------------------------------------------------------------
# transfer trajectory


def test_transfer_arc_radius():
    pts = transfer_trajectory(GEOM, 0.3, (0.45, -0.5), n=40)
    c = (GEOM.l_ac * math.sin(0.3), GEOM.base_height + GEOM.l_ac * math.cos(0.3))
    for y, z in pts:
        assert math.hypot(y - c[0], z - c[1]) == pytest.approx(GEOM.l_ce, abs=1e-12)


def test_transfer_arc_endpoints_match_fk():
    pts = transfer_trajectory(GEOM, 0.3, (0.45, -0.5), n=40)
    assert tuple(pts[0]) == pytest.approx(effector_position(GEOM, 0.3, 0.45), abs=1e-12)
    assert tuple(pts[-1]) == pytest.approx(effector_position(GEOM, 0.3, -0.5), abs=1e-12)


def test_transfer_arc_covers_seat_to_standing_heights():
    pts = transfer_trajectory(GEOM, 0.3, (0.45, -0.5), n=100)
    zs = pts[:, 1]
    assert zs.min() < 0.43 + 0.25  # below a seated CoM over a 0.43 m seat
    assert zs.max() > 0.95  # above a typical standing CoM height
