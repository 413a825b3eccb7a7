import json

import pytest

from stsbot.cli import EXIT_CONFIG, EXIT_OK, main
from stsbot.config import build_scenario, parse_config_text, validate_config
from stsbot.errors import ConfigError

FAST_SCENARIO = """
mode = weight_unloading
fz_pct = 0.10
repetitions = 1
pause = 0.2
settle = 0.1
sts.duration = 1.0
dt = 0.002
seed = 5
allow_peak = true
"""


def write(tmp_path, text, name="scenario.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------------------
# config parsing and validation


def test_defaults_resolve():
    cfg = parse_config_text("")
    assert cfg["mode"] == "follow_me"
    assert cfg["geometry.l_ab"] == 0.38
    assert cfg["human.height"] == 1.75


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("geometry.l_zz = 1.0")


def test_bad_value_rejected():
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_config_text("dt = fast")


def test_comments_and_blank_lines():
    cfg = parse_config_text("# comment\n\nfz_pct = 0.05  # inline\nmode = weight_unloading\n")
    assert cfg["fz_pct"] == 0.05


def test_mode_table_validation():
    cfg = parse_config_text("mode = follow_me\nfz_pct = 0.1")
    report = validate_config(cfg)
    assert not report.ok
    assert any("follow_me" in e for e in report.errors)


def test_com_balance_validation():
    cfg = parse_config_text("mode = com_balance\nfz_pct = 0.05\nky = 0")
    assert not validate_config(cfg).ok


def test_unreachable_attach_point_reported():
    cfg = parse_config_text("chair_y = 1.4")
    report = validate_config(cfg)
    assert not report.ok
    assert any("standing" in e or "seated" in e for e in report.errors)


def test_stroke_warning():
    cfg = parse_config_text("geometry.stroke_1 = 0.05")
    report = validate_config(cfg)
    assert any("stroke" in w for w in report.warnings)


def test_build_scenario_roundtrip():
    cfg = parse_config_text(FAST_SCENARIO)
    sc = build_scenario(cfg)
    assert sc.mode_config.fz_pct == 0.10
    assert sc.dt == 0.002
    sc.validate()


# ---------------------------------------------------------------------------
# CLI subcommands


def test_validate_ok(tmp_path, capsys):
    p = write(tmp_path, FAST_SCENARIO)
    assert main(["validate", "--config", str(p)]) == EXIT_OK
    assert "configuration ok" in capsys.readouterr().out


def test_validate_rejects_mode_conflict(tmp_path, capsys):
    p = write(tmp_path, "mode = follow_me\nfz_pct = 0.2\n")
    assert main(["validate", "--config", str(p)]) == EXIT_CONFIG
    out = capsys.readouterr().out
    assert "follow_me" in out


def test_simulate_writes_log_and_manifest(tmp_path):
    p = write(tmp_path, FAST_SCENARIO)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(p), "--out", str(out)]) == EXIT_OK
    text = (out / "log.csv").read_text()
    assert text.startswith("# stsbot-log v1")
    header = text.splitlines()[2]
    assert header.split(",")[0] == "time"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tool"] == "stsbot"
    assert manifest["config"]["fz_pct"] == 0.10


def test_simulate_rejects_invalid_config(tmp_path, capsys):
    p = write(tmp_path, "mode = follow_me\nfz_pct = 0.2\n")
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_simulate_reruns_byte_identical(tmp_path):
    p = write(tmp_path, FAST_SCENARIO)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(p), "--out", str(out1)]) == EXIT_OK
    assert main(["simulate", "--config", str(p), "--out", str(out2)]) == EXIT_OK
    assert (out1 / "log.csv").read_bytes() == (out2 / "log.csv").read_bytes()


def test_simulate_reproducible_from_manifest(tmp_path):
    p = write(tmp_path, FAST_SCENARIO)
    out1 = tmp_path / "a"
    main(["simulate", "--config", str(p), "--out", str(out1)])
    out2 = tmp_path / "b"
    assert main(["simulate", "--config", str(out1 / "manifest.json"),
                 "--out", str(out2)]) == EXIT_OK
    assert (out1 / "log.csv").read_bytes() == (out2 / "log.csv").read_bytes()


def test_map_writes_grid_and_metadata(tmp_path):
    p = write(tmp_path, "map.configuration = rehab\nmap.step = 0.1\n")
    out = tmp_path / "map"
    assert main(["map", "--config", str(p), "--out", str(out)]) == EXIT_OK
    lines = (out / "map.csv").read_text().splitlines()
    assert lines[0] == "y_m,z_m,fz_max_N,mask"
    meta = json.loads((out / "map.json").read_text())
    assert meta["requirement_N"] == 650.0
    assert meta["mask_legend"]["0"] == "ok"


def test_analyze_writes_metrics(tmp_path):
    p = write(tmp_path, FAST_SCENARIO)
    out = tmp_path / "run"
    main(["simulate", "--config", str(p), "--out", str(out)])
    assert main(["analyze", "--log", str(out / "log.csv"), "--out", str(out)]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["target_assistance"] == 0.10
    assert abs(metrics["measured_assistance"] - 0.10) < 0.02
    assert len(metrics["repetitions"]) == 1


def test_analyze_transfer_log(tmp_path):
    cfg = """
mode = transfer
transfer.v_z = 0.04
repetitions = 1
pause = 0.2
settle = 0.1
dt = 0.002
transfer.q_c_start = 0.3
transfer.q_c_end = 0.0
"""
    p = write(tmp_path, cfg)
    out = tmp_path / "tr"
    assert main(["simulate", "--config", str(p), "--out", str(out)]) == EXIT_OK
    assert main(["analyze", "--log", str(out / "log.csv"), "--out", str(out)]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert "transfer" in metrics
    assert metrics["transfer"]["lifting_speed_m_s"] > 0.02


def test_env_var_output_root(tmp_path, monkeypatch):
    p = write(tmp_path, FAST_SCENARIO)
    root = tmp_path / "envroot"
    monkeypatch.setenv("STSBOT_OUT_ROOT", str(root))
    monkeypatch.chdir(tmp_path)
    assert main(["simulate", "--config", str(p)]) == EXIT_OK
    assert (root / "log.csv").exists()
