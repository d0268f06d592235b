"""CLI runner: validation messages, exit codes, record determinism."""

import json
import os

import numpy as np
import pytest

from sle_lab import ConfigInvalid, r_critical
from sle_lab.cli import (
    DEFAULTS,
    EXPERIMENTS,
    ExperimentConfig,
    build_config,
    emit_alpha_curve,
    main,
    run,
    validate,
)
from sle_lab import _report


def test_defaults_validate_clean():
    for name in EXPERIMENTS:
        c = ExperimentConfig(experiment=name, **DEFAULTS[name])
        assert validate(c) == [], name


def test_validate_golden_messages():
    c = ExperimentConfig(experiment="trace", kappa=2.0, T=1.0, dt=0.0, n=100)
    assert validate(c) == ["dt must be positive"]

    c = ExperimentConfig(experiment="yn", kappa=8 / 3, r=1.0, n=16, samples=10)
    assert validate(c) == []

    c = ExperimentConfig(
        experiment="yn", kappa=6.0, r=r_critical(6.0) - 1e-9, n=16, samples=10
    )
    assert validate(c) == ["λβ+ζ ≥ 2"]

    c = ExperimentConfig(
        experiment="moments", kappa=8.0, r=1.0, t_grid=(2.0, 4.0),
        samples=200, dt=1e-3,
    )
    assert validate(c) == ["r ≥ r_c"]


def test_validate_collects_multiple_violations():
    c = ExperimentConfig(experiment="trace", kappa=-1.0, T=0.0, dt=0.0, n=100)
    msgs = validate(c)
    assert "kappa must be positive" in msgs
    assert "dt must be positive" in msgs
    assert "T must be positive" in msgs


def test_main_exponents_roundtrip(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["exponents", "--kappa", "1", "--out", out]) == 0
    rec = _report.read_json(os.path.join(out, "exponents_record.json"))
    assert rec["estimates"]["alpha_star"] == 0.5
    assert rec["files"] == ["exponents.csv"]
    header, cols = _report.read_table(os.path.join(out, "exponents.csv"))
    assert header == ["kappa", "r", "lambda", "zeta", "beta", "q",
                      "r_c", "r_plus", "beta_plus", "alpha_star", "alpha_zero"]
    assert cols[0][0] == 1.0
    capsys.readouterr()


def test_main_rejects_supercritical_r(tmp_path, capsys):
    code = main(["moments", "--kappa", "8", "--r", "1", "--out", str(tmp_path)])
    assert code == 2
    assert "error: r ≥ r_c" in capsys.readouterr().err


def test_main_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"kappa": 2.0, "kapa": 3.0}))
    code = main(["exponents", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 2
    assert "unknown config field 'kapa'" in capsys.readouterr().err


def test_main_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{kappa: 2.0")
    code = main(["exponents", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_flags_beat_config_file_beat_defaults(tmp_path):
    cfg = tmp_path / "override.json"
    cfg.write_text(json.dumps({"kappa": 3.0, "seed": 9}))
    c = build_config(["exponents", "--config", str(cfg), "--kappa", "4.0"])
    assert c.kappa == 4.0   # flag wins
    assert c.seed == 9      # config file beats the default 0
    c2 = build_config(["exponents"])
    assert c2.kappa == DEFAULTS["exponents"]["kappa"]


def test_env_var_overrides_out_flag(tmp_path, monkeypatch):
    env_dir = tmp_path / "env_out"
    monkeypatch.setenv("SLE_LAB_OUT", str(env_dir))
    assert main(["exponents", "--out", str(tmp_path / "flag_out")]) == 0
    assert (env_dir / "exponents_record.json").exists()
    assert not (tmp_path / "flag_out").exists()


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["trace", "--T", "0.25", "--dt", "1e-3", "--points", "64",
            "--seed", "3"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    for fname in ("trace_record.json", "trace.csv"):
        assert (a / fname).read_bytes() == (b / fname).read_bytes()
    # the runtime sidecar is the one file allowed to differ
    ra = json.loads((a / "trace_runtime.json").read_text())
    assert set(ra) == {"experiment", "runtime_s"}


def test_worker_count_keeps_records_identical(tmp_path):
    base = dict(DEFAULTS["typical"], y_grid=(0.05, 0.1), samples=40)
    recs = []
    for w in (1, 2):
        c = ExperimentConfig(
            experiment="typical", out_dir=str(tmp_path / f"w{w}"),
            workers=w, **base,
        )
        recs.append(run(c).to_json_dict())
    assert recs[0] == recs[1]


def test_json_format_embeds_tables(tmp_path):
    c = ExperimentConfig(
        experiment="exponents", kappa=2.0, out_dir=str(tmp_path), format="json"
    )
    rec = run(c)
    assert rec.files == []
    assert "exponents" in rec.tables
    assert rec.tables["exponents"]["header"][0] == "kappa"


def test_alpha_curve_emitter(tmp_path):
    out = tmp_path / "curve.csv"
    emit_alpha_curve(0.5, 2.0, 3, out)
    header, cols = _report.read_table(out)
    assert header == ["kappa", "alpha_star", "alpha_zero"]
    assert cols[0].size == 3
    mid = np.argmin(np.abs(cols[0] - 1.0))
    assert abs(cols[1][mid] - 0.5) < 1e-9
    assert abs(cols[2][mid] - 0.5) < 1e-9

    # the curve touches zero exactly at kappa = 8, then climbs again
    out8 = tmp_path / "curve8.csv"
    emit_alpha_curve(8.0, 16.0, 2, out8)
    _, cols8 = _report.read_table(out8)
    assert cols8[0].size == 2
    assert abs(cols8[1][0]) < 1e-9
    assert cols8[1][1] > 0.04

    with pytest.raises(ConfigInvalid):
        emit_alpha_curve(2.0, 1.0, 5, tmp_path / "x.csv")
    with pytest.raises(ConfigInvalid):
        emit_alpha_curve(0.5, 2.0, 1, tmp_path / "y.csv")


def test_record_hash_tracks_config(tmp_path):
    c1 = ExperimentConfig(experiment="exponents", kappa=2.0, out_dir=str(tmp_path))
    c2 = ExperimentConfig(experiment="exponents", kappa=3.0, out_dir=str(tmp_path))
    r1, r2 = run(c1), run(c2)
    assert r1.input_hash != r2.input_hash
    assert run(c1).input_hash == r1.input_hash
