"""Command-line interface: exit codes, presets, output management."""

import os

import numpy as np
import pytest

from vicsek_kinetic.cli import (
    EXIT_BAD_CONFIG,
    EXIT_OK,
    EXIT_OUTPUT_DIR,
    EXIT_UNKNOWN_PRESET,
    main,
)
from vicsek_kinetic.fileio import (
    SnapshotHeader,
    read_scan,
    read_series,
    write_snapshot,
)

SMALL_RUN = (
    "model = vicsek\nmu = 1.0\nsigma = 0.2\nc = 1.0\nlength = 2.0\n"
    "m_x = 8\nm_y = 8\nn_theta = 12\nt_end = 0.5\ninit = random\n"
    "init_amplitude = 0.4\ninit_mean_rho = 0.2\nseed = 3\ndiag_every = 0.25\n"
)


def test_unknown_preset_exit_code(tmp_path):
    assert main(["run", "not-a-preset", "--out", str(tmp_path / "x")]) == EXIT_UNKNOWN_PRESET


def test_malformed_config_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("mu = fast\n")
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == EXIT_BAD_CONFIG


def test_bad_override_exit_code(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_RUN)
    code = main(["run", str(cfg), "--out", str(tmp_path / "o"), "--override", "nope=3"])
    assert code == EXIT_BAD_CONFIG


def test_existing_output_needs_force(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_RUN)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_OK
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_OUTPUT_DIR
    assert main(["run", str(cfg), "--out", str(out), "--force"]) == EXIT_OK


def test_run_config_file_layout_and_determinism(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_RUN + "snapshot_every = 0.25\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--out", str(out1)]) == EXIT_OK
    assert main(["run", str(cfg), "--out", str(out2)]) == EXIT_OK
    for out in (out1, out2):
        assert (out / "config.echo").exists()
        assert (out / "series.csv").exists()
        assert (out / "snapshots").is_dir()
        assert (out / "diag").is_dir()
    assert (out1 / "series.csv").read_bytes() == (out2 / "series.csv").read_bytes()
    series = read_series(str(out1 / "series.csv"))
    np.testing.assert_allclose(series["mass"], series["mass"][0], rtol=1e-10)


def test_override_changes_run(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_RUN)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out), "--override", "t_end=0.25"]) == EXIT_OK
    series = read_series(str(out / "series.csv"))
    assert series["t"][-1] == pytest.approx(0.25)


def test_diag_uniform_snapshot_kappa_zero(tmp_path, capsys):
    # uniform state with sigma above the threshold: printed kappa is 0
    snap = tmp_path / "u.snap"
    values = np.full((4, 4, 8), 0.05)
    header = SnapshotHeader(
        t=0.0, length=10.0, m_x=4, m_y=4, n_theta=8,
        model="dfl", mu=1.0, sigma=0.5, c=1.0, layout="text",
    )
    write_snapshot(str(snap), header, values)
    assert main(["diag", str(snap), "--e-u", "--e-vm", "--kappa"]) == EXIT_OK
    outp = capsys.readouterr().out
    assert "kappa = 0" in outp
    lines = dict(
        line.split(" = ") for line in outp.strip().splitlines() if " = " in line
    )
    assert float(lines["E_u"]) == pytest.approx(0.0, abs=1e-12)
    assert float(lines["E_VM"]) == pytest.approx(0.0, abs=1e-12)
    assert float(lines["rho_bar"]) == pytest.approx(0.05, rel=1e-12)


def test_scan_phase_writes_grid(tmp_path):
    out = tmp_path / "scan"
    code = main([
        "scan-phase", "--rho-min", "0.03", "--rho-max", "0.09",
        "--sigma-min", "0.15", "--sigma-max", "0.25", "--steps", "2",
        "--out", str(out), "--override", "t_end=2.0", "--override", "m_x=20",
    ])
    assert code == EXIT_OK
    data = read_scan(str(out / "diag" / "phase_scan.csv"))
    assert data["rho_bar"].size == 4
    # kappa column obeys the threshold rule on every row
    thresh = np.pi * data["rho_bar"]
    assert np.all((data["kappa"] > 0) == (data["sigma"] < thresh))


def test_micro_command(tmp_path):
    cfg = tmp_path / "m.cfg"
    cfg.write_text(
        "n_particles = 150\nmu = 100.0\nsigma = 20.0\nc = 1.0\nradius = 0.02\n"
        "length = 4.0\ndt = 0.01\nmodel = vicsek\nseed = 2\nt_end = 0.1\n"
        "profile_dx = 0.5\nprofile_every = 0.05\n"
    )
    out = tmp_path / "m"
    assert main(["micro", str(cfg), "--out", str(out)]) == EXIT_OK
    assert (out / "diag" / "band_profile.csv").exists()
    snaps = sorted(os.listdir(out / "snapshots"))
    assert len(snaps) == 2  # initial and final particle dumps


def test_run_preset_accuracy_order_smoke(tmp_path):
    # scaled-down invocation of the preset machinery end to end
    out = tmp_path / "acc"
    code = main([
        "run", "accuracy-order", "--out", str(out),
        "--override", "t_end=0.1", "--override", "n_list=8,16,32",
        "--override", "n_ref=64",
    ])
    assert code == EXIT_OK
    assert (out / "diag" / "accuracy.csv").exists()
