"""Unit tests for configs and the command-line interface."""

import os
import shutil
import subprocess
import sys

import pytest

from levyva.cli import main
from levyva.config import ConfigError, load_config, parse_config, serialize_config

DATA_CFG = os.path.join(os.path.dirname(__file__), "..", "src", "levyva", "data", "table1.cfg")


def small_cfg(tmp_path, maturity=3.0, extra=""):
    """A fast-running copy of the reference config."""
    text = open(DATA_CFG).read()
    text = text.replace("maturity = 4.0", f"maturity = {maturity}")
    text = text.replace("samples_per_batch = 100000", "samples_per_batch = 2000")
    text = text.replace("batches = 10", "batches = 4")
    text = text.replace("oracle_paths = 100000", "oracle_paths = 4000")
    text = text.replace("oracle_step = 0.00390625", "oracle_step = 0.015625")
    text = text.replace("oracle_batches = 10", "oracle_batches = 4")
    if extra:
        text += "\n" + extra + "\n"
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def read_csv(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# fingerprint=")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return lines[0], header, rows


def test_config_round_trip(tmp_path):
    cfg = load_config(DATA_CFG)
    text = serialize_config(cfg)
    path = tmp_path / "round.cfg"
    path.write_text(text)
    again = load_config(str(path))
    assert serialize_config(again) == text


def test_unknown_key_reported_with_line_number(tmp_path):
    path = tmp_path / "bad.cfg"
    lines = open(DATA_CFG).read().splitlines()
    lines.insert(lines.index("[market]") + 1, "mystery_knob = 1.0")
    path.write_text("\n".join(lines))
    with pytest.raises(ConfigError) as err:
        load_config(str(path))
    msg = str(err.value)
    assert "mystery_knob" in msg
    assert "line" in msg


def test_duplicate_key_rejected(tmp_path):
    path = tmp_path / "dup.cfg"
    path.write_text(open(DATA_CFG).read() + "\n[surrender]\nbeta_s = 0.01\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_invalid_grid_rejected(tmp_path):
    # surrender_step equal to maturity leaves no surrender dates before T.
    cfg = small_cfg(tmp_path)
    text = open(cfg).read().replace("surrender_step = 1.0", "surrender_step = 3.0")
    open(cfg, "w").write(text)
    with pytest.raises((ConfigError, ValueError)):
        config = load_config(cfg)
        config.validate()
        config.contract()


def test_zero_oracle_paths_rejected(tmp_path):
    cfg = small_cfg(tmp_path)
    text = open(cfg).read().replace("oracle_paths = 4000", "oracle_paths = 0")
    open(cfg, "w").write(text)
    with pytest.raises(ConfigError):
        load_config(cfg).validate()


def test_price_csv_layout(tmp_path):
    cfg = small_cfg(tmp_path)
    out = str(tmp_path / "price.csv")
    assert main(["price", "--config", cfg, "--out", out]) == 0
    fp_line, header, rows = read_csv(out)
    assert header == ["component", "value", "std_error", "batches", "samples", "seed"]
    assert [r[0] for r in rows] == ["GMAB", "DB", "SB", "VA"]
    va = float(rows[3][1])
    assert va == pytest.approx(sum(float(r[1]) for r in rows[:3]), rel=1e-12)


def test_price_reruns_byte_identical(tmp_path):
    cfg = small_cfg(tmp_path)
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["price", "--config", cfg, "--out", out1]) == 0
    assert main(["price", "--config", cfg, "--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_price_seed_override_changes_values(tmp_path):
    cfg = small_cfg(tmp_path)
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["price", "--config", cfg, "--out", out1]) == 0
    assert main(["price", "--config", cfg, "--out", out2, "--seed", "5"]) == 0
    a = read_csv(out1)[2]
    b = read_csv(out2)[2]
    assert a[0][1] != b[0][1]


def test_sweep_single_point_matches_price(tmp_path):
    cfg_sweep = small_cfg(tmp_path, extra="[sweep]\nparameter = beta_s\nvalues = 0.05")
    out_sweep = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", cfg_sweep, "--out", out_sweep]) == 0
    _, header, rows = read_csv(out_sweep)
    assert header == ["grid_point", "component", "value", "std_error"]
    assert [r[1] for r in rows] == ["GMAB", "DB", "SB", "VA"]
    assert all(r[0] == "beta_s=0.050000000000000003" for r in rows)

    cfg_price = small_cfg(tmp_path)
    out_price = str(tmp_path / "price.csv")
    assert main(["price", "--config", cfg_price, "--out", out_price]) == 0
    price_rows = read_csv(out_price)[2]
    for sweep_row, price_row in zip(rows, price_rows):
        assert sweep_row[2] == price_row[1]


def test_sweep_without_section_fails(tmp_path):
    cfg = small_cfg(tmp_path)
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", cfg, "--out", out]) == 1


def test_benchmark_csv(tmp_path):
    cfg = small_cfg(tmp_path)
    out = str(tmp_path / "bench.csv")
    assert main(["benchmark", "--config", cfg, "--out", out]) == 0
    _, header, rows = read_csv(out)
    assert header == ["integral", "dimension", "quadrature", "mc", "bias_pct", "se_pct"]
    names = [r[0] for r in rows]
    assert names[0] == "A1" and names[1] == "A2"
    assert any(n.startswith("A2_death_") for n in names)
    assert any(n.startswith("B2_") for n in names)
    for r in rows:
        quad, mc = float(r[2]), float(r[3])
        assert abs(mc - quad) / max(1.0, abs(quad)) < 0.05


def test_missing_config_errors_cleanly(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert main(["price", "--config", str(tmp_path / "nope.cfg"), "--out", out]) == 1
    assert "error:" in capsys.readouterr().err


def test_worker_env_does_not_change_output(tmp_path, monkeypatch):
    cfg = small_cfg(tmp_path)
    out1, out2 = str(tmp_path / "w1.csv"), str(tmp_path / "w4.csv")
    monkeypatch.setenv("LEVYVA_WORKERS", "1")
    assert main(["price", "--config", cfg, "--out", out1]) == 0
    monkeypatch.setenv("LEVYVA_WORKERS", "4")
    assert main(["price", "--config", cfg, "--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_console_script_installed():
    exe = shutil.which("levyva")
    assert exe is not None
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "price" in proc.stdout
