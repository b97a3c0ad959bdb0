import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from cwlm import io
from cwlm.cli import main
from cwlm.config import ConfigError, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = {
    "scenario": "ideal", "scenario_options": {"omega": 2.0},
    "prep": "Z+", "post": "Z-", "T": [0.2, 0.4], "grid": {"n": 64},
    "products": {"marginals": True, "slices": {"axis": 2, "values": [0.0, 0.5]},
                 "differences": True, "certainty": True,
                 "shifts": {"p_i": "Z+", "p_f": "Z+", "axis": "x"}},
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


@pytest.mark.parametrize("name", ["ideal.json", "ideal_no_drive.json", "experimental.json",
                                  "experimental_detuned.json"])
def test_shipped_configs_validate(name, capsys):
    assert main(["validate", "--config", str(CONFIGS / name)]) == 0
    assert capsys.readouterr().out.strip().endswith("valid")


def test_validate_reports_violation(tmp_path, capsys):
    cfg = dict(SMALL, correlators={"s_qq": 0.5})
    assert main(["validate", "--config", str(_write(tmp_path, cfg))]) == 2
    assert "INVALID" in capsys.readouterr().out


@pytest.mark.parametrize("bad", ['{"scenario": "ideal", "T": [1]', '{"scenario": "nope", "T": [1]}',
                                 '{"scenario": "ideal", "T": [-1]}', '{"scenario": "ideal"}',
                                 '{"scenario": "ideal", "T": [1], "colour": 3}'])
def test_malformed_config_exits_1(tmp_path, bad):
    path = tmp_path / "bad.json"
    path.write_text(bad)
    assert main(["validate", "--config", str(path)]) == 1


def test_usage_errors_exit_1(tmp_path):
    assert main(["frobnicate"]) == 1
    assert main(["validate"]) == 1
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 1


def test_t_units():
    run = parse_config({"scenario": "ideal", "scenario_options": {"omega": 4.0}, "T": [1, 2],
                        "T_unit": "inv_omega"})
    assert run.T == (0.25, 0.5)
    run = parse_config({"scenario": "experimental", "T": [0.5], "T_unit": "t_a"})
    assert run.T == (92.0,)
    with pytest.raises(ConfigError):
        parse_config({"scenario": "ideal", "scenario_options": {"omega": 0.0}, "T": [1],
                      "T_unit": "inv_omega"})


def test_simulate_writes_products(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(_write(tmp_path, SMALL)), "--out", str(out),
                 "--plots"]) == 0
    run = json.loads((out / "run.json").read_text())
    assert run["folders"] == ["T00", "T01"] and run["errors"] == {}
    for f in ("joint.csv", "joint.json", "joint.svg", "marginal_o1.csv", "marginal_o2.csv",
              "slice_given_o2_00.csv", "slice_given_o2_01.csv", "slices.json", "moments.json",
              "difference.csv", "certainty.csv", "certainty_slice.csv", "certainty.json"):
        assert (out / "T00" / f).is_file(), f
    o1, o2, p = io.read_joint(out / "T01" / "joint.csv")
    assert p.shape == (64, 64)
    assert p.sum() * (o1[1] - o1[0]) * (o2[1] - o2[0]) == pytest.approx(1, abs=1e-6)
    _, w = io.read_table(out / "shifts_weights.csv")
    assert w[:, 1] == pytest.approx([0.25, 0.5, 0.25], abs=1e-8)
    mom = json.loads((out / "T00" / "moments.json").read_text())
    assert mom["mean"][1] < 0


def test_csv_round_trip_is_byte_exact(tmp_path):
    out = tmp_path / "out"
    main(["simulate", "--config", str(_write(tmp_path, SMALL)), "--out", str(out)])
    src = out / "T00" / "joint.csv"
    o1, o2, p = io.read_joint(src)
    again = io.write_joint(tmp_path / "again.csv", o1, o2, p)
    assert again.read_bytes() == src.read_bytes()


def test_output_is_deterministic(tmp_path):
    cfg = _write(tmp_path, SMALL)
    for name in ("a", "b"):
        main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name)])
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_sweep_summary(tmp_path):
    cfg = dict(SMALL, T=[0.1, 0.2, 0.3])
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(_write(tmp_path, cfg)), "--out", str(out)]) == 0
    header, rows = io.read_table(out / "summary.csv")
    assert header[0] == "T" and "beta" in header
    assert rows.shape[0] == 3 and rows[:, 0] == pytest.approx([0.1, 0.2, 0.3])
    assert np.all(np.isfinite(rows))


def test_zero_postselection_is_recorded(tmp_path):
    cfg = {"scenario": "ideal", "scenario_options": {"omega": 0.0}, "correlators": {"s_qq": 0.0},
           "prep": "Z+", "post": "Z-", "T": [0.5], "grid": {"n": 64}}
    path = _write(tmp_path, cfg)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(path), "--out", str(out)]) == 2
    assert main(["simulate", "--config", str(path), "--out", str(out), "--force"]) == 3
    errors = json.loads((out / "run.json").read_text())["errors"]
    assert "ZeroPostSelectionProbability" in errors["T00"]


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "cwlm.cli", "validate", "--config",
                          str(CONFIGS / "ideal.json")], capture_output=True, text=True)
    assert res.returncode == 0 and "valid" in res.stdout
