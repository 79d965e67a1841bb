import copy
import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from focusfocus.cli import main
from focusfocus.config import load_config, parse_config, with_overrides
from focusfocus.errors import ValidationError
from focusfocus.report import CSV_HEADER, REPORT_KEYS, read_samples_csv

ROOT = Path(__file__).resolve().parents[1]
BASE = {
    "model": {"series": [[1, 0, 0.3], [0, 1, 0.1], [2, 0, 0.05], [1, 1, -0.02]], "epsilon": 0.4},
    "grid": {"r_min": 0.02, "r_max": 0.2, "n_r": 6, "n_theta": 12},
    "fit": {"degree": 2},
    "monodromy": {"radius": 0.1, "n_theta": 32},
}


def cfg_with(**blocks):
    raw = copy.deepcopy(BASE)
    for name, upd in blocks.items():
        if isinstance(upd, dict):
            raw.setdefault(name, {}).update(upd)
        else:
            raw[name] = upd
    return raw


def run(tmp_path, command, raw, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return main([command, "--config", str(path), "--out", str(tmp_path / "out"), *extra])


def test_defaults():
    cfg = parse_config({"model": {"series": [[1, 1, 1.0]], "epsilon": 0.4}})
    assert (cfg.grid.r_min, cfg.grid.r_max, cfg.grid.n_r, cfg.grid.n_theta) == pytest.approx((0.02, 0.2, 16, 32))
    assert cfg.fit.degree == 4 and cfg.fit.residual_ceiling == 1e-6
    assert cfg.model.k == 1 and cfg.model.backend == "analytic"
    assert cfg.monodromy_block().radius == pytest.approx(0.1)


@pytest.mark.parametrize(
    "raw, where",
    [
        (cfg_with(model={"epsilon": 1.2}), "model.epsilon"),
        (cfg_with(model={"colour": 1}), "model.colour"),
        (cfg_with(extra={}), "extra"),
        (cfg_with(grid={"r_max": 0.4}), "grid"),
        (cfg_with(grid={"n_r": 1}), "grid.n_r"),
        (cfg_with(model={"k": 2}), "model.transitions"),
        (cfg_with(model={"backend": "magic"}), "model.backend"),
        (cfg_with(fit={"degree": 0}), "fit.degree"),
        (cfg_with(integrator={"tol": 1e-2}), "integrator.tol"),
    ],
)
def test_validation_errors_name_the_key(raw, where):
    with pytest.raises(ValidationError, match=where.replace(".", r"\.")):
        parse_config(raw)


def test_overrides():
    cfg = with_overrides(parse_config(BASE), "numeric", 3)
    assert cfg.model.backend == "numeric" and cfg.fit.degree == 3


def test_load_config_errors(tmp_path):
    with pytest.raises(ValidationError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ValidationError, match="not valid JSON"):
        load_config(tmp_path / "bad.json")


def test_exit_code_validation(tmp_path, capsys):
    assert run(tmp_path, "extract", cfg_with(model={"epsilon": 1.2})) == 2
    assert "model.epsilon" in capsys.readouterr().err
    assert run(tmp_path, "extract", cfg_with(grid={"r_max": 0.5})) == 2


def test_exit_code_numeric(tmp_path, capsys):
    # a degree-1 fit cannot match a degree-2 invariant below the ceiling
    assert run(tmp_path, "extract", cfg_with(fit={"degree": 1, "residual_ceiling": 1e-12})) == 3
    assert "ceiling" in capsys.readouterr().err


def test_extract_artifacts(tmp_path):
    assert run(tmp_path, "extract", BASE) == 0
    out = tmp_path / "out"
    doc = json.loads((out / "report.json").read_text())
    assert list(doc) == REPORT_KEYS
    assert doc["monodromy"] == [[1, 1], [0, 1]] and doc["sample_count"] == 72
    assert 0 <= doc["sigma2_at_zero"] < 6.3
    rows = read_samples_csv(out / "samples.csv")
    assert len(rows) == 72
    assert (out / "samples.csv").read_text().splitlines()[0] == ",".join(CSV_HEADER)
    for name in ("sigma_radial.svg", "coeff_convergence.svg"):
        assert ET.parse(out / name).getroot().tag.endswith("svg")


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert run(a, "extract", BASE) == 0 and run(b, "extract", BASE) == 0
    for name in ("report.json", "samples.csv", "sigma_radial.svg", "coeff_convergence.svg"):
        assert (a / "out" / name).read_bytes() == (b / "out" / name).read_bytes()


def test_roundtrip_zero_series(tmp_path, capsys):
    assert run(tmp_path, "roundtrip", cfg_with(model={"series": []})) == 0
    assert capsys.readouterr().out.startswith("PASS roundtrip")
    assert json.loads((tmp_path / "out" / "roundtrip.json").read_text())["pass"] is True


def test_roundtrip_numeric(tmp_path):
    assert run(tmp_path, "roundtrip", BASE, "--backend", "numeric") == 0


def test_monodromy_command(tmp_path):
    assert run(tmp_path, "monodromy", BASE) == 0
    assert json.loads((tmp_path / "out" / "monodromy.json").read_text())["matrix"] == [[1, 1], [0, 1]]


def test_multipinch_command(tmp_path):
    raw = json.loads((ROOT / "configs" / "multipinch_k3.json").read_text())
    raw["grid"] = {"r_min": 0.02, "r_max": 0.2, "n_r": 6, "n_theta": 12}
    raw.pop("output", None)
    assert run(tmp_path, "multipinch", raw) == 0
    doc = json.loads((tmp_path / "out" / "multipinch.json").read_text())
    assert doc["k"] == 3 and doc["pass"] and len(doc["offsets"]) == 3
    assert run(tmp_path, "multipinch", BASE) == 2


def test_symmetry_command(tmp_path):
    assert run(tmp_path, "symmetry", BASE) == 0
    doc = json.loads((tmp_path / "out" / "symmetry.json").read_text())
    assert set(doc["checks"]) == {"flip-q2", "flip-q1"}


def test_console_entry_point(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps(BASE))
    proc = subprocess.run(
        [sys.executable, "-m", "focusfocus.cli", "monodromy", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "monodromy" in proc.stdout


def test_example_configs_parse():
    for p in sorted((ROOT / "configs").glob("*.json")):
        load_config(p)
