import json
from pathlib import Path

import pytest
import yaml

from sgplate.cli import main
from sgplate.config import config_hash, load_config, parse_config
from sgplate.errors import ConfigError

ROOT = Path(__file__).resolve().parents[1]


def _write(tmp_path, cfg):
    p = tmp_path / "cfg.yaml"
    p.write_text(yaml.safe_dump(cfg))
    return p


def test_missing_degree_names_key():
    with pytest.raises(ConfigError, match="discretization.p"):
        parse_config({"experiment": "solve", "discretization": {"n_el": 4}, "data": {"u_star": "x1**3"}})


@pytest.mark.parametrize("raw,msg", [
    ({}, "experiment"),
    ({"experiment": "bake"}, "experiment must be"),
    ({"experiment": "verify", "colour": 1}, "unknown top-level"),
    ({"experiment": "solve", "discretization": {"p": 4, "n_el": 4}}, "data.u_star"),
    ({"experiment": "verify", "carleman": {"orders": [4]}}, "carleman.orders"),
    ({"experiment": "verify", "domain": {"R": 1}}, "domain.kind"),
])
def test_schema_errors(raw, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(raw)


def test_hash_is_canonical():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_seed_override(tmp_path):
    p = _write(tmp_path, {"experiment": "verify", "seed": 3})
    assert load_config(p).seed == 3
    assert load_config(p, seed=7).seed == 7


def test_exit_code_config_error(tmp_path, capsys):
    assert main(["solve", "--config", str(ROOT / "configs" / "bad_missing_degree.yaml"),
                 "--out", str(tmp_path)]) == 2
    assert "discretization.p" in capsys.readouterr().err
    assert main(["solve", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: [unclosed\n")
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_exit_code_numerical_failure(tmp_path):
    cfg = {"experiment": "solve", "domain": {"kind": "rectangle", "a": 1.0, "b": 0.5},
           "material": {"mu": "1 + x1**2/4", "lam": 1}, "discretization": {"p": 3, "n_el": 2},
           "data": {"source": "synthesize", "u_star": "x1**3"}}
    assert main(["solve", "--config", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 3


def test_solve_manufactured_cubic(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--config", str(ROOT / "configs" / "solve_disk_cubic.yaml"), "--out", str(out)]) == 0
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["h3_error_relative"] <= 1e-7
    lines = (out / "solution.csv").read_text().splitlines()
    assert lines[0] == f"# config_sha256={diag['config_sha256']}"
    assert lines[1] == "x1,x2,u,u1,u2"
    # 17 significant digits round-trip floats exactly
    x1 = lines[2].split(",")[0]
    assert float(repr(float(x1))) == float(x1)


def test_solve_output_byte_identical(tmp_path):
    cfg = str(ROOT / "configs" / "solve_rectangle_variable.yaml")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "3"]) == 0
    for name in ("solution.csv", "boundary_data.csv", "diagnostics.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_boundary_data_source(tmp_path):
    cfg = str(ROOT / "configs" / "solve_disk_cubic.yaml")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    raw = yaml.safe_load(Path(cfg).read_text())
    raw["data"] = {"source": "csv", "path": str(tmp_path / "a" / "boundary_data.csv")}
    assert main(["solve", "--config", str(_write(tmp_path, raw)), "--out", str(tmp_path / "b")]) == 0
    a = json.loads((tmp_path / "a" / "diagnostics.json").read_text())
    b = json.loads((tmp_path / "b" / "diagnostics.json").read_text())
    assert b["energy"] == pytest.approx(a["energy"], rel=1e-10)


def test_command_must_match_config(tmp_path):
    p = _write(tmp_path, {"experiment": "verify"})
    assert main(["solve", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_carleman_cli(tmp_path):
    cfg = {"experiment": "carleman-sweep", "carleman": {"orders": [1], "tau_count": 3}}
    assert main(["carleman-sweep", "--config", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "carleman_sweep_summary.json").read_text())
    assert summary["quadrature_drift"]["1"] < 0.05
    header = (tmp_path / "o" / "carleman.csv").read_text().splitlines()[1]
    assert header == "order,field_index,field,tau,lhs,rhs,ratio"
