"""Config parsing/serialization, report emission determinism, and the CLI."""

import json
import os

import numpy as np
import pytest

from relaxlab import (
    ExperimentConfig,
    ParseError,
    ValidationError,
    default_config,
    eps_sweep,
    parse_config_text,
    serialize_config,
)
from relaxlab.cli import main
from relaxlab.reporting import csv_text, emit_csv, emit_json

SMALL_CFG = """
# quick euler sweep
system = euler
N = 32
T = 0.2
eps_ladder = 0.4, 0.2, 0.1
nsamples = 11
delta = 0.05
"""


def small_config():
    return parse_config_text(SMALL_CFG)


def test_default_configs_validate():
    default_config("euler").validate()
    default_config("em").validate()


def test_default_em_shape():
    cfg = default_config("em")
    assert cfg.d == 3 and cfg.N == 32 and cfg.system == "em"


def test_validation_rejects_em_in_1d():
    cfg = default_config("em")
    cfg.d = 1
    with pytest.raises(ValidationError):
        cfg.validate()


def test_validation_rejects_bad_ladder():
    cfg = default_config("euler")
    cfg.eps_ladder = (0.1, 0.2)
    with pytest.raises(ValidationError):
        cfg.validate()
    cfg.eps_ladder = (1.5, 0.1)
    with pytest.raises(ValidationError):
        cfg.validate()


def test_validation_rejects_non_power_of_two():
    cfg = default_config("euler")
    cfg.N = 100
    with pytest.raises(ValidationError):
        cfg.validate()


def test_parse_serialize_roundtrip():
    cfg = small_config()
    again = parse_config_text(serialize_config(cfg))
    assert again == cfg


def test_parse_comments_and_blanks():
    cfg = parse_config_text("# only a comment\n\nN = 64\n")
    assert cfg.N == 64 and cfg.system == "euler"


def test_parse_error_reports_line_and_key():
    with pytest.raises(ParseError) as err:
        parse_config_text("N = 64\nbogus_key = 3\n")
    assert err.value.line == 2
    assert err.value.key == "bogus_key"
    with pytest.raises(ParseError) as err:
        parse_config_text("N = not_a_number\n")
    assert err.value.line == 1


def test_parse_error_on_missing_equals():
    with pytest.raises(ParseError):
        parse_config_text("just some words\n")


@pytest.fixture(scope="module")
def small_report():
    cfg = small_config()
    return eps_sweep(cfg, cfg.eps_ladder)


def test_csv_deterministic(small_report):
    assert csv_text(small_report) == csv_text(small_report)


def test_csv_row_count(small_report):
    lines = csv_text(small_report).strip().split("\n")
    want = sum(len(r.metrics) for r in small_report.table.rows)
    assert len(lines) == want + 1  # header


def test_emit_files_identical(small_report, tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(small_report, p1)
    emit_csv(small_report, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_emit_json_structure(small_report, tmp_path):
    path = tmp_path / "r.json"
    emit_json(small_report, path)
    doc = json.loads(path.read_text())
    assert doc["config"]["system"] == "euler"
    assert len(doc["rows"]) == len(small_report.table.rows)
    assert set(doc["fits"]) == set(small_report.fits)


def test_cli_sweep_writes_reports(tmp_path, capsys):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(SMALL_CFG)
    out_dir = tmp_path / "out"
    rc = main(["sweep", "--config", str(cfg_path), "--out-dir", str(out_dir)])
    assert rc == 0
    for name in ("sweep.csv", "sweep.json", "plot_rates.py", "rates.png"):
        assert (out_dir / name).exists(), name
    text = capsys.readouterr().out
    assert "slope" in text


def test_cli_run_single_rung(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(SMALL_CFG)
    out_dir = tmp_path / "out"
    rc = main(["run", "--config", str(cfg_path), "--eps", "0.2",
               "--out-dir", str(out_dir), "--no-figures"])
    assert rc == 0
    assert (out_dir / "sweep.csv").exists()


def test_cli_check_passes(capsys):
    assert main(["check", "--d", "1"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_cli_show_config_roundtrips(capsys):
    assert main(["show-config", "--system", "em"]) == 0
    text = capsys.readouterr().out
    assert parse_config_text(text) == default_config("em")


def test_cli_bad_config_exits_2(tmp_path, capsys):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("nonsense = 1\n")
    assert main(["sweep", "--config", str(cfg_path)]) == 2
    assert "error:" in capsys.readouterr().err
