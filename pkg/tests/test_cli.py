import io
import json
from contextlib import redirect_stderr, redirect_stdout

import pytest

from apiary import cli


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def test_check_default_configuration():
    code, out, _ = invoke(["check"])
    assert code == cli.EXIT_OK
    assert "35.5" in out
    assert "10000" in out
    assert "configuration ok" in out


def test_run_short_horizon(tmp_path):
    code, out, _ = invoke(["run", "--out", str(tmp_path),
                           "--set", "horizon=8"])
    assert code == cli.EXIT_OK
    csv_path = tmp_path / "reports.csv"
    assert csv_path.exists()
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 9  # header + 8 days
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["days_run"] == 8
    assert not summary["halted"]
    for name in ("stocks.png", "population.png", "fluxes.png", "market.png"):
        assert (tmp_path / name).exists()
    printed = json.loads(out)
    assert printed["days_run"] == 8


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out_dir in (a, b):
        code, _, _ = invoke(["run", "--out", str(out_dir),
                             "--set", "horizon=12"])
        assert code == cli.EXIT_OK
    assert (a / "reports.csv").read_bytes() == (b / "reports.csv").read_bytes()


def test_run_starvation_exit_code(tmp_path):
    code, _, err = invoke(["run", "--out", str(tmp_path),
                           "--set", "colony.honey_g=50",
                           "--set", "weather.flight_hours=0",
                           "--set", "horizon=60"])
    assert code == cli.EXIT_STARVED
    assert "exhausted" in err
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["halted"]


def test_missing_config_file_is_config_error(tmp_path):
    code, _, err = invoke(["check", "--config", str(tmp_path / "nope.json")])
    assert code == cli.EXIT_CONFIG
    assert err.strip()


def test_bad_override_path_is_config_error(tmp_path):
    code, _, err = invoke(["check", "--set", "colony.no_such_field=3"])
    assert code == cli.EXIT_CONFIG
    assert "no_such_field" in err


def test_invalid_value_is_config_error():
    code, _, err = invoke(["check", "--set", "coefficients.mu=-5"])
    assert code == cli.EXIT_CONFIG
    assert err.strip()


def test_market_solves_default_day(tmp_path):
    code, out, _ = invoke(["market", "--out", str(tmp_path)])
    assert code == cli.EXIT_OK
    payload = json.loads(out)
    assert payload["regime"] in {"deficit", "surplus", "balanced"}
    saved = json.loads((tmp_path / "exchange_solution.json").read_text())
    assert saved["case"] == payload["case"]
    if payload["case"] in {"B", "B.ii"}:
        assert payload["tau"] is not None


def test_market_infeasible_exit_code(tmp_path):
    code, _, err = invoke(["market", "--out", str(tmp_path),
                           "--set", "market.min_pollen_income=1.0"])
    assert code == cli.EXIT_INFEASIBLE
    assert err.strip()


def test_field_outputs(tmp_path):
    code, out, _ = invoke(["field", "--out", str(tmp_path)])
    assert code == cli.EXIT_OK
    stats = json.loads(out)
    assert stats["flagged"] is False
    assert stats["frac_within_5pct"] >= 0.95
    pgm = (tmp_path / "quality.pgm").read_text()
    assert pgm.startswith("P2")
    for name in ("quality.csv", "eikonal_residual.csv",
                 "field_summary.json", "field.png"):
        assert (tmp_path / name).exists()
    header = (tmp_path / "quality.csv").read_text().splitlines()[0]
    assert len(header.split(",")) == 64


def test_field_requires_landscape():
    code, _, err = invoke(["field", "--set", "landscape=null"])
    assert code == cli.EXIT_CONFIG
    assert err.strip()


def test_unknown_subcommand_rejected():
    with pytest.raises(SystemExit):
        invoke(["frobnicate"])
