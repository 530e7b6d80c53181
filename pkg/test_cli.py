import copy
import json
import logging

import pytest

from config import settings
from main import EXIT_ABORTED, EXIT_OK, EXIT_VALIDATION, build_parser, main


@pytest.fixture(autouse=True)
def no_log_files(monkeypatch):
    monkeypatch.setitem(settings._settings["logging"], "to_file", False)
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def test_validate_shipped_scenario(case1_path, capsys):
    assert main(["validate", "--scenario", str(case1_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert f"{case1_path}: valid" in out
    assert "fingerprint:" in out


def test_validate_rejects_bad_file(equilibrium_document, write_scenario, capsys):
    document = copy.deepcopy(equilibrium_document)
    document["limits"]["r_safe"] = -1.0
    assert main(["validate", "--scenario", str(write_scenario(document))]) == EXIT_VALIDATION
    assert "limits.r_safe" in capsys.readouterr().err


def test_validate_missing_file(tmp_path):
    assert main(["validate", "--scenario", str(tmp_path / "absent.json")]) == EXIT_VALIDATION


def test_run_writes_outputs(equilibrium_document, write_scenario, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--scenario", str(write_scenario(equilibrium_document)), "--out", str(out),
                 "--mode", "standard", "--seed", "3"])
    assert code == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"trajectory.csv", "trajectory.json", "metrics.json"}
    log = json.loads((out / "trajectory.json").read_text(encoding="utf-8"))
    assert (log["mode"], log["seed"], len(log["records"])) == ("standard", 3, 3)
    assert "3 steps" in capsys.readouterr().out


def test_run_with_qp_dump_and_csv_only(equilibrium_document, write_scenario, tmp_path):
    out = tmp_path / "out"
    dumps = tmp_path / "dumps"
    code = main(["run", "--scenario", str(write_scenario(equilibrium_document)), "--out", str(out),
                 "--format", "csv", "--duration", "0.2", "--dump-qp", str(dumps)])
    assert code == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"trajectory.csv", "metrics.json"}
    assert (dumps / "position_step00000.txt").exists()


def test_compare_writes_report(equilibrium_document, write_scenario, tmp_path, capsys):
    out = tmp_path / "cmp"
    code = main(["compare", "--scenario", str(write_scenario(equilibrium_document)), "--seeds", "2",
                 "--duration", "0.2", "--out", str(out)])
    assert code == EXIT_OK
    for name in ("comparison.json", "comparison.csv", "sampling_seed0", "standard_seed1"):
        assert (out / name).exists()
    assert "winner" in capsys.readouterr().out


def test_run_aborts_near_gimbal_lock(equilibrium_document, write_scenario, tmp_path):
    document = copy.deepcopy(equilibrium_document)
    document["initial"]["position"] = {"rho": 6.0, "eps_deg": 89.8, "beta": 0.0}
    code = main(["run", "--scenario", str(write_scenario(document)), "--out", str(tmp_path / "out")])
    assert code == EXIT_ABORTED


def test_parser_rejects_unknown_format():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--scenario", "x.json", "--format", "xml"])


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_set_overrides_settings_for_one_invocation(equilibrium_document, write_scenario, tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "_settings", copy.deepcopy(settings._settings))
    out = tmp_path / "out"
    code = main(["--log-level", "WARNING", "--set", 'output.formats=["csv"]', "--set", "solver.max_iter=400",
                 "run", "--scenario", str(write_scenario(equilibrium_document)), "--out", str(out)])
    assert code == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"trajectory.csv", "metrics.json"}
    assert settings.get("solver.max_iter") == 400
    assert settings.get("logging.level") == "WARNING"


def test_set_rejects_malformed_override(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--set", "no-equals-sign", "validate", "--scenario", "x.json"])
    assert "KEY=VALUE" in capsys.readouterr().err
