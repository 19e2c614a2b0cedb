import json

import pytest

from chirpedensemble.exceptions import NumericError
from chirpedensemble.main import EXIT_CONDITIONS, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, build_parser, main
from chirpedensemble.schemas.record_schemas import RunResult, SweepRecord


@pytest.fixture
def small_config_path(small_config_dict, tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(small_config_dict), encoding="utf-8")
    return path


def test_parser_collects_repeated_formats(small_config_path):
    args = build_parser().parse_args(
        ["sweep", "--config", str(small_config_path), "--format", "csv", "--format", "json", "--workers", "2"]
    )
    assert args.formats == ["csv", "json"]
    assert args.workers == 2


def test_sweep_writes_outputs(small_config_path, output_dir):
    code = main(["sweep", "--config", str(small_config_path), "--out", str(output_dir), "--samples", "11"])
    assert code == EXIT_OK
    assert (output_dir / "records.csv").exists()
    lines = (output_dir / "curves.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 + 3 * 11


def test_simulate_writes_trajectory(small_config_path, output_dir):
    code = main(["simulate", "--config", str(small_config_path), "--out", str(output_dir), "--samples", "11"])
    assert code == EXIT_OK
    assert (output_dir / "trajectory_1-2_0.1_0.1.csv").exists()


def test_missing_config_is_a_config_error(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "absent.toml")]) == EXIT_CONFIG


def test_invalid_config_is_a_config_error(small_config_dict, tmp_path):
    small_config_dict["run"]["p"] = 2
    path = tmp_path / "invalid.json"
    path.write_text(json.dumps(small_config_dict), encoding="utf-8")
    assert main(["check", "--config", str(path)]) == EXIT_CONFIG


def test_check_strict_fails_on_violating_box(configs_dir, capsys):
    config = str(configs_dir / "four_level_sweep.toml")
    assert main(["check", "--config", config, "--strict"]) == EXIT_CONDITIONS
    assert "thm1-c2" in capsys.readouterr().out
    assert main(["check", "--config", config]) == EXIT_OK


def test_check_strict_passes(small_config_path):
    assert main(["check", "--config", str(small_config_path), "--strict"]) == EXIT_OK
    assert main(["check", "--config", str(small_config_path), "--strict", "--prop2"]) == EXIT_OK


def test_degraded_run_exits_with_numeric_status(small_config_path, output_dir, mocker):
    record = SweepRecord(
        run_id="sweep-0000",
        alpha=[0.0],
        eps1=0.1,
        eps2=0.1,
        fidelity=1.0,
        distance=0.0,
        norm_drift=1e-3,
        degraded=True,
    )
    mocker.patch(
        "chirpedensemble.services.sweep_service.run_fid_curves",
        return_value=RunResult(kind="sweep", records=[record]),
    )
    assert main(["sweep", "--config", str(small_config_path), "--out", str(output_dir)]) == EXIT_NUMERIC
    assert (output_dir / "records.csv").exists()


def test_numeric_failure_exit_status(small_config_path, output_dir, mocker):
    mocker.patch(
        "chirpedensemble.services.sweep_service.run_concat",
        side_effect=NumericError("Richardson extrapolation did not converge"),
    )
    assert main(["concat", "--config", str(small_config_path), "--out", str(output_dir)]) == EXIT_NUMERIC


def test_frames_writes_lemma_table(small_config_path, output_dir):
    code = main(
        ["frames", "--config", str(small_config_path), "--out", str(output_dir), "--no-residuals", "--no-adiabatic"]
    )
    assert code == EXIT_OK
    header = (output_dir / "lemmas.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("eps1,eps2,theta_dot_sup")
