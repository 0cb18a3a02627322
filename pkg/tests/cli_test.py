import json
from pathlib import Path

import pytest

from nonreciprocal_sensing import cli
from nonreciprocal_sensing.checks import CheckGroup, CheckResult, Verdict
from nonreciprocal_sensing.runner import SteadyRunner, TransientRunner


def test_steady_command(scenario_file: Path, tmp_path: Path) -> None:
    out = tmp_path / "star.json"
    cli.main(
        ["steady", "-c", str(scenario_file), "-o", str(out), "-f", "json"]
    )
    document = json.loads(out.read_text())
    assert [row["N"] for row in document["rows"]] == [1, 2, 4, 8]


def test_environment_defaults(
    scenario_file: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.setenv("NRSENSE_CONFIG", str(scenario_file))
    monkeypatch.setenv("NRSENSE_FORMAT", "json")
    monkeypatch.setenv("NRSENSE_WORKERS", "3")
    monkeypatch.setenv("NRSENSE_TOL", "1e-6")
    runner = cli._get_runner(["steady"])
    assert isinstance(runner, SteadyRunner)
    assert runner._scenario.name == "star"
    assert runner._scenario.output.format == "json"
    assert runner._workers == 3
    assert runner._tol == 1e-6


def test_builtin_scenarios() -> None:
    transient = cli._get_runner(["transient", "-q"])
    assert isinstance(transient, TransientRunner)
    assert transient._scenario.name == "fig2"
    montecarlo = cli._get_runner(["montecarlo", "-q", "-s", "99"])
    cfg = montecarlo._scenario.analyses.monte_carlo
    assert cfg is not None
    assert cfg.seed == 99


def test_invalid_input_exits_2(
    tmp_path: Path, capsys: pytest.CaptureFixture
) -> None:
    with pytest.raises(SystemExit) as exc:
        cli.main(["steady", "-q", "-c", str(tmp_path / "missing.toml")])
    assert exc.value.code == 2
    assert capsys.readouterr().err.startswith("nrsense: ")
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "-q", "-f", "svg"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["reticulate"])
    assert exc.value.code == 2


def test_failed_verification_exits_1(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    def failing(*_: object) -> list[CheckGroup]:
        bad = CheckResult(
            tag="broken",
            numeric=2.0,
            closed_form=1.0,
            deviation=1.0,
            tolerance=1e-8,
            verdict=Verdict.FAIL,
        )
        return [("broken", lambda: [bad])]

    monkeypatch.setattr("nonreciprocal_sensing.runner.battery", failing)
    out = tmp_path / "verify.csv"
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "-q", "-o", str(out)])
    assert exc.value.code == 1
    assert "broken" in out.read_text()


def test_unwritable_output_exits_2(
    tmp_path: Path, capsys: pytest.CaptureFixture
) -> None:
    out = tmp_path / "missing" / "result.csv"
    with pytest.raises(SystemExit) as exc:
        cli.main(["steady", "-q", "-o", str(out)])
    assert exc.value.code == 2
    assert "cannot write" in capsys.readouterr().err


def test_oversized_step_exits_2(tmp_path: Path) -> None:
    config = tmp_path / "ringing.toml"
    config.write_text(
        """
[model]
coupling = "reciprocal"
kappa = 0.1
lambda_eff = 7.0710678118654755

[analyses.monte_carlo]
dt = 0.05
t_end = 20.0
n_traj = 1000
seed = 1
"""
    )
    with pytest.raises(SystemExit) as exc:
        cli.main(["montecarlo", "-q", "-c", str(config)])
    assert exc.value.code == 2
