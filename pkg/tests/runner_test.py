import csv
import logging
import math
from pathlib import Path

import pytest

from nonreciprocal_sensing import (
    MonteCarloRunner,
    SteadyRunner,
    SweepRunner,
    TransientRunner,
    Verifier,
    load_scenario,
)
from nonreciprocal_sensing.exceptions import InvalidSpecError
from nonreciprocal_sensing.scenario import Scenario, from_dict


def test_object(kappa_sweep: Scenario) -> None:
    """Does the runner get created?"""
    runner = SteadyRunner(
        scenario=kappa_sweep,
        report_file="-",
        workers=2,
        tol=1e-8,
        quiet=False,
        debug=True,
    )
    assert runner._workers == 2
    assert runner._scenario.name == "kappa-sweep"
    assert runner.rows == []
    assert runner.passed
    with pytest.raises(InvalidSpecError):
        SteadyRunner(scenario=kappa_sweep, workers=0)
    with pytest.raises(InvalidSpecError):
        SteadyRunner(scenario=kappa_sweep, tol=0.0)


@pytest.mark.asyncio
async def test_steady_sweep(
    kappa_sweep: Scenario, out_file: Path, capsys: pytest.CaptureFixture
) -> None:
    runner = SteadyRunner(scenario=kappa_sweep, workers=3)
    await runner.execute()
    assert [r["kappa"] for r in runner.rows] == [0.1, 1.0, 10.0]
    for row in runner.rows:
        assert 0.5 <= row["eta"] <= 1.0 + 1e-12
        assert row["deviation"] < 1e-8
        assert row["eta"] == pytest.approx(row["eta_cf"], rel=1e-8)
        assert row["qfi_nr"] == pytest.approx(row["dxi_nr_num"] ** -2)
        assert row["status"] == "ok"
    with open(out_file, newline="") as f:
        written = list(csv.DictReader(f))
    assert len(written) == 3
    assert float(written[1]["eta"]) == pytest.approx(1.0)
    captured = capsys.readouterr()
    lines = captured.err.splitlines()
    assert any(line.endswith(": SteadyRunner") for line in lines)
    assert "produced 3 rows" in captured.err


@pytest.mark.asyncio
async def test_star_scenario(scenario_file: Path, tmp_path: Path) -> None:
    scenario = load_scenario(scenario_file).override(
        out=str(tmp_path / "star.json"), fmt="json"
    )
    runner = SteadyRunner(scenario=scenario, quiet=True)
    await runner.execute()
    for row in runner.rows:
        n = row["N"]
        assert row["eta"] == pytest.approx(2 * n / (n**3 + 1), rel=1e-8)
        assert row["deviation"] < 1e-8
    assert (tmp_path / "star.json").exists()


@pytest.mark.asyncio
async def test_flagged_rows(out_file: Path) -> None:
    """An uncoupled probe carries no information; its row is flagged and
    the sweep carries on."""
    scenario = from_dict(
        {
            "sweep": [{"name": "lambda_eff", "values": [0.0, 1.0]}],
            "output": {"path": str(out_file)},
        }
    )
    runner = SteadyRunner(scenario=scenario, quiet=True)
    await runner.execute()
    bad, good = runner.rows
    assert bad["status"] == "PrecisionError"
    assert math.isnan(bad["eta"])
    assert good["status"] == "ok"
    assert runner.passed


@pytest.mark.asyncio
async def test_transient(out_file: Path) -> None:
    scenario = from_dict(
        {
            "model": {"kappa": 1.0, "lambda_eff": 2.0},
            "analyses": {
                "transient": {"values": [0.0, 0.5, 2.0, 40.0]},
                "closed_form": True,
            },
            "output": {"path": str(out_file)},
        }
    )
    runner = TransientRunner(scenario=scenario, quiet=True)
    await runner.execute()
    first, *rest = runner.rows
    assert first["status"] == "PrecisionError"
    for row in rest:
        assert row["status"] == "ok"
        assert row["deviation"] < 1e-8
    steady = (1 + 2) ** 2 / (2 * (1 + 4))
    assert rest[-1]["eta"] == pytest.approx(steady, rel=1e-8)
    with pytest.raises(InvalidSpecError):
        TransientRunner(scenario=Scenario())


@pytest.mark.asyncio
async def test_sweep_runner(out_file: Path) -> None:
    scenario = from_dict(
        {
            "analyses": {
                "steady": True,
                "transient": {"values": [0.5, 1.0]},
            },
            "output": {"path": str(out_file)},
        }
    )
    runner = SweepRunner(scenario=scenario, quiet=True)
    await runner.execute()
    assert [r["t"] for r in runner.rows] == [math.inf, 0.5, 1.0]
    assert runner.rows[0]["eta"] == pytest.approx(1.0)


def test_svg_needs_a_plot() -> None:
    with pytest.raises(InvalidSpecError):
        SteadyRunner(scenario=Scenario().override(fmt="svg"))
    with pytest.raises(InvalidSpecError):
        Verifier(scenario=Scenario().override(fmt="svg"))


@pytest.mark.asyncio
async def test_verifier(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    out = tmp_path / "verify.csv"
    runner = Verifier(scenario=Scenario().override(out=str(out)), workers=4)
    await runner.execute()
    tags = [r["tag"] for r in runner.rows]
    assert "pair.steady.nonreciprocal" in tags
    assert "expm.defective" in tags
    assert not any(tag.startswith("montecarlo") for tag in tags)
    failed = [r["tag"] for r in runner.rows if r["verdict"] == "fail"]
    assert failed == []
    assert runner.passed
    assert "Verification passed." in capsys.readouterr().err


@pytest.mark.asyncio
async def test_montecarlo(out_file: Path) -> None:
    scenario = from_dict(
        {
            "analyses": {
                "monte_carlo": {
                    "dt": 0.004,
                    "t_end": 8.0,
                    "n_traj": 4000,
                    "seed": 3,
                    "batch_size": 1000,
                }
            },
            "output": {"path": str(out_file)},
        }
    )
    runner = MonteCarloRunner(scenario=scenario, quiet=True)
    await runner.execute()
    # Two modes, four quantities each.
    assert len(runner.rows) == 8
    assert all(math.isfinite(r["z"]) for r in runner.rows)
    assert runner.passed
    again = MonteCarloRunner(scenario=scenario, quiet=True)
    await again.execute()
    assert [r["sampled"] for r in again.rows] == [
        r["sampled"] for r in runner.rows
    ]
    with pytest.raises(InvalidSpecError):
        MonteCarloRunner(scenario=Scenario())


@pytest.mark.asyncio
async def test_thermal_mu_column(out_file: Path) -> None:
    scenario = from_dict(
        {
            "sweep": [{"name": "n", "values": [0.0, 1.0, 10.0]}],
            "analyses": {"steady": True, "closed_form": True},
            "output": {"path": str(out_file)},
        }
    )
    runner = SteadyRunner(scenario=scenario, quiet=True)
    await runner.execute()
    mus = [row["mu"] for row in runner.rows]
    assert mus[0] == pytest.approx(1.0)
    assert mus[0] > mus[1] > mus[2]
    assert all(row["n_a"] == row["n_b"] for row in runner.rows)


@pytest.mark.asyncio
async def test_montecarlo_rows_carry_parameters(out_file: Path) -> None:
    scenario = from_dict(
        {
            "model": {"coupling": "reciprocal", "xi": 3.0, "detuning_b": -0.5},
            "analyses": {
                "monte_carlo": {
                    "dt": 0.004,
                    "t_end": 6.0,
                    "n_traj": 1000,
                    "seed": 4,
                }
            },
            "output": {"path": str(out_file)},
        }
    )
    runner = MonteCarloRunner(scenario=scenario, quiet=True)
    await runner.execute()
    with open(out_file, newline="") as f:
        written = list(csv.DictReader(f))
    assert len(written) == 8
    for row in written:
        assert row["coupling"] == "reciprocal"
        assert float(row["xi"]) == 3.0
        assert float(row["delta_b"]) == -0.5
        assert row["topology"] == "pair"
        assert float(row["dt"]) == 0.004
        assert float(row["t_end"]) == 6.0
        assert int(row["n_traj"]) == 1000
        assert int(row["seed"]) == 4


def test_montecarlo_refuses_large_steps() -> None:
    scenario = from_dict(
        {
            "model": {
                "kappa": 0.1,
                "lambda_eff": 10 / math.sqrt(2),
                "coupling": "reciprocal",
            },
            "analyses": {
                "monte_carlo": {
                    "dt": 0.05,
                    "t_end": 20.0,
                    "n_traj": 1000,
                    "seed": 1,
                }
            },
        }
    )
    with pytest.raises(InvalidSpecError):
        MonteCarloRunner(scenario=scenario, quiet=True)
    with pytest.raises(InvalidSpecError):
        Verifier(scenario=scenario, quiet=True)


@pytest.mark.asyncio
async def test_debug_reaches_module_loggers(
    out_file: Path, caplog: pytest.LogCaptureFixture
) -> None:
    runner = SteadyRunner(
        scenario=Scenario().override(out=str(out_file)),
        quiet=True,
        debug=True,
    )
    await runner.execute()
    names = {r.name for r in caplog.records if r.levelno == logging.DEBUG}
    assert "nonreciprocal_sensing.model" in names
    assert "nonreciprocal_sensing.fisher" in names


@pytest.mark.asyncio
@pytest.mark.parametrize("fmt", ["csv", "json"])
async def test_output_is_reproducible(tmp_path: Path, fmt: str) -> None:
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / f"{name}.{fmt}"
        scenario = from_dict(
            {
                "sweep": [{"name": "kappa", "values": [0.5, 2.0]}],
                "analyses": {
                    "steady": True,
                    "monte_carlo": {
                        "dt": 0.002,
                        "t_end": 2.0,
                        "n_traj": 500,
                        "seed": 17,
                        "batch_size": 200,
                    }
                },
                "output": {"path": str(out), "format": fmt},
            }
        )
        await MonteCarloRunner(scenario=scenario, quiet=True).execute()
        await SweepRunner(
            scenario=scenario.override(out=str(out) + ".sweep"),
            quiet=True,
        ).execute()
        outputs.append(
            (out.read_bytes(), Path(str(out) + ".sweep").read_bytes())
        )
    assert outputs[0] == outputs[1]
