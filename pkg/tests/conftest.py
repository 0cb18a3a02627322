from pathlib import Path

import pytest

from nonreciprocal_sensing import Coupling, ModelSpec, build
from nonreciprocal_sensing.model import LinearSystem
from nonreciprocal_sensing.scenario import Scenario, from_dict


@pytest.fixture
def nr_pair() -> LinearSystem:
    return build(ModelSpec())


@pytest.fixture
def r_pair() -> LinearSystem:
    return build(ModelSpec(coupling=Coupling.RECIPROCAL))


@pytest.fixture
def out_file(tmp_path: Path) -> Path:
    return tmp_path / "result.csv"


@pytest.fixture
def kappa_sweep(out_file: Path) -> Scenario:
    return from_dict(
        {
            "name": "kappa-sweep",
            "model": {"lambda_eff": 1.0},
            "sweep": [{"name": "kappa", "values": [0.1, 1.0, 10.0]}],
            "analyses": {"steady": True, "qfi": True, "closed_form": True},
            "output": {"path": str(out_file)},
        }
    )


@pytest.fixture
def scenario_file(tmp_path: Path) -> Path:
    path = tmp_path / "star.toml"
    path.write_text(
        """
name = "star"

[model]
topology = "star"
kappa = 1.0
lambda_eff = 1.0

[[sweep]]
name = "N"
values = [1, 2, 4, 8]

[analyses]
steady = true
closed_form = true
"""
    )
    return path
