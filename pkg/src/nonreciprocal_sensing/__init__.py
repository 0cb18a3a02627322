from .model import Coupling, ModelSpec, ParallelConvention, Topology, build
from .runner import (
    MonteCarloRunner,
    Runner,
    SteadyRunner,
    SweepRunner,
    TransientRunner,
    Verifier,
)
from .scenario import Scenario, load_scenario

__all__ = [
    "Coupling",
    "ModelSpec",
    "MonteCarloRunner",
    "ParallelConvention",
    "Runner",
    "Scenario",
    "SteadyRunner",
    "SweepRunner",
    "Topology",
    "TransientRunner",
    "Verifier",
    "build",
    "load_scenario",
]
