"""Scenario descriptions: a model, sweep axes, analyses and output.

Scenario files are TOML:

    name = "thermal"
    reading = "sqrt2"

    [model]
    kappa = 1.0
    lambda_eff = 1.0

    [[sweep]]
    name = "n"
    values = [0.0, 1.0, 10.0]

    [analyses]
    steady = true
    closed_form = true

    [output]
    format = "csv"

Sweep axes take exactly one of `values`, `linear = [start, stop, count]`
or `log = [start, stop, count]`.
"""
import itertools
import math
import tomllib
from collections.abc import Mapping
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .closedform import LambdaReading
from .exceptions import InvalidSpecError
from .model import ModelSpec
from .trajectory import SimConfig

FORMATS = ("csv", "json", "svg")

# Sweep and model-table names that set more than one ModelSpec field.
ALIASES: dict[str, tuple[str, ...]] = {
    "N": ("n_parallel",),
    "delta": ("detuning_a", "detuning_b"),
    "delta_prime": ("detuning_a", "detuning_b"),
    "n": ("n_a", "n_b"),
}
SWEEPABLE = (
    "kappa",
    "lambda_eff",
    "xi",
    "detuning_a",
    "detuning_b",
    "n_a",
    "n_b",
    "n_parallel",
)
MODEL_FIELDS = tuple(f.name for f in fields(ModelSpec))


def _grid(table: Mapping[str, Any], what: str) -> tuple[float, ...]:
    keys = [k for k in ("values", "linear", "log") if k in table]
    if len(keys) != 1:
        raise InvalidSpecError(
            f"{what} needs exactly one of values, linear or log"
        )
    key = keys[0]
    raw = table[key]
    if key == "values":
        values = [float(v) for v in raw]
    else:
        if len(raw) != 3:
            raise InvalidSpecError(f"{what}: {key} is [start, stop, count]")
        start, stop, count = float(raw[0]), float(raw[1]), int(raw[2])
        if count < 1:
            raise InvalidSpecError(f"{what}: count must be >= 1")
        if key == "linear":
            values = list(np.linspace(start, stop, count))
        else:
            if not (start > 0 and stop > 0):
                raise InvalidSpecError(f"{what}: log range must be > 0")
            values = list(np.geomspace(start, stop, count))
    if not values or not all(math.isfinite(v) for v in values):
        raise InvalidSpecError(f"{what} needs finite values")
    return tuple(float(v) for v in values)


def assign(name: str, value: Any) -> dict[str, Any]:
    """ModelSpec keyword arguments for one (possibly aliased) name."""
    if name == "delta_prime":
        return {"detuning_a": float(value), "detuning_b": -float(value)}
    if name in ALIASES:
        return {target: value for target in ALIASES[name]}
    if name not in MODEL_FIELDS:
        raise InvalidSpecError(f"unknown model field '{name}'")
    return {name: value}


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        targets = ALIASES.get(self.name, (self.name,))
        for target in targets:
            if target not in SWEEPABLE:
                raise InvalidSpecError(f"cannot sweep '{self.name}'")
        if not self.values:
            raise InvalidSpecError(f"sweep axis '{self.name}' is empty")

    @classmethod
    def from_table(cls, table: Mapping[str, Any]) -> "SweepAxis":
        if "name" not in table:
            raise InvalidSpecError("sweep axis needs a name")
        name = str(table["name"])
        extra = set(table) - {"name", "values", "linear", "log"}
        if extra:
            raise InvalidSpecError(f"unknown sweep keys {sorted(extra)}")
        return cls(name=name, values=_grid(table, f"sweep '{name}'"))

    def apply(self, spec: ModelSpec, value: float) -> ModelSpec:
        changes = assign(self.name, value)
        if "n_parallel" in changes:
            if not float(value).is_integer():
                raise InvalidSpecError(f"N must be an integer, not {value}")
            changes["n_parallel"] = int(value)
        return replace(spec, **changes)


@dataclass(frozen=True)
class TimeGrid:
    times: tuple[float, ...]

    def __post_init__(self) -> None:
        times = tuple(sorted(float(t) for t in self.times))
        if not times or times[0] < 0:
            raise InvalidSpecError("time grid needs values >= 0")
        object.__setattr__(self, "times", times)

    @classmethod
    def from_table(cls, table: Mapping[str, Any]) -> "TimeGrid":
        return cls(times=_grid(table, "transient time grid"))


@dataclass(frozen=True)
class Analyses:
    steady: bool = False
    transient: TimeGrid | None = None
    qfi: bool = False
    closed_form: bool = False
    monte_carlo: SimConfig | None = None

    def __post_init__(self) -> None:
        if not (
            self.steady
            or self.transient is not None
            or self.qfi
            or self.closed_form
            or self.monte_carlo is not None
        ):
            raise InvalidSpecError("select at least one analysis")

    @classmethod
    def from_table(cls, table: Mapping[str, Any]) -> "Analyses":
        extra = set(table) - {f.name for f in fields(cls)}
        if extra:
            raise InvalidSpecError(f"unknown analyses {sorted(extra)}")
        transient = table.get("transient")
        monte_carlo = table.get("monte_carlo")
        try:
            return cls(
                steady=bool(table.get("steady", False)),
                transient=(
                    None
                    if transient is None
                    else TimeGrid.from_table(transient)
                ),
                qfi=bool(table.get("qfi", False)),
                closed_form=bool(table.get("closed_form", False)),
                monte_carlo=(
                    None if monte_carlo is None else SimConfig(**monte_carlo)
                ),
            )
        except TypeError as exc:
            raise InvalidSpecError(f"bad analyses table: {exc}") from exc


@dataclass(frozen=True)
class OutputSpec:
    path: str = "-"
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise InvalidSpecError(
                f"format must be one of {FORMATS}, not '{self.format}'"
            )


def _default_analyses() -> Analyses:
    return Analyses(steady=True, qfi=True, closed_form=True)


@dataclass(frozen=True)
class Scenario:
    model: ModelSpec = field(default_factory=ModelSpec)
    sweep: tuple[SweepAxis, ...] = ()
    analyses: Analyses = field(default_factory=_default_analyses)
    output: OutputSpec = field(default_factory=OutputSpec)
    reading: LambdaReading = LambdaReading.SQRT2
    name: str = "scenario"

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "reading", LambdaReading(self.reading))
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from exc

    def points(self) -> list[ModelSpec]:
        """Every sweep point, in row-major order over the axes."""
        if not self.sweep:
            return [self.model]
        specs: list[ModelSpec] = []
        for combination in itertools.product(*(a.values for a in self.sweep)):
            spec = self.model
            for axis, value in zip(self.sweep, combination):
                spec = axis.apply(spec, value)
            specs.append(spec)
        return specs

    def override(
        self,
        out: str | None = None,
        fmt: str | None = None,
        seed: int | None = None,
    ) -> "Scenario":
        """Apply command-line overrides of the output and the Monte Carlo
        seed."""
        output = replace(
            self.output,
            path=self.output.path if out is None else out,
            format=self.output.format if fmt is None else fmt,
        )
        analyses = self.analyses
        if seed is not None and analyses.monte_carlo is not None:
            analyses = replace(
                analyses, monte_carlo=replace(analyses.monte_carlo, seed=seed)
            )
        return replace(self, output=output, analyses=analyses)


def _model(table: Mapping[str, Any]) -> ModelSpec:
    kwargs: dict[str, Any] = {}
    for key, value in table.items():
        if key == "j_custom" and isinstance(value, list):
            if len(value) != 2:
                raise InvalidSpecError("j_custom is [real, imag]")
            value = complex(float(value[0]), float(value[1]))
        kwargs.update(assign(key, value))
    try:
        return ModelSpec(**kwargs)
    except TypeError as exc:
        raise InvalidSpecError(f"bad model table: {exc}") from exc


def from_dict(data: Mapping[str, Any], name: str = "scenario") -> Scenario:
    extra = set(data) - {
        "name",
        "reading",
        "model",
        "sweep",
        "analyses",
        "output",
    }
    if extra:
        raise InvalidSpecError(f"unknown scenario tables {sorted(extra)}")
    try:
        output = OutputSpec(**data.get("output", {}))
    except TypeError as exc:
        raise InvalidSpecError(f"bad output table: {exc}") from exc
    analyses = (
        Analyses.from_table(data["analyses"])
        if "analyses" in data
        else _default_analyses()
    )
    return Scenario(
        model=_model(data.get("model", {})),
        sweep=tuple(SweepAxis.from_table(t) for t in data.get("sweep", [])),
        analyses=analyses,
        output=output,
        reading=data.get("reading", LambdaReading.SQRT2.value),
        name=str(data.get("name", name)),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise InvalidSpecError(f"cannot read scenario {path}: {exc}") from exc
    return from_dict(data, name=path.stem)


FIG2_LAMBDA = 10 / math.sqrt(2.0)


def builtin(name: str) -> Scenario:
    """The named built-in scenario: fig2, verify or montecarlo."""
    if name == "fig2":
        return Scenario(
            model=ModelSpec(kappa=1.0, lambda_eff=FIG2_LAMBDA),
            sweep=(SweepAxis("kappa", (0.1, 1.0, 1000.0)),),
            analyses=Analyses(
                transient=TimeGrid(
                    tuple(float(t) for t in np.geomspace(1e-3, 1e3, 601))
                ),
                closed_form=True,
            ),
            name="fig2",
        )
    if name == "verify":
        return Scenario(
            analyses=Analyses(
                steady=True,
                qfi=True,
                closed_form=True,
                monte_carlo=SimConfig(
                    dt=0.004, t_end=8.0, n_traj=100000, seed=20240601
                ),
            ),
            name="verify",
        )
    if name == "montecarlo":
        return Scenario(
            model=ModelSpec(),
            analyses=Analyses(
                monte_carlo=SimConfig(
                    dt=0.004, t_end=8.0, n_traj=100000, seed=20240601
                ),
            ),
            name="montecarlo",
        )
    raise InvalidSpecError(f"no built-in scenario '{name}'")
