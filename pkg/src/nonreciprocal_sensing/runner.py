import asyncio
import math
import sys
import textwrap
from collections.abc import Callable, Sequence
from dataclasses import replace
from typing import Any, TypeVar

import numpy as np

from .checks import CheckResult, Verdict, battery, run_group
from .closedform import (
    FormulaInputs,
    LambdaReading,
    PrecisionPair,
    ThermalPrecision,
    detuned,
    pair_steady,
    pair_transient,
    parallel,
    thermal,
)
from .exceptions import InvalidSpecError, PrecisionError, SensingError
from .fisher import (
    PrecisionReport,
    collective_precision,
    steady_precision,
    transient_precision,
)
from .model import (
    Coupling,
    ModelSpec,
    ParallelConvention,
    Topology,
    build,
    to_quadrature,
)
from .moments import MomentState, evolve
from .report import (
    MONTECARLO_COLUMNS,
    STEADY_COLUMNS,
    VERIFY_COLUMNS,
    PlotSpec,
    write_table,
)
from .scenario import Scenario
from .trajectory import check_step, simulate
from .util import get_logger, str_now

T = TypeVar("T")
Row = dict[str, Any]

DEFAULT_SEED = 20240601
# Sampled moments further than this many standard errors from the
# deterministic moments are outliers.
Z_LIMIT = 4.0

# Column holding each sweep axis's value.
AXIS_COLUMNS = {
    "kappa": "kappa",
    "lambda_eff": "lambda_eff",
    "N": "N",
    "n_parallel": "N",
    "delta": "delta",
    "delta_prime": "delta",
    "detuning_a": "delta",
    "detuning_b": "delta_b",
    "n": "n_a",
    "n_a": "n_a",
    "n_b": "n_b",
    "xi": "xi",
}


def base_row(spec: ModelSpec, reading: LambdaReading) -> Row:
    """The fully resolved parameter set of one sweep point."""
    return {
        "kappa": spec.kappa,
        "lambda_eff": spec.lambda_eff,
        "N": spec.n_parallel,
        "delta": spec.detuning_a,
        "n_a": spec.n_a,
        "n_b": spec.n_b,
        "xi": spec.xi,
        "delta_b": spec.detuning_b,
        "topology": spec.topology,
        "coupling": spec.coupling,
        "convention": spec.convention,
        "reading": reading,
        "status": "ok",
    }


def relative_deviation(numeric: float, closed: float) -> float:
    if math.isnan(closed) or math.isnan(numeric):
        return math.nan
    if closed == 0:
        return abs(numeric)
    return abs(numeric - closed) / abs(closed)


def _branches(spec: ModelSpec) -> tuple[ModelSpec, ModelSpec]:
    """The nonreciprocal (or custom) and the reciprocal variant."""
    first = spec
    if spec.coupling is Coupling.RECIPROCAL:
        first = replace(spec, coupling=Coupling.NONRECIPROCAL)
    return first, replace(spec, coupling=Coupling.RECIPROCAL, j_custom=None)


def steady_closed_form(
    spec: ModelSpec, reading: LambdaReading
) -> PrecisionPair | None:
    """The closed form describing `spec`, or None when none applies."""
    thermal_bath = spec.n_a > 0 or spec.n_b > 0
    da, db = spec.detuning_a, spec.detuning_b
    if spec.topology is Topology.STAR:
        if (
            spec.convention is ParallelConvention.SCALED
            and not thermal_bath
            and da == db == 0
        ):
            return parallel(
                FormulaInputs(
                    kappa=spec.kappa,
                    lambda_eff=spec.lambda_eff,
                    N=spec.n_parallel,
                )
            )
        return None
    inputs = FormulaInputs(
        kappa=spec.kappa,
        lambda_eff=spec.lambda_eff,
        xi=spec.xi,
        n_a=spec.n_a,
        n_b=spec.n_b,
        reading=reading,
    )
    if thermal_bath:
        return thermal(inputs) if da == db == 0 else None
    if da == db == 0:
        return pair_steady(inputs)
    if da == db:
        return detuned(replace(inputs, delta=da))
    if da == -db:
        return detuned(replace(inputs, delta_prime=da), opposite=True)
    return None


def _single(spec: ModelSpec) -> tuple[PrecisionReport, float]:
    system = build(spec)
    if spec.topology is Topology.STAR:
        collective = collective_precision(system)
        return collective.report, collective.exact_delta_xi
    report = steady_precision(system)
    return report, report.delta_xi


def steady_row(spec: ModelSpec, scenario: Scenario) -> Row:
    """Numeric and closed-form steady precision of one sweep point."""
    analyses = scenario.analyses
    row = base_row(spec, scenario.reading)
    row["t"] = math.inf
    nan = math.nan
    nr = r = exact_nr = exact_r = nan
    if analyses.steady or analyses.qfi:
        nr_spec, r_spec = _branches(spec)
        nr_report, exact_nr = _single(nr_spec)
        r_report, exact_r = _single(r_spec)
        nr, r = nr_report.delta_xi, r_report.delta_xi
        row.update(
            angle_nr=nr_report.angle,
            angle_r=r_report.angle,
            qfi_nr=nr_report.qfi if analyses.qfi else nan,
            qfi_r=r_report.qfi if analyses.qfi else nan,
        )
    cf_nr = cf_r = cf_eta = mu = nan
    if analyses.closed_form:
        cf = steady_closed_form(spec, scenario.reading)
        if cf is not None:
            cf_nr, cf_r, cf_eta = cf.dxi_nr, cf.dxi_r, cf.eta
            if spec.coupling is Coupling.CUSTOM:
                cf_nr = cf_eta = nan
            if isinstance(cf, ThermalPrecision):
                mu = cf.mu_equal if spec.n_a == spec.n_b else cf.mu
            elif spec.n_a == spec.n_b == 0:
                # mu is 1 at zero temperature.
                mu = 1.0
    eta = nr / r
    deviations = [
        d
        for d in (relative_deviation(nr, cf_nr), relative_deviation(r, cf_r))
        if not math.isnan(d)
    ]
    row.update(
        dxi_nr_num=nr,
        dxi_r_num=r,
        dxi_nr_cf=cf_nr,
        dxi_r_cf=cf_r,
        dxi_nr_exact=exact_nr,
        dxi_r_exact=exact_r,
        eta=eta,
        improvement=1.0 / eta if eta else nan,
        eta_cf=cf_eta,
        mu=mu,
        deviation=max(deviations) if deviations else nan,
    )
    return row


def _transient_closed_form(
    spec: ModelSpec, t: float
) -> PrecisionPair | None:
    if (
        spec.topology is not Topology.PAIR
        or spec.n_a > 0
        or spec.n_b > 0
        or spec.detuning_a != 0
        or spec.detuning_b != 0
    ):
        return None
    return pair_transient(
        FormulaInputs(kappa=spec.kappa, lambda_eff=spec.lambda_eff, t=t)
    )


def transient_rows(
    spec: ModelSpec, scenario: Scenario, times: Sequence[float]
) -> list[Row]:
    """Precision along the time grid from vacuum, numeric and closed
    form.  Rows whose precision is undefined are flagged."""
    nr_spec, r_spec = _branches(spec)
    analyses = scenario.analyses
    nr = transient_precision(build(nr_spec), times)
    r = transient_precision(build(r_spec), times)
    rows = []
    for t, nr_report, r_report in zip(times, nr, r):
        row = base_row(spec, scenario.reading)
        cf_nr = cf_r = cf_eta = math.nan
        if analyses.closed_form:
            try:
                cf = _transient_closed_form(spec, t)
            except PrecisionError:
                row["status"] = PrecisionError.__name__
                cf = None
            if cf is not None:
                cf_nr, cf_r, cf_eta = cf.dxi_nr, cf.dxi_r, cf.eta
                if spec.coupling is Coupling.CUSTOM:
                    cf_nr = cf_eta = math.nan
        dxi_nr, dxi_r = nr_report.delta_xi, r_report.delta_xi
        if math.isinf(dxi_nr) or math.isinf(dxi_r):
            row["status"] = PrecisionError.__name__
            eta = math.nan
        else:
            eta = dxi_nr / dxi_r
        deviations = [
            d
            for d in (
                relative_deviation(dxi_nr, cf_nr),
                relative_deviation(dxi_r, cf_r),
            )
            if math.isfinite(d)
        ]
        row.update(
            t=t,
            dxi_nr_num=dxi_nr,
            dxi_r_num=dxi_r,
            dxi_nr_cf=cf_nr,
            dxi_r_cf=cf_r,
            eta=eta,
            improvement=1.0 / eta if eta else math.nan,
            eta_cf=cf_eta,
            deviation=max(deviations) if deviations else math.nan,
            qfi_nr=nr_report.qfi if analyses.qfi else math.nan,
            qfi_r=r_report.qfi if analyses.qfi else math.nan,
            angle_nr=nr_report.angle,
            angle_r=r_report.angle,
        )
        rows.append(row)
    return rows


class Runner:
    """Evaluates a scenario's sweep points and writes one result table.

    Subclasses supply `_rows_for` (the work for one sweep point, run on a
    worker thread) and may override `_collect` for other work lists.
    """

    columns: Sequence[str] = STEADY_COLUMNS

    def __init__(
        self,
        scenario: Scenario,
        report_file: str = "-",
        workers: int = 1,
        tol: float = 1e-8,
        quiet: bool = False,
        debug: bool = False,
    ) -> None:
        if workers < 1:
            raise InvalidSpecError(f"workers must be >= 1, not {workers}")
        if not tol > 0:
            raise InvalidSpecError(f"tol must be > 0, not {tol}")
        self._scenario = scenario
        self._report_file = report_file
        self._workers = workers
        self._tol = tol
        self._quiet = quiet
        self._debug = debug
        # The package logger, so module loggers share its handler and level.
        self._logger = get_logger(__package__ or __name__, quiet, debug)
        self._rows: list[Row] = []
        self._flagged = 0
        self._failures = 0
        self._report_text = ""
        if scenario.output.format == "svg" and self._plot() is None:
            raise InvalidSpecError(
                f"{self.__class__.__name__} has no svg rendering for "
                + f"scenario '{scenario.name}'"
            )

    @property
    def rows(self) -> list[Row]:
        return self._rows

    @property
    def passed(self) -> bool:
        return self._failures == 0

    async def execute(self) -> None:
        """execute() evaluates the scenario, writes the result table and
        the run report."""
        self._logger.debug(
            f"Running scenario '{self._scenario.name}' with "
            + f"{self._workers} worker(s)"
        )
        await self._collect()
        await self._emit()
        await self._prepare_report()
        await self._report()

    async def _map(
        self, func: Callable[[Any], T], items: Sequence[Any]
    ) -> list[T]:
        """func over items on worker threads, results in input order."""
        limit = asyncio.Semaphore(self._workers)

        async def one(item: Any) -> T:
            async with limit:
                return await asyncio.to_thread(func, item)

        return list(await asyncio.gather(*(one(i) for i in items)))

    async def _collect(self) -> None:
        points = self._scenario.points()
        self._logger.info(
            f"Evaluating {len(points)} sweep point(s) of "
            + f"'{self._scenario.name}'"
        )
        results = await self._map(self._guarded, points)
        self._rows = [row for rows in results for row in rows]

    def _guarded(self, spec: ModelSpec) -> list[Row]:
        try:
            return self._rows_for(spec)
        except SensingError as exc:
            self._logger.warning(
                f"Row flagged, not aborted: {exc} "
                + f"(kappa={spec.kappa}, lambda_eff={spec.lambda_eff}, "
                + f"N={spec.n_parallel})"
            )
            row = base_row(spec, self._scenario.reading)
            row["status"] = exc.__class__.__name__
            for column in self.columns:
                row.setdefault(column, math.nan)
            return [row]

    def _rows_for(self, spec: ModelSpec) -> list[Row]:
        raise NotImplementedError

    def _plot(self) -> PlotSpec | None:
        sweep = self._scenario.sweep
        if not sweep:
            return None
        axis = sweep[0]
        positive = min(axis.values) > 0
        wide = positive and max(axis.values) / min(axis.values) >= 100
        return PlotSpec(
            x=AXIS_COLUMNS.get(axis.name, axis.name),
            y="eta",
            group=(
                AXIS_COLUMNS.get(sweep[1].name, sweep[1].name)
                if len(sweep) > 1
                else None
            ),
            log_x=wide,
            title=self._scenario.name,
        )

    async def _emit(self) -> None:
        output = self._scenario.output
        write_table(
            self._rows, self.columns, output.path, output.format, self._plot()
        )

    async def _prepare_report(self) -> None:
        self._flagged = sum(1 for r in self._rows if r["status"] != "ok")
        paragraphs = [
            (
                f"Scenario '{self._scenario.name}' produced "
                + f"{len(self._rows)} rows, written as "
                + f"{self._scenario.output.format} to "
                + f"{self._scenario.output.path}."
            )
        ]
        if self._flagged:
            paragraphs.append(
                f"{self._flagged} rows were flagged; their status column "
                + "names the error."
            )
        paragraphs.extend(self._extra_paragraphs())
        self._report_text = "\n\n".join(textwrap.fill(p) for p in paragraphs)

    def _extra_paragraphs(self) -> list[str]:
        return []

    async def _report(self) -> None:
        if self._quiet:
            return
        text = (
            f"{str_now()} : {self.__class__.__name__}\n------\n"
            + self._report_text
        )
        if self._report_file != "-":
            with open(self._report_file, "a") as fh:
                print(text, file=fh)
        else:
            print(text, file=sys.stderr)


class SteadyRunner(Runner):
    """One row per sweep point: numeric and closed-form steady precision
    of both couplings, eta and the relative deviation."""

    def _rows_for(self, spec: ModelSpec) -> list[Row]:
        return [steady_row(spec, self._scenario)]


class TransientRunner(Runner):
    """Time series of both precisions and eta per sweep point."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        grid = self._scenario.analyses.transient
        if grid is None:
            raise InvalidSpecError(
                f"scenario '{self._scenario.name}' has no transient time grid"
            )
        self._times = grid.times

    def _rows_for(self, spec: ModelSpec) -> list[Row]:
        return transient_rows(spec, self._scenario, self._times)

    def _plot(self) -> PlotSpec | None:
        sweep = self._scenario.sweep
        return PlotSpec(
            x="t",
            y="eta",
            group=AXIS_COLUMNS.get(sweep[0].name) if sweep else None,
            log_x=True,
            title=self._scenario.name,
        )

    def _extra_paragraphs(self) -> list[str]:
        windows = []
        for key in sorted({r["kappa"] for r in self._rows}):
            etas = [
                r["eta"]
                for r in self._rows
                if r["kappa"] == key and not math.isnan(r["eta"])
            ]
            if etas:
                windows.append(
                    f"kappa={key:g}: max eta {max(etas):.6g}, final eta "
                    + f"{etas[-1]:.6g}"
                )
        return windows


class SweepRunner(Runner):
    """Steady rows, then transient rows, for every selected analysis."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        analyses = self._scenario.analyses
        self._steady = analyses.steady or analyses.qfi or analyses.closed_form
        self._times: tuple[float, ...] = ()
        if analyses.transient is not None:
            self._times = analyses.transient.times
        if not self._steady and not self._times:
            raise InvalidSpecError(
                f"scenario '{self._scenario.name}' selects nothing to sweep"
            )

    def _rows_for(self, spec: ModelSpec) -> list[Row]:
        rows = []
        if self._steady:
            rows.append(steady_row(spec, self._scenario))
        if self._times:
            rows.extend(transient_rows(spec, self._scenario, self._times))
        return rows


class Verifier(Runner):
    """Runs the verification battery; fails if any check fails."""

    columns = VERIFY_COLUMNS

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        cfg = self._scenario.analyses.monte_carlo
        if cfg is not None:
            check_step(build(ModelSpec()), cfg)

    async def _collect(self) -> None:
        cfg = self._scenario.analyses.monte_carlo
        seed = DEFAULT_SEED if cfg is None else cfg.seed
        groups = battery(self._tol, seed, cfg)
        self._logger.info(f"Running {len(groups)} check groups")
        results: list[list[CheckResult]] = await self._map(
            run_group, groups
        )
        checks = [check for group in results for check in group]
        for check in checks:
            if check.verdict is Verdict.FAIL:
                self._logger.warning(
                    f"Check {check.tag} failed: deviation {check.deviation} "
                    + f"against tolerance {check.tolerance} ({check.detail})"
                )
            else:
                self._logger.debug(f"Check {check.tag}: {check.verdict.value}")
        self._failures = sum(1 for c in checks if c.verdict is Verdict.FAIL)
        self._rows = [check.as_row() for check in checks]

    def _plot(self) -> PlotSpec | None:
        return None

    async def _prepare_report(self) -> None:
        counts = {
            verdict: sum(1 for r in self._rows if r["verdict"] == verdict)
            for verdict in (v.value for v in Verdict)
        }
        paragraphs = [
            (
                f"{len(self._rows)} checks: {counts['pass']} passed, "
                + f"{counts['fail']} failed, {counts['info']} "
                + "informational."
            )
        ]
        failed = [r["tag"] for r in self._rows if r["verdict"] == "fail"]
        if failed:
            paragraphs.append(f"Failed checks: {', '.join(failed)}.")
        else:
            paragraphs.append("Verification passed.")
        self._report_text = "\n\n".join(textwrap.fill(p) for p in paragraphs)


class MonteCarloRunner(Runner):
    """Sampled against deterministic quadrature means and variances at
    t_end, from vacuum, with z-scores."""

    columns = MONTECARLO_COLUMNS

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        cfg = self._scenario.analyses.monte_carlo
        if cfg is None:
            raise InvalidSpecError(
                f"scenario '{self._scenario.name}' has no monte_carlo analysis"
            )
        self._cfg = cfg
        # Every point must accept dt before any sampling starts.
        for spec in self._scenario.points():
            check_step(build(spec), cfg)

    def _rows_for(self, spec: ModelSpec) -> list[Row]:
        system = build(spec)
        sampled = simulate(system, self._cfg)
        exact = evolve(
            system,
            to_quadrature(system),
            MomentState.vacuum(system.n_modes),
            self._cfg.t_end,
        )
        rows = []
        for mode in range(system.n_modes):
            for offset, name in enumerate(("q", "p")):
                index = 2 * mode + offset
                for quantity, value, reference, stderr in (
                    (
                        f"mean_{name}",
                        sampled.state.mean[index],
                        exact.mean[index],
                        sampled.mean_stderr[index],
                    ),
                    (
                        f"var_{name}",
                        sampled.state.covariance[index, index],
                        exact.covariance[index, index],
                        sampled.covariance_stderr[index, index],
                    ),
                ):
                    z = (
                        float((value - reference) / stderr)
                        if stderr > 0
                        else math.nan
                    )
                    row = base_row(spec, self._scenario.reading)
                    row.update(
                        dt=self._cfg.dt,
                        t_end=self._cfg.t_end,
                        n_traj=self._cfg.n_traj,
                        seed=self._cfg.seed,
                        quantity=quantity,
                        mode=mode,
                        sampled=float(value),
                        deterministic=float(reference),
                        stderr=float(stderr),
                        z=z,
                    )
                    if abs(z) > Z_LIMIT:
                        row["status"] = "outlier"
                    rows.append(row)
        return rows

    def _plot(self) -> PlotSpec | None:
        return None

    async def _collect(self) -> None:
        await super()._collect()
        self._failures = sum(
            1 for r in self._rows if r["status"] == "outlier"
        )

    def _extra_paragraphs(self) -> list[str]:
        outliers = [r for r in self._rows if r["status"] == "outlier"]
        zs = np.array([abs(r["z"]) for r in self._rows], dtype=float)
        largest = float(np.nanmax(zs)) if zs.size else math.nan
        return [
            (
                f"{self._cfg.n_traj} trajectories per point, seed "
                + f"{self._cfg.seed}; largest |z| is {largest:.3g}, "
                + f"{len(outliers)} beyond {Z_LIMIT:g} standard errors."
            )
        ]
