"""Verification battery comparing the numeric pipeline with the closed
forms.  Each group returns CheckResult records; a group never raises for
a failed comparison, failures are verdicts."""
import enum
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from .closedform import (
    FormulaInputs,
    LambdaReading,
    detuned,
    pair_steady,
    pair_transient,
    parallel,
    steady_amplitudes,
    thermal,
    thermal_excess,
)
from .exceptions import PrecisionError, SensingError
from .fisher import (
    closed_form_report,
    collective_precision,
    covariance_derivative,
    qfi_terms,
    sampled_report,
    steady_precision,
    transient_precision,
)
from .model import (
    Coupling,
    ModelSpec,
    ParallelConvention,
    Topology,
    build,
    mode_slice,
    quadrature_vector,
    sensitivity_system,
    stability_margin,
    to_quadrature,
)
from .moments import expm, propagate_mean, steady_covariance, steady_mean
from .scenario import FIG2_LAMBDA
from .trajectory import SimConfig, simulate

COUPLINGS = (Coupling.NONRECIPROCAL, Coupling.RECIPROCAL)
FIG2_KAPPAS = (0.1, 1.0, 1000.0)


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INFO = "info"


@dataclass(frozen=True)
class CheckResult:
    tag: str
    numeric: float
    closed_form: float
    deviation: float
    tolerance: float
    verdict: Verdict
    detail: str = ""

    def as_row(self) -> dict[str, Any]:
        return {
            "tag": self.tag,
            "numeric": self.numeric,
            "closed_form": self.closed_form,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "verdict": self.verdict.value,
            "detail": self.detail,
        }


def relative(numeric: float, closed: float) -> float:
    if closed == 0:
        return abs(numeric)
    return abs(numeric - closed) / abs(closed)


def compare(
    tag: str,
    numeric: float,
    closed: float,
    tolerance: float,
    detail: str = "",
) -> CheckResult:
    deviation = relative(numeric, closed)
    return CheckResult(
        tag=tag,
        numeric=numeric,
        closed_form=closed,
        deviation=deviation,
        tolerance=tolerance,
        verdict=Verdict.PASS if deviation <= tolerance else Verdict.FAIL,
        detail=detail,
    )


def info(
    tag: str, numeric: float, closed: float, detail: str = ""
) -> CheckResult:
    return CheckResult(
        tag=tag,
        numeric=numeric,
        closed_form=closed,
        deviation=relative(numeric, closed),
        tolerance=math.nan,
        verdict=Verdict.INFO,
        detail=detail,
    )


def holds(
    tag: str, condition: bool, value: float, bound: float, detail: str
) -> CheckResult:
    return CheckResult(
        tag=tag,
        numeric=value,
        closed_form=bound,
        deviation=value - bound,
        tolerance=0.0,
        verdict=Verdict.PASS if condition else Verdict.FAIL,
        detail=detail,
    )


def worst(
    tag: str,
    cases: Iterable[tuple[float, float, str]],
    tolerance: float,
) -> CheckResult:
    """The comparison with the largest relative deviation over `cases`
    of (numeric, closed form, label)."""
    found: tuple[float, float, float, str] | None = None
    count = 0
    for numeric, closed, label in cases:
        count += 1
        deviation = relative(numeric, closed)
        if found is None or not deviation <= found[0]:
            found = (deviation, numeric, closed, label)
    assert found is not None
    return compare(
        tag,
        found[1],
        found[2],
        tolerance,
        f"worst of {count} at {found[3]}",
    )


def _dxi(spec: ModelSpec) -> float:
    return steady_precision(build(spec)).delta_xi


def pair_steady_checks(tol: float) -> list[CheckResult]:
    grid = np.geomspace(1e-2, 1e2, 20)
    points = [(float(k), float(lam)) for k in grid for lam in grid]
    results = []
    for coupling in COUPLINGS:

        def precision(k: float, lam: float) -> float:
            cf = pair_steady(FormulaInputs(kappa=k, lambda_eff=lam))
            if coupling is Coupling.NONRECIPROCAL:
                return cf.dxi_nr
            return cf.dxi_r

        def spec_for(k: float, lam: float) -> ModelSpec:
            return ModelSpec(kappa=k, lambda_eff=lam, coupling=coupling)

        results.append(
            worst(
                f"pair.steady.{coupling.value}",
                (
                    (
                        _dxi(spec_for(k, lam)),
                        precision(k, lam),
                        f"kappa={k:.4g}, lambda_eff={lam:.4g}",
                    )
                    for k, lam in points
                ),
                tol,
            )
        )
        results.append(
            worst(
                f"pair.amplitude.{coupling.value}",
                (
                    (
                        steady_mean(build(spec_for(k, lam)))[1].imag,
                        steady_amplitudes(
                            FormulaInputs(kappa=k, lambda_eff=lam), coupling
                        ).b.imag,
                        f"kappa={k:.4g}, lambda_eff={lam:.4g}",
                    )
                    for k, lam in points
                ),
                tol,
            )
        )
    return results


def ratio_checks(seed: int, samples: int = 10000) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    kappas = 10 ** rng.uniform(-3, 3, samples)
    lambdas = 10 ** rng.uniform(-3, 3, samples)
    etas = np.array(
        [
            pair_steady(FormulaInputs(kappa=k, lambda_eff=lam)).eta
            for k, lam in zip(kappas, lambdas)
        ]
    )
    excursion = float(max(0.0, 0.5 - etas.min(), etas.max() - 1.0))
    results = [
        holds(
            "pair.ratio.bound",
            excursion <= 1e-15,
            excursion,
            0.0,
            f"{samples} samples, eta in [{etas.min():.6g}, {etas.max():.6g}]",
        )
    ]
    equal = [
        (pair_steady(FormulaInputs(kappa=r, lambda_eff=r)).eta, 1.0, f"{r}")
        for r in (1e-2, 1.0, 1e2)
    ]
    numeric_equal = [
        (
            _dxi(ModelSpec(kappa=r, lambda_eff=r))
            / _dxi(
                ModelSpec(kappa=r, lambda_eff=r, coupling=Coupling.RECIPROCAL)
            ),
            1.0,
            f"numeric {r}",
        )
        for r in (0.1, 1.0, 10.0)
    ]
    results.append(worst("pair.ratio.equal_rates", equal, 1e-12))
    results.append(
        worst("pair.ratio.equal_rates.numeric", numeric_equal, 1e-12)
    )
    return results


def fig2_times(kappa: float) -> list[float]:
    times = {float(t) for t in np.geomspace(1e-3, 1e3, 601)}
    times.add(50.0 / kappa)
    return sorted(times)


def transient_checks(tol: float) -> list[CheckResult]:
    results = []
    lam = FIG2_LAMBDA
    for kappa in FIG2_KAPPAS:
        times = fig2_times(kappa)
        spec = ModelSpec(kappa=kappa, lambda_eff=lam)
        nr = transient_precision(build(spec), times)
        r = transient_precision(
            build(replace(spec, coupling=Coupling.RECIPROCAL)), times
        )
        cases = []
        etas = []
        for t, nr_report, r_report in zip(times, nr, r):
            try:
                cf = pair_transient(
                    FormulaInputs(kappa=kappa, lambda_eff=lam, t=t)
                )
            except PrecisionError:
                continue
            label = f"t={t:.4g}"
            cases.append((nr_report.delta_xi, cf.dxi_nr, "nr " + label))
            cases.append((r_report.delta_xi, cf.dxi_r, "r " + label))
            etas.append((t, nr_report.delta_xi / r_report.delta_xi))
        name = f"kappa={kappa:g}"
        results.append(worst(f"transient.fig.{name}", cases, tol))
        peak_t, peak = max(etas, key=lambda item: item[1])
        above = kappa < 1000
        results.append(
            holds(
                f"transient.window.{name}",
                (peak > 1.0) == above,
                peak,
                1.0,
                f"max eta(t) at t={peak_t:.4g}; expected "
                + ("above 1" if above else "below 1 throughout"),
            )
        )
        limit_t = 50.0 / kappa
        limit = dict(etas)[limit_t]
        steady = pair_steady(FormulaInputs(kappa=kappa, lambda_eff=lam)).eta
        results.append(
            compare(
                f"transient.limit.{name}",
                limit,
                steady,
                1e-6,
                f"t={limit_t:g}",
            )
        )
        # The reciprocal branch still rings at 50/(kappa + lambda_eff) when
        # kappa << lambda_eff.
        horizon = 50.0 / (kappa + lam)
        (nr_h,) = transient_precision(build(spec), [horizon])
        (r_h,) = transient_precision(
            build(replace(spec, coupling=Coupling.RECIPROCAL)), [horizon]
        )
        results.append(
            info(
                f"transient.limit.{name}.sum_rate",
                nr_h.delta_xi / r_h.delta_xi,
                steady,
                f"t=50/(kappa+lambda_eff)={horizon:.4g}",
            )
        )
    return results


def optimal_checks(seed: int, samples: int = 50) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    saturation = []
    extra = 0.0
    p_mean = 0.0
    specs = [
        ModelSpec(kappa=float(k), lambda_eff=float(lam), coupling=c)
        for k, lam in 10 ** rng.uniform(-1, 1, (samples, 2))
        for c in COUPLINGS
    ]
    specs.append(ModelSpec(topology=Topology.STAR, n_parallel=3))
    for spec in specs:
        sys = build(spec)
        report = steady_precision(sys)
        label = (
            f"{spec.coupling.value} kappa={spec.kappa:.4g}, "
            f"lambda_eff={spec.lambda_eff:.4g}, N={spec.n_parallel}"
        )
        saturated = report.delta_xi * math.sqrt(report.qfi)
        saturation.append((saturated, 1.0, label))
        block = mode_slice(1)
        cov = steady_covariance(to_quadrature(sys))[block, block]
        deriv = steady_mean(sensitivity_system(sys))[1]
        terms = qfi_terms(
            quadrature_vector([deriv]),
            cov,
            covariance_derivative(sys)[block, block],
        )
        extra = max(extra, abs(terms[0]) + abs(terms[1]))
        p_mean = max(p_mean, abs(quadrature_vector(steady_mean(sys))[3]))
    return [
        worst("optimal.homodyne", saturation, 1e-12),
        holds(
            "optimal.extra_terms",
            extra <= 1e-12,
            extra,
            0.0,
            "covariance and purity terms of the QFI",
        ),
        holds(
            "optimal.p_mean",
            p_mean <= 1e-12,
            p_mean,
            0.0,
            "steady <p_b> on resonance",
        ),
    ]


def _collective_eta(spec: ModelSpec) -> float:
    nr = collective_precision(build(spec)).report.delta_xi
    r = collective_precision(
        build(replace(spec, coupling=Coupling.RECIPROCAL))
    ).report.delta_xi
    return nr / r


def parallel_checks(tol: float) -> list[CheckResult]:
    def star(k: float, lam: float, n: int) -> ModelSpec:
        return ModelSpec(
            kappa=k, lambda_eff=lam, topology=Topology.STAR, n_parallel=n
        )

    cases = []
    for k, lam, counts in (
        (1.0, 1.0, range(1, 65)),
        (0.5, 2.0, (1, 2, 3, 5, 8, 16, 32, 64)),
        (2.0, 0.5, (1, 2, 3, 5, 8, 16, 32, 64)),
    ):
        for n in counts:
            cf = parallel(FormulaInputs(kappa=k, lambda_eff=lam, N=n)).eta
            cases.append(
                (_collective_eta(star(k, lam, n)), cf, f"{k}, {lam}, N={n}")
            )
    equal = [
        (_collective_eta(star(1.0, 1.0, n)), 2.0 * n / (n**3 + 1), f"N={n}")
        for n in (1, 2, 4, 8, 16, 32, 64)
    ]
    large = _collective_eta(star(0.01, 1.0, 100))
    exact = collective_precision(build(star(1.0, 1.0, 4)))
    pair = build(ModelSpec())
    reduced = all(
        np.array_equal(
            build(
                replace(
                    star(1.0, 1.0, 1),
                    convention=convention,
                    kappa=0.7,
                    lambda_eff=1.3,
                )
            ).drift,
            build(ModelSpec(kappa=0.7, lambda_eff=1.3)).drift,
        )
        for convention in ParallelConvention
    )
    return [
        worst("parallel.ratio", cases, tol),
        worst("parallel.equal_rates", equal, 1e-10),
        compare(
            "parallel.weak_dissipation",
            large,
            1e-4,
            0.2,
            "N=100, kappa=0.01, lambda_eff=1 against 1/N^2",
        ),
        holds(
            "parallel.reduction",
            reduced,
            float(pair.n_modes),
            2.0,
            "star with N=1 matches the pair drift in both conventions",
        ),
        info(
            "parallel.exact_variance",
            exact.exact_variance,
            exact.assumed_variance,
            "N=4, kappa=lambda_eff=1: exact Var(Q) against N/2",
        ),
    ]


def detuned_checks(tol: float) -> list[CheckResult]:
    rates = (0.5, 1.0, 2.0)
    detunings = (0.0, 0.5, 1.0, 3.0)
    results = []
    for opposite in (False, True):
        cases = []
        for k in rates:
            for lam in rates:
                for d in detunings:
                    inputs = FormulaInputs(
                        kappa=k,
                        lambda_eff=lam,
                        delta=0.0 if opposite else d,
                        delta_prime=d if opposite else 0.0,
                    )
                    cf = detuned(inputs, opposite=opposite)
                    spec = ModelSpec(
                        kappa=k,
                        lambda_eff=lam,
                        detuning_a=d,
                        detuning_b=-d if opposite else d,
                    )
                    label = f"{k}, {lam}, delta={d}"
                    cases.append((_dxi(spec), cf.dxi_nr, "nr " + label))
                    r_spec = replace(spec, coupling=Coupling.RECIPROCAL)
                    cases.append((_dxi(r_spec), cf.dxi_r, "r " + label))
        name = "opposite" if opposite else "equal"
        results.append(worst(f"detuned.{name}", cases, tol))

    def eta(spec: ModelSpec) -> float:
        return _dxi(spec) / _dxi(replace(spec, coupling=Coupling.RECIPROCAL))

    loses = eta(
        ModelSpec(kappa=0.1, lambda_eff=1.0, detuning_a=1.0, detuning_b=1.0)
    )
    results.append(
        holds(
            "detuned.equal.loses",
            loses > 1.0,
            loses,
            1.0,
            "delta = lambda_eff = 1, kappa = 0.1",
        )
    )
    opposite_etas = [
        eta(
            ModelSpec(kappa=k, lambda_eff=lam, detuning_a=d, detuning_b=-d)
        )
        for k in rates
        for lam in rates
        for d in (0.25, 1.0, 2.0, 10.0)
    ]
    largest = max(opposite_etas)
    results.append(
        holds(
            "detuned.opposite.wins",
            largest < 1.0,
            largest,
            1.0,
            f"max over {len(opposite_etas)} points with delta_prime > 0",
        )
    )
    return results


def _excess(spec: ModelSpec) -> float:
    """Thermal part of <b^dag b> from the steady covariance."""
    cov = steady_covariance(to_quadrature(build(spec)))
    block = cov[mode_slice(1), mode_slice(1)]
    return 0.5 * float(np.trace(block)) - 0.5


def thermal_checks() -> list[CheckResult]:
    rates = ((1.0, 1.0), (0.5, 2.0), (2.0, 0.5))
    results = []
    for n in (1e-3, 1e-2):
        cases = []
        for k, lam in rates:
            spec = ModelSpec(kappa=k, lambda_eff=lam, n_a=n, n_b=n)
            exact = _dxi(spec) / _dxi(
                replace(spec, coupling=Coupling.RECIPROCAL)
            )
            inputs = FormulaInputs(
                kappa=k,
                lambda_eff=lam,
                n_a=n,
                n_b=n,
                reading=LambdaReading.PRIME,
            )
            base = pair_steady(inputs).eta
            first_order = base * (1 + 0.5 * (thermal(inputs).mu - 1))
            cases.append((exact, first_order, f"{k}, {lam}"))
        results.append(worst(f"thermal.first_order.n={n:g}", cases, n**2))
    spec = ModelSpec(kappa=1.0, lambda_eff=1.0, n_a=1.0, n_b=1.0)
    exact = _dxi(spec) / _dxi(replace(spec, coupling=Coupling.RECIPROCAL))
    verbatim = thermal(
        FormulaInputs(kappa=1.0, lambda_eff=1.0, n_a=1.0, n_b=1.0)
    ).eta
    results.append(
        info(
            "thermal.verbatim",
            exact,
            verbatim,
            "n=1, kappa=lambda_eff=1, lambda read as sqrt(2) lambda_eff",
        )
    )
    for coupling in COUPLINGS:
        cases = []
        for k, lam in rates:
            for n_a, n_b in ((0.2, 0.0), (0.0, 0.5), (1.0, 3.0)):
                spec = ModelSpec(
                    kappa=k,
                    lambda_eff=lam,
                    n_a=n_a,
                    n_b=n_b,
                    coupling=coupling,
                )
                inputs = FormulaInputs(
                    kappa=k,
                    lambda_eff=lam,
                    n_a=n_a,
                    n_b=n_b,
                    reading=LambdaReading.PRIME,
                )
                cases.append(
                    (
                        _excess(spec),
                        thermal_excess(inputs, coupling),
                        f"{k}, {lam}, n_a={n_a}, n_b={n_b}",
                    )
                )
        results.append(worst(f"thermal.excess.{coupling.value}", cases, 1e-8))
    sample = ModelSpec(kappa=1.0, lambda_eff=1.0, n_a=0.2)
    results.append(
        info(
            "thermal.excess.verbatim",
            _excess(sample),
            thermal_excess(
                FormulaInputs(kappa=1.0, lambda_eff=1.0, n_a=0.2),
                Coupling.NONRECIPROCAL,
            ),
            "n_a=0.2, kappa=lambda_eff=1, lambda read as sqrt(2) lambda_eff",
        )
    )
    occupations = np.concatenate(([0.0], np.geomspace(1e-3, 100, 60)))
    mus = [
        thermal(
            FormulaInputs(
                kappa=k,
                lambda_eff=lam,
                n_a=float(n),
                n_b=float(n),
                reading=LambdaReading.PRIME,
            )
        ).mu_equal
        for k, lam in rates
        for n in occupations
    ]
    per_rate = np.array(mus).reshape(len(rates), occupations.size)
    decreasing = bool(np.all(np.diff(per_rate, axis=1) < 0))
    results.append(
        holds(
            "thermal.mu.bound",
            bool(per_rate.max() <= 1.0) and decreasing,
            float(per_rate.max()),
            1.0,
            "mu <= 1 and decreasing for n in [0, 100]",
        )
    )
    equal = [
        (
            thermal(
                FormulaInputs(
                    kappa=r,
                    lambda_eff=r,
                    n_a=n,
                    n_b=n,
                    reading=LambdaReading.PRIME,
                )
            ).eta,
            1 - n / (2 * (1 + 2 * n)),
            f"kappa=lambda_eff={r}, n={n}",
        )
        for r in (0.5, 1.0, 3.0)
        for n in (0.1, 1.0, 5.0)
    ]
    results.append(worst("thermal.equal_rates", equal, 1e-10))
    strong = thermal(
        FormulaInputs(
            kappa=1e-6,
            lambda_eff=1.0,
            n_a=1.0,
            n_b=1.0,
            reading=LambdaReading.PRIME,
        )
    )
    results.append(
        info(
            "thermal.weak_dissipation",
            strong.eta,
            strong.asymptotics["weak_dissipation"],
            "lambda_eff >> kappa, n=1: limit 1/(2(1+2n)) = 1/6",
        )
    )
    results.append(
        info(
            "thermal.weak_dissipation.verbatim",
            strong.asymptotics["weak_dissipation"],
            strong.asymptotics["weak_dissipation_verbatim"],
            "n=1: derived limit 1/6 against the printed mu/2 = 1/12",
        )
    )
    return results


def _jordan_oracle(t: float) -> np.ndarray:
    """exp(M t) for M = -2 I + [[0, 0], [-2, 0]]; the series of the
    nilpotent part ends after its linear term."""
    return math.exp(-2 * t) * np.array([[1.0, 0.0], [-2.0 * t, 1.0]])


def moment_checks(seed: int) -> list[CheckResult]:
    jordan = np.array([[-2.0, 0.0], [-2.0, -2.0]])
    error = max(
        float(np.max(np.abs(expm(jordan, t) - _jordan_oracle(t))))
        for t in np.linspace(0.0, 10.0, 101)
    )
    rng = np.random.default_rng(seed)
    semigroup = 0.0
    for _ in range(20):
        drift = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        drift -= (np.max(np.linalg.eigvals(drift).real) + 0.5) * np.eye(4)
        t1, t2 = rng.uniform(0.0, 2.0, 2)
        split = expm(drift, t1) @ expm(drift, t2)
        gap = float(np.max(np.abs(expm(drift, t1 + t2) - split)))
        semigroup = max(semigroup, gap)
    vacuum = 0.0
    consistency = 0.0
    for coupling in COUPLINGS:
        for k, lam in ((1.0, 1.0), (0.3, 2.0), (2.0, 0.1)):
            sys = build(ModelSpec(kappa=k, lambda_eff=lam, coupling=coupling))
            cov = steady_covariance(to_quadrature(sys))
            vacuum = max(vacuum, float(np.max(np.abs(cov - 0.5 * np.eye(4)))))
            horizon = 60.0 / abs(stability_margin(sys))
            late = propagate_mean(sys, np.zeros(2), horizon)
            consistency = max(
                consistency,
                float(np.max(np.abs(late - steady_mean(sys)))),
            )
    return [
        holds(
            "expm.defective",
            error <= 1e-12,
            error,
            0.0,
            "Jordan block at the nonreciprocal point, t in [0, 10]",
        ),
        holds(
            "expm.semigroup",
            semigroup <= 1e-10,
            semigroup,
            0.0,
            "20 random stable drifts",
        ),
        holds(
            "moments.vacuum_fixed_point",
            vacuum <= 1e-12,
            vacuum,
            0.0,
            "steady covariance of vacuum pairs against I/2",
        ),
        holds(
            "moments.steady_consistency",
            consistency <= 1e-8,
            consistency,
            0.0,
            "mean at t = 60/|margin| against the steady mean",
        ),
    ]


def montecarlo_checks(cfg: SimConfig) -> list[CheckResult]:
    spec = ModelSpec()
    sys = build(spec)
    sampled = simulate(sys, cfg)
    index = 2  # q_b
    mean = float(sampled.state.mean[index])
    stderr = float(sampled.mean_stderr[index])
    target = math.sqrt(2.0) / 2
    z = abs(mean - target) / stderr
    variance = float(sampled.state.covariance[index, index])
    block = mode_slice(1)
    measured = sampled_report(
        sampled.state.mean[block],
        sampled.state.covariance[block, block],
        spec.xi,
    )
    expected = closed_form_report(
        pair_steady(
            FormulaInputs(kappa=spec.kappa, lambda_eff=spec.lambda_eff)
        ).dxi_nr
    )
    small = replace(cfg, n_traj=min(cfg.n_traj, 1000))
    first = simulate(sys, small)
    second = simulate(sys, small)
    identical = np.array_equal(
        first.state.mean, second.state.mean
    ) and np.array_equal(first.state.covariance, second.state.covariance)
    return [
        holds(
            "montecarlo.mean",
            z < 4.0,
            mean,
            target,
            f"z = {z:.3g} with {sampled.n_traj} trajectories",
        ),
        compare(
            "montecarlo.variance",
            variance,
            0.5,
            0.05,
            f"Var(q_b) from {sampled.n_traj} trajectories",
        ),
        compare(
            "montecarlo.precision",
            measured.delta_xi,
            expected.delta_xi,
            0.05,
            f"{measured.provenance.value} delta xi on b against the "
            + expected.provenance.value,
        ),
        holds(
            "montecarlo.determinism",
            identical,
            float(small.seed),
            float(small.seed),
            "two runs with one seed",
        ),
    ]


CheckGroup = tuple[str, Callable[[], list[CheckResult]]]


def battery(
    tol: float, seed: int, monte_carlo: SimConfig | None
) -> list[CheckGroup]:
    """Named check groups in report order."""
    groups: list[CheckGroup] = [
        ("pair.steady", lambda: pair_steady_checks(tol)),
        ("pair.ratio", lambda: ratio_checks(seed)),
        ("transient", lambda: transient_checks(tol)),
        ("optimal", lambda: optimal_checks(seed)),
        ("parallel", lambda: parallel_checks(tol)),
        ("detuned", lambda: detuned_checks(tol)),
        ("thermal", thermal_checks),
        ("moments", lambda: moment_checks(seed)),
    ]
    if monte_carlo is not None:
        cfg = monte_carlo
        groups.append(("montecarlo", lambda: montecarlo_checks(cfg)))
    return groups


def run_group(group: CheckGroup) -> list[CheckResult]:
    """Run one group; an error inside it becomes a single failed check."""
    name, checks = group
    try:
        return checks()
    except SensingError as exc:
        return [
            CheckResult(
                tag=f"{name}.error",
                numeric=math.nan,
                closed_form=math.nan,
                deviation=math.nan,
                tolerance=math.nan,
                verdict=Verdict.FAIL,
                detail=f"{exc.__class__.__name__}: {exc}",
            )
        ]
