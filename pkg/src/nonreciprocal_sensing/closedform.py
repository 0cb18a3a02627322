"""Closed-form precision, ratio and amplitude expressions.

These are the analytic comparison targets for the numeric pipeline in
`moments` and `fisher`; the numeric pipeline is authoritative.  Rates are
written in terms of the effective coupling lambda_eff (lambda'), except
for the thermal family, whose usual form mixes lambda and lambda'.
`LambdaReading` selects how the bare lambda there is read.
"""
import enum
import math
from dataclasses import dataclass, field

from .exceptions import InvalidSpecError, PrecisionError
from .model import Coupling
from .util import check_nonnegative

# Above this ratio omega/T the occupation underflows to zero.
_BOSE_CUTOFF = 700.0


class LambdaReading(enum.Enum):
    SQRT2 = "sqrt2"
    PRIME = "prime"


@dataclass(frozen=True)
class FormulaInputs:
    """Parameters of the closed forms.

    When `omega` and a temperature are given, the corresponding
    occupation comes from `bose_n` instead of `n_a` / `n_b`.
    """

    kappa: float
    lambda_eff: float
    xi: float = 1.0
    t: float | None = None
    N: int = 1
    delta: float = 0.0
    delta_prime: float = 0.0
    n_a: float = 0.0
    n_b: float = 0.0
    omega: float | None = None
    T_a: float | None = None
    T_b: float | None = None
    reading: LambdaReading = LambdaReading.SQRT2

    def __post_init__(self) -> None:
        check_nonnegative(
            kappa=self.kappa,
            lambda_eff=self.lambda_eff,
            xi=self.xi,
            n_a=self.n_a,
            n_b=self.n_b,
        )
        if isinstance(self.N, bool) or not isinstance(self.N, int):
            raise InvalidSpecError(f"N must be an integer, not {self.N!r}")
        if self.N < 1:
            raise InvalidSpecError(f"N must be >= 1, not {self.N}")
        object.__setattr__(self, "reading", LambdaReading(self.reading))

    @property
    def bare_lambda(self) -> float:
        """The thermal family's lambda under the selected reading."""
        if self.reading is LambdaReading.SQRT2:
            return math.sqrt(2.0) * self.lambda_eff
        return self.lambda_eff

    @property
    def occupations(self) -> tuple[float, float]:
        n_a, n_b = self.n_a, self.n_b
        if self.T_a is not None:
            n_a = bose_n(self._omega(), self.T_a)
        if self.T_b is not None:
            n_b = bose_n(self._omega(), self.T_b)
        return n_a, n_b

    def _omega(self) -> float:
        if self.omega is None:
            raise InvalidSpecError("temperatures need omega")
        return self.omega


@dataclass(frozen=True)
class PrecisionPair:
    dxi_nr: float
    dxi_r: float
    eta: float

    @property
    def improvement(self) -> float:
        return 1.0 / self.eta


@dataclass(frozen=True)
class ParallelPrecision(PrecisionPair):
    asymptotics: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ThermalPrecision(PrecisionPair):
    """Thermal precision.  `mu` is the ratio of the two bracket factors;
    `mu_equal` and `mu_gap` are the equal-temperature factor and its
    distance from 1 (NaN when n_a != n_b); `mu_two_temperature` is the
    standard two-temperature factor."""

    mu: float = math.nan
    mu_equal: float = math.nan
    mu_gap: float = math.nan
    mu_two_temperature: float = math.nan
    asymptotics: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Amplitudes:
    """Steady <b>, <b^dag b> and <b^2> of the coherent response."""

    b: complex
    number: float
    square: complex


def bose_n(omega: float, temperature: float) -> float:
    """Thermal occupation 1/(exp(omega/T) - 1)."""
    if not omega > 0:
        raise InvalidSpecError(f"omega must be > 0, not {omega}")
    if not temperature >= 0:
        raise InvalidSpecError(f"temperature must be >= 0: {temperature}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > _BOSE_CUTOFF:
        return 0.0
    return 1.0 / math.expm1(x)


def _require_coupling(inputs: FormulaInputs) -> None:
    if inputs.lambda_eff == 0:
        raise PrecisionError(
            "lambda_eff = 0 decouples the probe; delta xi is infinite"
        )


def pair_steady(inputs: FormulaInputs) -> PrecisionPair:
    _require_coupling(inputs)
    k, lam = inputs.kappa, inputs.lambda_eff
    dxi_nr = (k + lam) ** 2 / (4 * lam)
    dxi_r = (k**2 + lam**2) / (2 * lam)
    return PrecisionPair(dxi_nr=dxi_nr, dxi_r=dxi_r, eta=dxi_nr / dxi_r)


def _reciprocal_growth(kappa: float, lam: float, t: float) -> float:
    """lambda' - exp(-kappa t)(lambda' cos(lambda' t) + kappa sin(lambda' t))
    without the small-t cancellation."""
    decay = math.exp(-kappa * t)
    half = math.sin(0.5 * lam * t)
    return (
        lam * (-math.expm1(-kappa * t) + 2 * decay * half * half)
        - kappa * decay * math.sin(lam * t)
    )


def _nonreciprocal_growth(kappa: float, lam: float, t: float) -> float:
    """1 - exp(-x)(1 + x) with x = (kappa + lambda') t."""
    x = (kappa + lam) * t
    return -math.expm1(-x) - x * math.exp(-x)


def pair_transient(inputs: FormulaInputs) -> PrecisionPair:
    """Precision at time t from vacuum initial states."""
    _require_coupling(inputs)
    if inputs.t is None or not inputs.t >= 0:
        raise InvalidSpecError(
            f"transient precision needs t >= 0: {inputs.t}"
        )
    k, lam, t = inputs.kappa, inputs.lambda_eff, inputs.t
    growth_r = _reciprocal_growth(k, lam, t)
    growth_nr = _nonreciprocal_growth(k, lam, t)
    if growth_r <= 0 or growth_nr <= 0:
        raise PrecisionError(f"precision is undefined at t = {t}")
    dxi_r = (k**2 + lam**2) / (2 * growth_r)
    dxi_nr = (k + lam) ** 2 / (4 * lam * growth_nr)
    return PrecisionPair(dxi_nr=dxi_nr, dxi_r=dxi_r, eta=dxi_nr / dxi_r)


def transient_q(inputs: FormulaInputs, coupling: Coupling) -> float:
    """<q_b(t)> of the pair from vacuum initial states."""
    if inputs.t is None or not inputs.t >= 0:
        raise InvalidSpecError(f"transient mean needs t >= 0: {inputs.t}")
    k, lam, t = inputs.kappa, inputs.lambda_eff, inputs.t
    if coupling is Coupling.RECIPROCAL:
        if k == 0 and lam == 0:
            return 0.0
        growth = _reciprocal_growth(k, lam, t)
        return inputs.xi * math.sqrt(2.0) * growth / (k**2 + lam**2)
    if coupling is Coupling.NONRECIPROCAL:
        if k + lam == 0:
            return 0.0
        growth = _nonreciprocal_growth(k, lam, t)
        return inputs.xi * 2 * math.sqrt(2.0) * lam * growth / (k + lam) ** 2
    raise InvalidSpecError("custom couplings have no closed form")


def parallel(inputs: FormulaInputs) -> ParallelPrecision:
    """Collective precision of N parallel measurement modes."""
    _require_coupling(inputs)
    k, lam, n = inputs.kappa, inputs.lambda_eff, inputs.N
    root = math.sqrt(n)
    dxi_nr = (k + lam) * (k + n * lam) / (2 * root * lam * (n + 1))
    dxi_r = (k**2 + n**3 * lam**2) / (2 * root * n * lam)
    eta = n * (k + lam) * (k + n * lam) / ((n + 1) * (k**2 + n**3 * lam**2))
    asymptotics = {
        "weak_dissipation": (k + lam) / (n * (n + 1) * lam),
        "weak_dissipation_scaling": 1.0 / n**2,
        "equal_rates": 2.0 * n / (n**3 + 1),
        "strong_dissipation": n / (n + 1.0),
    }
    return ParallelPrecision(
        dxi_nr=dxi_nr, dxi_r=dxi_r, eta=eta, asymptotics=asymptotics
    )


def detuned(inputs: FormulaInputs, opposite: bool = False) -> PrecisionPair:
    """Detuned drive.  With `opposite` the modes are detuned by
    +delta_prime and -delta_prime; otherwise both by delta."""
    _require_coupling(inputs)
    k, lam = inputs.kappa, inputs.lambda_eff
    if opposite:
        d = inputs.delta_prime
        dxi_nr = ((k + lam) ** 2 + d**2) / (4 * lam)
        dxi_r = (k**2 + lam**2 + d**2) / (2 * lam)
        eta = ((k + lam) ** 2 + d**2) / (2 * (k**2 + lam**2 + d**2))
    else:
        d = inputs.delta
        root = math.sqrt((k**2 + (lam - d) ** 2) * (k**2 + (lam + d) ** 2))
        dxi_nr = ((k + lam) ** 2 + d**2) / (4 * lam)
        dxi_r = root / (2 * lam)
        eta = ((k + lam) ** 2 + d**2) / (2 * root)
    return PrecisionPair(dxi_nr=dxi_nr, dxi_r=dxi_r, eta=eta)


def _thermal_brackets(inputs: FormulaInputs) -> tuple[float, float]:
    """Excess terms E_nr, E_r of the brackets [1 + E] multiplying the
    zero-temperature precisions."""
    k, lp, lam = inputs.kappa, inputs.lambda_eff, inputs.bare_lambda
    n_a, n_b = inputs.occupations
    extra_nr = (4 * n_a * k * lam**2 + 2 * n_b * k * (k + lp) ** 2) / (
        k + lam
    ) ** 3
    extra_r = (n_a * lam**2 + n_b * (2 * k**2 + lam**2)) / (k**2 + lp**2)
    return extra_nr, extra_r


def thermal(inputs: FormulaInputs) -> ThermalPrecision:
    """Thermal-bath precision, verbatim under `inputs.reading`."""
    _require_coupling(inputs)
    base = pair_steady(inputs)
    extra_nr, extra_r = _thermal_brackets(inputs)
    dxi_nr = base.dxi_nr * (1 + extra_nr)
    dxi_r = base.dxi_r * (1 + extra_r)
    k, lp, lam = inputs.kappa, inputs.lambda_eff, inputs.bare_lambda
    n_a, n_b = inputs.occupations
    mu_two = (1 + extra_nr) / (
        1 + (n_a * lam**2 + n_b * (2 * k**2 + lam**2)) / (2 * (k**2 + lp**2))
    )
    mu_equal = mu_gap = math.nan
    asymptotics: dict[str, float] = {}
    if n_a == n_b:
        n = n_a
        cube = (k + lam) ** 3
        mu_equal = (cube + 4 * n * k * lam**2 + 2 * n * k * (k + lp) ** 2) / (
            (1 + 2 * n) * cube
        )
        mu_gap = -2 * n * lam * (k**2 + lam**2) / ((1 + 2 * n) * cube)
        asymptotics = {
            "equal_rates": 1 - n / (2 * (1 + 2 * n)),
            "weak_dissipation": 1 / (2 * (1 + 2 * n)),
            # As printed: eta = mu/2, half the limit above.
            "weak_dissipation_verbatim": 1 / (4 * (1 + 2 * n)),
            "strong_dissipation": 0.5 - n * lam / (k * (1 + 2 * n))
            if k > 0
            else math.nan,
        }
    return ThermalPrecision(
        dxi_nr=dxi_nr,
        dxi_r=dxi_r,
        eta=dxi_nr / dxi_r,
        mu=(1 + extra_nr) / (1 + extra_r),
        mu_equal=mu_equal,
        mu_gap=mu_gap,
        mu_two_temperature=mu_two,
        asymptotics=asymptotics,
    )


def thermal_excess(inputs: FormulaInputs, coupling: Coupling) -> float:
    """Thermal part of the steady <b^dag b>, verbatim under the reading."""
    k, lp, lam = inputs.kappa, inputs.lambda_eff, inputs.bare_lambda
    n_a, n_b = inputs.occupations
    if coupling is Coupling.NONRECIPROCAL:
        if k + lam == 0:
            raise PrecisionError("kappa = lambda = 0 has no steady state")
        return (2 * n_a * k * lam**2 + n_b * k * (k + lp) ** 2) / (
            k + lam
        ) ** 3
    if coupling is Coupling.RECIPROCAL:
        if k == 0:
            raise PrecisionError("kappa = 0 has no reciprocal steady state")
        return (n_a * lam**2 + n_b * (2 * k**2 + lam**2)) / (
            2 * (k**2 + lp**2)
        )
    raise InvalidSpecError("custom couplings have no closed form")


def steady_amplitudes(inputs: FormulaInputs, coupling: Coupling) -> Amplitudes:
    """Coherent steady response of one measurement mode.

    Pairs (N = 1) use kappa' = kappa + i*delta; the star forms are
    resonant only.
    """
    k, lam, xi, n = inputs.kappa, inputs.lambda_eff, inputs.xi, inputs.N
    if n > 1 and inputs.delta != 0:
        raise InvalidSpecError("detuned star networks have no closed form")
    kp = complex(k, inputs.delta)
    if coupling is Coupling.NONRECIPROCAL:
        b = 1j * xi * lam * (n + 1) / ((kp + n * lam) * (kp + lam))
    elif coupling is Coupling.RECIPROCAL:
        b = 1j * xi * n * lam / (kp**2 + n**3 * lam**2)
    else:
        raise InvalidSpecError("custom couplings have no closed form")
    return Amplitudes(b=b, number=abs(b) ** 2, square=b * b)
