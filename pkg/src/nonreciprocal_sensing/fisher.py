"""Gaussian quantum Fisher information and homodyne precision.

The homodyne family is X_theta = (b e^{-i theta} + b^dag e^{i theta})/sqrt(2)
= sin(theta) q + cos(theta) p, so theta = pi/2 measures q.
"""
import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidSpecError, PrecisionError
from .model import (
    LinearSystem,
    mode_slice,
    quadrature_vector,
    sensitivity_system,
    to_quadrature,
)
from .moments import (
    MomentState,
    covariance_path,
    propagate_mean,
    steady_covariance,
    steady_mean,
)

# Below this |d(sqrt det C)/dxi| the purity term is taken as zero.
PURITY_TOLERANCE = 1e-14

logger = logging.getLogger(__name__)


class Provenance(enum.Enum):
    NUMERIC = "numeric"
    CLOSED_FORM = "closed_form"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class PrecisionReport:
    """Fisher information and precision of estimating xi.

    `delta_xi` is infinite (and `qfi` zero) when the signal does not
    depend on xi at all, which happens at t = 0.
    """

    qfi: float
    delta_xi: float
    angle: float
    eta: float | None = None
    provenance: Provenance = Provenance.NUMERIC

    @property
    def improvement(self) -> float | None:
        if self.eta is None:
            return None
        return 1.0 / self.eta


@dataclass(frozen=True)
class CollectiveReport:
    """Precision of the collective quadrature Q = sum_j q_j over the
    measurement modes, under the assumed (uncorrelated vacuum) variance
    N/2 and under the exact steady variance."""

    report: PrecisionReport
    assumed_variance: float
    exact_variance: float
    exact_delta_xi: float


def qfi_terms(
    mean_deriv: np.ndarray, cov: np.ndarray, cov_deriv: np.ndarray
) -> tuple[float, float, float]:
    """The covariance, purity and displacement terms of the single-mode
    Gaussian QFI, with d = sqrt(det C)."""
    g = np.asarray(mean_deriv, dtype=float).reshape(2)
    c = np.asarray(cov, dtype=float).reshape(2, 2)
    dc = np.asarray(cov_deriv, dtype=float).reshape(2, 2)
    if not np.allclose(c, c.T, rtol=1e-10, atol=1e-14):
        raise InvalidSpecError("covariance must be symmetric")
    det = float(np.linalg.det(c))
    if det <= 0 or np.min(np.linalg.eigvalsh(c)) <= 0:
        raise PrecisionError(f"covariance is singular (det = {det})")
    inv = np.linalg.inv(c)
    d = math.sqrt(det)
    ratio = inv @ dc
    weight = 2 * d**2 / (4 * d**2 + 1)
    covariance_term = weight * float(np.trace(ratio @ ratio))
    d_deriv = 0.5 * d * float(np.trace(ratio))
    purity_term = 0.0
    if abs(d_deriv) > PURITY_TOLERANCE:
        denominator = 16 * d**4 - 1
        if denominator <= 0:
            raise PrecisionError(
                "purity changes with xi at a pure state; QFI is undefined"
            )
        purity_term = 8 * d_deriv**2 / denominator
    displacement_term = float(g @ inv @ g)
    return covariance_term, purity_term, displacement_term


def gaussian_qfi(
    mean_deriv: np.ndarray, cov: np.ndarray, cov_deriv: np.ndarray
) -> float:
    return sum(qfi_terms(mean_deriv, cov, cov_deriv))


def error_propagation(
    mean_of_x: float, var_of_x: float, dmean_dxi: float
) -> float:
    """delta xi = sd(X) / |d<X>/dxi|."""
    if not var_of_x >= 0:
        raise InvalidSpecError(f"variance must be >= 0, not {var_of_x}")
    if dmean_dxi == 0 or not math.isfinite(dmean_dxi):
        raise PrecisionError(
            f"<X> = {mean_of_x} does not respond to xi; precision is lost"
        )
    return math.sqrt(var_of_x) / abs(dmean_dxi)


def homodyne_moments(
    mean_q: np.ndarray, cov: np.ndarray, angle: float
) -> tuple[float, float]:
    """Mean and variance of X_angle for one mode's (q, p) moments."""
    u = np.array([math.sin(angle), math.cos(angle)])
    mean = float(u @ np.asarray(mean_q, dtype=float).reshape(2))
    var = float(u @ np.asarray(cov, dtype=float).reshape(2, 2) @ u)
    return mean, var


def optimal_quadrature(
    steady_mean_deriv: complex, cov: np.ndarray
) -> tuple[float, float]:
    """Angle maximizing |d<X_theta>/dxi| and the homodyne delta xi there.

    The signal is sqrt(2)|beta'| cos(theta - arg beta'), so the optimum
    is theta = arg beta'.
    """
    deriv = complex(steady_mean_deriv)
    if deriv == 0:
        raise PrecisionError("mean does not depend on xi; no optimal angle")
    angle = math.atan2(deriv.imag, deriv.real)
    dmean, var = homodyne_moments(quadrature_vector([deriv]), cov, angle)
    return angle, error_propagation(math.nan, var, dmean)


def _single_mode_report(
    deriv: complex, cov: np.ndarray, cov_deriv: np.ndarray
) -> PrecisionReport:
    try:
        angle, delta_xi = optimal_quadrature(deriv, cov)
    except PrecisionError:
        return PrecisionReport(qfi=0.0, delta_xi=math.inf, angle=math.nan)
    qfi = gaussian_qfi(quadrature_vector([deriv]), cov, cov_deriv)
    return PrecisionReport(qfi=qfi, delta_xi=delta_xi, angle=angle)


def _shifted_drive(sys: LinearSystem) -> LinearSystem:
    return LinearSystem(
        drift=sys.drift,
        drive=sys.drive + sensitivity_system(sys).drive,
        input_matrix=sys.input_matrix,
        bath_occupations=sys.bath_occupations,
    )


def covariance_derivative(sys: LinearSystem) -> np.ndarray:
    """d C/d xi of the steady state, by differencing two drives.  Zero
    for every model built here; computed so the QFI never assumes it."""
    cov = steady_covariance(to_quadrature(sys))
    other = steady_covariance(to_quadrature(_shifted_drive(sys)))
    return other - cov


def steady_precision(sys: LinearSystem, mode: int = 1) -> PrecisionReport:
    """Steady-state QFI and optimal homodyne precision on one mode."""
    if not 0 <= mode < sys.n_modes:
        raise InvalidSpecError(
            f"no mode {mode} in a {sys.n_modes}-mode model"
        )
    deriv = steady_mean(sensitivity_system(sys))[mode]
    cov = steady_covariance(to_quadrature(sys))
    cov_deriv = covariance_derivative(sys)
    block = mode_slice(mode)
    report = _single_mode_report(
        deriv, cov[block, block], cov_deriv[block, block]
    )
    if math.isinf(report.delta_xi):
        raise PrecisionError(f"mode {mode} carries no information about xi")
    logger.debug(
        f"Steady precision on mode {mode}: delta_xi={report.delta_xi}, "
        f"angle={report.angle}"
    )
    return report


def transient_precision(
    sys: LinearSystem,
    times: Sequence[float],
    mode: int = 1,
    initial: MomentState | None = None,
) -> list[PrecisionReport]:
    """Precision on one mode at each of the nondecreasing `times`,
    starting from `initial` (vacuum by default) at t = 0."""
    if not 0 <= mode < sys.n_modes:
        raise InvalidSpecError(
            f"no mode {mode} in a {sys.n_modes}-mode model"
        )
    if initial is None:
        initial = MomentState.vacuum(sys.n_modes)
    qsys = to_quadrature(sys)
    signal = sensitivity_system(sys)
    zero = np.zeros(sys.n_modes, dtype=complex)
    block = mode_slice(mode)
    no_change = np.zeros((2, 2))
    reports: list[PrecisionReport] = []
    covariances = covariance_path(qsys, initial.covariance, times)
    for t, cov in zip(times, covariances):
        deriv = propagate_mean(signal, zero, t)[mode]
        reports.append(
            _single_mode_report(deriv, cov[block, block], no_change)
        )
    return reports


def collective_precision(sys: LinearSystem) -> CollectiveReport:
    """Precision of Q = sum_j q_j over the measurement modes b_j."""
    n_parallel = sys.n_modes - 1
    if n_parallel < 1:
        raise InvalidSpecError("collective precision needs measurement modes")
    deriv = steady_mean(sensitivity_system(sys))
    weights = np.zeros(2 * sys.n_modes)
    weights[2::2] = 1.0
    dmean = float(weights @ quadrature_vector(deriv))
    assumed_variance = 0.5 * n_parallel
    delta_xi = error_propagation(math.nan, assumed_variance, dmean)
    cov = steady_covariance(to_quadrature(sys))
    exact_variance = float(weights @ cov @ weights)
    report = PrecisionReport(
        qfi=1.0 / delta_xi**2, delta_xi=delta_xi, angle=math.pi / 2
    )
    return CollectiveReport(
        report=report,
        assumed_variance=assumed_variance,
        exact_variance=exact_variance,
        exact_delta_xi=error_propagation(math.nan, exact_variance, dmean),
    )


def with_ratio(
    nonreciprocal: PrecisionReport, reciprocal: PrecisionReport
) -> PrecisionReport:
    """The nonreciprocal report carrying eta = delta_xi_nr/delta_xi_r."""
    return PrecisionReport(
        qfi=nonreciprocal.qfi,
        delta_xi=nonreciprocal.delta_xi,
        angle=nonreciprocal.angle,
        eta=nonreciprocal.delta_xi / reciprocal.delta_xi,
        provenance=nonreciprocal.provenance,
    )


def closed_form_report(
    delta_xi: float, angle: float = math.pi / 2
) -> PrecisionReport:
    """A closed-form precision as a report.  The closed forms are
    homodyne precisions that saturate the QFI, so qfi = 1/delta_xi^2."""
    if not delta_xi > 0 or math.isnan(delta_xi):
        raise InvalidSpecError(f"delta_xi must be > 0, not {delta_xi}")
    return PrecisionReport(
        qfi=delta_xi**-2,
        delta_xi=delta_xi,
        angle=angle,
        provenance=Provenance.CLOSED_FORM,
    )


def sampled_report(
    mean_q: np.ndarray, cov: np.ndarray, xi: float
) -> PrecisionReport:
    """Homodyne precision from one mode's sampled (q, p) moments.

    From a vacuum start the mean is linear in xi, so the slope is
    <X>/xi; qfi is the homodyne information 1/delta_xi^2.
    """
    if xi == 0:
        raise PrecisionError("xi = 0 gives the sampled mean no slope")
    slope = np.asarray(mean_q, dtype=float).reshape(2) / xi
    angle = math.atan2(slope[0], slope[1])
    dmean, var = homodyne_moments(slope, cov, angle)
    delta_xi = error_propagation(math.nan, var, dmean)
    return PrecisionReport(
        qfi=delta_xi**-2,
        delta_xi=delta_xi,
        angle=angle,
        provenance=Provenance.MONTE_CARLO,
    )
